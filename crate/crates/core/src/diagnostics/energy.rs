use crate::error::Result;
use crate::model::{energy_rates, EnergyRates, ModelParams, SimState};

/// `int_{t0}^{t1} D` from endpoint values and derivatives (trapezoid with
/// endpoint correction, fourth order).
pub fn dissipation_integral(h: f64, a: &EnergyRates, b: &EnergyRates) -> f64 {
    0.5 * h * (a.dissipation + b.dissipation)
        + h * h / 12.0 * (a.dissipation_rate - b.dissipation_rate)
}

/// Residual of the energy identity `d/dt E + 2 D = 0` between two states
/// `dt` apart: `[E(next) - E(prev) + 2 int D] / (2 int D)`, or the unscaled
/// numerator when nothing dissipates.
pub fn energy_balance_residual(
    prev: &SimState,
    next: &SimState,
    dt: f64,
    params: &ModelParams,
) -> Result<f64> {
    let a = energy_rates(prev, params)?;
    let b = energy_rates(next, params)?;
    let q = dissipation_integral(dt, &a, &b);
    Ok(scaled_residual(b.energy - a.energy + 2.0 * q, q))
}

fn scaled_residual(r: f64, q: f64) -> f64 {
    if q > 0.0 {
        r / (2.0 * q)
    } else {
        r
    }
}

/// Cumulative energy balance along a run.
///
/// Every step contributes its dissipation integral, so the residual
/// `E(t) - E(t0) + 2 int_{t0}^t D` measures the accumulated time
/// discretization error.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EnergyLedger {
    pub start_time: f64,
    pub start_energy: f64,
    /// `int_{t0}^{t} D` so far.
    pub dissipated: f64,
    /// Time and rates at the last observation.
    pub last: Option<(f64, EnergyRates)>,
}

impl EnergyLedger {
    pub fn observe(&mut self, time: f64, rates: EnergyRates) {
        match self.last {
            None => {
                self.start_time = time;
                self.start_energy = rates.energy;
            }
            Some((t, prev)) if time > t => {
                self.dissipated += dissipation_integral(time - t, &prev, &rates);
            }
            Some(_) => return,
        }
        self.last = Some((time, rates));
    }

    /// `E(t) - E(t0) + 2 int D` at the last observation.
    pub fn absolute(&self) -> f64 {
        match self.last {
            Some((_, r)) => r.energy - self.start_energy + 2.0 * self.dissipated,
            None => 0.0,
        }
    }

    /// [`EnergyLedger::absolute`] divided by `2 int D` (unscaled when zero).
    pub fn relative(&self) -> f64 {
        scaled_residual(self.absolute(), self.dissipated)
    }

    /// [`EnergyLedger::absolute`] per unit elapsed time.
    pub fn rate(&self) -> f64 {
        match self.last {
            Some((t, _)) if t > self.start_time => self.absolute() / (t - self.start_time),
            _ => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rates(e: f64, d: f64, dd: f64) -> EnergyRates {
        EnergyRates {
            energy: e,
            dissipation: d,
            dissipation_rate: dd,
        }
    }

    #[test]
    fn corrected_trapezoid_exact_for_cubics() {
        // D(t) = t^3 on [0, 1]: integral 1/4.
        let q = dissipation_integral(1.0, &rates(0.0, 0.0, 0.0), &rates(0.0, 1.0, 3.0));
        assert!((q - 0.25).abs() < 1e-15);
    }

    #[test]
    fn ledger_of_exact_exponential_decay() {
        // E = e^{-2t}, D = e^{-2t}, dD/dt = -2 e^{-2t}.
        let mut ledger = EnergyLedger::default();
        let at = |t: f64| rates((-2.0 * t).exp(), (-2.0 * t).exp(), -2.0 * (-2.0 * t).exp());
        let mut res = Vec::new();
        for steps in [10, 20] {
            ledger = EnergyLedger::default();
            for s in 0..=steps {
                let t = s as f64 / steps as f64;
                ledger.observe(t, at(t));
            }
            res.push(ledger.relative().abs());
        }
        assert!(res[0] < 1e-5);
        assert!(res[0] / res[1] > 14.0);
        assert!(ledger.rate().abs() < 1e-6);
    }
}
