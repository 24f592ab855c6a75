use super::bmo::BmoMode;
use super::record::DiagnosticsRecord;
use crate::model::ModelParams;

/// Integrand values at one sample time, without the constant 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonitorSample {
    pub time: f64,
    /// `||u||_BMO^8 + ||v||_BMO^8 + ||theta||_BMO^2 + ||u||_{alpha+1}^{alpha+1} + ||v||_{beta+1}^{beta+1}`.
    pub pi_integrand: f64,
    /// `||u||_BMO^2 + ||v||_BMO^6 + ||theta||_BMO^2`.
    pub tilde_integrand: f64,
}

/// Running blow-up integrals
///
/// ```text
/// Pi(T)  = int C_pi (1 + ||u||_BMO^8 + ||v||_BMO^8 + ||theta||_BMO^2
///                    + ||u||_{alpha+1}^{alpha+1} + ||v||_{beta+1}^{beta+1}) dt
/// Pi~(T) = int (1 + ||u||_BMO^2 + ||v||_BMO^6 + ||theta||_BMO^2) dt
/// ```
///
/// accumulated from the first observed sample. The constant part is
/// integrated exactly, the rest by the trapezoid rule over sample times.
#[derive(Clone, Debug, PartialEq)]
pub struct BlowupMonitor {
    pub c_pi: f64,
    pub bmo_mode: BmoMode,
    pub start_time: Option<f64>,
    pub last: Option<MonitorSample>,
    /// Trapezoid sums of the two integrands.
    pub pi_integral: f64,
    pub tilde_integral: f64,
}

impl Default for BlowupMonitor {
    fn default() -> Self {
        BlowupMonitor::new(1.0, BmoMode::Proxy)
    }
}

impl BlowupMonitor {
    pub fn new(c_pi: f64, bmo_mode: BmoMode) -> Self {
        BlowupMonitor {
            c_pi,
            bmo_mode,
            start_time: None,
            last: None,
            pi_integral: 0.0,
            tilde_integral: 0.0,
        }
    }

    fn elapsed(&self) -> f64 {
        match (self.start_time, self.last) {
            (Some(t0), Some(s)) => s.time - t0,
            _ => 0.0,
        }
    }

    /// `Pi` up to the last observed sample.
    pub fn pi(&self) -> f64 {
        self.c_pi * (self.elapsed() + self.pi_integral)
    }

    /// `Pi~` up to the last observed sample.
    pub fn pi_tilde(&self) -> f64 {
        self.elapsed() + self.tilde_integral
    }

    /// Adds the sample; the first one only fixes the start time. Samples at
    /// or before the last observed time are ignored.
    pub fn observe(&mut self, sample: MonitorSample) {
        match self.last {
            None => self.start_time = Some(sample.time),
            Some(prev) if sample.time <= prev.time => return,
            Some(prev) => {
                let h = sample.time - prev.time;
                self.pi_integral += 0.5 * h * (prev.pi_integrand + sample.pi_integrand);
                self.tilde_integral += 0.5 * h * (prev.tilde_integrand + sample.tilde_integrand);
            }
        }
        self.last = Some(sample);
    }

    /// Integrand sample of a record.
    pub fn sample_of(&self, record: &DiagnosticsRecord, params: &ModelParams) -> MonitorSample {
        let [bu, bv, bt] = record.bmo(self.bmo_mode);
        MonitorSample {
            time: record.time,
            pi_integrand: bu.powi(8)
                + bv.powi(8)
                + bt.powi(2)
                + record.lp_alpha_u.powf(params.alpha + 1.0)
                + record.lp_beta_v.powf(params.beta + 1.0),
            tilde_integrand: bu.powi(2) + bv.powi(6) + bt.powi(2),
        }
    }
}

/// Adds the trapezoid increment between two consecutive records.
pub fn update_blowup(
    monitor: &mut BlowupMonitor,
    prev: &DiagnosticsRecord,
    next: &DiagnosticsRecord,
    params: &ModelParams,
) {
    if monitor.last.is_none() {
        let s = monitor.sample_of(prev, params);
        monitor.observe(s);
    }
    let s = monitor.sample_of(next, params);
    monitor.observe(s);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(time: f64, g: f64) -> MonitorSample {
        MonitorSample {
            time,
            pi_integrand: g,
            tilde_integrand: g,
        }
    }

    #[test]
    fn zero_integrand_gives_elapsed_time() {
        let mut m = BlowupMonitor::new(2.0, BmoMode::Proxy);
        for s in 0..=40 {
            m.observe(sample(s as f64 * 0.05, 0.0));
        }
        assert_eq!(m.pi(), 2.0 * 2.0);
        assert_eq!(m.pi_tilde(), 2.0);
    }

    #[test]
    fn constant_integrand_is_exact() {
        let mut m = BlowupMonitor::default();
        for s in 0..=8 {
            m.observe(sample(s as f64 * 0.25, 3.0));
        }
        assert!((m.pi() - 2.0 * 4.0).abs() < 1e-15);
        assert!((m.pi_tilde() - 8.0).abs() < 1e-15);
    }

    #[test]
    fn stale_samples_are_ignored() {
        let mut m = BlowupMonitor::default();
        m.observe(sample(0.0, 1.0));
        m.observe(sample(1.0, 1.0));
        let before = m.clone();
        m.observe(sample(0.5, 100.0));
        assert_eq!(m, before);
    }
}
