use std::ops::ControlFlow;

use super::integrator::{cfl_from_speed, Stepper};
use super::params::ModelParams;
use super::state::SimState;
use crate::diagnostics::{
    record, BlowupMonitor, DiagnosticsConfig, DiagnosticsRecord, EnergyLedger,
};
use crate::error::{Error, Result};

/// Time-step selection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Stepping {
    /// Each sample interval is split into the fewest equal steps not
    /// exceeding `dt`.
    Fixed { dt: f64 },
    /// `dt = min(CFL limit, dt_max, time to next sample)`, re-evaluated
    /// every step.
    Adaptive { safety: f64, dt_max: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    /// Absolute end time.
    pub horizon: f64,
    /// Diagnostics are recorded at the multiples of `sample_every` and at
    /// the horizon.
    pub sample_every: f64,
    pub stepping: Stepping,
    /// Keep the cumulative energy-balance ledger (one extra set of transforms
    /// per step).
    pub track_energy: bool,
    pub diagnostics: DiagnosticsConfig,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            horizon: 2.0,
            sample_every: 0.05,
            stepping: Stepping::Fixed { dt: 1e-3 },
            track_energy: true,
            diagnostics: DiagnosticsConfig::default(),
        }
    }
}

impl RunOptions {
    pub fn validate(&self) -> Result<()> {
        if !self.horizon.is_finite() {
            return Err(Error::param("horizon", "must be finite"));
        }
        if !(self.sample_every.is_finite() && self.sample_every > 0.0) {
            return Err(Error::param("sample_every", "must be finite and > 0"));
        }
        match self.stepping {
            Stepping::Fixed { dt } if !(dt.is_finite() && dt > 0.0) => {
                Err(Error::param("dt", "must be finite and > 0"))
            }
            Stepping::Adaptive { safety, .. } if !(safety > 0.0 && safety <= 1.0) => {
                Err(Error::param("safety", "must lie in (0, 1]"))
            }
            Stepping::Adaptive { dt_max, .. } if !(dt_max.is_finite() && dt_max > 0.0) => {
                Err(Error::param("dt_max", "must be finite and > 0"))
            }
            _ => Ok(()),
        }
    }
}

/// Accumulators that continue across a restart.
#[derive(Clone, Debug, PartialEq)]
pub struct RunProgress {
    pub monitor: BlowupMonitor,
    pub ledger: Option<EnergyLedger>,
}

impl RunProgress {
    pub fn fresh(opts: &RunOptions) -> Self {
        RunProgress {
            monitor: opts.diagnostics.monitor(),
            ledger: opts.track_energy.then(EnergyLedger::default),
        }
    }
}

#[derive(Debug)]
pub struct RunOutput {
    /// Last successfully reached state.
    pub state: SimState,
    pub series: Vec<DiagnosticsRecord>,
    pub progress: RunProgress,
    /// Why the run stopped before the horizon, if it did.
    pub abort: Option<Error>,
    pub steps: usize,
}

/// Runs from `initial` to `opts.horizon` without observers.
pub fn run(initial: &SimState, params: &ModelParams, opts: &RunOptions) -> Result<RunOutput> {
    run_with(initial, params, opts, None, |_| ControlFlow::Continue(()))
}

/// Runs from `initial` to `opts.horizon`.
///
/// A fresh run records the initial state; a resumed run (`resume` given)
/// continues the accumulators and starts recording at the next sample time.
/// `on_sample` sees every record and may stop the run. Step failures end the
/// run early with the partial series and the reason in [`RunOutput::abort`].
pub fn run_with<F>(
    initial: &SimState,
    params: &ModelParams,
    opts: &RunOptions,
    resume: Option<RunProgress>,
    mut on_sample: F,
) -> Result<RunOutput>
where
    F: FnMut(&DiagnosticsRecord) -> ControlFlow<()>,
{
    opts.validate()?;
    let t0 = initial.time;
    if opts.horizon < t0 {
        return Err(Error::param(
            "horizon",
            format!("{} is before the start time {t0}", opts.horizon),
        ));
    }
    let record_initial = resume.is_none();
    let mut progress = resume.unwrap_or_else(|| RunProgress::fresh(opts));
    let mut stepper = Stepper::new(initial, params)?;
    let mut out = RunOutput {
        state: initial.clone(),
        series: Vec::new(),
        progress: progress.clone(),
        abort: None,
        steps: 0,
    };
    if opts.horizon == t0 {
        return Ok(out);
    }

    let mut driver = Driver {
        stepper: &mut stepper,
        params,
        opts,
        progress: &mut progress,
        cfl_warned: false,
        steps: 0,
    };
    let result = driver.drive(t0, record_initial, &mut out.series, &mut on_sample);
    out.steps = driver.steps;
    out.abort = result.err();
    out.state = stepper.state();
    out.progress = progress;
    Ok(out)
}

struct Driver<'a> {
    stepper: &'a mut Stepper,
    params: &'a ModelParams,
    opts: &'a RunOptions,
    progress: &'a mut RunProgress,
    cfl_warned: bool,
    steps: usize,
}

impl Driver<'_> {
    fn drive<F>(
        &mut self,
        t0: f64,
        record_initial: bool,
        series: &mut Vec<DiagnosticsRecord>,
        on_sample: &mut F,
    ) -> Result<()>
    where
        F: FnMut(&DiagnosticsRecord) -> ControlFlow<()>,
    {
        let every = self.opts.sample_every;
        let horizon = self.opts.horizon;
        let eps = 1e-12 * horizon.abs().max(1.0);
        if record_initial {
            self.sample(series, on_sample)?;
        }
        let mut s = (t0 / every).floor() as i64 + 1;
        while (s as f64) * every <= t0 + eps {
            s += 1;
        }
        let mut t_a = t0;
        loop {
            let mut t_b = s as f64 * every;
            if t_b > horizon - eps {
                t_b = horizon;
            }
            self.advance(t_a, t_b)?;
            self.sample(series, on_sample)?;
            if t_b == horizon {
                return Ok(());
            }
            t_a = t_b;
            s += 1;
        }
    }

    fn observe_energy(&mut self) -> Result<f64> {
        match self.progress.ledger.as_mut() {
            Some(ledger) => {
                let rates = self.stepper.energy_rates()?;
                ledger.observe(self.stepper.time(), rates);
                Ok(ledger.relative())
            }
            None => Ok(0.0),
        }
    }

    fn sample<F>(&mut self, series: &mut Vec<DiagnosticsRecord>, on_sample: &mut F) -> Result<()>
    where
        F: FnMut(&DiagnosticsRecord) -> ControlFlow<()>,
    {
        let residual = self.observe_energy()?;
        let state = self.stepper.state();
        let mut rec = record(
            &state,
            self.params,
            &mut self.progress.monitor,
            &self.opts.diagnostics,
        );
        rec.energy_residual = residual;
        let flow = on_sample(&rec);
        series.push(rec);
        match flow {
            ControlFlow::Continue(()) => Ok(()),
            ControlFlow::Break(()) => Err(Error::Aborted(format!(
                "stopped by observer at t = {}",
                state.time
            ))),
        }
    }

    fn step(&mut self, dt: f64) -> Result<()> {
        self.observe_energy()?;
        self.stepper.step(dt)?;
        self.steps += 1;
        Ok(())
    }

    /// Steps from `t_a` to exactly `t_b`.
    fn advance(&mut self, t_a: f64, t_b: f64) -> Result<()> {
        let spacing = self.stepper.grid().spacing();
        match self.opts.stepping {
            Stepping::Fixed { dt } => {
                let m = ((t_b - t_a) / dt - 1e-9).ceil().max(1.0) as usize;
                let h = (t_b - t_a) / m as f64;
                if !self.cfl_warned {
                    let limit =
                        cfl_from_speed(self.stepper.max_speed()?, spacing, 1.0, f64::INFINITY);
                    if h > limit {
                        log::warn!("dt = {h} exceeds the advective limit {limit} at t = {t_a}");
                        self.cfl_warned = true;
                    }
                }
                for j in 1..=m {
                    self.step(h)?;
                    self.stepper.set_time(t_a + j as f64 * h);
                }
            }
            Stepping::Adaptive { safety, dt_max } => {
                let eps = 1e-12 * t_b.abs().max(1.0);
                while self.stepper.time() < t_b - eps {
                    let speed = self.stepper.max_speed()?;
                    let remaining = t_b - self.stepper.time();
                    let mut dt = cfl_from_speed(speed, spacing, safety, dt_max).min(dt_max);
                    if dt >= remaining - eps {
                        dt = remaining;
                    }
                    self.step(dt)?;
                }
            }
        }
        self.stepper.set_time(t_b);
        Ok(())
    }
}
