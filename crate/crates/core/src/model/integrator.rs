use std::sync::Arc;

use num_complex::Complex64;

use super::params::ModelParams;
use super::rhs::{evaluate, masked_comps, EnergyRates, StageInfo, Workspace};
use super::state::{zero_comps, Comps, SimState, FIELDS};
use crate::error::{Error, Result};
use crate::par;
use crate::spectral::Grid;

/// Integrating-factor RK4 stepper that owns its stage buffers.
///
/// Diffusion is integrated exactly through `exp(-c |k|^2 t)` with
/// `c = nu, eta, mu` for `u, v, theta`; the explicit tendency is advanced
/// with the classical RK4 tableau in integrating-factor variables.
pub struct Stepper {
    grid: Arc<Grid>,
    params: ModelParams,
    time: f64,
    y: Comps,
    acc: Comps,
    tmp: Comps,
    k: Comps,
    /// Tendency of `y`, kept between calls when already evaluated.
    k1: Comps,
    k1_info: Option<StageInfo>,
    ws: Workspace,
    factors: Option<Factors>,
}

/// `exp(-c |k|^2 h)` and `exp(-c |k|^2 h / 2)` for the three viscosities.
struct Factors {
    h: f64,
    full: [Vec<f64>; 3],
    half: [Vec<f64>; 3],
}

impl Factors {
    fn new(grid: &Grid, params: &ModelParams, h: f64) -> Self {
        let visc = [params.nu, params.eta, params.mu];
        let make =
            |t: f64| visc.map(|c| grid.kmag2().iter().map(|k2| (-c * k2 * t).exp()).collect());
        Factors {
            h,
            full: make(h),
            half: make(0.5 * h),
        }
    }
}

/// Viscosity class of storage component `f`.
#[inline]
fn class(f: usize) -> usize {
    match f {
        0..=2 => 0,
        3..=5 => 1,
        _ => 2,
    }
}

impl Stepper {
    /// Starts from `state`; coefficients outside the dealias mask are dropped.
    pub fn new(state: &SimState, params: &ModelParams) -> Result<Self> {
        params.validate()?;
        if !state.is_finite() {
            return Err(Error::NonFinite("initial state".into()));
        }
        let grid = state.grid().clone();
        let len = grid.len();
        Ok(Stepper {
            params: *params,
            time: state.time,
            y: masked_comps(state),
            acc: zero_comps(len),
            tmp: zero_comps(len),
            k: zero_comps(len),
            k1: zero_comps(len),
            k1_info: None,
            ws: Workspace::default(),
            factors: None,
            grid,
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Copy of the current state.
    pub fn state(&self) -> SimState {
        SimState::from_comps(&self.grid, &self.y, self.time)
    }

    /// Energy rates of the current state. The evaluation is reused by the
    /// next step.
    pub fn energy_rates(&mut self) -> Result<EnergyRates> {
        let info = self.first_stage(true)?;
        Ok(info.energy.expect("requested"))
    }

    /// Largest pointwise velocity component of the current state.
    pub fn max_speed(&mut self) -> Result<f64> {
        if let Some(s) = self.k1_info.and_then(|i| i.max_speed) {
            return Ok(s);
        }
        let st = self.state();
        Ok(max_speed(&st))
    }

    fn first_stage(&mut self, energy: bool) -> Result<StageInfo> {
        if let Some(info) = self.k1_info {
            if !energy || info.energy.is_some() {
                return Ok(info);
            }
        }
        let info = evaluate(
            &self.grid,
            &self.params,
            &self.y,
            &mut self.k1,
            &mut self.ws,
            energy,
        )?;
        self.k1_info = Some(info);
        Ok(info)
    }

    /// Advances by `dt`. On error the stepper keeps its previous state.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::param(
                "dt",
                format!("must be finite and > 0, got {dt}"),
            ));
        }
        if self.factors.as_ref().is_none_or(|f| f.h != dt) {
            self.factors = Some(Factors::new(&self.grid, &self.params, dt));
        }
        self.first_stage(false)?;
        let h = dt;
        let fac = self.factors.as_ref().expect("set above");
        let len = self.grid.len();

        // acc = E y + h/6 E k1 ; tmp = E/2 (y + h/2 k1)
        for f in 0..FIELDS {
            let (e, e2) = (&fac.full[class(f)], &fac.half[class(f)]);
            let (y, k1) = (&self.y[f], &self.k1[f]);
            let (acc, tmp) = (&mut self.acc[f], &mut self.tmp[f]);
            for i in 0..len {
                acc[i] = e[i] * (y[i] + h / 6.0 * k1[i]);
                tmp[i] = e2[i] * (y[i] + 0.5 * h * k1[i]);
            }
        }
        evaluate(
            &self.grid,
            &self.params,
            &self.tmp,
            &mut self.k,
            &mut self.ws,
            false,
        )?;
        // acc += h/3 E/2 k2 ; tmp = E/2 y + h/2 k2
        self.combine(|_, e2, y, k, acc, tmp| {
            *acc += h / 3.0 * e2 * k;
            *tmp = e2 * y + 0.5 * h * k;
        });
        evaluate(
            &self.grid,
            &self.params,
            &self.tmp,
            &mut self.k,
            &mut self.ws,
            false,
        )?;
        // acc += h/3 E/2 k3 ; tmp = E y + h E/2 k3
        self.combine(|e, e2, y, k, acc, tmp| {
            *acc += h / 3.0 * e2 * k;
            *tmp = e * y + h * e2 * k;
        });
        evaluate(
            &self.grid,
            &self.params,
            &self.tmp,
            &mut self.k,
            &mut self.ws,
            false,
        )?;
        // acc += h/6 k4
        self.combine(|_, _, _, k, acc, _| {
            *acc += h / 6.0 * k;
        });

        project_u(&self.grid, &mut self.acc);
        if !comps_finite(&self.acc) {
            return Err(Error::NonFinite(format!(
                "state after step at t = {}",
                self.time
            )));
        }
        std::mem::swap(&mut self.y, &mut self.acc);
        self.time += dt;
        self.k1_info = None;
        Ok(())
    }

    /// Applies `op(E, E/2, y, k, acc, tmp)` to every coefficient.
    fn combine<F>(&mut self, op: F)
    where
        F: Fn(f64, f64, Complex64, Complex64, &mut Complex64, &mut Complex64),
    {
        let fac = self.factors.as_ref().expect("set by step");
        for f in 0..FIELDS {
            let (e, e2) = (&fac.full[class(f)], &fac.half[class(f)]);
            let (y, k) = (&self.y[f], &self.k[f]);
            let (acc, tmp) = (&mut self.acc[f], &mut self.tmp[f]);
            for i in 0..y.len() {
                op(e[i], e2[i], y[i], k[i], &mut acc[i], &mut tmp[i]);
            }
        }
    }

    /// Restarts from `state` at its time, keeping buffers and parameters.
    pub fn reset(&mut self, state: &SimState) -> Result<()> {
        if !state.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch);
        }
        self.y = masked_comps(state);
        self.time = state.time;
        self.k1_info = None;
        Ok(())
    }

    /// Overrides the clock, e.g. to pin it to a sample time after a sequence
    /// of steps.
    pub(crate) fn set_time(&mut self, time: f64) {
        self.time = time;
    }

    /// Step size of the last step, if any.
    pub fn last_dt(&self) -> Option<f64> {
        self.factors.as_ref().map(|f| f.h)
    }
}

fn project_u(grid: &Grid, y: &mut Comps) {
    let (u, _) = y.split_at_mut(3);
    let [a, b, c] = u else { unreachable!() };
    for k in 0..grid.len() {
        let kv = grid.deriv_wavevector(k);
        let k2 = kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2];
        if k2 == 0.0 {
            continue;
        }
        let p = (kv[0] * a[k] + kv[1] * b[k] + kv[2] * c[k]) / k2;
        a[k] -= kv[0] * p;
        b[k] -= kv[1] * p;
        c[k] -= kv[2] * p;
    }
}

fn comps_finite(y: &Comps) -> bool {
    y.iter().all(|f| {
        par::max_indexed(f.len(), |k| {
            if f[k].re.is_finite() && f[k].im.is_finite() {
                0.0
            } else {
                1.0
            }
        }) == 0.0
    })
}

/// One integrating-factor RK4 step of size `dt` from `state`.
pub fn step(state: &SimState, dt: f64, params: &ModelParams) -> Result<SimState> {
    let mut s = Stepper::new(state, params)?;
    s.step(dt)?;
    Ok(s.state())
}

/// Largest pointwise velocity component of `u` and `v`.
pub fn max_speed(state: &SimState) -> f64 {
    let grid = state.grid();
    let [u1, u2, u3] = state.u.comps();
    let [v1, v2, v3] = state.v.comps();
    let fields = [u1, u2, u3, v1, v2, v3];
    let mut phys = vec![Vec::new(); 6];
    grid.inverse_fields(6, false, |f, k| fields[f].coeffs()[k], &mut phys);
    phys.iter()
        .map(|p| par::max_indexed(p.len(), |i| p[i].abs()))
        .fold(0.0, f64::max)
}

/// Advective time-step limit `safety * spacing / max(|u_i|, |v_i|)`, or `cap`
/// for a motionless state.
pub fn cfl_dt(state: &SimState, safety: f64, cap: f64) -> f64 {
    cfl_from_speed(max_speed(state), state.grid().spacing(), safety, cap)
}

pub(crate) fn cfl_from_speed(speed: f64, spacing: f64, safety: f64, cap: f64) -> f64 {
    if speed > 0.0 {
        safety * spacing / speed
    } else {
        cap
    }
}
