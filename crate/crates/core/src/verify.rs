//! Self-checks of the solver against exact identities and closed-form
//! solutions.

use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::diagnostics::{coupling_cancellation_residual, damping_identity_residual};
use crate::error::Result;
use crate::experiments::{make_initial_data, InitialDataSpec};
use crate::inequality::{random_band_limited_field, random_band_limited_vector, sample_seeds};
use crate::model::{run, ModelParams, RunOptions, SimState, Stepper, Stepping, Terms};
use crate::par;
use crate::spectral::{Grid, ScalarField, VectorField};

/// Outcome of one check: `value` is compared against `tolerance`.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn at_most(name: &str, value: f64, tolerance: f64, detail: String) -> Self {
        Check {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
            detail,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<24} {:>12.3e} {:>12.3e}  {:<4}  {}",
            self.name,
            self.value,
            self.tolerance,
            if self.passed { "PASS" } else { "FAIL" },
            self.detail
        )
    }
}

/// Per-mode comparison of a linear run with the exact solution.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeError {
    pub k: [i64; 3],
    /// Relative error of `(v, theta)` at mode `k`.
    pub vt: f64,
    /// Relative error of `u` at mode `k`.
    pub u: f64,
}

/// Default modes of [`linear_oracle`].
pub const ORACLE_MODES: [[i64; 3]; 4] = [[1, 0, 0], [1, 2, 0], [0, 1, 3], [2, -1, 1]];

fn physical_k(grid: &Grid, k: [i64; 3]) -> [f64; 3] {
    let c = 2.0 * std::f64::consts::PI / grid.box_length();
    k.map(|x| c * x as f64)
}

/// Exact propagator of `(v, theta)` at wavevector `k` for
///
/// ```text
/// v_t = -eta |k|^2 v - i k theta,   theta_t = -mu |k|^2 theta - i k . v
/// ```
pub fn coupling_propagator(k: [f64; 3], eta: f64, mu: f64, t: f64) -> Matrix4<Complex64> {
    let k2 = k.iter().map(|x| x * x).sum::<f64>();
    let i = Complex64::new(0.0, 1.0);
    let mut a = Matrix4::<Complex64>::zeros();
    for r in 0..3 {
        a[(r, r)] = Complex64::from(-eta * k2);
        a[(r, 3)] = -i * k[r];
        a[(3, r)] = -i * k[r];
    }
    a[(3, 3)] = Complex64::from(-mu * k2);
    (a * Complex64::from(t)).exp()
}

fn set_mode(f: &mut ScalarField, idx: usize, conj: usize, z: Complex64) {
    f.coeffs_mut()[idx] = z;
    f.coeffs_mut()[conj] = z.conj();
}

/// Runs the linear system (transport and damping off) from data supported on
/// `modes` and compares every mode with the exact solution.
pub fn linear_oracle(
    n: usize,
    box_length: f64,
    params: &ModelParams,
    modes: &[[i64; 3]],
    horizon: f64,
    dt: f64,
) -> Result<Vec<ModeError>> {
    let grid = Grid::new(n, box_length)?;
    let params = params.without_damping().with_terms(Terms {
        advection: false,
        coupling: true,
    });
    let mut state = SimState::zeros(&grid);
    let mut initial = Vec::new();
    for (m, &k) in modes.iter().enumerate() {
        let idx = grid.mode_index(k);
        let conj = grid.conjugate_index(idx);
        let kp = physical_k(&grid, k);
        let s = 1.0 + m as f64;
        let v = [
            Complex64::new(0.3 * s, -0.1),
            Complex64::new(-0.2, 0.25 * s),
            Complex64::new(0.15, 0.05 * s),
        ];
        let theta = Complex64::new(0.4, -0.3 * s);
        // Any vector orthogonal to k.
        let a = if kp[0].abs() > 0.0 || kp[1].abs() > 0.0 {
            [-kp[1], kp[0], 0.0]
        } else {
            [1.0, 0.0, 0.0]
        };
        let u = a.map(|x| Complex64::new(0.2 * x, -0.1 * x * s));
        for c in 0..3 {
            set_mode(&mut state.v.comps_mut()[c], idx, conj, v[c]);
            set_mode(&mut state.u.comps_mut()[c], idx, conj, u[c]);
        }
        set_mode(&mut state.theta, idx, conj, theta);
        initial.push((idx, kp, u, v, theta));
    }

    let mut stepper = Stepper::new(&state, &params)?;
    let steps = (horizon / dt - 1e-9).ceil().max(1.0) as usize;
    let h = horizon / steps as f64;
    for _ in 0..steps {
        stepper.step(h)?;
    }
    let end = stepper.state();

    let rel = |num: &[Complex64], exact: &[Complex64]| {
        let d: f64 = num.iter().zip(exact).map(|(a, b)| (a - b).norm_sqr()).sum();
        let s: f64 = exact.iter().map(|b| b.norm_sqr()).sum();
        (d / s).sqrt()
    };
    Ok(modes
        .iter()
        .zip(initial)
        .map(|(&k, (idx, kp, u0, v0, t0))| {
            let p = coupling_propagator(kp, params.eta, params.mu, horizon);
            let y0 = nalgebra::Vector4::new(v0[0], v0[1], v0[2], t0);
            let y = p * y0;
            let got = [
                end.v[0].coeffs()[idx],
                end.v[1].coeffs()[idx],
                end.v[2].coeffs()[idx],
                end.theta.coeffs()[idx],
            ];
            let decay = (-params.nu * kp.iter().map(|x| x * x).sum::<f64>() * horizon).exp();
            let u_exact = u0.map(|z| z * decay);
            let u_got = [0, 1, 2].map(|c| end.u[c].coeffs()[idx]);
            ModeError {
                k,
                vt: rel(&got, y.as_slice()),
                u: rel(&u_got, &u_exact),
            }
        })
        .collect())
}

/// Settings of [`verify_suite`].
#[derive(Clone, Debug, PartialEq)]
pub struct VerifySettings {
    pub seed: u64,
    /// Grid of the damping identity check.
    pub identity_n: usize,
    pub alphas: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub cancellation_pairs: usize,
    pub cancellation_orders: Vec<f64>,
    pub oracle_horizon: f64,
    pub oracle_dt: f64,
    /// Horizon of the two energy-balance runs.
    pub energy_horizon: f64,
    pub energy_dt: f64,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            seed: 0,
            identity_n: 64,
            alphas: vec![2.5, 3.0, 3.5],
            sigmas: vec![0.5, 1.0],
            cancellation_pairs: 50,
            cancellation_orders: vec![0.5, 1.5],
            oracle_horizon: 0.5,
            oracle_dt: 1e-3,
            energy_horizon: 0.25,
            energy_dt: 1e-3,
        }
    }
}

/// Largest damping identity residual over the given exponents and
/// coefficients on random band-limited divergence-free fields.
pub fn damping_identity_check(s: &VerifySettings, box_length: f64) -> Result<Check> {
    let grid = Grid::new(s.identity_n, box_length)?;
    let band = (s.identity_n / 3).min(8);
    let u = random_band_limited_vector(&grid, s.seed, band, -2.0)?;
    let mut worst: f64 = 0.0;
    for &a in &s.alphas {
        for &sigma in &s.sigmas {
            worst = worst.max(damping_identity_residual(&u, a, sigma));
        }
    }
    Ok(Check::at_most(
        "damping_identity",
        worst,
        1e-6,
        format!(
            "n = {}, alpha in {:?}, sigma1 in {:?}",
            s.identity_n, s.alphas, s.sigmas
        ),
    ))
}

/// Largest coupling cancellation residual over random `(v, theta)` pairs.
pub fn coupling_cancellation_check(s: &VerifySettings, grid: &Arc<Grid>) -> Result<Check> {
    let band = (grid.n() / 3).min(6);
    let seeds = sample_seeds(s.seed, 4 * s.cancellation_pairs);
    let jobs: Vec<usize> = (0..s.cancellation_pairs).collect();
    let worst = par::map_jobs(jobs, |i| -> Result<f64> {
        let f = |j: usize| random_band_limited_field(grid, seeds[4 * i + j], band, -1.0);
        let v = VectorField::new([f(0)?, f(1)?, f(2)?])?;
        let theta = f(3)?;
        Ok(s.cancellation_orders
            .iter()
            .map(|&o| coupling_cancellation_residual(&v, &theta, o))
            .fold(0.0, f64::max))
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?
    .into_iter()
    .fold(0.0, f64::max);
    Ok(Check::at_most(
        "coupling_cancellation",
        worst,
        1e-12,
        format!(
            "{} pairs, s in {:?}",
            s.cancellation_pairs, s.cancellation_orders
        ),
    ))
}

/// Worst relative error of [`linear_oracle`] over [`ORACLE_MODES`].
pub fn linear_oracle_check(
    s: &VerifySettings,
    n: usize,
    box_length: f64,
    params: &ModelParams,
) -> Result<Check> {
    let errs = linear_oracle(
        n,
        box_length,
        params,
        &ORACLE_MODES,
        s.oracle_horizon,
        s.oracle_dt,
    )?;
    let worst = errs.iter().map(|e| e.vt.max(e.u)).fold(0.0, f64::max);
    Ok(Check::at_most(
        "linear_oracle",
        worst,
        1e-8,
        format!(
            "{} modes, T = {}, dt = {}",
            errs.len(),
            s.oracle_horizon,
            s.oracle_dt
        ),
    ))
}

/// Cumulative energy residual at the horizon for one time step.
pub fn energy_residual(
    data: &SimState,
    params: &ModelParams,
    horizon: f64,
    dt: f64,
) -> Result<(f64, f64)> {
    let opts = RunOptions {
        horizon: data.time + horizon,
        sample_every: horizon,
        stepping: Stepping::Fixed { dt },
        track_energy: true,
        ..RunOptions::default()
    };
    let out = run(data, params, &opts)?;
    if let Some(e) = out.abort {
        return Err(e);
    }
    let ledger = out.progress.ledger.expect("energy tracking enabled");
    Ok((ledger.relative(), ledger.absolute()))
}

/// Energy residual at `dt` and `dt / 2`: the relative residual must drop by
/// at least 8 and the absolute one stay below `1e-4`.
pub fn energy_balance_check(
    s: &VerifySettings,
    grid: &Arc<Grid>,
    params: &ModelParams,
    data: &InitialDataSpec,
) -> Result<Check> {
    let state = make_initial_data(grid, data)?.state;
    let (r1, a1) = energy_residual(&state, params, s.energy_horizon, s.energy_dt)?;
    let (r2, _) = energy_residual(&state, params, s.energy_horizon, 0.5 * s.energy_dt)?;
    let factor = r1.abs() / r2.abs();
    let passed = factor >= 8.0 && a1.abs() <= 1e-4;
    Ok(Check {
        name: "energy_balance".into(),
        value: r1.abs(),
        tolerance: 1e-4,
        passed,
        detail: format!(
            "relative {:.3e} -> {:.3e} (factor {:.2}), absolute {:.3e}, T = {}",
            r1.abs(),
            r2.abs(),
            factor,
            a1.abs(),
            s.energy_horizon
        ),
    })
}

/// The full suite on the grid, parameters and data of a configuration.
pub fn verify_suite(
    s: &VerifySettings,
    n: usize,
    box_length: f64,
    params: &ModelParams,
    data: &InitialDataSpec,
) -> Result<Vec<Check>> {
    let grid = Grid::new(n, box_length)?;
    Ok(vec![
        energy_balance_check(s, &grid, params, data)?,
        damping_identity_check(s, box_length)?,
        coupling_cancellation_check(s, &grid)?,
        linear_oracle_check(s, n, box_length, params)?,
    ])
}
