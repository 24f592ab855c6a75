use super::blowup::BlowupMonitor;
use super::bmo::{bmo_from_parts, BmoEstimate, BmoMode};
use super::identities::damping_identity_residual;
use super::smallness::{smallness_functionals, Smallness, SmallnessConstants};
use crate::model::{ModelParams, SimState};
use crate::spectral::norms;

/// Settings of [`record`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsConfig {
    pub bmo_mode: BmoMode,
    pub c_pi: f64,
    pub smallness: SmallnessConstants,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            bmo_mode: BmoMode::Proxy,
            c_pi: 1.0,
            smallness: SmallnessConstants::default(),
        }
    }
}

impl DiagnosticsConfig {
    pub fn monitor(&self) -> BlowupMonitor {
        BlowupMonitor::new(self.c_pi, self.bmo_mode)
    }
}

/// One norm for each unknown plus the root-sum-of-squares triple norm.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NormSet {
    pub u: f64,
    pub v: f64,
    pub theta: f64,
    pub triple: f64,
}

impl NormSet {
    fn new(u: f64, v: f64, theta: f64) -> Self {
        NormSet {
            u,
            v,
            theta,
            triple: (u * u + v * v + theta * theta).sqrt(),
        }
    }

    fn of(state: &SimState, s: f64) -> Self {
        NormSet::new(
            norms::sobolev_norm_vec(&state.u, s, true),
            norms::sobolev_norm_vec(&state.v, s, true),
            norms::sobolev_norm(&state.theta, s, true),
        )
    }
}

/// Diagnostics of one state.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub l2: NormSet,
    pub h_half: NormSet,
    pub h1: NormSet,
    pub h32: NormSet,
    /// `||Lap .||`, the homogeneous `H^2` norms.
    pub h2: NormSet,
    /// `||u||_{L^(alpha+1)}`.
    pub lp_alpha_u: f64,
    /// `||v||_{L^(beta+1)}`.
    pub lp_beta_v: f64,
    pub bmo_u: BmoEstimate,
    pub bmo_v: BmoEstimate,
    pub bmo_theta: BmoEstimate,
    pub pi: f64,
    pub pi_tilde: f64,
    /// Cumulative relative energy-balance residual (0 when not tracked).
    pub energy_residual: f64,
    pub damping_res_u: f64,
    pub damping_res_v: f64,
    /// `||div u|| / max(1, ||u||)`.
    pub div_u: f64,
    pub smallness: Option<Smallness>,
}

impl DiagnosticsRecord {
    /// All-zero record at `time`.
    pub fn zero(time: f64) -> Self {
        DiagnosticsRecord {
            time,
            l2: NormSet::default(),
            h_half: NormSet::default(),
            h1: NormSet::default(),
            h32: NormSet::default(),
            h2: NormSet::default(),
            lp_alpha_u: 0.0,
            lp_beta_v: 0.0,
            bmo_u: BmoEstimate::default(),
            bmo_v: BmoEstimate::default(),
            bmo_theta: BmoEstimate::default(),
            pi: 0.0,
            pi_tilde: 0.0,
            energy_residual: 0.0,
            damping_res_u: 0.0,
            damping_res_v: 0.0,
            div_u: 0.0,
            smallness: None,
        }
    }

    /// BMO estimates of `(u, v, theta)` in the given mode.
    pub fn bmo(&self, mode: BmoMode) -> [f64; 3] {
        [self.bmo_u, self.bmo_v, self.bmo_theta].map(|b| b.get(mode))
    }
}

/// Diagnostics of `state`; the blow-up integrals are advanced to
/// `state.time` through `monitor`.
pub fn record(
    state: &SimState,
    params: &ModelParams,
    monitor: &mut BlowupMonitor,
    cfg: &DiagnosticsConfig,
) -> DiagnosticsRecord {
    let grid = state.grid();
    let n = grid.n();
    let [u1, u2, u3] = state.u.comps();
    let [v1, v2, v3] = state.v.comps();
    let fields = [u1, u2, u3, v1, v2, v3, &state.theta];
    let mut phys = vec![Vec::new(); 7];
    grid.inverse_fields(7, false, |f, k| fields[f].coeffs()[k], &mut phys);

    let dv = grid.cell_volume();
    let magnitude_norm = |o: usize, p: f64| {
        let mag: Vec<f64> = (0..grid.len())
            .map(|i| (phys[o][i].powi(2) + phys[o + 1][i].powi(2) + phys[o + 2][i].powi(2)).sqrt())
            .collect();
        norms::lp_norm_physical(&mag, dv, p)
    };

    let h32 = NormSet::of(state, 1.5);
    let mut rec = DiagnosticsRecord {
        time: state.time,
        l2: NormSet::of(state, 0.0),
        h_half: NormSet::of(state, 0.5),
        h1: NormSet::of(state, 1.0),
        h32,
        h2: NormSet::of(state, 2.0),
        lp_alpha_u: magnitude_norm(0, params.alpha + 1.0),
        lp_beta_v: magnitude_norm(3, params.beta + 1.0),
        bmo_u: bmo_from_parts(h32.u, &[&phys[0], &phys[1], &phys[2]], n),
        bmo_v: bmo_from_parts(h32.v, &[&phys[3], &phys[4], &phys[5]], n),
        bmo_theta: bmo_from_parts(h32.theta, &[&phys[6]], n),
        pi: 0.0,
        pi_tilde: 0.0,
        energy_residual: 0.0,
        damping_res_u: damping_identity_residual(&state.u, params.alpha, params.sigma1),
        damping_res_v: damping_identity_residual(&state.v, params.beta, params.sigma2),
        div_u: state.div_u_relative(),
        smallness: smallness_functionals(state, params, &cfg.smallness),
    };
    let sample = monitor.sample_of(&rec, params);
    monitor.observe(sample);
    rec.pi = monitor.pi();
    rec.pi_tilde = monitor.pi_tilde();
    rec
}
