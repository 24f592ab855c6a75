//! Initial data with prescribed size, the small-data protocol and amplitude
//! sweeps.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::diagnostics::{monotonicity_report, MonotonicityReport, MONOTONICITY_TOL};
use crate::error::{Error, Result};
use crate::inequality::{random_band_limited_field, random_band_limited_vector, sample_seeds};
use crate::model::{run, ModelParams, RunOptions, RunOutput, SimState};
use crate::par;
use crate::spectral::{
    leray_project, sobolev_norm, sobolev_norm_vec, Grid, ScalarField, VectorField,
};

/// Shape of the initial data before rescaling.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DataKind {
    /// `u = (sin x1 cos x2 cos x3, -cos x1 sin x2 cos x3, 0)`,
    /// `v = (sin x3, sin x1, sin x2)`, `theta = cos x1 cos x2 cos x3`.
    #[default]
    TaylorGreen,
    /// Random band-limited fields; `u` Leray-projected.
    RandomBand,
    /// `theta = cos x1`, `u = v = 0`.
    SingleMode,
}

impl DataKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DataKind::TaylorGreen => "taylor_green",
            DataKind::RandomBand => "random_band",
            DataKind::SingleMode => "single_mode",
        }
    }
}

impl fmt::Display for DataKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DataKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "taylor_green" => Ok(DataKind::TaylorGreen),
            "random_band" => Ok(DataKind::RandomBand),
            "single_mode" => Ok(DataKind::SingleMode),
            _ => Err(format!(
                "expected \"taylor_green\", \"random_band\" or \"single_mode\", got {s:?}"
            )),
        }
    }
}

/// How to build the initial data.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialDataSpec {
    pub kind: DataKind,
    /// Raw amplitude multiplying the shape; used when `target_h_half` is unset.
    pub amplitude: f64,
    /// Desired `||(u0, v0, theta0)||_{\dot H^{1/2}}`, reached by one common
    /// scale factor.
    pub target_h_half: Option<f64>,
    pub seed: u64,
    /// Band radius and spectral slope for [`DataKind::RandomBand`].
    pub band: usize,
    pub slope: f64,
}

impl Default for InitialDataSpec {
    fn default() -> Self {
        InitialDataSpec {
            kind: DataKind::TaylorGreen,
            amplitude: 1.0,
            target_h_half: Some(1e-2),
            seed: 0,
            band: 4,
            slope: -2.0,
        }
    }
}

/// Initial state together with its measured size.
#[derive(Clone, Debug)]
pub struct InitialData {
    pub spec: InitialDataSpec,
    pub state: SimState,
    /// Achieved `\dot H^{1/2}` triple norm.
    pub h_half: f64,
    /// `||u0||_{H^2} + ||v0||_{H^2} + ||theta0||_{H^2}`.
    pub h2_size: f64,
}

fn shape(grid: &Arc<Grid>, spec: &InitialDataSpec) -> Result<SimState> {
    let c = 2.0 * std::f64::consts::PI / grid.box_length();
    match spec.kind {
        DataKind::TaylorGreen => {
            let u = VectorField::from_fn(grid, |x| {
                let [a, b, d] = x.map(|t| c * t);
                [
                    a.sin() * b.cos() * d.cos(),
                    -a.cos() * b.sin() * d.cos(),
                    0.0,
                ]
            });
            let v = VectorField::from_fn(grid, |x| {
                let [a, b, d] = x.map(|t| c * t);
                [d.sin(), a.sin(), b.sin()]
            });
            let theta = ScalarField::from_fn(grid, |x| {
                let [a, b, d] = x.map(|t| c * t);
                a.cos() * b.cos() * d.cos()
            });
            SimState::new(u, v, theta, 0.0)
        }
        DataKind::RandomBand => {
            let seeds = sample_seeds(spec.seed, 3);
            let u = random_band_limited_vector(grid, seeds[0], spec.band, spec.slope)?;
            let v = {
                let s = sample_seeds(seeds[1], 3);
                VectorField::new([
                    random_band_limited_field(grid, s[0], spec.band, spec.slope)?,
                    random_band_limited_field(grid, s[1], spec.band, spec.slope)?,
                    random_band_limited_field(grid, s[2], spec.band, spec.slope)?,
                ])?
            };
            let theta = random_band_limited_field(grid, seeds[2], spec.band, spec.slope)?;
            SimState::new(leray_project(&u), v, theta, 0.0)
        }
        DataKind::SingleMode => SimState::new(
            VectorField::zeros(grid),
            VectorField::zeros(grid),
            ScalarField::from_fn(grid, |x| (c * x[0]).cos()),
            0.0,
        ),
    }
}

/// Builds the initial data and rescales it jointly to the target size.
///
/// A zero target gives the zero state; a positive target on a zero shape is
/// an error.
pub fn make_initial_data(grid: &Arc<Grid>, spec: &InitialDataSpec) -> Result<InitialData> {
    let mut state = shape(grid, spec)?;
    match spec.target_h_half {
        Some(target) => {
            if !(target.is_finite() && target >= 0.0) {
                return Err(Error::param(
                    "target_h_half",
                    format!("must be finite and >= 0, got {target}"),
                ));
            }
            let now = state.triple_norm_sq(0.5).sqrt();
            if target == 0.0 {
                state.scale(0.0);
            } else if now == 0.0 {
                return Err(Error::ZeroField);
            } else {
                state.scale(target / now);
            }
        }
        None => {
            if !spec.amplitude.is_finite() {
                return Err(Error::param("amplitude", "must be finite"));
            }
            state.scale(spec.amplitude);
        }
    }
    let h2_size = sobolev_norm_vec(&state.u, 2.0, false)
        + sobolev_norm_vec(&state.v, 2.0, false)
        + sobolev_norm(&state.theta, 2.0, false);
    Ok(InitialData {
        spec: spec.clone(),
        h_half: state.triple_norm_sq(0.5).sqrt(),
        h2_size,
        state,
    })
}

/// Outcome label of one protocol run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    Decay,
    Growth,
    Inconclusive,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Decay => "decay",
            Classification::Growth => "growth",
            Classification::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything the small-data protocol needs.
#[derive(Clone, Debug, PartialEq)]
pub struct Protocol {
    pub n: usize,
    pub box_length: f64,
    pub params: ModelParams,
    pub run: RunOptions,
    pub data: InitialDataSpec,
    /// `\dot H^2` growth factor that classifies a run as growth.
    pub growth_factor: f64,
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol {
            n: 32,
            box_length: 2.0 * std::f64::consts::PI,
            params: ModelParams::default(),
            run: RunOptions::default(),
            data: InitialDataSpec::default(),
            growth_factor: 10.0,
        }
    }
}

/// Result of [`run_small_data_protocol`].
#[derive(Debug)]
pub struct ProtocolOutcome {
    pub data: InitialData,
    pub output: RunOutput,
    pub monotonicity: MonotonicityReport,
    /// Final over initial triple `L^2` norm.
    pub l2_ratio: f64,
    /// Final over initial triple `\dot H^2` norm.
    pub h2_ratio: f64,
    pub pi: f64,
    pub pi_tilde: f64,
    /// `Pi(t) / (t - t0)` at every sample after the first.
    pub pi_rate: Vec<(f64, f64)>,
    pub classification: Classification,
}

impl ProtocolOutcome {
    /// Whether `Pi(t) / (t - t0)` never increases by more than `tol`
    /// (relative) between consecutive samples.
    pub fn pi_rate_nonincreasing(&self, tol: f64) -> bool {
        self.pi_rate
            .windows(2)
            .all(|w| w[1].1 <= w[0].1 * (1.0 + tol))
    }
}

fn ratio(a: f64, b: f64) -> f64 {
    if a == 0.0 && b == 0.0 {
        1.0
    } else {
        a / b
    }
}

/// Decay: final `L^2` below initial (or both zero) with no monotonicity
/// violations; growth: `\dot H^2` grew by at least `growth_factor`;
/// otherwise, and on any abort, inconclusive.
pub fn classify(
    l2: (f64, f64),
    h2: (f64, f64),
    violations: usize,
    aborted: bool,
    growth_factor: f64,
) -> Classification {
    let (l2_0, l2_1) = l2;
    let (h2_0, h2_1) = h2;
    if aborted {
        Classification::Inconclusive
    } else if violations == 0 && (l2_1 < l2_0 || (l2_0 == 0.0 && l2_1 == 0.0)) {
        Classification::Decay
    } else if h2_1 >= growth_factor * h2_0 && h2_1 > 0.0 {
        Classification::Growth
    } else {
        Classification::Inconclusive
    }
}

/// Builds the data, runs to the horizon and summarizes the series.
pub fn run_small_data_protocol(p: &Protocol) -> Result<ProtocolOutcome> {
    let grid = Grid::new(p.n, p.box_length)?;
    let data = make_initial_data(&grid, &p.data)?;
    run_protocol_from(p, data)
}

/// [`run_small_data_protocol`] with prepared initial data.
pub fn run_protocol_from(p: &Protocol, data: InitialData) -> Result<ProtocolOutcome> {
    let output = run(&data.state, &p.params, &p.run)?;
    let series = &output.series;
    let monotonicity = monotonicity_report(series, MONOTONICITY_TOL);
    let (first, last) = match (series.first(), series.last()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::param("horizon", "the run produced no samples")),
    };
    let t0 = first.time;
    let pi_rate = series
        .iter()
        .skip(1)
        .filter(|r| r.time > t0)
        .map(|r| (r.time, r.pi / (r.time - t0)))
        .collect();
    let classification = classify(
        (first.l2.triple, last.l2.triple),
        (first.h2.triple, last.h2.triple),
        monotonicity.violation_count(),
        output.abort.is_some(),
        p.growth_factor,
    );
    Ok(ProtocolOutcome {
        l2_ratio: ratio(last.l2.triple, first.l2.triple),
        h2_ratio: ratio(last.h2.triple, first.h2.triple),
        pi: output.progress.monitor.pi(),
        pi_tilde: output.progress.monitor.pi_tilde(),
        pi_rate,
        monotonicity,
        classification,
        data,
        output,
    })
}

/// One amplitude of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub c0: f64,
    /// Measured `H^2` size of the initial data.
    pub r: f64,
    pub violations: usize,
    pub l2_ratio: f64,
    pub h2_ratio: f64,
    pub pi: f64,
    pub pi_tilde: f64,
    pub laplacian_integral: f64,
    pub classification: Classification,
    /// Abort or setup error, if any.
    pub status: Option<String>,
}

impl SweepRow {
    fn failed(c0: f64, err: &Error) -> Self {
        SweepRow {
            c0,
            r: f64::NAN,
            violations: 0,
            l2_ratio: f64::NAN,
            h2_ratio: f64::NAN,
            pi: f64::NAN,
            pi_tilde: f64::NAN,
            laplacian_integral: f64::NAN,
            classification: Classification::Inconclusive,
            status: Some(err.to_string()),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub const CSV_HEADER: &'static str =
        "c0,R,violations,l2_ratio,h2_ratio,pi,pi_tilde,laplacian_integral,classification,status";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let status = r.status.as_deref().unwrap_or("ok").replace('"', "'");
            out.push_str(&format!(
                "{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},\"{}\"\n",
                r.c0,
                r.r,
                r.violations,
                r.l2_ratio,
                r.h2_ratio,
                r.pi,
                r.pi_tilde,
                r.laplacian_integral,
                r.classification,
                status
            ));
        }
        out
    }
}

/// Runs the protocol once per amplitude in `c0s`, rows in the given order.
/// Rows are independent runs executed concurrently; failures are recorded
/// per row.
pub fn amplitude_sweep(p: &Protocol, c0s: &[f64]) -> SweepResult {
    let rows = par::map_jobs(c0s.to_vec(), |c0| {
        let mut q = p.clone();
        q.data.target_h_half = Some(c0);
        match run_small_data_protocol(&q) {
            Ok(o) => SweepRow {
                c0,
                r: o.data.h2_size,
                violations: o.monotonicity.violation_count(),
                l2_ratio: o.l2_ratio,
                h2_ratio: o.h2_ratio,
                pi: o.pi,
                pi_tilde: o.pi_tilde,
                laplacian_integral: o.monotonicity.laplacian_integral,
                classification: o.classification,
                status: o.output.abort.as_ref().map(|e| e.to_string()),
            },
            Err(e) => SweepRow::failed(c0, &e),
        }
    });
    SweepResult { rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Stepping;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Arc<Grid> {
        Grid::new(n, 2.0 * PI).unwrap()
    }

    #[test]
    fn taylor_green_hits_target_and_is_solenoidal() {
        let g = grid(16);
        let d = make_initial_data(&g, &InitialDataSpec::default()).unwrap();
        assert!((d.h_half - 1e-2).abs() <= 1e-14);
        assert!(d.state.div_u_norm() <= 1e-12);
        assert!(d.h2_size > 0.0);
    }

    #[test]
    fn single_mode_raw_amplitude() {
        let g = grid(8);
        let spec = InitialDataSpec {
            kind: DataKind::SingleMode,
            amplitude: 0.3,
            target_h_half: None,
            ..Default::default()
        };
        let d = make_initial_data(&g, &spec).unwrap();
        let expect = 0.3 * ((2.0 * PI).powi(3) / 2.0).sqrt();
        assert!((d.h_half - expect).abs() < 1e-13 * expect);
    }

    #[test]
    fn random_band_is_reproducible() {
        let g = grid(16);
        let spec = InitialDataSpec {
            kind: DataKind::RandomBand,
            seed: 4,
            ..Default::default()
        };
        let a = make_initial_data(&g, &spec).unwrap();
        let b = make_initial_data(&g, &spec).unwrap();
        assert_eq!(a.state.theta.coeffs(), b.state.theta.coeffs());
        assert!((a.h_half - 1e-2).abs() < 1e-14);
        assert!(a.state.div_u_norm() < 1e-12);
    }

    #[test]
    fn zero_target_gives_zero_state() {
        let g = grid(8);
        let spec = InitialDataSpec {
            target_h_half: Some(0.0),
            ..Default::default()
        };
        let d = make_initial_data(&g, &spec).unwrap();
        assert_eq!(d.h_half, 0.0);
    }

    #[test]
    fn zero_shape_cannot_reach_positive_target() {
        let g = grid(8);
        let spec = InitialDataSpec {
            kind: DataKind::RandomBand,
            band: 0,
            ..Default::default()
        };
        assert!(matches!(
            make_initial_data(&g, &spec),
            Err(Error::ZeroField)
        ));
    }

    #[test]
    fn classification_rules() {
        use Classification::*;
        assert_eq!(classify((1.0, 0.5), (1.0, 1.0), 0, false, 10.0), Decay);
        assert_eq!(classify((0.0, 0.0), (0.0, 0.0), 0, false, 10.0), Decay);
        assert_eq!(
            classify((1.0, 0.5), (1.0, 1.0), 1, false, 10.0),
            Inconclusive
        );
        assert_eq!(classify((1.0, 2.0), (1.0, 20.0), 3, false, 10.0), Growth);
        assert_eq!(
            classify((1.0, 0.5), (1.0, 1.0), 0, true, 10.0),
            Inconclusive
        );
    }

    fn short_protocol() -> Protocol {
        Protocol {
            n: 8,
            run: RunOptions {
                horizon: 0.1,
                sample_every: 0.05,
                stepping: Stepping::Fixed { dt: 1e-2 },
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn zero_data_sweep_row_decays_with_linear_pi() {
        let p = short_protocol();
        let res = amplitude_sweep(&p, &[0.0]);
        assert_eq!(res.rows.len(), 1);
        let row = &res.rows[0];
        assert_eq!(row.classification, Classification::Decay);
        assert_eq!(row.pi, p.run.diagnostics.c_pi * 0.1);
    }

    #[test]
    fn sweep_rows_do_not_depend_on_order() {
        let p = short_protocol();
        let a = amplitude_sweep(&p, &[1e-3, 1e-2]);
        let b = amplitude_sweep(&p, &[1e-2, 1e-3]);
        assert_eq!(a.rows[0], b.rows[1]);
        assert_eq!(a.rows[1], b.rows[0]);
        assert!(a
            .rows
            .iter()
            .all(|r| r.classification == Classification::Decay));
        assert_eq!(a.to_csv().lines().count(), 3);
    }
}
