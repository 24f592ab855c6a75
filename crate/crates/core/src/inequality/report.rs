use std::fmt::Write as _;
use std::sync::Arc;

use super::estimates::{
    commutator_ratio, kato_ponce_ratio, kozono_bmo_ratio, linfty_log_ratio, ProductExponents,
};
use super::gn::{gn_ratio, GNInstance};
use super::random::{random_band_limited_field, sample_seeds};
use crate::error::{Error, Result};
use crate::par;
use crate::spectral::{Grid, ScalarField};

/// Summary of one ratio over a random sample.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioReport {
    pub instance: String,
    pub samples: usize,
    pub max: f64,
    pub mean: f64,
    pub seed: u64,
}

impl RatioReport {
    pub const CSV_HEADER: &'static str = "instance,samples,max,mean,seed";

    fn from_ratios(instance: String, seed: u64, ratios: &[f64]) -> Self {
        let n = ratios.len();
        RatioReport {
            instance,
            samples: n,
            max: ratios.iter().copied().fold(0.0, f64::max),
            mean: if n == 0 {
                0.0
            } else {
                ratios.iter().sum::<f64>() / n as f64
            },
            seed,
        }
    }

    /// One CSV line; the instance label is quoted since it contains commas.
    pub fn csv_row(&self) -> String {
        format!(
            "\"{}\",{},{:.16e},{:.16e},{}",
            self.instance.replace('"', "'"),
            self.samples,
            self.max,
            self.mean,
            self.seed
        )
    }
}

/// Header plus one row per report.
pub fn reports_to_csv(reports: &[RatioReport]) -> String {
    let mut out = String::from(RatioReport::CSV_HEADER);
    out.push('\n');
    for r in reports {
        let _ = writeln!(out, "{}", r.csv_row());
    }
    out
}

/// Random field family used by the sweeps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldFamily {
    pub band: usize,
    pub slope: f64,
}

impl Default for FieldFamily {
    fn default() -> Self {
        FieldFamily {
            band: 4,
            slope: -1.0,
        }
    }
}

/// One-field or two-field ratio evaluated on random samples.
pub enum Probe {
    Gn(GNInstance),
    KatoPonce { s: f64, exps: ProductExponents },
    Commutator { s: f64, exps: ProductExponents },
    Kozono { a: [u32; 3], b: [u32; 3], r: f64 },
    LinftyLog { s: f64 },
}

impl Probe {
    pub fn label(&self) -> String {
        match self {
            Probe::Gn(i) => i.to_string(),
            Probe::KatoPonce { s, exps } => format!("kato_ponce(s={s},{exps})"),
            Probe::Commutator { s, exps } => format!("commutator(s={s},{exps})"),
            Probe::Kozono { a, b, r } => format!("kozono_bmo(a={a:?},b={b:?},r={r})"),
            Probe::LinftyLog { s } => format!("linfty_log(s={s})"),
        }
    }

    /// Ratio on the pair `(f, g)`; one-field probes use `f` only.
    pub fn eval(&self, f: &ScalarField, g: &ScalarField) -> Result<f64> {
        match self {
            Probe::Gn(i) => gn_ratio(f, i),
            Probe::KatoPonce { s, exps } => kato_ponce_ratio(f, g, *s, exps),
            Probe::Commutator { s, exps } => commutator_ratio(f, g, *s, exps),
            Probe::Kozono { a, b, r } => kozono_bmo_ratio(f, g, *a, *b, *r),
            Probe::LinftyLog { s } => linfty_log_ratio(f, *s),
        }
    }
}

/// Evaluates `probe` on `samples` random pairs. Sample `i` uses the fields
/// seeded by the `2i`-th and `2i+1`-th draw of the master seed, so results do
/// not depend on the worker count. Non-finite ratios are reported as errors.
pub fn ratio_sweep(
    grid: &Arc<Grid>,
    probe: &Probe,
    family: FieldFamily,
    samples: usize,
    seed: u64,
) -> Result<RatioReport> {
    let seeds = sample_seeds(seed, 2 * samples);
    let jobs: Vec<usize> = (0..samples).collect();
    let ratios = par::map_jobs(jobs, |i| -> Result<f64> {
        let f = random_band_limited_field(grid, seeds[2 * i], family.band, family.slope)?;
        let g = random_band_limited_field(grid, seeds[2 * i + 1], family.band, family.slope)?;
        let r = probe.eval(&f, &g)?;
        if !r.is_finite() {
            return Err(Error::NonFinite(format!("{} on sample {i}", probe.label())));
        }
        Ok(r)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    Ok(RatioReport::from_ratios(probe.label(), seed, &ratios))
}

/// The instances used by the energy estimates for damping exponent `alpha`.
/// The damping instance is left out when `alpha` makes it inadmissible.
pub fn standard_probes(alpha: f64) -> Result<Vec<Probe>> {
    let kp = ProductExponents::l2_linf();
    let mut probes = Vec::new();
    match GNInstance::damping_lp(alpha) {
        Ok(i) => probes.push(Probe::Gn(i)),
        Err(e) => log::warn!("skipping the damping interpolation instance: {e}"),
    }
    probes.extend([
        Probe::Gn(GNInstance::sup_norm()?),
        Probe::Gn(GNInstance::gradient_l2()?),
        Probe::KatoPonce { s: 1.0, exps: kp },
        Probe::KatoPonce {
            s: 1.5,
            exps: ProductExponents::new(2.0, 4.0, 4.0, 4.0, 4.0)?,
        },
        Probe::Commutator { s: 1.0, exps: kp },
        Probe::Commutator { s: 2.0, exps: kp },
        Probe::Kozono {
            a: [1, 0, 0],
            b: [0, 1, 0],
            r: 2.0,
        },
        Probe::LinftyLog { s: 2.0 },
    ]);
    Ok(probes)
}

/// Runs [`standard_probes`] on a common random sample.
pub fn standard_suite(
    grid: &Arc<Grid>,
    alpha: f64,
    family: FieldFamily,
    samples: usize,
    seed: u64,
) -> Result<Vec<RatioReport>> {
    standard_probes(alpha)?
        .iter()
        .map(|p| ratio_sweep(grid, p, family, samples, seed))
        .collect()
}
