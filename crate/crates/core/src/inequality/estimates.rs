use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::gn::fmt_exp;
use crate::diagnostics::bmo_estimate;
use crate::error::{Error, Result};
use crate::spectral::{
    gradient, lambda_pow, lp_norm, lp_norm_vec, partial, sobolev_norm, Grid, ScalarField,
};

/// Relative size below which a left side counts as exactly zero.
const NEGLIGIBLE: f64 = 1e-12;

/// Lebesgue exponents of a product estimate, with
/// `1/p = 1/p1 + 1/q1 = 1/p2 + 1/q2`, `1 < p, q1, q2 < inf`, `1 < p1, p2 <= inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductExponents {
    pub p: f64,
    pub p1: f64,
    pub q1: f64,
    pub p2: f64,
    pub q2: f64,
}

impl ProductExponents {
    pub fn new(p: f64, p1: f64, q1: f64, p2: f64, q2: f64) -> Result<Self> {
        let e = ProductExponents { p, p1, q1, p2, q2 };
        e.validate()?;
        Ok(e)
    }

    /// `p = 2` with `L^inf x L^2` splittings.
    pub fn l2_linf() -> Self {
        ProductExponents {
            p: 2.0,
            p1: f64::INFINITY,
            q1: 2.0,
            p2: f64::INFINITY,
            q2: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let open = |x: f64| x > 1.0 && x.is_finite();
        let half_open = |x: f64| x > 1.0;
        if !(open(self.p) && open(self.q1) && open(self.q2)) {
            return Err(Error::Exponents("p, q1, q2 must lie in (1, inf)".into()));
        }
        if !(half_open(self.p1) && half_open(self.p2)) {
            return Err(Error::Exponents("p1, p2 must lie in (1, inf]".into()));
        }
        let inv = 1.0 / self.p;
        let r1 = 1.0 / self.p1 + 1.0 / self.q1;
        let r2 = 1.0 / self.p2 + 1.0 / self.q2;
        if (inv - r1).abs() > 1e-12 || (inv - r2).abs() > 1e-12 {
            return Err(Error::Exponents(format!(
                "Holder relation fails: 1/p = {inv}, 1/p1 + 1/q1 = {r1}, 1/p2 + 1/q2 = {r2}"
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for ProductExponents {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "p={},p1={},q1={},p2={},q2={}",
            fmt_exp(self.p),
            fmt_exp(self.p1),
            fmt_exp(self.q1),
            fmt_exp(self.p2),
            fmt_exp(self.q2)
        )
    }
}

/// Grid with twice the resolution of `grid`, shared across calls.
fn padded(grid: &Grid) -> Result<Arc<Grid>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), Arc<Grid>>>> = OnceLock::new();
    let key = (2 * grid.n(), grid.box_length().to_bits());
    let mut cache = CACHE.get_or_init(Default::default).lock().unwrap();
    if let Some(g) = cache.get(&key) {
        return Ok(g.clone());
    }
    let g = Grid::new(key.0, grid.box_length())?;
    cache.insert(key, g.clone());
    Ok(g)
}

/// Both factors on the padded grid, where their product is resolved exactly.
fn lift(f: &ScalarField, g: &ScalarField) -> Result<(ScalarField, ScalarField)> {
    f.check_grid(g)?;
    let fine = padded(f.grid())?;
    Ok((f.resampled(&fine)?, g.resampled(&fine)?))
}

/// Exact pointwise product of two fields on the same (padded) grid.
fn multiply(f: &ScalarField, g: &ScalarField) -> Result<ScalarField> {
    let grid = f.grid();
    let phys = grid.inverse_many(&[f.coeffs(), g.coeffs()]);
    let prod: Vec<f64> = phys[0].iter().zip(&phys[1]).map(|(a, b)| a * b).collect();
    ScalarField::from_physical(grid, &prod)
}

/// `lhs / rhs`, with `0` when the left side vanishes relative to `scale`.
fn ratio(lhs: f64, rhs: f64, scale: f64) -> Result<f64> {
    if lhs <= NEGLIGIBLE * scale || lhs == 0.0 {
        return Ok(0.0);
    }
    if !(rhs > 0.0) {
        return Err(Error::ZeroField);
    }
    Ok(lhs / rhs)
}

/// `||Lambda^s (f g)||_p / (||f||_p1 ||Lambda^s g||_q1 + ||g||_p2 ||Lambda^s f||_q2)`.
///
/// Products are formed on a grid of twice the resolution, so they carry no
/// aliasing error; all norms are evaluated there.
pub fn kato_ponce_ratio(
    f: &ScalarField,
    g: &ScalarField,
    s: f64,
    e: &ProductExponents,
) -> Result<f64> {
    check_order(s)?;
    e.validate()?;
    let (f, g) = lift(f, g)?;
    let lhs = lp_norm(&lambda_pow(&multiply(&f, &g)?, s)?, e.p)?;
    let rhs = lp_norm(&f, e.p1)? * lp_norm(&lambda_pow(&g, s)?, e.q1)?
        + lp_norm(&g, e.p2)? * lp_norm(&lambda_pow(&f, s)?, e.q2)?;
    ratio(lhs, rhs, rhs)
}

/// `||Lambda^s (f g) - f Lambda^s g||_p /
///  (||grad f||_p1 ||Lambda^(s-1) g||_q1 + ||g||_p2 ||Lambda^s f||_q2)`,
/// evaluated like [`kato_ponce_ratio`].
///
/// A commutator that cancels to roundoff gives `0`.
pub fn commutator_ratio(
    f: &ScalarField,
    g: &ScalarField,
    s: f64,
    e: &ProductExponents,
) -> Result<f64> {
    check_order(s)?;
    e.validate()?;
    let (f, g) = lift(f, g)?;
    let first = lambda_pow(&multiply(&f, &g)?, s)?;
    let second = multiply(&f, &lambda_pow(&g, s)?)?;
    let mut comm = first.clone();
    comm.add_scaled(-1.0, &second)?;
    let lhs = lp_norm(&comm, e.p)?;
    let scale = lp_norm(&first, e.p)? + lp_norm(&second, e.p)?;
    let rhs = lp_norm_vec(&gradient(&f), e.p1)? * lp_norm(&lambda_pow(&g, s - 1.0)?, e.q1)?
        + lp_norm(&g, e.p2)? * lp_norm(&lambda_pow(&f, s)?, e.q2)?;
    ratio(lhs, rhs, scale)
}

fn check_order(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::Exponents(format!("s must be positive, got {s}")))
    }
}

/// `d^a f`, mixed spectral derivative for the multi-index `a`.
fn derivative(f: &ScalarField, a: [u32; 3]) -> ScalarField {
    let mut out = f.clone();
    for (axis, &order) in a.iter().enumerate() {
        for _ in 0..order {
            out = partial(&out, axis);
        }
    }
    out
}

/// `||d^a f d^b g||_r /
///  (||f||_BMO ||(-Lap)^{(|a|+|b|)/2} g||_r + ||g||_BMO ||(-Lap)^{(|a|+|b|)/2} f||_r)`,
/// with BMO norms from the dyadic oscillation estimator on the padded grid.
///
/// Requires `|a|, |b| >= 1` and `r in (1, inf)`; vanishing fields give `0`.
pub fn kozono_bmo_ratio(
    f: &ScalarField,
    g: &ScalarField,
    a: [u32; 3],
    b: [u32; 3],
    r: f64,
) -> Result<f64> {
    let (na, nb) = (a.iter().sum::<u32>(), b.iter().sum::<u32>());
    if na == 0 || nb == 0 {
        return Err(Error::Exponents("multi-indices need |a|, |b| >= 1".into()));
    }
    if !(r > 1.0 && r.is_finite()) {
        return Err(Error::Exponents(format!("r must lie in (1, inf), got {r}")));
    }
    let (f, g) = lift(f, g)?;
    let lhs = lp_norm(&multiply(&derivative(&f, a), &derivative(&g, b))?, r)?;
    let order = f64::from(na + nb);
    let rhs = bmo_estimate(&f).dyadic * lp_norm(&lambda_pow(&g, order)?, r)?
        + bmo_estimate(&g).dyadic * lp_norm(&lambda_pow(&f, order)?, r)?;
    ratio(lhs, rhs, rhs)
}

/// `||f||_inf / (1 + ||f||_BMO ln(e + ||f||_{H^s}))` for `s > 3/2`, with the
/// dyadic BMO estimator. Unlike the other ratios this one is not invariant
/// under `f -> lambda f`.
pub fn linfty_log_ratio(f: &ScalarField, s: f64) -> Result<f64> {
    if !(s > 1.5 && s.is_finite()) {
        return Err(Error::Exponents(format!("s must exceed 3/2, got {s}")));
    }
    let sup = lp_norm(f, f64::INFINITY)?;
    let bmo = bmo_estimate(f).dyadic;
    let hs = sobolev_norm(f, s, false);
    Ok(sup / (1.0 + bmo * (std::f64::consts::E + hs).ln()))
}
