use std::fmt;

use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::spectral::{lambda_pow, lp_norm, ScalarField};

/// Tolerance for the scaling relation after solving for `kappa`.
const SCALING_TOL: f64 = 1e-12;

/// One Gagliardo-Nirenberg instance
/// `||Lambda^s f||_p <= C ||Lambda^m f||_q^(1-kappa) ||Lambda^l f||_r^kappa`
/// in three dimensions. Infinite exponents are `f64::INFINITY`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GNInstance {
    pub s: f64,
    pub p: f64,
    pub m: f64,
    pub q: f64,
    pub l: f64,
    pub r: f64,
    pub kappa: f64,
}

impl GNInstance {
    /// Solves for `kappa` and validates the instance.
    pub fn new(s: f64, p: f64, m: f64, q: f64, l: f64, r: f64) -> Result<Self> {
        let kappa = gn_solve_kappa(s, p, m, q, l, r)?;
        Ok(GNInstance {
            s,
            p,
            m,
            q,
            l,
            r,
            kappa,
        })
    }

    /// `||u||_{3 alpha / 2} <= C ||Lambda^{1/2} u||^{1-kappa} ||grad u||^kappa`,
    /// with `kappa = 2 (alpha - 2) / alpha`.
    pub fn damping_lp(alpha: f64) -> Result<Self> {
        Self::new(0.0, 1.5 * alpha, 0.5, 2.0, 1.0, 2.0)
    }

    /// `||u||_inf <= C ||grad u||^{2/3} ||Lambda^{5/2} u||^{1/3}`.
    pub fn sup_norm() -> Result<Self> {
        Self::new(0.0, f64::INFINITY, 1.0, 2.0, 2.5, 2.0)
    }

    /// `||grad w|| <= C ||w||^{1/2} ||Lap w||^{1/2}`, all in `L^2`.
    pub fn gradient_l2() -> Result<Self> {
        Self::new(1.0, 2.0, 0.0, 2.0, 2.0, 2.0)
    }

    /// Left minus right side of the scaling relation for a given `kappa`.
    pub fn scaling_residual(&self, kappa: f64) -> f64 {
        scaling_residual(self.s, self.p, self.m, self.q, self.l, self.r, kappa)
    }
}

impl fmt::Display for GNInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "gn(s={},p={},m={},q={},l={},r={},kappa={:.6})",
            self.s,
            fmt_exp(self.p),
            self.m,
            fmt_exp(self.q),
            self.l,
            fmt_exp(self.r),
            self.kappa
        )
    }
}

pub(crate) fn fmt_exp(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        format!("{p}")
    }
}

/// `d/3 - 1/p`, the dilation weight of `||Lambda^d f||_p` in three dimensions.
fn weight(d: f64, p: f64) -> f64 {
    d / 3.0 - 1.0 / p
}

fn scaling_residual(s: f64, p: f64, m: f64, q: f64, l: f64, r: f64, kappa: f64) -> f64 {
    weight(s, p) - (weight(m, q) * (1.0 - kappa) + weight(l, r) * kappa)
}

fn check_lebesgue(name: &str, p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::Exponents(format!(
            "{name} must lie in [1, inf], got {p}"
        )))
    }
}

fn undetermined() -> Error {
    Error::Exponents("both interpolants have the same scaling; kappa is undetermined".into())
}

/// `x` as a fraction with denominator at most 1000, if it is one.
fn rational(x: f64) -> Option<Rational64> {
    (1..=1000i64).find_map(|q| {
        let p = (x * q as f64).round();
        ((p / q as f64 - x).abs() <= 1e-13 * x.abs().max(1.0)).then(|| Rational64::new(p as i64, q))
    })
}

/// Reciprocal of a Lebesgue index, zero for infinity.
fn rational_inverse(p: f64) -> Option<Rational64> {
    if p.is_infinite() {
        Some(Rational64::from_integer(0))
    } else {
        rational(p).map(|r| r.recip())
    }
}

/// Solves the scaling relation in exact arithmetic when every input is a
/// simple fraction, so that e.g. `2/3` comes out as the nearest double.
fn exact_kappa(s: f64, p: f64, m: f64, q: f64, l: f64, r: f64) -> Option<Result<f64>> {
    let three = Rational64::from_integer(3);
    let w = |d: f64, p: f64| Some(rational(d)? / three - rational_inverse(p)?);
    let (t, a, b) = (w(s, p)?, w(m, q)?, w(l, r)?);
    if a == b {
        return Some(Err(undetermined()));
    }
    let k = (t - a) / (b - a);
    Some(Ok(*k.numer() as f64 / *k.denom() as f64))
}

/// Interpolation weight `kappa` from
/// `s/3 - 1/p = (m/3 - 1/q)(1 - kappa) + (l/3 - 1/r) kappa`.
///
/// Requires `0 <= m <= l`, `0 <= s <= l` and Lebesgue indices in `[1, inf]`;
/// fails when `kappa` is not determined or falls outside `[0, 1]`, or, for
/// `p = inf`, outside `(0, 1)`.
pub fn gn_solve_kappa(s: f64, p: f64, m: f64, q: f64, l: f64, r: f64) -> Result<f64> {
    if [s, m, l].iter().any(|x| !x.is_finite()) {
        return Err(Error::Exponents("orders must be finite".into()));
    }
    if !(0.0 <= m && m <= l && 0.0 <= s && s <= l) {
        return Err(Error::Exponents(format!(
            "need 0 <= m <= l and 0 <= s <= l, got s={s}, m={m}, l={l}"
        )));
    }
    check_lebesgue("p", p)?;
    check_lebesgue("q", q)?;
    check_lebesgue("r", r)?;

    let mut kappa = match exact_kappa(s, p, m, q, l, r) {
        Some(k) => k?,
        None => {
            let (t, a, b) = (weight(s, p), weight(m, q), weight(l, r));
            if a == b {
                return Err(undetermined());
            }
            (t - a) / (b - a)
        }
    };
    // Snap roundoff at the endpoints.
    if kappa.abs() < SCALING_TOL {
        kappa = 0.0;
    } else if (kappa - 1.0).abs() < SCALING_TOL {
        kappa = 1.0;
    }
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::Exponents(format!(
            "kappa = {kappa} is outside [0, 1]"
        )));
    }
    if p.is_infinite() && (kappa == 0.0 || kappa == 1.0) {
        return Err(Error::Exponents("p = inf requires 0 < kappa < 1".into()));
    }
    if scaling_residual(s, p, m, q, l, r, kappa).abs() > SCALING_TOL {
        return Err(Error::Exponents(format!(
            "scaling relation not satisfied by kappa = {kappa}"
        )));
    }
    Ok(kappa)
}

/// `||Lambda^s f||_p / (||Lambda^m f||_q^(1-kappa) ||Lambda^l f||_r^kappa)`.
///
/// Fails for a field whose denominator vanishes, and when a negative power
/// meets a nonzero mean.
pub fn gn_ratio(f: &ScalarField, inst: &GNInstance) -> Result<f64> {
    let norm = |d: f64, p: f64| lp_norm(&lambda_pow(f, d)?, p);
    let num = norm(inst.s, inst.p)?;
    let low = norm(inst.m, inst.q)?;
    let high = norm(inst.l, inst.r)?;
    let den = low.powf(1.0 - inst.kappa) * high.powf(inst.kappa);
    if !(den > 0.0) {
        return Err(Error::ZeroField);
    }
    Ok(num / den)
}

/// Exponents of the damping estimates for a given `alpha`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TheoryExponents {
    pub alpha: f64,
    /// `(3 alpha - 5) / (4 (alpha - 1))`, Young exponent of the damping
    /// interpolation; needs `alpha in (5/3, 4)`.
    pub kappa: f64,
    /// `(5 alpha - 1) / (4 (alpha + 1))`; needs `alpha in (1, 4)`.
    pub delta: f64,
}

/// Evaluates both exponents; `alpha` must lie in `(5/3, 4)`.
pub fn theory_exponents(alpha: f64) -> Result<TheoryExponents> {
    if !(alpha > 5.0 / 3.0 && alpha < 4.0) {
        return Err(Error::param(
            "alpha",
            format!("exponent formulas need alpha in (5/3, 4), got {alpha}"),
        ));
    }
    let kappa = (3.0 * alpha - 5.0) / (4.0 * (alpha - 1.0));
    let delta = (5.0 * alpha - 1.0) / (4.0 * (alpha + 1.0));
    for (name, v) in [("kappa", kappa), ("delta", delta)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::Exponents(format!("{name} = {v} is outside (0, 1)")));
        }
    }
    Ok(TheoryExponents {
        alpha,
        kappa,
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use std::f64::consts::PI;

    #[test]
    fn solves_the_two_named_instances() {
        assert_eq!(GNInstance::damping_lp(3.0).unwrap().kappa, 2.0 / 3.0);
        assert_eq!(GNInstance::sup_norm().unwrap().kappa, 1.0 / 3.0);
        assert_eq!(GNInstance::gradient_l2().unwrap().kappa, 0.5);
    }

    #[test]
    fn damping_instance_follows_closed_form() {
        for alpha in [2.5, 3.0, 3.5] {
            let k = GNInstance::damping_lp(alpha).unwrap().kappa;
            assert!((k - 2.0 * (alpha - 2.0) / alpha).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_endpoint_is_zero() {
        assert_eq!(gn_solve_kappa(0.5, 2.0, 0.5, 2.0, 1.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_inadmissible_combinations() {
        // kappa would be negative.
        assert!(gn_solve_kappa(0.0, 2.0, 0.5, 2.0, 1.0, 2.0).is_err());
        // p = inf at an endpoint.
        assert!(gn_solve_kappa(0.0, f64::INFINITY, 0.0, f64::INFINITY, 1.0, 2.0).is_err());
        // s above l.
        assert!(gn_solve_kappa(2.0, 2.0, 0.0, 2.0, 1.0, 2.0).is_err());
        // identical scalings.
        assert!(gn_solve_kappa(0.5, 2.0, 1.0, 2.0, 1.0, 2.0).is_err());
        assert!(gn_solve_kappa(0.0, 0.5, 0.0, 2.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn quarter_three_quarter_split_is_not_dilation_consistent() {
        let inst = GNInstance::gradient_l2().unwrap();
        assert!(inst.scaling_residual(0.75).abs() > 0.1);
        assert!(inst.scaling_residual(0.5).abs() < 1e-15);
    }

    #[test]
    fn single_mode_l2_ratio_is_one() {
        let g = Grid::new(16, 2.0 * PI).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0].cos());
        let r = gn_ratio(&f, &GNInstance::gradient_l2().unwrap()).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_field_is_an_error() {
        let g = Grid::new(8, 2.0 * PI).unwrap();
        let f = ScalarField::zeros(&g);
        assert!(gn_ratio(&f, &GNInstance::gradient_l2().unwrap()).is_err());
    }

    #[test]
    fn theory_exponents_at_three() {
        let e = theory_exponents(3.0).unwrap();
        assert_eq!(e.kappa, 0.5);
        assert_eq!(e.delta, 0.875);
        assert!(theory_exponents(5.0 / 3.0).is_err());
        assert!(theory_exponents(4.0).is_err());
    }
}
