use crate::model::{ModelParams, SimState};
use crate::spectral::norms;

/// Constants of the smallness conditions (unspecified in the estimates, 1 by
/// default).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmallnessConstants {
    pub c1: f64,
    pub c2: f64,
    pub epsilon: f64,
}

impl Default for SmallnessConstants {
    fn default() -> Self {
        SmallnessConstants {
            c1: 1.0,
            c2: 1.0,
            epsilon: 0.0,
        }
    }
}

/// Smallness functionals and the two sign conditions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Smallness {
    /// `R(u, alpha)`.
    pub r_u: f64,
    /// `R~(v, beta)`.
    pub r_v: f64,
    /// `ell - C1 (||Lambda^(1/2)(u, v, theta)|| + R + R~)`.
    pub margin1: f64,
    /// `2 ell - C2 (epsilon + ||Lambda^(1/2)(u, v, theta)||^2)`.
    pub margin2: f64,
    pub cond1: bool,
    pub cond2: bool,
}

/// `R(w, gamma)` from `h = ||Lambda^(1/2) w||` and `g = ||grad w||`:
/// `h^(5-gamma) g^(2(gamma-3))` for `3 < gamma < 4`, `h^(3 gamma - 7)` for
/// `5/2 <= gamma <= 3`, `None` otherwise.
pub fn r_functional(h: f64, g: f64, gamma: f64) -> Option<f64> {
    if (2.5..=3.0).contains(&gamma) {
        Some(h.powf(3.0 * gamma - 7.0))
    } else if gamma > 3.0 && gamma < 4.0 {
        Some(h.powf(5.0 - gamma) * g.powf(2.0 * (gamma - 3.0)))
    } else {
        None
    }
}

/// Evaluates the functionals on `state`; `None` outside `5/2 <= alpha, beta < 4`.
pub fn smallness_functionals(
    state: &SimState,
    params: &ModelParams,
    consts: &SmallnessConstants,
) -> Option<Smallness> {
    if !params.theory_regime() {
        return None;
    }
    let hu = norms::sobolev_norm_vec(&state.u, 0.5, true);
    let hv = norms::sobolev_norm_vec(&state.v, 0.5, true);
    let gu = norms::sobolev_norm_vec(&state.u, 1.0, true);
    let gv = norms::sobolev_norm_vec(&state.v, 1.0, true);
    let r_u = r_functional(hu, gu, params.alpha)?;
    let r_v = r_functional(hv, gv, params.beta)?;
    let h_triple = state.triple_norm_sq(0.5).sqrt();
    let ell = params.ell();
    let margin1 = ell - consts.c1 * (h_triple + r_u + r_v);
    let margin2 = 2.0 * ell - consts.c2 * (consts.epsilon + h_triple * h_triple);
    Some(Smallness {
        r_u,
        r_v,
        margin1,
        margin2,
        cond1: margin1 > 0.0,
        cond2: margin2 > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use std::f64::consts::PI;

    #[test]
    fn branches_agree_at_three() {
        let h = 0.3;
        assert_eq!(r_functional(h, 7.0, 3.0), Some(h * h));
        let above = r_functional(h, 7.0, 3.0 + 1e-12).unwrap();
        assert!((above - h * h).abs() < 1e-10);
    }

    #[test]
    fn fractional_branch_value() {
        let r = r_functional(0.1, 5.0, 2.5).unwrap();
        assert!((r - 0.1f64.sqrt()).abs() < 1e-15);
        assert_eq!(r_functional(0.1, 5.0, 4.0), None);
    }

    #[test]
    fn zero_state_conditions() {
        let g = Grid::new(8, 2.0 * PI).unwrap();
        let s = SimState::zeros(&g);
        let p = ModelParams::default();
        let consts = SmallnessConstants {
            epsilon: 3.0,
            ..Default::default()
        };
        let sm = smallness_functionals(&s, &p, &consts).unwrap();
        assert_eq!((sm.r_u, sm.r_v), (0.0, 0.0));
        assert!(sm.cond1);
        assert!(!sm.cond2);
        let out = ModelParams { alpha: 4.5, ..p };
        assert!(smallness_functionals(&s, &out, &consts).is_none());
    }
}
