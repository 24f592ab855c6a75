use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{norms, ops, Grid, ScalarField, VectorField};

/// Number of scalar unknowns: `u1, u2, u3, v1, v2, v3, theta`.
pub(crate) const FIELDS: usize = 7;

/// Coefficient arrays of the seven unknowns in storage order.
pub(crate) type Comps = [Vec<Complex64>; FIELDS];

pub(crate) fn zero_comps(len: usize) -> Comps {
    std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); len])
}

/// Model state `(u, v, theta)` at time `time`.
#[derive(Clone, Debug)]
pub struct SimState {
    pub u: VectorField,
    pub v: VectorField,
    pub theta: ScalarField,
    pub time: f64,
}

impl SimState {
    /// Checks that the fields share a grid and are finite. `u` is taken as
    /// given; see [`SimState::projected`] to enforce `div u = 0`.
    pub fn new(u: VectorField, v: VectorField, theta: ScalarField, time: f64) -> Result<Self> {
        u.check_grid(&v)?;
        if !u.grid().same_as(theta.grid()) {
            return Err(Error::GridMismatch);
        }
        let s = SimState { u, v, theta, time };
        if !s.is_finite() || !time.is_finite() {
            return Err(Error::NonFinite("initial state".into()));
        }
        Ok(s)
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        SimState {
            u: VectorField::zeros(grid),
            v: VectorField::zeros(grid),
            theta: ScalarField::zeros(grid),
            time: 0.0,
        }
    }

    /// Same state with `u` replaced by its Leray projection.
    pub fn projected(mut self) -> Self {
        ops::leray_project_in_place(&mut self.u);
        self
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.u.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite() && self.theta.is_finite()
    }

    /// `||div u||_{L^2}`.
    pub fn div_u_norm(&self) -> f64 {
        norms::sobolev_norm(&ops::divergence(&self.u), 0.0, true)
    }

    /// `||div u|| / max(1, ||u||)`, the quantity bounded by the
    /// incompressibility invariant.
    pub fn div_u_relative(&self) -> f64 {
        self.div_u_norm() / norms::sobolev_norm_vec(&self.u, 0.0, true).max(1.0)
    }

    /// `||(u, v, theta)||^2` in the (homogeneous) Sobolev norm of order `s`.
    pub fn triple_norm_sq(&self, s: f64) -> f64 {
        norms::sobolev_norm_vec_sq(&self.u, s, true)
            + norms::sobolev_norm_vec_sq(&self.v, s, true)
            + norms::sobolev_norm_sq(&self.theta, s, true)
    }

    /// Scales every field by `factor`.
    pub fn scale(&mut self, factor: f64) {
        self.u.scale(factor);
        self.v.scale(factor);
        self.theta.scale(factor);
    }

    pub(crate) fn to_comps(&self) -> Comps {
        let [u1, u2, u3] = self.u.comps();
        let [v1, v2, v3] = self.v.comps();
        [u1, u2, u3, v1, v2, v3, &self.theta].map(|f| f.coeffs().to_vec())
    }

    pub(crate) fn from_comps(grid: &Arc<Grid>, comps: &Comps, time: f64) -> Self {
        let field = |i: usize| {
            ScalarField::from_coeffs(grid, comps[i].clone()).expect("length matches grid")
        };
        let vec = |o: usize| {
            VectorField::new([field(o), field(o + 1), field(o + 2)]).expect("shared grid")
        };
        SimState {
            u: vec(0),
            v: vec(3),
            theta: field(6),
            time,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn comps_round_trip() {
        let g = Grid::new(8, 2.0 * PI).unwrap();
        let s = SimState::new(
            VectorField::from_fn(&g, |x| [x[1].sin(), 0.0, x[0].cos()]),
            VectorField::from_fn(&g, |x| [0.0, x[2].sin(), 1.0]),
            ScalarField::from_fn(&g, |x| x[0].cos() * x[1].sin()),
            0.25,
        )
        .unwrap();
        let back = SimState::from_comps(&g, &s.to_comps(), 0.25);
        assert_eq!(back.to_comps(), s.to_comps());
        assert!(s.div_u_relative() < 1e-15);
    }

    #[test]
    fn rejects_mixed_grids() {
        let a = Grid::new(8, 2.0 * PI).unwrap();
        let b = Grid::new(8, 1.0).unwrap();
        let r = SimState::new(
            VectorField::zeros(&a),
            VectorField::zeros(&a),
            ScalarField::zeros(&b),
            0.0,
        );
        assert!(matches!(r, Err(Error::GridMismatch)));
    }
}
