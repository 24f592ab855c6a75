use std::sync::Arc;

use num_complex::Complex64;

use super::Grid;
use crate::error::{Error, Result};

/// Real scalar field stored as Fourier coefficients
/// `f_k = n^-3 sum_j f(x_j) exp(-i k.x_j)`.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Arc<Grid>,
    coeffs: Vec<Complex64>,
}

impl ScalarField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        ScalarField {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Wraps raw coefficients. The caller is responsible for Hermitian symmetry.
    pub fn from_coeffs(grid: &Arc<Grid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(ScalarField {
            grid: grid.clone(),
            coeffs,
        })
    }

    /// Forward transform of physical samples.
    pub fn from_physical(grid: &Arc<Grid>, samples: &[f64]) -> Result<Self> {
        let coeffs = grid.forward(samples)?;
        Ok(ScalarField {
            grid: grid.clone(),
            coeffs,
        })
    }

    /// Samples a closed-form function on the grid and transforms it.
    pub fn from_fn<F>(grid: &Arc<Grid>, f: F) -> Self
    where
        F: Fn([f64; 3]) -> f64 + Sync + Send,
    {
        let samples = grid.sample(f);
        Self::from_physical(grid, &samples).expect("sample length matches grid")
    }

    /// Inverse transform to collocation-point values.
    pub fn to_physical(&self) -> Vec<f64> {
        self.grid.inverse_many(&[&self.coeffs]).pop().unwrap()
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of the mode with integer wavevector `k`.
    pub fn mode(&self, k: [i64; 3]) -> Complex64 {
        self.coeffs[self.grid.mode_index(k)]
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest deviation from `f_{-k} = conj(f_k)`.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|k| (self.coeffs[k] - self.coeffs[self.grid.conjugate_index(k)].conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn scale(&mut self, factor: f64) {
        self.coeffs.iter_mut().for_each(|c| *c *= factor);
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.scale(factor);
        out
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, factor: f64, other: &ScalarField) -> Result<()> {
        self.check_grid(other)?;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * factor;
        }
        Ok(())
    }

    pub fn check_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// The same trigonometric polynomial on another grid of equal box length.
    ///
    /// Modes with `|k_i| >= min(n, n') / 2` on any axis are dropped, so the
    /// result is exact whenever both grids resolve the field below Nyquist.
    pub fn resampled(&self, target: &Arc<Grid>) -> Result<ScalarField> {
        if self.grid.box_length() != target.box_length() {
            return Err(Error::GridMismatch);
        }
        let limit = (self.grid.n().min(target.n()) / 2) as i64;
        let mut out = ScalarField::zeros(target);
        for (idx, &c) in self.coeffs.iter().enumerate() {
            let (i, j, l) = self.grid.split_mode(idx);
            let k = [i, j, l].map(|m| self.grid.integer_wavenumber(m));
            if k.iter().all(|c| c.abs() < limit) {
                out.coeffs[target.mode_index(k)] = c;
            }
        }
        Ok(out)
    }

    /// Applies a real per-mode multiplier.
    pub(crate) fn map_modes<F>(&self, f: F) -> ScalarField
    where
        F: Fn(usize, Complex64) -> Complex64,
    {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| f(k, c))
            .collect();
        ScalarField {
            grid: self.grid.clone(),
            coeffs,
        }
    }
}

/// Three scalar components on one grid.
#[derive(Clone, Debug)]
pub struct VectorField {
    comps: [ScalarField; 3],
}

impl VectorField {
    pub fn new(comps: [ScalarField; 3]) -> Result<Self> {
        comps[0].check_grid(&comps[1])?;
        comps[0].check_grid(&comps[2])?;
        Ok(VectorField { comps })
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        VectorField {
            comps: [
                ScalarField::zeros(grid),
                ScalarField::zeros(grid),
                ScalarField::zeros(grid),
            ],
        }
    }

    pub fn from_fn<F>(grid: &Arc<Grid>, f: F) -> Self
    where
        F: Fn([f64; 3]) -> [f64; 3] + Sync + Send,
    {
        let comps = [0, 1, 2].map(|c| ScalarField::from_fn(grid, |x| f(x)[c]));
        VectorField { comps }
    }

    pub fn from_physical(grid: &Arc<Grid>, samples: [&[f64]; 3]) -> Result<Self> {
        for s in samples {
            if s.len() != grid.len() {
                return Err(Error::ShapeMismatch {
                    expected: grid.len(),
                    got: s.len(),
                });
            }
        }
        let mut coeffs = grid.forward_many(&samples).into_iter();
        let mut next = || ScalarField {
            grid: grid.clone(),
            coeffs: coeffs.next().unwrap(),
        };
        Ok(VectorField {
            comps: [next(), next(), next()],
        })
    }

    pub fn to_physical(&self) -> [Vec<f64>; 3] {
        let grid = self.grid();
        let mut out = grid
            .inverse_many(&[
                self.comps[0].coeffs(),
                self.comps[1].coeffs(),
                self.comps[2].coeffs(),
            ])
            .into_iter();
        [
            out.next().unwrap(),
            out.next().unwrap(),
            out.next().unwrap(),
        ]
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.comps[0].grid()
    }

    pub fn comps(&self) -> &[ScalarField; 3] {
        &self.comps
    }

    pub fn comps_mut(&mut self) -> &mut [ScalarField; 3] {
        &mut self.comps
    }

    pub fn into_comps(self) -> [ScalarField; 3] {
        self.comps
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(ScalarField::is_finite)
    }

    pub fn scale(&mut self, factor: f64) {
        self.comps.iter_mut().for_each(|c| c.scale(factor));
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.scale(factor);
        out
    }

    pub fn add_scaled(&mut self, factor: f64, other: &VectorField) -> Result<()> {
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            a.add_scaled(factor, b)?;
        }
        Ok(())
    }

    pub fn check_grid(&self, other: &VectorField) -> Result<()> {
        self.comps[0].check_grid(&other.comps[0])
    }
}

impl std::ops::Index<usize> for VectorField {
    type Output = ScalarField;

    fn index(&self, i: usize) -> &ScalarField {
        &self.comps[i]
    }
}
