use num_complex::Complex64;

use super::{ScalarField, VectorField};
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Fractional power `Lambda^s`, the Fourier multiplier `|k|^s`.
///
/// `s = 0` is the identity (the mean passes through); for `s > 0` the mean is
/// annihilated; for `s < 0` the field must have zero mean.
pub fn lambda_pow(f: &ScalarField, s: f64) -> Result<ScalarField> {
    if s == 0.0 {
        return Ok(f.clone());
    }
    if s < 0.0 {
        let scale = f.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
        if f.coeffs()[0].norm() > 1e-13 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NonzeroMean { s });
        }
    }
    let kmag2 = f.grid().kmag2();
    Ok(f.map_modes(|k, c| {
        if kmag2[k] == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            c * kmag2[k].powf(0.5 * s)
        }
    }))
}

/// Vector version of [`lambda_pow`], componentwise.
pub fn lambda_pow_vec(w: &VectorField, s: f64) -> Result<VectorField> {
    let [a, b, c] = w.comps();
    VectorField::new([lambda_pow(a, s)?, lambda_pow(b, s)?, lambda_pow(c, s)?])
}

/// Spectral derivative along `axis` (multiplication by `i k_axis`).
pub fn partial(f: &ScalarField, axis: usize) -> ScalarField {
    let grid = f.grid().clone();
    f.map_modes(|k, c| I * grid.deriv_wavevector(k)[axis] * c)
}

pub fn gradient(f: &ScalarField) -> VectorField {
    VectorField::new([partial(f, 0), partial(f, 1), partial(f, 2)])
        .expect("components share a grid")
}

pub fn divergence(w: &VectorField) -> ScalarField {
    let grid = w.grid().clone();
    let [a, b, c] = w.comps();
    let (a, b, c) = (a.coeffs(), b.coeffs(), c.coeffs());
    let coeffs = (0..grid.len())
        .map(|k| {
            let kv = grid.deriv_wavevector(k);
            I * (kv[0] * a[k] + kv[1] * b[k] + kv[2] * c[k])
        })
        .collect();
    ScalarField::from_coeffs(&grid, coeffs).expect("length matches grid")
}

pub fn laplacian(f: &ScalarField) -> ScalarField {
    let kmag2 = f.grid().kmag2();
    f.map_modes(|k, c| -kmag2[k] * c)
}

pub fn laplacian_vec(w: &VectorField) -> VectorField {
    let [a, b, c] = w.comps();
    VectorField::new([laplacian(a), laplacian(b), laplacian(c)]).expect("components share a grid")
}

/// Leray projection `(I - k k^T / |k|^2) w_k` onto divergence-free fields.
///
/// Uses the derivative wavevector, so the output has exactly zero discrete
/// divergence; modes whose derivative wavevector vanishes pass through.
pub fn leray_project(w: &VectorField) -> VectorField {
    let mut out = w.clone();
    leray_project_in_place(&mut out);
    out
}

pub(crate) fn leray_project_in_place(w: &mut VectorField) {
    let grid = w.grid().clone();
    let [a, b, c] = w.comps_mut();
    let (a, b, c) = (a.coeffs_mut(), b.coeffs_mut(), c.coeffs_mut());
    for k in 0..grid.len() {
        let kv = grid.deriv_wavevector(k);
        let k2 = kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2];
        if k2 == 0.0 {
            continue;
        }
        let kdotw = (kv[0] * a[k] + kv[1] * b[k] + kv[2] * c[k]) / k2;
        a[k] -= kv[0] * kdotw;
        b[k] -= kv[1] * kdotw;
        c[k] -= kv[2] * kdotw;
    }
}

/// Zeroes every coefficient outside the two-thirds mask.
pub fn dealias(f: &ScalarField) -> ScalarField {
    let mut out = f.clone();
    dealias_in_place(&mut out);
    out
}

pub(crate) fn dealias_in_place(f: &mut ScalarField) {
    let grid = f.grid().clone();
    for (c, &keep) in f.coeffs_mut().iter_mut().zip(grid.dealias_mask()) {
        if !keep {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

pub fn dealias_vec(w: &VectorField) -> VectorField {
    let [a, b, c] = w.comps();
    VectorField::new([dealias(a), dealias(b), dealias(c)]).expect("components share a grid")
}

/// Pseudo-spectral product: multiply in physical space, transform, truncate.
///
/// Exact on the retained modes when both factors are inside the mask.
pub fn product(f: &ScalarField, g: &ScalarField) -> Result<ScalarField> {
    f.check_grid(g)?;
    let grid = f.grid();
    let phys = grid.inverse_many(&[f.coeffs(), g.coeffs()]);
    let prod: Vec<f64> = phys[0].iter().zip(&phys[1]).map(|(a, b)| a * b).collect();
    let mut out = ScalarField::from_physical(grid, &prod)?;
    dealias_in_place(&mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{norms, Grid};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn grid(n: usize) -> Arc<Grid> {
        Grid::new(n, 2.0 * PI).unwrap()
    }

    fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
        a.coeffs()
            .iter()
            .zip(b.coeffs())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn lambda_zero_power_is_identity_including_mean() {
        let g = grid(8);
        let f = ScalarField::from_fn(&g, |x| 2.0 + x[0].cos());
        assert_eq!(max_diff(&lambda_pow(&f, 0.0).unwrap(), &f), 0.0);
    }

    #[test]
    fn lambda_half_scales_wavenumber_two_by_sqrt_two() {
        let g = grid(16);
        let f = ScalarField::from_fn(&g, |x| (2.0 * x[0]).cos());
        let h = lambda_pow(&f, 0.5).unwrap();
        let c = h.mode([2, 0, 0]);
        assert!((c.re - 0.5 * 2f64.sqrt()).abs() < 1e-14 && c.im.abs() < 1e-14);
    }

    #[test]
    fn lambda_annihilates_constants_and_rejects_negative_power_with_mean() {
        let g = grid(8);
        let f = ScalarField::from_fn(&g, |_| 3.0);
        let h = lambda_pow(&f, 1.0).unwrap();
        assert!(h.coeffs().iter().all(|c| c.norm() == 0.0));
        assert!(matches!(
            lambda_pow(&f, -0.5),
            Err(Error::NonzeroMean { .. })
        ));
    }

    #[test]
    fn gradient_of_sine() {
        let g = grid(16);
        let f = ScalarField::from_fn(&g, |x| x[1].sin());
        let grad = gradient(&f);
        let expect = ScalarField::from_fn(&g, |x| x[1].cos());
        assert!(max_diff(&grad[0], &ScalarField::zeros(&g)) < 1e-15);
        assert!(max_diff(&grad[1], &expect) < 1e-15);
        assert!(max_diff(&grad[2], &ScalarField::zeros(&g)) < 1e-15);
    }

    #[test]
    fn laplacian_eigenvalue() {
        let g = grid(16);
        let f = ScalarField::from_fn(&g, |x| (3.0 * x[2]).cos());
        let expect = ScalarField::from_fn(&g, |x| -9.0 * (3.0 * x[2]).cos());
        assert!(max_diff(&laplacian(&f), &expect) < 1e-13);
    }

    #[test]
    fn leray_examples() {
        let g = grid(16);
        let phi = ScalarField::from_fn(&g, |x| (x[0] + 2.0 * x[1]).sin() * x[2].cos());
        let p = leray_project(&gradient(&phi));
        assert!(norms::sobolev_norm_vec(&p, 0.0, true) < 1e-13);

        let shear = VectorField::from_fn(&g, |x| [x[1].sin(), 0.0, 0.0]);
        let p = leray_project(&shear);
        for c in 0..3 {
            assert!(max_diff(&p[c], &shear[c]) < 1e-15);
        }

        let compressive = VectorField::from_fn(&g, |x| [x[0].sin(), 0.0, 0.0]);
        let p = leray_project(&compressive);
        assert!(norms::sobolev_norm_vec(&p, 0.0, true) < 1e-14);
    }

    #[test]
    fn dealias_examples() {
        let g = grid(16);
        let band = ScalarField::from_fn(&g, |x| x[0].cos() + (5.0 * x[1]).sin());
        assert!(max_diff(&dealias(&band), &band) < 1e-15);

        let nyq = ScalarField::from_fn(&g, |x| (8.0 * x[0]).cos());
        assert!(dealias(&nyq).coeffs().iter().all(|c| c.norm() == 0.0));

        let s = ScalarField::from_fn(&g, |x| x[0].sin());
        let sq = product(&s, &s).unwrap();
        let exact = ScalarField::from_fn(&g, |x| 0.5 * (1.0 - (2.0 * x[0]).cos()));
        assert!(max_diff(&sq, &exact) < 1e-15);
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let a = ScalarField::zeros(&grid(8));
        let b = ScalarField::zeros(&Grid::new(8, 1.0).unwrap());
        assert!(matches!(product(&a, &b), Err(Error::GridMismatch)));
    }
}
