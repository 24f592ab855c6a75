//! Periodic-box spectral representation: grid, transforms, operators, norms.

mod field;
mod grid;
pub mod norms;
pub mod ops;

pub use field::{ScalarField, VectorField};
pub use grid::Grid;
pub use norms::{lp_norm, lp_norm_vec, sobolev_norm, sobolev_norm_vec};
pub use ops::{
    dealias, divergence, gradient, lambda_pow, laplacian, leray_project, partial, product,
};

use std::sync::Arc;

use crate::error::Result;

/// Physical samples to Fourier coefficients.
pub fn forward_transform(samples: &[f64], grid: &Arc<Grid>) -> Result<ScalarField> {
    ScalarField::from_physical(grid, samples)
}

/// Fourier coefficients to physical samples.
pub fn inverse_transform(f: &ScalarField) -> Vec<f64> {
    f.to_physical()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn constant_field_has_only_mean() {
        let g = Grid::new(8, 2.0 * PI).unwrap();
        let f = forward_transform(&vec![1.25; g.len()], &g).unwrap();
        assert!((f.coeffs()[0].re - 1.25).abs() < 1e-15);
        assert!(f.coeffs()[1..].iter().all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn cosine_has_two_half_modes() {
        let g = Grid::new(16, 2.0 * PI).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0].cos());
        for (idx, c) in f.coeffs().iter().enumerate() {
            let expect = if idx == g.mode_index([1, 0, 0]) || idx == g.mode_index([-1, 0, 0]) {
                0.5
            } else {
                0.0
            };
            assert!((c.re - expect).abs() < 1e-15 && c.im.abs() < 1e-15);
        }
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let g = Grid::new(8, 2.0 * PI).unwrap();
        assert!(forward_transform(&[0.0; 7], &g).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn round_trip_is_identity(seed in any::<u64>(), n_pow in 2u32..6) {
            let n = 1usize << n_pow;
            let g = Grid::new(n, 2.0 * PI).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let f = forward_transform(&x, &g).unwrap();
            prop_assert!(f.hermitian_defect() < 1e-15);
            let y = inverse_transform(&f);
            let num: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum();
            let den: f64 = x.iter().map(|a| a * a).sum();
            prop_assert!((num / den).sqrt() < 1e-13);
            let parseval = sobolev_norm(&f, 0.0, true);
            let quad = norms::lp_norm_physical(&x, g.cell_volume(), 2.0);
            prop_assert!((parseval / quad - 1.0).abs() < 1e-12);
        }

        #[test]
        fn lambda_powers_compose(seed in any::<u64>(), s in -1.5f64..2.0, t in -1.5f64..2.0) {
            let g = Grid::new(8, 2.0 * PI).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut x: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mean = x.iter().sum::<f64>() / x.len() as f64;
            x.iter_mut().for_each(|v| *v -= mean);
            let mut f = forward_transform(&x, &g).unwrap();
            f.coeffs_mut()[0] = num_complex::Complex64::new(0.0, 0.0);
            let two = lambda_pow(&lambda_pow(&f, s).unwrap(), t).unwrap();
            let one = lambda_pow(&f, s + t).unwrap();
            let scale = one.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
            for (a, b) in two.coeffs().iter().zip(one.coeffs()) {
                prop_assert!((a - b).norm() <= 1e-12 * scale.max(1e-300));
            }
        }

        #[test]
        fn leray_is_idempotent_and_divergence_free(seed in any::<u64>()) {
            let g = Grid::new(8, 2.0 * PI).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut sample = || -> Vec<f64> { (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect() };
            let (a, b, c) = (sample(), sample(), sample());
            let w = VectorField::from_physical(&g, [&a, &b, &c]).unwrap();
            let p = leray_project(&w);
            let pp = leray_project(&p);
            let norm = sobolev_norm_vec(&p, 0.0, true);
            let div = sobolev_norm(&divergence(&p), 0.0, true);
            prop_assert!(div <= 1e-12 * norm);
            for c in 0..3 {
                for (x, y) in p[c].coeffs().iter().zip(pp[c].coeffs()) {
                    prop_assert!((x - y).norm() < 1e-15);
                }
            }
            prop_assert!(norm.is_finite() && norm >= 0.0);
        }
    }
}
