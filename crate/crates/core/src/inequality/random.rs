use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spectral::{leray_project, Grid, ScalarField, VectorField};

/// `count` per-sample seeds drawn from a master generator seeded with `seed`.
pub fn sample_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.random()).collect()
}

/// Integer wavevectors `0 < |k| <= band` with a positive leading nonzero
/// component, in lexicographic order. Their negatives complete the ball.
fn half_ball(band: usize) -> Vec<[i64; 3]> {
    let b = band as i64;
    let mut out = Vec::new();
    for k1 in -b..=b {
        for k2 in -b..=b {
            for k3 in -b..=b {
                let k = [k1, k2, k3];
                let r2 = k1 * k1 + k2 * k2 + k3 * k3;
                let lead = k.iter().copied().find(|&c| c != 0).unwrap_or(0);
                if r2 > 0 && r2 <= b * b && lead > 0 {
                    out.push(k);
                }
            }
        }
    }
    out
}

fn check_band(grid: &Grid, band: usize) -> Result<()> {
    if 3 * band > grid.n() {
        return Err(Error::param(
            "band",
            format!("band {band} exceeds n/3 for n = {}", grid.n()),
        ));
    }
    Ok(())
}

/// Fills `count` real fields with uniformly random phases and amplitude
/// `|k|^slope` (in integer wavenumbers) on `0 < |k| <= band`.
fn random_coeffs(
    grid: &Arc<Grid>,
    rng: &mut ChaCha8Rng,
    band: usize,
    slope: f64,
    count: usize,
) -> Vec<Vec<Complex64>> {
    let mut out = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; count];
    for k in half_ball(band) {
        let amp = ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).powf(0.5 * slope);
        let idx = grid.mode_index(k);
        let conj = grid.conjugate_index(idx);
        for c in out.iter_mut() {
            let phase = std::f64::consts::TAU * rng.random::<f64>();
            let z = Complex64::from_polar(amp, phase);
            c[idx] = z;
            c[conj] = z.conj();
        }
    }
    out
}

/// Reproducible (per `seed`) real scalar field with random phases and `|f_k| = |k|^slope`
/// on `0 < |k| <= band` (integer wavenumbers), zero elsewhere. `band` must
/// not exceed `n/3`.
pub fn random_band_limited_field(
    grid: &Arc<Grid>,
    seed: u64,
    band: usize,
    slope: f64,
) -> Result<ScalarField> {
    check_band(grid, band)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = random_coeffs(grid, &mut rng, band, slope, 1).pop().unwrap();
    ScalarField::from_coeffs(grid, c)
}

/// Divergence-free variant: three independent components, Leray-projected.
pub fn random_band_limited_vector(
    grid: &Arc<Grid>,
    seed: u64,
    band: usize,
    slope: f64,
) -> Result<VectorField> {
    check_band(grid, band)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = random_coeffs(grid, &mut rng, band, slope, 3).into_iter();
    let mut next = || ScalarField::from_coeffs(grid, c.next().unwrap());
    let w = VectorField::new([next()?, next()?, next()?])?;
    Ok(leray_project(&w))
}

/// Least-squares slope of `log |f_k|` against `log |k|` over shell averages
/// (shells of unit width in integer wavenumber, nonzero modes only).
pub fn spectral_slope(f: &ScalarField) -> Option<f64> {
    let grid = f.grid();
    let scale = 2.0 * std::f64::consts::PI / grid.box_length();
    let mut shells: Vec<(f64, f64, usize)> = Vec::new();
    for (k, c) in f.coeffs().iter().enumerate() {
        let kk = grid.kmag2()[k].sqrt() / scale;
        if kk == 0.0 || c.norm() == 0.0 {
            continue;
        }
        let s = kk.round() as usize;
        if shells.len() <= s {
            shells.resize(s + 1, (0.0, 0.0, 0));
        }
        let e = &mut shells[s];
        e.0 += kk.ln();
        e.1 += c.norm().ln();
        e.2 += 1;
    }
    let pts: Vec<(f64, f64)> = shells
        .iter()
        .filter(|s| s.2 > 0)
        .map(|&(x, y, n)| (x / n as f64, y / n as f64))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (mx, my) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), p| (a + p.0 / m, b + p.1 / m));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), p| {
        (a + (p.0 - mx) * (p.1 - my), b + (p.0 - mx).powi(2))
    });
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{divergence, sobolev_norm};
    use std::f64::consts::PI;

    fn grid(n: usize) -> Arc<Grid> {
        Grid::new(n, 2.0 * PI).unwrap()
    }

    #[test]
    fn same_seed_same_field() {
        let g = grid(16);
        let a = random_band_limited_field(&g, 73, 5, -1.0).unwrap();
        let b = random_band_limited_field(&g, 73, 5, -1.0).unwrap();
        let c = random_band_limited_field(&g, 74, 5, -1.0).unwrap();
        assert_eq!(a.coeffs(), b.coeffs());
        assert_ne!(a.coeffs(), c.coeffs());
        let seeds = sample_seeds(9, 4);
        assert_eq!(seeds, sample_seeds(9, 4));
        assert_eq!(seeds.len(), 4);
    }

    #[test]
    fn zero_band_is_zero() {
        let g = grid(8);
        let f = random_band_limited_field(&g, 10, 0, -2.0).unwrap();
        assert_eq!(sobolev_norm(&f, 0.0, false), 0.0);
    }

    #[test]
    fn real_mean_free_and_inside_band() {
        let g = grid(16);
        let f = random_band_limited_field(&g, 20, 5, -1.0).unwrap();
        assert!(f.hermitian_defect() < 1e-15);
        assert_eq!(f.mean(), 0.0);
        for (k, c) in f.coeffs().iter().enumerate() {
            if g.kmag2()[k] > 25.0 + 1e-9 {
                assert_eq!(c.norm(), 0.0);
            }
        }
        assert!(random_band_limited_field(&g, 20, 6, -1.0).is_err());
    }

    #[test]
    fn slope_is_recovered() {
        let g = grid(32);
        let f = random_band_limited_field(&g, 110, 8, -2.0).unwrap();
        let s = spectral_slope(&f).unwrap();
        assert!((s + 2.0).abs() < 0.2, "{s}");
    }

    #[test]
    fn vector_variant_is_solenoidal() {
        let g = grid(16);
        let w = random_band_limited_vector(&g, 51, 5, -1.0).unwrap();
        assert!(sobolev_norm(&divergence(&w), 0.0, false) < 1e-12);
        assert!(sobolev_norm(&w.comps()[0], 0.0, false) > 0.0);
    }
}
