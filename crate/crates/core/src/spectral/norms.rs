use super::{ScalarField, VectorField};
use crate::error::{Error, Result};
use crate::par;

/// Spectral weight of mode `k` for the (in)homogeneous Sobolev norm of order `s`.
fn sobolev_weight(kmag2: f64, s: f64, homogeneous: bool) -> f64 {
    if homogeneous {
        if kmag2 == 0.0 {
            // Mean counts only for s = 0 (L^2); negative orders ignore it.
            if s == 0.0 {
                1.0
            } else {
                0.0
            }
        } else if s == 0.0 {
            1.0
        } else {
            kmag2.powf(s)
        }
    } else {
        (1.0 + kmag2).powf(s)
    }
}

/// Squared Sobolev norm via Parseval: `L^3 sum_k w_k |f_k|^2`.
pub fn sobolev_norm_sq(f: &ScalarField, s: f64, homogeneous: bool) -> f64 {
    let grid = f.grid();
    let kmag2 = grid.kmag2();
    let c = f.coeffs();
    grid.box_volume()
        * par::sum_indexed(c.len(), |k| {
            sobolev_weight(kmag2[k], s, homogeneous) * c[k].norm_sqr()
        })
}

/// `||f||_{H^s}` (`homogeneous = false`) or `||f||_{\dot H^s}`.
pub fn sobolev_norm(f: &ScalarField, s: f64, homogeneous: bool) -> f64 {
    sobolev_norm_sq(f, s, homogeneous).sqrt()
}

pub fn sobolev_norm_vec_sq(w: &VectorField, s: f64, homogeneous: bool) -> f64 {
    w.comps()
        .iter()
        .map(|c| sobolev_norm_sq(c, s, homogeneous))
        .sum()
}

pub fn sobolev_norm_vec(w: &VectorField, s: f64, homogeneous: bool) -> f64 {
    sobolev_norm_vec_sq(w, s, homogeneous).sqrt()
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 || p == f64::INFINITY {
        Ok(())
    } else {
        Err(Error::param(
            "p",
            format!("L^p needs p in [1, inf], got {p}"),
        ))
    }
}

/// `||f||_{L^p}`: Parseval for `p = 2`, grid maximum for `p = inf`, and
/// collocation quadrature with weight `(L/n)^3` otherwise.
pub fn lp_norm(f: &ScalarField, p: f64) -> Result<f64> {
    check_p(p)?;
    if p == 2.0 {
        return Ok(sobolev_norm(f, 0.0, true));
    }
    Ok(lp_norm_physical(
        &f.to_physical(),
        f.grid().cell_volume(),
        p,
    ))
}

/// `|| |w| ||_{L^p}` with `|w|` the Euclidean magnitude.
pub fn lp_norm_vec(w: &VectorField, p: f64) -> Result<f64> {
    check_p(p)?;
    if p == 2.0 {
        return Ok(sobolev_norm_vec(w, 0.0, true));
    }
    let [a, b, c] = w.to_physical();
    let mag: Vec<f64> = (0..a.len())
        .map(|i| (a[i] * a[i] + b[i] * b[i] + c[i] * c[i]).sqrt())
        .collect();
    Ok(lp_norm_physical(&mag, w.grid().cell_volume(), p))
}

/// Quadrature of `|f|^p` on collocation samples (no validation of `p`).
pub fn lp_norm_physical(samples: &[f64], cell_volume: f64, p: f64) -> f64 {
    if p.is_infinite() {
        return par::max_indexed(samples.len(), |i| samples[i].abs());
    }
    lp_power_physical(samples, cell_volume, p).powf(1.0 / p)
}

/// `int |f|^p dx` by collocation quadrature.
pub fn lp_power_physical(samples: &[f64], cell_volume: f64, p: f64) -> f64 {
    cell_volume * par::sum_indexed(samples.len(), |i| samples[i].abs().powf(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use std::f64::consts::PI;

    #[test]
    fn single_mode_parseval() {
        let amp = 1.7;
        let vol = (2.0 * PI).powi(3);
        for n in [4, 8, 16] {
            let g = Grid::new(n, 2.0 * PI).unwrap();
            let f = ScalarField::from_fn(&g, |x| amp * x[0].cos());
            let l2 = sobolev_norm(&f, 0.0, true);
            assert!((l2 * l2 / (amp * amp * vol / 2.0) - 1.0).abs() < 1e-13);
            let hh = sobolev_norm(&f, 0.5, true);
            assert!((hh / l2 - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn constants_have_zero_homogeneous_norm() {
        let g = Grid::new(8, 2.0 * PI).unwrap();
        let f = ScalarField::from_fn(&g, |_| 2.5);
        assert_eq!(sobolev_norm(&f, 1.0, true), 0.0);
        assert!(sobolev_norm(&f, 1.0, false) > 0.0);
    }

    #[test]
    fn lp_norms_of_cosine() {
        let g = Grid::new(16, 2.0 * PI).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0].cos());
        assert!((lp_norm(&f, f64::INFINITY).unwrap() - 1.0).abs() < 1e-15);
        // int cos^4 = 3/8 of the volume.
        let l4 = lp_norm(&f, 4.0).unwrap();
        assert!((l4.powi(4) / (0.375 * g.box_volume()) - 1.0).abs() < 1e-13);
        assert!(lp_norm(&f, 0.5).is_err());
    }
}
