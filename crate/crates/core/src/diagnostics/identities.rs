use num_complex::Complex64;

use crate::par;
use crate::spectral::{norms, ScalarField, VectorField};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative mismatch `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Both sides of the damping identity
///
/// ```text
/// -sigma int u |u|^(alpha-1) . Lap u
///     = sigma || |u|^((alpha-1)/2) grad u ||^2
///     + 4 sigma (alpha-1)/(alpha+1)^2 || grad |u|^((alpha+1)/2) ||^2
/// ```
///
/// The left side uses the spectral Laplacian and grid quadrature; the right
/// side uses spectral gradients, the chain rule
/// `grad |u|^p = p |u|^(p-2) (grad u)^T u`, and grid quadrature.
pub fn damping_identity_sides(u: &VectorField, alpha: f64, sigma: f64) -> (f64, f64) {
    let grid = u.grid();
    let kmag2 = grid.kmag2();
    let c = [0, 1, 2].map(|i| u[i].coeffs());
    // 0..3: u, 3..6: Lap u, 6..15: d_j u_i at 6 + 3 i + j.
    let mut phys = vec![Vec::new(); 15];
    grid.inverse_fields(
        15,
        false,
        |f, k| match f {
            0..=2 => c[f][k],
            3..=5 => -kmag2[k] * c[f - 3][k],
            _ => {
                let (i, j) = ((f - 6) / 3, (f - 6) % 3);
                I * grid.deriv_wavevector(k)[j] * c[i][k]
            }
        },
        &mut phys,
    );
    let dv = grid.cell_volume();
    let lhs = par::sum_indexed(grid.len(), |x| {
        let u = [phys[0][x], phys[1][x], phys[2][x]];
        let m2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
        let g = pow_half(m2, alpha - 1.0);
        -g * (u[0] * phys[3][x] + u[1] * phys[4][x] + u[2] * phys[5][x])
    });
    let rhs = par::sum_indexed(grid.len(), |x| {
        let u = [phys[0][x], phys[1][x], phys[2][x]];
        let m2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
        if m2 == 0.0 {
            // Both integrands are bounded by |u|^(alpha-1) |grad u|^2.
            return if alpha == 1.0 {
                (6..15).map(|f| phys[f][x] * phys[f][x]).sum()
            } else {
                0.0
            };
        }
        let d = |i: usize, j: usize| phys[6 + 3 * i + j][x];
        let grad2: f64 = (6..15).map(|f| phys[f][x] * phys[f][x]).sum();
        let radial: f64 = (0..3)
            .map(|j| {
                let s = u[0] * d(0, j) + u[1] * d(1, j) + u[2] * d(2, j);
                s * s
            })
            .sum();
        pow_half(m2, alpha - 1.0) * grad2 + (alpha - 1.0) * pow_half(m2, alpha - 3.0) * radial
    });
    (sigma * dv * lhs, sigma * dv * rhs)
}

/// `|u|^e` from `|u|^2`.
fn pow_half(m2: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else {
        m2.powf(0.5 * e)
    }
}

/// Relative residual of the damping identity, see [`damping_identity_sides`].
pub fn damping_identity_residual(u: &VectorField, alpha: f64, sigma: f64) -> f64 {
    let (l, r) = damping_identity_sides(u, alpha, sigma);
    relative_gap(l, r)
}

/// The pairings `int Lambda^s div v Lambda^s theta` and
/// `int Lambda^s grad theta . Lambda^s v`, evaluated in Fourier space.
pub fn coupling_pairings(v: &VectorField, theta: &ScalarField, s: f64) -> (f64, f64) {
    let grid = v.grid();
    let kmag2 = grid.kmag2();
    let (a, b, c) = (v[0].coeffs(), v[1].coeffs(), v[2].coeffs());
    let t = theta.coeffs();
    let weight = |k: usize| {
        if kmag2[k] == 0.0 {
            0.0
        } else {
            kmag2[k].powf(s)
        }
    };
    let vol = grid.box_volume();
    let first = vol
        * par::sum_indexed(grid.len(), |k| {
            let kv = grid.deriv_wavevector(k);
            let div = I * (kv[0] * a[k] + kv[1] * b[k] + kv[2] * c[k]);
            weight(k) * (div.conj() * t[k]).re
        });
    let second = vol
        * par::sum_indexed(grid.len(), |k| {
            let kv = grid.deriv_wavevector(k);
            let g = [0, 1, 2].map(|i| I * kv[i] * t[k]);
            weight(k) * (g[0].conj() * a[k] + g[1].conj() * b[k] + g[2].conj() * c[k]).re
        });
    (first, second)
}

/// `|first + second|` of [`coupling_pairings`], relative to
/// `||v||_{H^(s+1)} ||theta||_{H^s} + ||v||_{H^s} ||theta||_{H^(s+1)}`
/// (homogeneous norms); zero for zero fields.
pub fn coupling_cancellation_residual(v: &VectorField, theta: &ScalarField, s: f64) -> f64 {
    let (p, q) = coupling_pairings(v, theta, s);
    let scale = norms::sobolev_norm_vec(v, s + 1.0, true) * norms::sobolev_norm(theta, s, true)
        + norms::sobolev_norm_vec(v, s, true) * norms::sobolev_norm(theta, s + 1.0, true);
    if scale == 0.0 {
        (p + q).abs()
    } else {
        (p + q).abs() / scale
    }
}
