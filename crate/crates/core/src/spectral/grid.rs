use std::cell::RefCell;
use std::fmt;
use std::ops::Range;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::par;

/// Periodic box `[0, L)^3` sampled on `n` points per axis.
///
/// Physical samples are stored row-major `(i1, i2, i3)` with the `x3` index
/// fastest; Fourier coefficients are stored `(m3, m2, m1)` with the `x1`
/// index fastest. Fourier index `m`
/// maps to the integer wavenumber `m` for `m <= n/2` and `m - n` otherwise,
/// so the lattice is `{-n/2+1, ..., n/2}^3` scaled by `2 pi / L`.
pub struct Grid {
    n: usize,
    box_length: f64,
    /// Physical wavenumber per axis index, Nyquist kept at `+n/2`.
    wavenumbers: Vec<f64>,
    kmag2: Vec<f64>,
    /// Per-mode derivative wavevector and index of `-k`.
    deriv_vectors: Vec<[f64; 3]>,
    conjugates: Vec<usize>,
    dealias_mask: Vec<bool>,
    /// Per axis index: `|k| <= n/3`; and all true.
    axis_kept: AxisSet,
    axis_all: AxisSet,
    fft: Fft3,
    pool: BufferPool,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("box_length", &self.box_length)
            .finish()
    }
}

impl Grid {
    /// Builds a grid with `n` (even, at least 4) points per axis.
    pub fn new(n: usize, box_length: f64) -> Result<Arc<Self>> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "n must be even and >= 4, got {n}"
            )));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box_length must be positive, got {box_length}"
            )));
        }
        let scale = 2.0 * std::f64::consts::PI / box_length;
        let wavenumbers: Vec<f64> = (0..n)
            .map(|m| Self::integer_wavenumber_for(n, m) as f64 * scale)
            .collect();
        let mut deriv_wavenumbers = wavenumbers.clone();
        deriv_wavenumbers[n / 2] = 0.0;

        let cutoff = n as f64 / 3.0;
        let kept: Vec<bool> = (0..n)
            .map(|m| (Self::integer_wavenumber_for(n, m).abs() as f64) <= cutoff)
            .collect();

        let len = n * n * n;
        let mut kmag2 = vec![0.0; len];
        let mut dealias_mask = vec![false; len];
        let mut deriv_vectors = vec![[0.0; 3]; len];
        let mut conjugates = vec![0; len];
        for idx in 0..len {
            let (i, j, l) = (idx % n, (idx / n) % n, idx / (n * n));
            kmag2[idx] = wavenumbers[i].powi(2) + wavenumbers[j].powi(2) + wavenumbers[l].powi(2);
            dealias_mask[idx] = kept[i] && kept[j] && kept[l];
            deriv_vectors[idx] = [
                deriv_wavenumbers[i],
                deriv_wavenumbers[j],
                deriv_wavenumbers[l],
            ];
            conjugates[idx] = (((n - l) % n) * n + (n - j) % n) * n + (n - i) % n;
        }

        Ok(Arc::new(Grid {
            n,
            box_length,
            wavenumbers,
            kmag2,
            deriv_vectors,
            conjugates,
            dealias_mask,
            axis_kept: AxisSet::new(kept),
            axis_all: AxisSet::new(vec![true; n]),
            fft: Fft3::new(n),
            pool: BufferPool::default(),
        }))
    }

    fn integer_wavenumber_for(n: usize, m: usize) -> i64 {
        if m <= n / 2 {
            m as i64
        } else {
            m as i64 - n as i64
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    /// Number of lattice points, `n^3`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn box_volume(&self) -> f64 {
        self.box_length.powi(3)
    }

    pub fn spacing(&self) -> f64 {
        self.box_length / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    /// Storage index of the physical sample at grid point `(i, j, l)`.
    pub fn point_index(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.n + j) * self.n + l
    }

    /// Grid point of physical storage index `idx`.
    pub fn split_point(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx / (n * n), (idx / n) % n, idx % n)
    }

    /// Storage index of the coefficient with axis indices `(i, j, l)`.
    pub fn mode_storage(&self, i: usize, j: usize, l: usize) -> usize {
        (l * self.n + j) * self.n + i
    }

    /// Axis indices of spectral storage index `idx`.
    pub fn split_mode(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx % n, (idx / n) % n, idx / (n * n))
    }

    /// Integer wavenumber of axis index `m`.
    pub fn integer_wavenumber(&self, m: usize) -> i64 {
        Self::integer_wavenumber_for(self.n, m)
    }

    /// Storage index of the mode with integer wavevector `k`.
    pub fn mode_index(&self, k: [i64; 3]) -> usize {
        let n = self.n as i64;
        let wrap = |c: i64| c.rem_euclid(n) as usize;
        self.mode_storage(wrap(k[0]), wrap(k[1]), wrap(k[2]))
    }

    /// Index of the mode `-k`.
    pub fn conjugate_index(&self, idx: usize) -> usize {
        self.conjugates[idx]
    }

    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let (i, j, l) = self.split_mode(idx);
        [
            self.wavenumbers[i],
            self.wavenumbers[j],
            self.wavenumbers[l],
        ]
    }

    /// Wavevector used for first derivatives; Nyquist components are zero so
    /// odd derivatives of real fields stay real.
    pub fn deriv_wavevector(&self, idx: usize) -> [f64; 3] {
        self.deriv_vectors[idx]
    }

    /// `|k|^2` for every mode, in storage order.
    pub fn kmag2(&self) -> &[f64] {
        &self.kmag2
    }

    /// Two-thirds rule: true where every axis satisfies `|k_i| <= n/3`.
    pub fn dealias_mask(&self) -> &[bool] {
        &self.dealias_mask
    }

    /// Largest retained `|k|^2` under the dealias mask.
    pub fn kmax2(&self) -> f64 {
        self.kmag2
            .iter()
            .zip(&self.dealias_mask)
            .filter(|(_, &keep)| keep)
            .map(|(&k2, _)| k2)
            .fold(0.0, f64::max)
    }

    /// Physical coordinates of sample `idx`.
    pub fn coords(&self, idx: usize) -> [f64; 3] {
        let (i, j, l) = self.split_point(idx);
        let h = self.spacing();
        [i as f64 * h, j as f64 * h, l as f64 * h]
    }

    /// Samples `f` at every collocation point.
    pub fn sample<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn([f64; 3]) -> f64 + Sync + Send,
    {
        let mut out = vec![0.0; self.len()];
        par::fill_indexed(&mut out, |idx| f(self.coords(idx)));
        out
    }

    /// Same grid parameters (pointer equality is the fast path).
    pub fn same_as(&self, other: &Grid) -> bool {
        std::ptr::eq(self, other) || (self.n == other.n && self.box_length == other.box_length)
    }

    /// Forward transform with `1/n^3` normalization.
    pub fn forward(&self, samples: &[f64]) -> Result<Vec<Complex64>> {
        self.check_len(samples.len())?;
        Ok(self.forward_many(&[samples]).pop().unwrap())
    }

    /// Inverse transform; the imaginary part (roundoff for Hermitian input)
    /// is discarded.
    pub fn inverse(&self, coeffs: &[Complex64]) -> Result<Vec<f64>> {
        self.check_len(coeffs.len())?;
        Ok(self.inverse_many(&[coeffs]).pop().unwrap())
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::ShapeMismatch {
                expected: self.len(),
                got,
            });
        }
        Ok(())
    }

    /// Forward transforms of several real fields, two per complex transform.
    ///
    /// Panics if any slice has the wrong length.
    pub fn forward_many(&self, fields: &[&[f64]]) -> Vec<Vec<Complex64>> {
        let len = self.len();
        assert!(
            fields.iter().all(|f| f.len() == len),
            "sample length mismatch"
        );
        let mut out = vec![Vec::new(); fields.len()];
        self.forward_fields(fields.len(), false, |f, i| fields[f][i], &mut out);
        out
    }

    /// Inverse transforms of several Hermitian spectra, two per complex transform.
    ///
    /// Panics if any slice has the wrong length.
    pub fn inverse_many(&self, fields: &[&[Complex64]]) -> Vec<Vec<f64>> {
        let len = self.len();
        assert!(
            fields.iter().all(|f| f.len() == len),
            "coefficient length mismatch"
        );
        let mut out = vec![Vec::new(); fields.len()];
        self.inverse_fields(fields.len(), false, |f, k| fields[f][k], &mut out);
        out
    }

    /// Forward transforms of `count` real fields given pointwise by
    /// `sample(field, index)`, written into `out` (resized as needed).
    ///
    /// With `truncate` only modes inside the dealias mask are computed; the
    /// rest of each output is zero.
    pub fn forward_fields<S>(
        &self,
        count: usize,
        truncate: bool,
        sample: S,
        out: &mut [Vec<Complex64>],
    ) where
        S: Fn(usize, usize) -> f64 + Sync + Send,
    {
        let len = self.len();
        let n = self.n;
        let norm = 1.0 / len as f64;
        let half = 0.5 * norm;
        let zero = Complex64::new(0.0, 0.0);
        let mut z = self.pool.take(len);
        let mut mid = self.pool.take(len);
        let axes = if truncate {
            &self.axis_kept
        } else {
            &self.axis_all
        };
        for first in (0..count).step_by(2) {
            let paired = first + 1 < count;
            if paired {
                par::fill_indexed(&mut z, |i| {
                    Complex64::new(sample(first, i), sample(first + 1, i))
                });
            } else {
                par::fill_indexed(&mut z, |i| Complex64::new(sample(first, i), 0.0));
            }
            self.fft.forward(&mut z, &mut mid, axes);

            let keep = |k: usize| !truncate || self.dealias_mask[k];
            if !paired {
                let o = &mut out[first];
                o.resize(len, zero);
                let z = &z;
                par::fill_indexed(o, |k| if keep(k) { z[k] * norm } else { zero });
                continue;
            }
            let (lo, hi) = out.split_at_mut(first + 1);
            let (a_hat, b_hat) = (&mut lo[first], &mut hi[0]);
            a_hat.resize(len, zero);
            b_hat.resize(len, zero);
            let z = &z;
            par::for_each_chunk(a_hat, n, |row, a_row| {
                separate_row(self, z, row, a_row, true, half, &keep);
            });
            par::for_each_chunk(b_hat, n, |row, b_row| {
                separate_row(self, z, row, b_row, false, half, &keep);
            });
        }
        self.pool.give(z);
        self.pool.give(mid);
    }

    /// Inverse transforms of `count` Hermitian spectra given per mode by
    /// `coeff(field, mode)`, written into `out` (resized as needed).
    ///
    /// With `band_limited` coefficients outside the dealias mask are treated
    /// as zero and the corresponding lanes are skipped.
    pub fn inverse_fields<C>(
        &self,
        count: usize,
        band_limited: bool,
        coeff: C,
        out: &mut [Vec<f64>],
    ) where
        C: Fn(usize, usize) -> Complex64 + Sync + Send,
    {
        let len = self.len();
        let mut z = self.pool.take(len);
        let mut mid = self.pool.take(len);
        let axes = if band_limited {
            &self.axis_kept
        } else {
            &self.axis_all
        };
        let zero = Complex64::new(0.0, 0.0);
        let keep = |k: usize| !band_limited || self.dealias_mask[k];
        for first in (0..count).step_by(2) {
            let paired = first + 1 < count;
            if paired {
                par::fill_indexed(&mut z, |k| {
                    if !keep(k) {
                        return zero;
                    }
                    let a = coeff(first, k);
                    let b = coeff(first + 1, k);
                    Complex64::new(a.re - b.im, a.im + b.re)
                });
            } else {
                par::fill_indexed(&mut z, |k| if keep(k) { coeff(first, k) } else { zero });
            }
            self.fft.inverse(&mut z, &mut mid, axes);
            let z = &z;
            out[first].resize(len, 0.0);
            par::fill_indexed(&mut out[first], |i| z[i].re);
            if paired {
                out[first + 1].resize(len, 0.0);
                par::fill_indexed(&mut out[first + 1], |i| z[i].im);
            }
        }
        self.pool.give(z);
        self.pool.give(mid);
    }
}

/// Splits row `row` of the transform of `a + i b` into the spectrum of `a`
/// (`real = true`) or of `b`, using `A_k = (Z_k + conj Z_-k) / 2` and
/// `B_k = (Z_k - conj Z_-k) / 2i`.
fn separate_row<K: Fn(usize) -> bool>(
    grid: &Grid,
    z: &[Complex64],
    row: usize,
    out: &mut [Complex64],
    real: bool,
    half: f64,
    keep: &K,
) {
    let n = grid.n;
    let (l, j) = (row / n, row % n);
    let base = row * n;
    let cbase = (((n - l) % n) * n + (n - j) % n) * n;
    for (i, o) in out.iter_mut().enumerate() {
        if !keep(base + i) {
            *o = Complex64::new(0.0, 0.0);
            continue;
        }
        let zk = z[base + i];
        let zc = z[cbase + (n - i) % n].conj();
        *o = if real {
            (zk + zc) * half
        } else {
            let d = zk - zc;
            Complex64::new(d.im * half, -d.re * half)
        };
    }
}

/// Reusable scratch vectors for the transforms.
#[derive(Default)]
pub(crate) struct BufferPool(Mutex<Vec<Vec<Complex64>>>);

impl BufferPool {
    const MAX_POOLED: usize = 16;

    fn take(&self, len: usize) -> Vec<Complex64> {
        let mut v = self.0.lock().unwrap().pop().unwrap_or_default();
        v.resize(len, Complex64::new(0.0, 0.0));
        v
    }

    fn give(&self, v: Vec<Complex64>) {
        let mut pool = self.0.lock().unwrap();
        if pool.len() < Self::MAX_POOLED {
            pool.push(v);
        }
    }
}

/// Unnormalized 3D complex FFT done in two passes over x1-planes and
/// x3-planes, transposing each plane in cache.
///
/// Physical data is in point order `(i * n + j) * n + l`; spectral data is in
/// mode order `(l * n + j) * n + i`.
struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch_len: usize,
}

impl Fft3 {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = [&forward, &inverse]
            .iter()
            .map(|p| {
                p.get_inplace_scratch_len()
                    .max(p.get_outofplace_scratch_len())
            })
            .max()
            .unwrap_or(0);
        Fft3 {
            n,
            forward,
            inverse,
            scratch_len,
        }
    }

    /// Runs `f` with this thread's plane buffers `(pa, pb, scratch)`.
    fn with_planes<R>(
        &self,
        f: impl FnOnce(&mut [Complex64], &mut [Complex64], &mut [Complex64]) -> R,
    ) -> R {
        thread_local! {
            static PLANES: RefCell<[Vec<Complex64>; 3]> = RefCell::new(Default::default());
        }
        let n2 = self.n * self.n;
        PLANES.with(|cell| {
            let mut bufs = cell.borrow_mut();
            let zero = Complex64::new(0.0, 0.0);
            for (b, len) in bufs.iter_mut().zip([n2, n2, self.scratch_len]) {
                b.resize(len, zero);
            }
            let [pa, pb, scratch] = &mut *bufs;
            f(
                &mut pa[..n2],
                &mut pb[..n2],
                &mut scratch[..self.scratch_len],
            )
        })
    }

    /// Physical samples in `data` to their spectrum in mode order.
    ///
    /// Only modes whose three axis indices satisfy `keep` are computed; the
    /// other entries of `data` are left unspecified.
    fn forward(&self, data: &mut [Complex64], mid: &mut [Complex64], keep: &AxisSet) {
        let n = self.n;
        let plan = &self.forward;
        // x1-planes: transform along x3 and x2; mid holds (i, l, j).
        par::for_each_chunk_pair(data, mid, n * n, |_, plane, out| {
            self.with_planes(|_, pb, scratch| {
                plan.process_with_scratch(plane, scratch);
                transpose_into(plane, pb, n);
                for r in keep.rows(n) {
                    plan.process_with_scratch(&mut pb[r.clone()], scratch);
                    out[r.clone()].copy_from_slice(&pb[r]);
                }
            });
        });
        // x3-planes: gather (i, j) for fixed l, transform along x1.
        let mid: &[Complex64] = mid;
        par::for_each_chunk(data, n * n, |l, plane| {
            if !keep.flags[l] {
                return;
            }
            self.with_planes(|pa, pb, scratch| {
                for i in 0..n {
                    let src = (i * n + l) * n;
                    pa[i * n..(i + 1) * n].copy_from_slice(&mid[src..src + n]);
                }
                transpose_into(pa, pb, n);
                for r in keep.rows(n) {
                    plan.process_with_scratch(&mut pb[r.clone()], scratch);
                    plane[r.clone()].copy_from_slice(&pb[r]);
                }
            });
        });
    }

    /// Spectrum in mode order in `data` to physical samples.
    ///
    /// Entries of modes with an axis index outside `keep` must be zero.
    fn inverse(&self, data: &mut [Complex64], mid: &mut [Complex64], keep: &AxisSet) {
        let n = self.n;
        let plan = &self.inverse;
        // x3-planes: transform along x1; mid holds (l, i, j).
        par::for_each_chunk_pair(data, mid, n * n, |l, plane, out| {
            if !keep.flags[l] {
                return;
            }
            self.with_planes(|_, _, scratch| {
                for r in keep.rows(n) {
                    plan.process_with_scratch(&mut plane[r], scratch);
                }
            });
            transpose_into(plane, out, n);
        });
        // x1-planes: gather (l, j) for fixed i, transform along x2 and x3.
        let mid: &[Complex64] = mid;
        par::for_each_chunk(data, n * n, |i, plane| {
            self.with_planes(|pa, pb, scratch| {
                for l in 0..n {
                    let row = &mut pb[l * n..(l + 1) * n];
                    if keep.flags[l] {
                        let src = (l * n + i) * n;
                        row.copy_from_slice(&mid[src..src + n]);
                    } else {
                        row.fill(Complex64::new(0.0, 0.0));
                    }
                }
                for r in keep.rows(n) {
                    plan.process_with_scratch(&mut pb[r], scratch);
                }
                transpose_into(pb, pa, n);
                plan.process_outofplace_with_scratch(pa, plane, scratch);
            });
        });
    }
}

/// Subset of axis indices, as flags and as maximal contiguous runs.
struct AxisSet {
    flags: Vec<bool>,
    runs: Vec<Range<usize>>,
}

impl AxisSet {
    fn new(flags: Vec<bool>) -> Self {
        let mut runs: Vec<Range<usize>> = Vec::new();
        for (m, _) in flags.iter().enumerate().filter(|(_, &f)| f) {
            match runs.last_mut() {
                Some(r) if r.end == m => r.end = m + 1,
                _ => runs.push(m..m + 1),
            }
        }
        AxisSet { flags, runs }
    }

    /// Element ranges of the selected rows of an `n x n` plane.
    fn rows(&self, n: usize) -> impl Iterator<Item = Range<usize>> + '_ {
        self.runs.iter().map(move |r| r.start * n..r.end * n)
    }
}

/// `dst = src^T` for `n x n` row-major blocks.
fn transpose_into(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const B: usize = 8;
    for r0 in (0..n).step_by(B) {
        for c0 in (0..n).step_by(B) {
            for r in r0..(r0 + B).min(n) {
                for c in c0..(c0 + B).min(n) {
                    dst[c * n + r] = src[r * n + c];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_or_tiny_grids() {
        assert!(Grid::new(7, 1.0).is_err());
        assert!(Grid::new(2, 1.0).is_err());
        assert!(Grid::new(8, 0.0).is_err());
    }

    #[test]
    fn lattice_has_single_zero_mode_and_nyquist_at_plus_half() {
        let g = Grid::new(8, 2.0 * std::f64::consts::PI).unwrap();
        let zeros = g.kmag2().iter().filter(|&&k| k == 0.0).count();
        assert_eq!(zeros, 1);
        assert_eq!(g.integer_wavenumber(4), 4);
        assert_eq!(g.integer_wavenumber(5), -3);
        assert_eq!(g.deriv_wavevector(g.mode_storage(4, 0, 0))[0], 0.0);
    }

    #[test]
    fn dealias_mask_cuts_above_one_third() {
        let g = Grid::new(32, 2.0 * std::f64::consts::PI).unwrap();
        assert!(g.dealias_mask()[g.mode_index([10, -10, 10])]);
        assert!(!g.dealias_mask()[g.mode_index([11, 0, 0])]);
        assert!(!g.dealias_mask()[g.mode_index([0, 16, 0])]);
    }

    #[test]
    fn box_length_scales_wavenumbers() {
        let g = Grid::new(8, 1.0).unwrap();
        let k = g.wavevector(g.mode_index([1, 0, -2]));
        let s = 2.0 * std::f64::consts::PI;
        assert!((k[0] - s).abs() < 1e-14 && (k[2] + 2.0 * s).abs() < 1e-14);
    }

    #[test]
    fn pruned_transforms_agree_on_band_limited_data() {
        let g = Grid::new(16, 2.0 * std::f64::consts::PI).unwrap();
        let a = g.sample(|x| (x[0] + 2.0 * x[1]).sin() + (5.0 * x[2]).cos() * x[0].sin());
        let b = g.sample(|x| (3.0 * x[1] - x[2]).cos());
        let full = g.forward_many(&[&a, &b]);
        let mut pruned = vec![Vec::new(); 2];
        g.forward_fields(
            2,
            true,
            |f, i| if f == 0 { a[i] } else { b[i] },
            &mut pruned,
        );
        for f in 0..2 {
            for k in 0..g.len() {
                let expect = if g.dealias_mask()[k] {
                    full[f][k]
                } else {
                    Complex64::new(0.0, 0.0)
                };
                assert!((pruned[f][k] - expect).norm() < 1e-15);
            }
        }
        let mut back = vec![Vec::new(); 2];
        g.inverse_fields(2, true, |f, k| pruned[f][k], &mut back);
        let reference = g.inverse_many(&[&pruned[0], &pruned[1]]);
        for f in 0..2 {
            for (x, y) in back[f].iter().zip(&reference[f]) {
                assert!((x - y).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn spectrum_is_stored_with_first_axis_fastest() {
        let g = Grid::new(8, 2.0 * std::f64::consts::PI).unwrap();
        let a = g.sample(|x| (x[0] + 2.0 * x[1] - 3.0 * x[2]).cos());
        let hat = g.forward(&a).unwrap();
        let idx = g.mode_index([1, 2, -3]);
        assert_eq!(idx, (5 * 8 + 2) * 8 + 1);
        assert!((hat[idx].re - 0.5).abs() < 1e-14);
        assert!((hat[g.conjugate_index(idx)].re - 0.5).abs() < 1e-14);
        assert_eq!(g.wavevector(idx), [1.0, 2.0, -3.0]);
    }

    #[test]
    fn paired_transforms_match_single() {
        let g = Grid::new(8, 2.0 * std::f64::consts::PI).unwrap();
        let a = g.sample(|x| (x[0] + 2.0 * x[1]).sin() + 0.3);
        let b = g.sample(|x| (x[2]).cos() * (x[0]).sin());
        let pair = g.forward_many(&[&a, &b]);
        let single_b = g.forward_many(&[&b]).pop().unwrap();
        for (p, s) in pair[1].iter().zip(&single_b) {
            assert!((p - s).norm() < 1e-15);
        }
        let back = g.inverse_many(&[&pair[0], &pair[1]]);
        for (x, y) in back[0].iter().zip(&a) {
            assert!((x - y).abs() < 1e-14);
        }
    }
}
