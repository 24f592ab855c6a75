use crate::spectral::{norms, ScalarField, VectorField};

/// Which BMO estimate feeds the blow-up integrals.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BmoMode {
    /// `||f||_{H^(3/2)}` (homogeneous), which controls the BMO norm.
    #[default]
    Proxy,
    /// Largest mean oscillation over dyadic cubes.
    Dyadic,
}

impl BmoMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BmoMode::Proxy => "proxy",
            BmoMode::Dyadic => "dyadic",
        }
    }
}

impl std::str::FromStr for BmoMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "proxy" => Ok(BmoMode::Proxy),
            "dyadic" => Ok(BmoMode::Dyadic),
            _ => Err(format!("expected \"proxy\" or \"dyadic\", got {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BmoEstimate {
    pub proxy: f64,
    pub dyadic: f64,
}

impl BmoEstimate {
    pub fn get(&self, mode: BmoMode) -> f64 {
        match mode {
            BmoMode::Proxy => self.proxy,
            BmoMode::Dyadic => self.dyadic,
        }
    }
}

/// Cube splits per axis at the three refinement levels (1, 8 and 64 cubes).
const LEVELS: [usize; 3] = [1, 2, 4];

/// Largest mean oscillation `mean_Q |f - mean_Q f|` over the dyadic cubes of
/// the three levels. `comps` are the physical samples of each component on
/// an `n^3` grid; vector values are compared in the Euclidean norm.
pub fn dyadic_oscillation(comps: &[&[f64]], n: usize) -> f64 {
    let mut best: f64 = 0.0;
    for &m in &LEVELS {
        let edges: Vec<usize> = (0..=m).map(|c| c * n / m).collect();
        for ci in 0..m {
            for cj in 0..m {
                for cl in 0..m {
                    let ranges = [
                        edges[ci]..edges[ci + 1],
                        edges[cj]..edges[cj + 1],
                        edges[cl]..edges[cl + 1],
                    ];
                    best = best.max(cube_oscillation(comps, n, &ranges));
                }
            }
        }
    }
    best
}

fn cube_oscillation(comps: &[&[f64]], n: usize, r: &[std::ops::Range<usize>; 3]) -> f64 {
    let points = || {
        r[0].clone().flat_map(move |i| {
            r[1].clone()
                .flat_map(move |j| r[2].clone().map(move |l| (i * n + j) * n + l))
        })
    };
    let count = (r[0].len() * r[1].len() * r[2].len()) as f64;
    let mean: Vec<f64> = comps
        .iter()
        .map(|c| points().map(|p| c[p]).sum::<f64>() / count)
        .collect();
    points()
        .map(|p| {
            comps
                .iter()
                .zip(&mean)
                .map(|(c, m)| (c[p] - m).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .sum::<f64>()
        / count
}

/// Proxy and dyadic BMO estimates of a scalar field.
pub fn bmo_estimate(f: &ScalarField) -> BmoEstimate {
    let phys = f.to_physical();
    bmo_from_parts(norms::sobolev_norm(f, 1.5, true), &[&phys], f.grid().n())
}

/// Vector version of [`bmo_estimate`] with Euclidean magnitudes.
pub fn bmo_estimate_vec(w: &VectorField) -> BmoEstimate {
    let [a, b, c] = w.to_physical();
    bmo_from_parts(
        norms::sobolev_norm_vec(w, 1.5, true),
        &[&a, &b, &c],
        w.grid().n(),
    )
}

pub(crate) fn bmo_from_parts(proxy: f64, comps: &[&[f64]], n: usize) -> BmoEstimate {
    BmoEstimate {
        proxy,
        dyadic: dyadic_oscillation(comps, n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use std::f64::consts::PI;

    #[test]
    fn constant_has_zero_oscillation() {
        let g = Grid::new(8, 2.0 * PI).unwrap();
        let f = ScalarField::from_fn(&g, |_| 4.0);
        let b = bmo_estimate(&f);
        assert!(b.dyadic < 1e-14);
        assert_eq!(b.proxy, 0.0);
    }

    #[test]
    fn cosine_matches_brute_force() {
        let n = 16;
        let g = Grid::new(n, 2.0 * PI).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0].cos());
        let samples = f.to_physical();
        // Oscillation only depends on the x1 range of the cube.
        let mut expect: f64 = 0.0;
        for m in [1usize, 2, 4] {
            for c in 0..m {
                let xs: Vec<f64> = (c * n / m..(c + 1) * n / m)
                    .map(|i| samples[i * n * n])
                    .collect();
                let mean = xs.iter().sum::<f64>() / xs.len() as f64;
                let osc = xs.iter().map(|x| (x - mean).abs()).sum::<f64>() / xs.len() as f64;
                expect = expect.max(osc);
            }
        }
        let b = bmo_estimate(&f);
        assert!((b.dyadic - expect).abs() < 1e-14);
        assert!(b.dyadic <= 2.0);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("dyadic".parse::<BmoMode>().unwrap(), BmoMode::Dyadic);
        assert!("max".parse::<BmoMode>().is_err());
    }
}
