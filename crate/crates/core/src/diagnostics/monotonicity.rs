use super::record::DiagnosticsRecord;

/// Default relative tolerance for counting an increase.
pub const MONOTONICITY_TOL: f64 = 1e-8;

/// Non-increase check of the `H^(1/2)` and `H^1` triple norms along a series.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MonotonicityReport {
    /// Sample indices `i` where the norm exceeded `(1 + tol)` times its
    /// value at `i - 1`.
    pub h_half_violations: Vec<usize>,
    pub h1_violations: Vec<usize>,
    pub sup_h_half: f64,
    pub sup_h1: f64,
    /// Trapezoid integral of `||Lap(u, v, theta)||^2` over the series.
    pub laplacian_integral: f64,
}

impl MonotonicityReport {
    pub fn violation_count(&self) -> usize {
        self.h_half_violations.len() + self.h1_violations.len()
    }

    pub fn is_monotone(&self) -> bool {
        self.violation_count() == 0
    }
}

fn increases(values: &[f64], tol: f64) -> Vec<usize> {
    (1..values.len())
        .filter(|&i| values[i] - values[i - 1] > tol * values[i - 1])
        .collect()
}

/// Trapezoid integral of `values` over `times`.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

pub fn monotonicity_report(series: &[DiagnosticsRecord], tol: f64) -> MonotonicityReport {
    let h_half: Vec<f64> = series.iter().map(|r| r.h_half.triple).collect();
    let h1: Vec<f64> = series.iter().map(|r| r.h1.triple).collect();
    let times: Vec<f64> = series.iter().map(|r| r.time).collect();
    let lap2: Vec<f64> = series.iter().map(|r| r.h2.triple.powi(2)).collect();
    MonotonicityReport {
        h_half_violations: increases(&h_half, tol),
        h1_violations: increases(&h1, tol),
        sup_h_half: h_half.iter().copied().fold(0.0, f64::max),
        sup_h1: h1.iter().copied().fold(0.0, f64::max),
        laplacian_integral: trapezoid(&times, &lap2),
    }
}
