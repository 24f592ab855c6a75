//! Empirical checks of the interpolation, product, commutator and BMO
//! inequalities on random band-limited fields.
//!
//! Every ratio is "left side over right side with constant one"; sweeps
//! report the largest value seen, a lower bound for the best constant on the
//! periodic box.

mod estimates;
mod gn;
mod random;
mod report;

pub use estimates::{
    commutator_ratio, kato_ponce_ratio, kozono_bmo_ratio, linfty_log_ratio, ProductExponents,
};
pub use gn::{gn_ratio, gn_solve_kappa, theory_exponents, GNInstance, TheoryExponents};
pub use random::{
    random_band_limited_field, random_band_limited_vector, sample_seeds, spectral_slope,
};
pub use report::{
    ratio_sweep, reports_to_csv, standard_probes, standard_suite, FieldFamily, Probe, RatioReport,
};
