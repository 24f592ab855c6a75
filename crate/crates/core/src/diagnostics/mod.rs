//! Norms, identity residuals, blow-up integrals, smallness functionals and
//! monotonicity reports sampled along a simulation.

mod blowup;
mod bmo;
mod energy;
mod identities;
mod monotonicity;
mod record;
mod smallness;

pub use blowup::{update_blowup, BlowupMonitor, MonitorSample};
pub use bmo::{bmo_estimate, bmo_estimate_vec, dyadic_oscillation, BmoEstimate, BmoMode};
pub use energy::{dissipation_integral, energy_balance_residual, EnergyLedger};
pub use identities::{
    coupling_cancellation_residual, coupling_pairings, damping_identity_residual,
    damping_identity_sides, relative_gap,
};
pub use monotonicity::{monotonicity_report, trapezoid, MonotonicityReport, MONOTONICITY_TOL};
pub use record::{record, DiagnosticsConfig, DiagnosticsRecord, NormSet};
pub use smallness::{r_functional, smallness_functionals, Smallness, SmallnessConstants};
