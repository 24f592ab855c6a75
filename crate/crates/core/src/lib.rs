//! Pseudo-spectral simulator and analysis toolkit for the three-dimensional
//! tropical climate model with nonlinear velocity damping.
//!
//! The unknowns are the barotropic velocity `u` (divergence-free), the first
//! baroclinic velocity `v` and the temperature `theta`, evolved on a periodic
//! box by a Fourier pseudo-spectral discretization:
//!
//! ```text
//! u_t + (u.grad)u - nu Lap u + sigma1 |u|^(alpha-1) u + grad pi + div(v (x) v) = 0
//! v_t + (u.grad)v - eta Lap v + sigma2 |v|^(beta-1) v + (v.grad)u + grad theta = 0
//! theta_t + (u.grad)theta - mu Lap theta + div v = 0,   div u = 0
//! ```
//!
//! Module map:
//!
//! * [`spectral`]: grid, transforms, differential and fractional operators, norms.
//! * [`model`]: right-hand side, integrating-factor RK4 stepping, run driver.
//! * [`diagnostics`]: norms, identity residuals, blow-up integrals, smallness
//!   functionals and monotonicity reports.
//! * [`inequality`]: empirical checks of the interpolation and product
//!   inequalities used by the energy estimates.
//! * [`experiments`]: initial data with prescribed size, canned protocols and sweeps.
//! * [`io`]: configuration files, CSV series, binary checkpoints.
//! * [`verify`]: self-checks against exact identities and closed-form solutions.
//!
//! With the default `parallel` feature the transforms and pointwise kernels
//! run on the rayon pool; without it everything runs sequentially.

pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod inequality;
pub mod io;
pub mod model;
pub(crate) mod par;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use par::{configure_threads, worker_count};

pub use model::{ModelParams, SimState, Terms};
pub use spectral::{Grid, ScalarField, VectorField};
