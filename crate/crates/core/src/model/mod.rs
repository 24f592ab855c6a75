//! Right-hand side of the model, integrating-factor RK4 stepping and the run
//! driver.

mod integrator;
mod params;
mod rhs;
mod run;
mod state;

pub use integrator::{cfl_dt, max_speed, step, Stepper};
pub use params::{ModelParams, Terms};
pub use rhs::{damping_term, energy_rates, linear_tendency, nonlinear_rhs, EnergyRates, Tendency};
pub use run::{run, run_with, RunOptions, RunOutput, RunProgress, Stepping};
pub use state::SimState;
