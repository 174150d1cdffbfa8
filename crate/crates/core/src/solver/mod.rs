//! The linearization scheme: data preparation, `ε`-regularized transport,
//! the Stokes solve with linear perturbation, pressure recovery and the
//! outer Picard iteration.

mod data;
mod picard;
mod stokes;
mod transport;
mod viscosity;

pub use data::{
    divergence_tolerance, eta, eta_value, prepare_data, radial_cutoff, split_velocity, InitialData, SmallnessReport,
};
pub use picard::{
    epsilon_sweep, lambda_recipe, picard_solve, timeline_sup, ConvergenceHistory, LambdaConstants, PicardRun,
    RunStatus, SolverConfig, SolverState, SweepReport, TimeSpec,
};
pub use stokes::{
    linear_stokes_solve, linear_stokes_solve_with, momentum_forcing, recover_pressure, viscous_stress, StokesOptions,
    StokesOutput,
};
pub use transport::{transport_step, transport_step_with, TransportOptions, TransportStats};
pub use viscosity::ViscosityLaw;
