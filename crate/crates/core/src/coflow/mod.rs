//! Time integration of the modified Laplacian coflow on psi.

mod error;
mod initial;
mod integrate;
mod state;
mod velocity;

pub use error::CoflowError;
pub use initial::{
    build_initial, random_potential, unit_exact_perturbation, InitialData, Perturbation,
};
pub use integrate::{
    closedness_threshold, plan_steps, run, step, Integrator, RunFailure, StepPlan,
};
pub use state::{refresh_geometry, FlowContext, FlowState, Geometry, Route};
pub use velocity::{
    derivation, general_flow_rate, metric_velocity, psi_rate, psi_rate_direct, psi_rate_direct_of,
    rotation_field, velocity, velocity_of, FlowVelocity,
};
