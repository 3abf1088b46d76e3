//! Pointwise multilinear algebra of G2-structures in seven dimensions.

mod error;
mod form;
mod identities;
mod metric;
mod projection;
mod structure;
pub mod tables;

pub use error::AlgebraError;
pub(crate) use form::factorial;
pub use form::PointForm;
pub use identities::{identity_residuals, IdentityResiduals};
pub use metric::{hodge_star, metric_from_phi, BilinearFormB, Metric, POSITIVITY_FLOOR};
pub use projection::{project, two_form_operator, Component, ProjectionSplit};
pub use structure::{
    flat_guess, phi_from_psi, recover_phi, standard_structure, PhiRecovery, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};
pub use tables::{Mat7, DIM};
