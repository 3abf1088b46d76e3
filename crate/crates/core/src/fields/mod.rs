//! Tensor fields on a periodic lattice over the 7-torus and the calculus
//! on them.

mod compressed;
mod connection;
mod curvature;
mod derivative;
mod error;
mod exterior;
mod grid;
mod tensor;

pub use compressed::{
    iterated_norms, iterated_norms_compressed, lower_all, BaseLayout, CompressedField,
    IteratedNorms, SlotGroup, MAX_ORDER, NOISE_FLOOR,
};
pub use connection::{covariant_derivative, levi_civita, ConnectionField, MetricField};
pub use curvature::{riemann, CurvatureField, CurvatureSymmetry};
pub use derivative::{Differentiator, Scheme};
pub use error::FieldError;
pub use exterior::{
    codifferential, exterior_calculus, exterior_derivative, grid_inner, hodge_laplacian,
    star_field, trace_laplacian, ExteriorSet,
};
pub use grid::Grid;
pub use tensor::{FormField, TensorField, Variance};
