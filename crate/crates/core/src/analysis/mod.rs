//! Diagnostics along a flow: the Lambda quantity, the weighted derivative
//! sequences and their sums, the analyticity fit and the inequality
//! monitors.

mod aggregates;
mod error;
mod fit;
mod lambda;
mod monitors;
mod reference;
mod shi;

pub use aggregates::{aggregates, p_function, structure_norms, AggregateQuantities};
pub use error::AnalysisError;
pub use fit::{fit_analyticity, predicted_numerator, AnalyticityFit, FitSample};
pub use lambda::{lambda_field, LambdaField};
pub use monitors::{
    commutator, commutator_monitor, dense_norm_sq, evolution_monitors, Background,
    CommutatorReport, EvolutionReport, Snapshot,
};
pub use reference::{blow_up_time, first_exit, initial_bound, reference_curve};
pub use shi::{
    ln_factorial, shi_sequences, DerivativeNorms, NoiseFlags, ShiOptions, ShiSequences,
    TildeEntries,
};
