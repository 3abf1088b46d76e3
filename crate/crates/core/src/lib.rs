pub mod algebra;
pub mod analysis;
pub mod cli;
pub mod coflow;
pub mod fields;
pub mod torsion;
