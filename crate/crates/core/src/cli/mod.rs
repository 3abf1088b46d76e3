//! Config-driven runs: parsing, execution, time series, reports and
//! checkpoints.

mod checkpoint;
mod config;
mod error;
mod execute;
mod series;
mod verify;

pub use checkpoint::{Checkpoint, CheckpointError, MAGIC, VERSION};
pub use config::{
    load_config, parse_config, GridConfig, InitialConfig, MonitorConfig, OutputConfig, RouteChoice,
    RunConfig,
};
pub use error::CliError;
pub use execute::{
    checkpoint_name, execute, resume, CommutatorSummary, Outcome, ReferenceSummary, RunReport,
    RunStatus, StateSummary, FAILED_CHECKPOINT, FINAL_CHECKPOINT, REPORT_FILE, SERIES_FILE,
};
pub use series::{header, read_series, write_json, SeriesRow, SeriesWriter};
pub use verify::{format_table, verify_all, Check};
