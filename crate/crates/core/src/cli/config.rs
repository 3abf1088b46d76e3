use std::f64::consts::TAU;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::error::CliError;
use crate::algebra::DIM;
use crate::coflow::{InitialData, Integrator, Perturbation, Route};
use crate::fields::{Grid, Scheme, MAX_ORDER};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RouteChoice {
    #[default]
    Direct,
    Velocity,
    /// Both routes side by side from the same initial data.
    Both,
}

impl RouteChoice {
    /// Route whose state feeds the monitors.
    pub fn primary(self) -> Route {
        match self {
            RouteChoice::Velocity => Route::Velocity,
            _ => Route::Direct,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Nodes per axis; 1 marks an inactive axis.
    pub dims: [usize; DIM],
    #[serde(default = "default_lengths")]
    pub lengths: [f64; DIM],
}

/// Initial data as written in the config, with 1-based axes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialConfig {
    #[default]
    Flat,
    Perturbation {
        amplitude: f64,
        modes: Vec<usize>,
        seed: u64,
        axes: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorConfig {
    /// A time-series row every this many steps.
    #[serde(default = "one")]
    pub every: usize,
    /// Highest order of the derivative sequences in each row.
    #[serde(default = "two")]
    pub kmax: usize,
    /// Include the phi and psi sequences, which need two extra derivatives.
    #[serde(default = "yes")]
    pub forms: bool,
    /// Time-difference monitors over the row snapshots.
    #[serde(default)]
    pub evolution: bool,
    /// Commutator check at the final state with the torsion as test field.
    #[serde(default)]
    pub commutator: bool,
    /// Order of the final analyticity fit; 0 turns it off.
    #[serde(default = "four")]
    pub fit_kmax: usize,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self {
            every: 1,
            kmax: 2,
            forms: true,
            evolution: false,
            commutator: false,
            fit_kmax: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// Checkpoint every this many steps; 0 writes only the final state.
    #[serde(default)]
    pub checkpoint_every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            checkpoint_every: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub t_end: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default)]
    pub route: RouteChoice,
    #[serde(default)]
    pub integrator: Integrator,
    /// The positive constant A of the flow.
    #[serde(default = "one_f")]
    pub coupling: f64,
    #[serde(default = "default_cfl")]
    pub c_cfl: f64,
    #[serde(default = "one")]
    pub workers: usize,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub monitors: MonitorConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_lengths() -> [f64; DIM] {
    [TAU; DIM]
}
fn default_dir() -> PathBuf {
    PathBuf::from("g2flow-out")
}
fn default_cfl() -> f64 {
    0.1
}
fn one() -> usize {
    1
}
fn two() -> usize {
    2
}
fn four() -> usize {
    4
}
fn one_f() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and validates a TOML run config.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let message = e.message().to_string();
        let key = message.split('`').nth(1).map(str::to_string);
        CliError::Parse {
            line: e.span().map(|s| line_of(text, s.start)),
            key,
            message,
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &std::path::Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    parse_config(&text)
}

impl RunConfig {
    pub fn grid(&self) -> Result<Grid, CliError> {
        Grid::new(self.grid.dims, self.grid.lengths)
            .map_err(|e| CliError::Validation(e.to_string()))
    }

    /// Initial data with 0-based axes.
    pub fn initial_data(&self) -> InitialData {
        match &self.initial {
            InitialConfig::Flat => InitialData::Flat,
            InitialConfig::Perturbation {
                amplitude,
                modes,
                seed,
                axes,
            } => InitialData::Perturbation(Perturbation {
                amplitude: *amplitude,
                modes: modes.clone(),
                seed: *seed,
                axes: axes.iter().map(|a| a - 1).collect(),
            }),
        }
    }

    /// Derivative order the row monitors need.
    pub fn monitor_order(&self) -> usize {
        self.monitors.kmax + if self.monitors.forms { 2 } else { 1 }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |m: String| Err(CliError::Validation(m));
        if !(self.coupling > 0.0 && self.coupling.is_finite()) {
            return fail(format!(
                "coupling = {}: the constant A must be positive",
                self.coupling
            ));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return fail(format!("t_end = {} must be positive", self.t_end));
        }
        if !(self.c_cfl > 0.0 && self.c_cfl.is_finite()) {
            return fail(format!("c_cfl = {} must be positive", self.c_cfl));
        }
        if self.workers == 0 {
            return fail("workers must be at least 1".into());
        }
        if self.monitors.every == 0 {
            return fail("monitors.every must be at least 1".into());
        }
        if self.monitor_order() > MAX_ORDER {
            return fail(format!(
                "monitors.kmax = {} needs {} derivatives; at most {MAX_ORDER} are supported",
                self.monitors.kmax,
                self.monitor_order()
            ));
        }
        if self.monitors.fit_kmax > 0 && self.monitors.fit_kmax < 2 {
            return fail("monitors.fit_kmax must be 0 or at least 2".into());
        }
        if self.monitors.fit_kmax + 1 > MAX_ORDER {
            return fail(format!(
                "monitors.fit_kmax must be at most {}",
                MAX_ORDER - 1
            ));
        }
        let grid = self.grid()?;
        if grid.active_axes().is_empty() {
            return fail("grid has no active axis".into());
        }
        if let InitialConfig::Perturbation {
            amplitude,
            modes,
            axes,
            ..
        } = &self.initial
        {
            if !(*amplitude > 0.0 && amplitude.is_finite()) {
                return fail(format!("initial.amplitude = {amplitude} must be positive"));
            }
            if modes.is_empty() || modes.contains(&0) {
                return fail(
                    "initial.modes must be a nonempty list of positive wavenumbers".into(),
                );
            }
            if axes.is_empty() {
                return fail("initial.axes must list at least one axis".into());
            }
            for &a in axes {
                if !(1..=DIM).contains(&a) || !grid.is_active(a - 1) {
                    return fail(format!(
                        "initial.axes entry {a} is not an active axis (axes are 1-based)"
                    ));
                }
            }
            let n = grid
                .active_axes()
                .iter()
                .map(|&a| grid.dims()[a])
                .min()
                .unwrap_or(0);
            if let Some(m) = modes.iter().find(|&&m| 3 * m >= n) {
                return fail(format!(
                    "initial mode {m} is not resolved on {n} nodes; keep 3 m below {n}"
                ));
            }
        }
        Ok(())
    }
}
