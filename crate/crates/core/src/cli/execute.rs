use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use super::checkpoint::Checkpoint;
use super::config::{RouteChoice, RunConfig};
use super::error::CliError;
use super::series::{write_json, SeriesRow, SeriesWriter};
use crate::analysis::{
    aggregates, blow_up_time, commutator_monitor, evolution_monitors, first_exit, fit_analyticity,
    lambda_field, reference_curve, shi_sequences, AggregateQuantities, AnalyticityFit, Background,
    EvolutionReport, FitSample, ShiOptions, ShiSequences, Snapshot,
};
use crate::coflow::{
    build_initial, closedness_threshold, plan_steps, step, CoflowError, FlowContext, FlowState,
    Route, StepPlan,
};
use crate::fields::{Differentiator, FormField};
use crate::torsion::coclosed_residual;

pub const SERIES_FILE: &str = "timeseries.csv";
pub const REPORT_FILE: &str = "report.json";
pub const FINAL_CHECKPOINT: &str = "final.g2cf";
pub const FAILED_CHECKPOINT: &str = "last_good.g2cf";

pub fn checkpoint_name(step: usize) -> String {
    format!("checkpoint_{step:06}.g2cf")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum RunStatus {
    Completed,
    Failed { step: usize, reason: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct StateSummary {
    pub step: usize,
    pub t: f64,
    pub dpsi_sup: f64,
    pub lambda_sup: f64,
    pub torsion_sup: f64,
    pub min_eig_g: f64,
    pub aggregates: AggregateQuantities,
    pub sequences: ShiSequences,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReferenceSummary {
    /// sup Lambda at t = 0.
    pub m0: f64,
    pub c_fit: f64,
    pub blow_up_time: f64,
    /// max over rows of phi_n divided by the reference curve.
    pub max_ratio: f64,
    pub first_exit: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutatorSummary {
    pub k: usize,
    pub lhs_sup: f64,
    pub rhs_sup: f64,
    pub c_hat: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    #[serde(flatten)]
    pub status: RunStatus,
    pub dt: f64,
    pub n_steps: usize,
    pub resumed_from: Option<usize>,
    pub m0: f64,
    pub last: StateSummary,
    pub route_discrepancy: Option<f64>,
    pub fit: Option<AnalyticityFit>,
    pub fit_error: Option<String>,
    pub reference: Option<ReferenceSummary>,
    pub evolution: Option<EvolutionReport>,
    pub evolution_error: Option<String>,
    pub commutator: Vec<CommutatorSummary>,
    pub wall_time: f64,
}

/// Result of a run: the report, the last good state (direct route first
/// when both run) and the process exit code.
pub struct Outcome {
    pub report: RunReport,
    pub states: Vec<FlowState>,
    pub exit_code: i32,
}

impl Outcome {
    pub fn state(&self) -> &FlowState {
        &self.states[0]
    }
}

fn routes(choice: RouteChoice) -> Vec<Route> {
    match choice {
        RouteChoice::Direct => vec![Route::Direct],
        RouteChoice::Velocity => vec![Route::Velocity],
        RouteChoice::Both => vec![Route::Direct, Route::Velocity],
    }
}

fn context(cfg: &RunConfig) -> Result<FlowContext, CliError> {
    Ok(FlowContext::new(Differentiator::new(
        cfg.grid()?,
        cfg.scheme,
    )))
}

fn pool(cfg: &RunConfig) -> Result<rayon::ThreadPool, CliError> {
    Ok(rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()?)
}

fn discrepancy(states: &[FlowState]) -> Option<f64> {
    (states.len() == 2).then(|| (&states[0].psi - &states[1].psi).sup_norm())
}

fn summary(
    state: &FlowState,
    cfg: &RunConfig,
    ctx: &FlowContext,
) -> Result<StateSummary, CliError> {
    let geo = &state.geometry;
    let opts = ShiOptions {
        kmax: cfg.monitors.kmax,
        include_forms: cfg.monitors.forms,
    };
    let sequences = shi_sequences(geo, &state.psi, state.t, opts, ctx)?;
    let agg = aggregates(&sequences, geo, &state.psi, state.a);
    Ok(StateSummary {
        step: state.step,
        t: state.t,
        dpsi_sup: coclosed_residual(&state.psi, &ctx.diff),
        lambda_sup: lambda_field(geo, ctx).sup,
        torsion_sup: agg.t_sq.sqrt(),
        min_eig_g: geo.metric.min_eigenvalue(),
        aggregates: agg,
        sequences,
    })
}

fn row_of(s: &StateSummary, route_discrepancy: Option<f64>, wall_time: f64) -> SeriesRow {
    SeriesRow {
        step: s.step,
        t: s.t,
        dpsi_sup: s.dpsi_sup,
        lambda_sup: s.lambda_sup,
        torsion_sup: s.torsion_sup,
        min_eig_g: s.min_eig_g,
        phi_n: s.aggregates.phi_n,
        psi_n: s.aggregates.psi_n,
        psi_n_from_zero: s.aggregates.psi_n_from_zero,
        route_discrepancy,
        wall_time,
        noise_rm: s.sequences.noise.rm,
        noise_torsion: s.sequences.noise.torsion,
        a: s.sequences.a.clone(),
        b: s.sequences.b.clone(),
    }
}

fn checkpoint_of(states: &[FlowState], cfg: &RunConfig, plan: StepPlan) -> Checkpoint {
    let s = &states[0];
    Checkpoint {
        grid: *s.psi.grid(),
        t: s.t,
        coupling: s.a,
        route: cfg.route,
        scheme: cfg.scheme,
        integrator: cfg.integrator,
        step: s.step,
        dt: plan.dt,
        n_steps: plan.n_steps,
        psi: states.iter().map(|s| s.psi.clone()).collect(),
    }
}

/// Everything a run needs besides its current states.
struct Driver<'a> {
    cfg: &'a RunConfig,
    ctx: FlowContext,
    plan: StepPlan,
    threshold: f64,
    m0: f64,
    dir: PathBuf,
    start: Instant,
    resumed_from: Option<usize>,
}

impl Driver<'_> {
    fn drive(
        &self,
        mut states: Vec<FlowState>,
        mut writer: SeriesWriter,
    ) -> Result<Outcome, CliError> {
        let mon = &self.cfg.monitors;
        let mut rows: Vec<SeriesRow> = Vec::new();
        let mut snaps: Vec<Snapshot> = Vec::new();
        let mut record =
            |states: &[FlowState], snaps: &mut Vec<Snapshot>, rows: &mut Vec<SeriesRow>| {
                let s = summary(&states[0], self.cfg, &self.ctx)?;
                let row = row_of(&s, discrepancy(states), self.start.elapsed().as_secs_f64());
                writer.push(&row)?;
                rows.push(row);
                if mon.evolution && states[0].step % mon.every == 0 {
                    snaps.push(Snapshot::capture(&states[0], &self.ctx));
                }
                Ok::<_, CliError>(s)
            };
        let mut last = if self.resumed_from.is_none() {
            Some(record(&states, &mut snaps, &mut rows)?)
        } else {
            None
        };
        let mut status = RunStatus::Completed;
        while states[0].step < self.plan.n_steps {
            let next: Result<Vec<FlowState>, CoflowError> = states
                .iter()
                .map(|s| {
                    step(
                        s,
                        self.plan.dt,
                        self.cfg.integrator,
                        &self.ctx,
                        self.threshold,
                    )
                })
                .collect();
            match next {
                Ok(n) => states = n,
                Err(e) => {
                    let step = match &e {
                        CoflowError::StabilityViolation { step, .. } => *step,
                        _ => states[0].step + 1,
                    };
                    status = RunStatus::Failed {
                        step,
                        reason: e.to_string(),
                    };
                    break;
                }
            }
            let k = states[0].step;
            let every = self.cfg.output.checkpoint_every;
            if every > 0 && k % every == 0 {
                checkpoint_of(&states, self.cfg, self.plan)
                    .save(&self.dir.join(checkpoint_name(k)))?;
            }
            if k % mon.every == 0 || k == self.plan.n_steps {
                last = Some(record(&states, &mut snaps, &mut rows)?);
            }
        }
        let last = match last {
            Some(s) if s.step == states[0].step => s,
            _ => summary(&states[0], self.cfg, &self.ctx)?,
        };
        let failed = status != RunStatus::Completed;
        let name = if failed {
            FAILED_CHECKPOINT
        } else {
            FINAL_CHECKPOINT
        };
        checkpoint_of(&states, self.cfg, self.plan).save(&self.dir.join(name))?;

        let state = &states[0];
        let (mut fit, mut fit_error) = (None, None);
        if mon.fit_kmax > 0 && state.t > 0.0 {
            let opts = ShiOptions {
                kmax: mon.fit_kmax,
                include_forms: false,
            };
            match shi_sequences(&state.geometry, &state.psi, state.t, opts, &self.ctx)
                .and_then(|seq| fit_analyticity(&FitSample::from_sequences(&seq)))
            {
                Ok(f) => fit = Some(f),
                Err(e) => fit_error = Some(e.to_string()),
            }
        }
        let reference = fit.as_ref().filter(|f| !f.degenerate).map(|f| {
            let a = state.a;
            let times: Vec<f64> = rows.iter().map(|r| r.t).collect();
            let values: Vec<f64> = rows.iter().map(|r| r.phi_n).collect();
            let max_ratio = rows
                .iter()
                .map(|r| r.phi_n / reference_curve(r.t, self.m0, a, f.c_fit))
                .fold(0.0, f64::max);
            ReferenceSummary {
                m0: self.m0,
                c_fit: f.c_fit,
                blow_up_time: blow_up_time(self.m0, a, f.c_fit),
                max_ratio,
                first_exit: first_exit(&times, &values, self.m0, a, f.c_fit),
            }
        });
        let (mut evolution, mut evolution_error) = (None, None);
        if mon.evolution {
            match evolution_monitors(&snaps) {
                Ok(r) => evolution = Some(r),
                Err(e) => evolution_error = Some(e.to_string()),
            }
        }
        let mut commutator = Vec::new();
        if mon.commutator {
            let bg = Background::of(&state.geometry);
            for k in 1..=2 {
                let r = commutator_monitor(&state.geometry.torsion.t, &bg, &self.ctx.diff, k)?;
                commutator.push(CommutatorSummary {
                    k,
                    lhs_sup: r.lhs_sup,
                    rhs_sup: r.rhs_sup,
                    c_hat: r.c_hat,
                });
            }
        }
        let report = RunReport {
            config: self.cfg.clone(),
            status: status.clone(),
            dt: self.plan.dt,
            n_steps: self.plan.n_steps,
            resumed_from: self.resumed_from,
            m0: self.m0,
            last,
            route_discrepancy: discrepancy(&states),
            fit,
            fit_error,
            reference,
            evolution,
            evolution_error,
            commutator,
            wall_time: self.start.elapsed().as_secs_f64(),
        };
        write_json(&self.dir.join(REPORT_FILE), &report)?;
        Ok(Outcome {
            report,
            states,
            exit_code: if failed { 2 } else { 0 },
        })
    }
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))
}

/// Builds the initial states, their shared step plan and sup Lambda at t = 0.
fn initial(
    cfg: &RunConfig,
    ctx: &FlowContext,
) -> Result<(Vec<FlowState>, StepPlan, f64, f64), CliError> {
    let grid = cfg.grid()?;
    let psi = build_initial(&cfg.initial_data(), &grid, &ctx.diff)?;
    let threshold = closedness_threshold(&psi, ctx);
    let states: Vec<FlowState> = routes(cfg.route)
        .into_iter()
        .map(|r| FlowState::new(psi.clone(), cfg.coupling, r, ctx))
        .collect::<Result<_, _>>()?;
    let plan = plan_steps(&states[0], cfg.t_end, cfg.c_cfl);
    let m0 = lambda_field(&states[0].geometry, ctx).sup;
    Ok((states, plan, threshold, m0))
}

/// Runs a config from its initial data, writing the time series, the
/// report and checkpoints under the output directory.
pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let start = Instant::now();
    pool(cfg)?.install(|| {
        let ctx = context(cfg)?;
        let dir = cfg.output.dir.clone();
        prepare_dir(&dir)?;
        let (states, plan, threshold, m0) = initial(cfg, &ctx)?;
        let writer = SeriesWriter::create(&dir.join(SERIES_FILE), cfg.monitors.kmax)?;
        Driver {
            cfg,
            ctx,
            plan,
            threshold,
            m0,
            dir,
            start,
            resumed_from: None,
        }
        .drive(states, writer)
    })
}

/// Continues a run from a checkpoint written under the same config.
pub fn resume(checkpoint: &Path, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let ck = Checkpoint::load(checkpoint)?;
    let grid = cfg.grid()?;
    let mismatch = |what: &str| {
        Err(CliError::Validation(format!(
            "checkpoint {what} differs from the config"
        )))
    };
    if ck.grid != grid {
        return mismatch("grid");
    }
    if ck.coupling != cfg.coupling {
        return mismatch("coupling constant");
    }
    if ck.route != cfg.route {
        return mismatch("route");
    }
    if ck.scheme != cfg.scheme {
        return mismatch("scheme");
    }
    if ck.integrator != cfg.integrator {
        return mismatch("integrator");
    }
    pool(cfg)?.install(|| {
        let ctx = context(cfg)?;
        let dir = cfg.output.dir.clone();
        prepare_dir(&dir)?;
        let (_, plan, threshold, m0) = initial(cfg, &ctx)?;
        if plan.dt != ck.dt {
            return mismatch("time step");
        }
        let states: Vec<FlowState> = routes(cfg.route)
            .into_iter()
            .zip(ck.psi.iter())
            .map(|(r, psi): (Route, &FormField)| {
                let mut s = FlowState::new(psi.clone(), ck.coupling, r, &ctx)?;
                s.t = ck.t;
                s.step = ck.step;
                Ok::<_, CliError>(s)
            })
            .collect::<Result<_, _>>()?;
        let writer = SeriesWriter::resume(&dir.join(SERIES_FILE), cfg.monitors.kmax, ck.step)?;
        Driver {
            cfg,
            ctx,
            plan,
            threshold,
            m0,
            dir,
            start,
            resumed_from: Some(ck.step),
        }
        .drive(states, writer)
    })
}
