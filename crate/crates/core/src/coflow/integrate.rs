use serde::{Deserialize, Serialize};

use super::error::CoflowError;
use super::state::{refresh_geometry, FlowContext, FlowState, Geometry};
use super::velocity::{metric_velocity, psi_rate};
use crate::fields::FormField;
use crate::torsion::{coclosed_residual, default_coclosed_threshold};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Euler,
    #[default]
    Rk4,
}

/// Uniform time stepping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepPlan {
    pub dt: f64,
    pub n_steps: usize,
}

/// dt = c_cfl h_min^2 / max(1, sup |h|) at the initial state, shrunk so
/// that a whole number of steps reaches t_end.
pub fn plan_steps(state: &FlowState, t_end: f64, c_cfl: f64) -> StepPlan {
    let h = metric_velocity(&state.geometry, state.a);
    let h_min = state.psi.grid().h_min();
    let dt0 = c_cfl * h_min * h_min / h.sup_norm().max(1.0);
    let n_steps = (t_end / dt0).ceil().max(1.0) as usize;
    StepPlan {
        dt: t_end / n_steps as f64,
        n_steps,
    }
}

fn rate_at(psi: &FormField, geo: &Geometry, state: &FlowState, ctx: &FlowContext) -> FormField {
    psi_rate(psi, geo, state.a, state.route, ctx)
}

fn stage(state: &FlowState, psi: &FormField, ctx: &FlowContext) -> Result<FormField, CoflowError> {
    let geo = refresh_geometry(psi, None, ctx).map_err(|e| CoflowError::StabilityViolation {
        step: state.step + 1,
        reason: e.to_string(),
    })?;
    Ok(rate_at(psi, &geo, state, ctx))
}

/// Advances psi by one step and refreshes the geometry; aborts on
/// non-finite values, loss of positivity or loss of closedness.
pub fn step(
    state: &FlowState,
    dt: f64,
    integrator: Integrator,
    ctx: &FlowContext,
    closed_threshold: f64,
) -> Result<FlowState, CoflowError> {
    let k1 = rate_at(&state.psi, &state.geometry, state, ctx);
    let psi = match integrator {
        Integrator::Euler => state.psi.axpy(dt, &k1),
        Integrator::Rk4 => {
            let k2 = stage(state, &state.psi.axpy(0.5 * dt, &k1), ctx)?;
            let k3 = stage(state, &state.psi.axpy(0.5 * dt, &k2), ctx)?;
            let k4 = stage(state, &state.psi.axpy(dt, &k3), ctx)?;
            let mut incr = k1;
            incr = incr.axpy(2.0, &k2);
            incr = incr.axpy(2.0, &k3);
            incr = incr.axpy(1.0, &k4);
            state.psi.axpy(dt / 6.0, &incr)
        }
    };
    let index = state.step + 1;
    let violation = |reason: String| CoflowError::StabilityViolation {
        step: index,
        reason,
    };
    if !psi.is_finite() {
        return Err(violation("non-finite psi".into()));
    }
    let closed = coclosed_residual(&psi, &ctx.diff);
    if !(closed <= closed_threshold) {
        return Err(violation(format!(
            "|d psi| = {closed:e} above {closed_threshold:e}"
        )));
    }
    let geometry = refresh_geometry(&psi, None, ctx).map_err(|e| violation(e.to_string()))?;
    if !(geometry.metric.min_eigenvalue() > 0.0) {
        return Err(violation("metric lost positivity".into()));
    }
    Ok(FlowState {
        psi,
        t: index as f64 * dt,
        step: index,
        a: state.a,
        route: state.route,
        geometry,
    })
}

/// Closedness bound used along a run started from `psi`: the scheme
/// default, or just above the initial residual when that is larger.
pub fn closedness_threshold(psi: &FormField, ctx: &FlowContext) -> f64 {
    let base = coclosed_residual(psi, &ctx.diff);
    default_coclosed_threshold(psi.grid(), ctx.diff.scheme(), psi.sup_norm()).max(base + 1e-12)
}

/// Failed run: the error and the last good state.
#[derive(Debug)]
pub struct RunFailure {
    pub error: CoflowError,
    pub last: FlowState,
}

/// Steps from `state` until `plan.n_steps`, calling `observe` on every new
/// state. The closedness threshold defaults from the scheme and the
/// initial psi.
pub fn run<F>(
    mut state: FlowState,
    plan: StepPlan,
    integrator: Integrator,
    ctx: &FlowContext,
    mut observe: F,
) -> Result<FlowState, Box<RunFailure>>
where
    F: FnMut(&FlowState),
{
    let threshold = closedness_threshold(&state.psi, ctx);
    while state.step < plan.n_steps {
        match step(&state, plan.dt, integrator, ctx, threshold) {
            Ok(next) => {
                observe(&next);
                state = next;
            }
            Err(error) => return Err(Box::new(RunFailure { error, last: state })),
        }
    }
    Ok(state)
}
