use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::error::CoflowError;
use crate::algebra::{flat_guess, recover_phi, PointForm, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::fields::{
    levi_civita, riemann, ConnectionField, CurvatureField, Differentiator, FormField, MetricField,
};
use crate::torsion::{full_torsion, TorsionTensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// The 4-form rate d[*d phi + 2(A - tr T) phi].
    #[default]
    Direct,
    /// The rate assembled from the metric velocity h and vector field X.
    Velocity,
}

/// Derivative scheme plus the tolerances of the pointwise solve.
#[derive(Clone)]
pub struct FlowContext {
    pub diff: Differentiator,
    pub tol: f64,
    pub max_iter: usize,
}

impl FlowContext {
    pub fn new(diff: Differentiator) -> Self {
        Self {
            diff,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// Everything derived from psi.
#[derive(Clone, Debug)]
pub struct Geometry {
    pub phi: FormField,
    pub metric: MetricField,
    pub gamma: ConnectionField,
    pub curvature: CurvatureField,
    pub torsion: TorsionTensor,
    pub trace_t: Vec<f64>,
    /// Largest Newton iteration count over nodes.
    pub iterations: usize,
    /// sup |*phi - psi| over nodes.
    pub star_residual: f64,
}

/// Recovers phi node by node, then metric, connection, curvature and
/// torsion. Without a guess each node starts from the Euclidean dual of its
/// psi, so the result depends on psi alone.
pub fn refresh_geometry(
    psi: &FormField,
    guess: Option<&FormField>,
    ctx: &FlowContext,
) -> Result<Geometry, CoflowError> {
    let grid = *psi.grid();
    let solved: Vec<_> = (0..grid.node_count())
        .into_par_iter()
        .map(|n| {
            let p = psi.at(n);
            let start: PointForm = match guess {
                Some(g) => g.at(n),
                None => flat_guess(&p),
            };
            recover_phi(&p, &start, ctx.tol, ctx.max_iter).map_err(|source| {
                CoflowError::NoConvergence {
                    node: n,
                    coords: grid.coords(n),
                    source,
                }
            })
        })
        .collect();
    let mut phis = Vec::with_capacity(solved.len());
    let mut metrics = Vec::with_capacity(solved.len());
    let mut iterations = 0;
    let mut star_residual: f64 = 0.0;
    for r in solved {
        let r = r?;
        iterations = iterations.max(r.iterations);
        star_residual = star_residual.max(r.residual);
        phis.push(r.phi);
        metrics.push(r.metric);
    }
    let phi = FormField::from_points(grid, 3, &phis);
    let metric = MetricField::new(grid, metrics);
    let gamma = levi_civita(&metric, &ctx.diff);
    let curvature = riemann(&metric, &gamma, &ctx.diff);
    let torsion = full_torsion(&phi, psi, &metric, &gamma, &ctx.diff);
    let trace_t = torsion.trace(&metric);
    Ok(Geometry {
        phi,
        metric,
        gamma,
        curvature,
        torsion,
        trace_t,
        iterations,
        star_residual,
    })
}

/// The evolving 4-form with its derived geometry.
#[derive(Clone, Debug)]
pub struct FlowState {
    pub psi: FormField,
    pub t: f64,
    pub step: usize,
    /// The positive constant of the flow.
    pub a: f64,
    pub route: Route,
    pub geometry: Geometry,
}

impl FlowState {
    pub fn new(
        psi: FormField,
        a: f64,
        route: Route,
        ctx: &FlowContext,
    ) -> Result<Self, CoflowError> {
        let geometry = refresh_geometry(&psi, None, ctx)?;
        Ok(Self {
            psi,
            t: 0.0,
            step: 0,
            a,
            route,
            geometry,
        })
    }
}
