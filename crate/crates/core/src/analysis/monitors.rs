use serde::{Deserialize, Serialize};

use super::error::AnalysisError;
use super::lambda::lambda_field;
use super::shi::ln_factorial;
use crate::coflow::{metric_velocity, FlowContext, FlowState, Geometry};
use crate::fields::{
    covariant_derivative, levi_civita, riemann, trace_laplacian, CompressedField, ConnectionField,
    CurvatureField, Differentiator, FieldError, MetricField, SlotGroup, TensorField,
};

/// Pointwise squared full norm of a covariant tensor.
pub fn dense_norm_sq(t: &TensorField, g: &MetricField) -> Vec<f64> {
    CompressedField::from_dense(t, vec![SlotGroup::Single; t.rank()]).norm_sq_field(g)
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

/// Metric, connection and curvature of a background, which need not come
/// from a G2-structure.
#[derive(Clone, Debug)]
pub struct Background {
    pub metric: MetricField,
    pub gamma: ConnectionField,
    pub curvature: CurvatureField,
}

impl Background {
    pub fn from_metric(metric: MetricField, diff: &Differentiator) -> Self {
        let gamma = levi_civita(&metric, diff);
        let curvature = riemann(&metric, &gamma, diff);
        Self {
            metric,
            gamma,
            curvature,
        }
    }

    pub fn of(geo: &Geometry) -> Self {
        Self {
            metric: geo.metric.clone(),
            gamma: geo.gamma.clone(),
            curvature: geo.curvature.clone(),
        }
    }
}

/// Both sides of the commutator estimate between nabla^k and the trace
/// Laplacian, pointwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorReport {
    pub k: usize,
    /// |nabla^k Lap S - Lap nabla^k S|
    pub lhs: Vec<f64>,
    /// (p+1) sum_i (k+2)!/((i+2)!(k-i)!) |nabla^i Rm| |nabla^(k-i) S|
    pub rhs: Vec<f64>,
    pub lhs_sup: f64,
    pub rhs_sup: f64,
    /// sup of lhs/rhs where rhs > 0; `None` when rhs vanishes everywhere.
    pub c_hat: Option<f64>,
}

/// The commutator tensor nabla^k Lap S - Lap nabla^k S.
pub fn commutator(
    s: &TensorField,
    bg: &Background,
    diff: &Differentiator,
    k: usize,
) -> TensorField {
    let lap = |f: &TensorField| trace_laplacian(f, &bg.metric, &bg.gamma, diff);
    let nabla_k = |f: &TensorField| {
        (0..k).fold(f.clone(), |acc, _| {
            covariant_derivative(&acc, &bg.gamma, diff)
        })
    };
    &nabla_k(&lap(s)) - &lap(&nabla_k(s))
}

pub fn commutator_monitor(
    s: &TensorField,
    bg: &Background,
    diff: &Differentiator,
    k: usize,
) -> Result<CommutatorReport, AnalysisError> {
    if !(1..=2).contains(&k) {
        return Err(AnalysisError::Unavailable(format!(
            "commutator order {k}; supported orders are 1 and 2"
        )));
    }
    if s.variance()
        .iter()
        .any(|v| *v != crate::fields::Variance::Co)
    {
        return Err(
            FieldError::InvalidGrid("commutator test field must be covariant".into()).into(),
        );
    }
    let g = &bg.metric;
    let lhs: Vec<f64> = dense_norm_sq(&commutator(s, bg, diff, k), g)
        .into_iter()
        .map(f64::sqrt)
        .collect();

    let mut rm = CompressedField::from_dense(
        &bg.curvature.rm,
        vec![SlotGroup::Anti(2), SlotGroup::Anti(2)],
    );
    let mut s_level = s.clone();
    let mut rm_norms = Vec::with_capacity(k + 1);
    let mut s_norms = Vec::with_capacity(k + 1);
    for i in 0..=k {
        if i > 0 {
            rm = rm.covariant_derivative(&bg.gamma, diff);
            s_level = covariant_derivative(&s_level, &bg.gamma, diff);
        }
        rm_norms.push(
            rm.norm_sq_field(g)
                .into_iter()
                .map(f64::sqrt)
                .collect::<Vec<_>>(),
        );
        s_norms.push(
            dense_norm_sq(&s_level, g)
                .into_iter()
                .map(f64::sqrt)
                .collect::<Vec<_>>(),
        );
    }
    let p = s.rank() as f64;
    let coef: Vec<f64> = (0..=k as i64)
        .map(|i| {
            (ln_factorial(k as i64 + 2) - ln_factorial(i + 2) - ln_factorial(k as i64 - i)).exp()
        })
        .collect();
    let rhs: Vec<f64> = (0..lhs.len())
        .map(|n| {
            (p + 1.0)
                * (0..=k)
                    .map(|i| coef[i] * rm_norms[i][n] * s_norms[k - i][n])
                    .sum::<f64>()
        })
        .collect();
    let c_hat = lhs
        .iter()
        .zip(&rhs)
        .filter(|(_, r)| **r > 0.0)
        .map(|(l, r)| l / r)
        .reduce(f64::max);
    Ok(CommutatorReport {
        k,
        lhs_sup: sup(&lhs),
        rhs_sup: sup(&rhs),
        lhs,
        rhs,
        c_hat,
    })
}

/// What the evolution monitors need from one time level.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub step: usize,
    pub a: f64,
    pub metric: TensorField,
    pub h: TensorField,
    /// |T|^2 and its trace Laplacian.
    pub t_sq: Vec<f64>,
    pub lap_t_sq: Vec<f64>,
    pub rm_norm: Vec<f64>,
    pub t_sup: f64,
    pub rm_sup: f64,
    pub lambda_sup: f64,
}

impl Snapshot {
    pub fn capture(state: &FlowState, ctx: &FlowContext) -> Self {
        let geo = &state.geometry;
        let g = &geo.metric;
        let t_sq = dense_norm_sq(&geo.torsion.t, g);
        let scalar = TensorField::from_data(*state.psi.grid(), vec![], t_sq.clone());
        let lap_t_sq = trace_laplacian(&scalar, g, &geo.gamma, &ctx.diff).into_data();
        let rm_norm: Vec<f64> = CompressedField::from_dense(
            &geo.curvature.rm,
            vec![SlotGroup::Anti(2), SlotGroup::Anti(2)],
        )
        .norm_sq_field(g)
        .into_iter()
        .map(f64::sqrt)
        .collect();
        Self {
            t: state.t,
            step: state.step,
            a: state.a,
            metric: g.to_tensor(),
            h: metric_velocity(geo, state.a),
            t_sup: sup(&t_sq).sqrt(),
            rm_sup: sup(&rm_norm),
            lambda_sup: lambda_field(geo, ctx).sup,
            t_sq,
            lap_t_sq,
            rm_norm,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionReport {
    /// Times of the interior snapshots the differences are centered on.
    pub times: Vec<f64>,
    /// sup |(g(t+) - g(t-))/(t+ - t-) - 2h(t)| per interior snapshot.
    pub metric_velocity_residual: Vec<f64>,
    /// sup of (d/dt - Lap)|T|^2 over interior snapshots and nodes.
    pub torsion_lhs_sup: f64,
    /// sup of |Rm||T|^2 + A^2|T|^2 + A|T|^3 + |T|^4.
    pub torsion_rhs_sup: f64,
    /// sup of lhs/rhs where rhs > 0.
    pub torsion_c_hat: Option<f64>,
    /// sup of |lhs|/rhs where rhs > 0; a scale for the size of the
    /// left side even when it is negative.
    pub torsion_c_hat_abs: Option<f64>,
    /// Nodes where the lhs exceeds roundoff while the rhs vanishes.
    pub torsion_violations: usize,
    /// sup over steps of |d/dt sup|T|| / (1 + A + Lambda)^2.
    pub torsion_growth: f64,
    /// The same for sup |Rm|.
    pub curvature_growth: f64,
}

impl EvolutionReport {
    pub fn max_metric_velocity_residual(&self) -> f64 {
        sup(&self.metric_velocity_residual)
    }
}

/// Time-difference monitors over consecutive snapshots.
pub fn evolution_monitors(traj: &[Snapshot]) -> Result<EvolutionReport, AnalysisError> {
    if traj.len() < 3 {
        return Err(AnalysisError::InsufficientTrajectory(traj.len()));
    }
    let mut rep = EvolutionReport {
        times: vec![],
        metric_velocity_residual: vec![],
        torsion_lhs_sup: f64::NEG_INFINITY,
        torsion_rhs_sup: 0.0,
        torsion_c_hat: None,
        torsion_c_hat_abs: None,
        torsion_violations: 0,
        torsion_growth: 0.0,
        curvature_growth: 0.0,
    };
    for w in traj.windows(3) {
        let (prev, cur, next) = (&w[0], &w[1], &w[2]);
        let span = next.t - prev.t;
        let res = next
            .metric
            .data()
            .iter()
            .zip(prev.metric.data())
            .zip(cur.h.data())
            .fold(0.0f64, |m, ((gp, gm), h)| {
                m.max(((gp - gm) / span - 2.0 * h).abs())
            });
        rep.times.push(cur.t);
        rep.metric_velocity_residual.push(res);
        let a = cur.a;
        for n in 0..cur.t_sq.len() {
            let lhs = (next.t_sq[n] - prev.t_sq[n]) / span - cur.lap_t_sq[n];
            let ts = cur.t_sq[n];
            let tn = ts.sqrt();
            let rhs = cur.rm_norm[n] * ts + a * a * ts + a * ts * tn + ts * ts;
            rep.torsion_lhs_sup = rep.torsion_lhs_sup.max(lhs);
            rep.torsion_rhs_sup = rep.torsion_rhs_sup.max(rhs);
            if rhs > 0.0 {
                let r = lhs / rhs;
                rep.torsion_c_hat = Some(rep.torsion_c_hat.map_or(r, |c: f64| c.max(r)));
                rep.torsion_c_hat_abs = Some(
                    rep.torsion_c_hat_abs
                        .map_or(r.abs(), |c: f64| c.max(r.abs())),
                );
            } else if lhs > 1e-12 {
                rep.torsion_violations += 1;
            }
        }
        let norm = (1.0 + a + cur.lambda_sup).powi(2);
        rep.torsion_growth = rep
            .torsion_growth
            .max(((next.t_sup - prev.t_sup) / span).abs() / norm);
        rep.curvature_growth = rep
            .curvature_growth
            .max(((next.rm_sup - prev.rm_sup) / span).abs() / norm);
    }
    Ok(rep)
}
