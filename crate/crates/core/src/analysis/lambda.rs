use crate::coflow::{FlowContext, Geometry};
use crate::fields::{CompressedField, SlotGroup};

/// Lambda = (|Rm|^2 + |nabla T|^2 + |T|^4)^(1/2) at each node.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaField {
    pub values: Vec<f64>,
    pub sup: f64,
}

/// Pointwise squared norms of Rm, T and nabla T.
pub(crate) struct BasicNorms {
    pub rm_sq: Vec<f64>,
    pub t_sq: Vec<f64>,
    pub dt_sq: Vec<f64>,
}

pub(crate) fn basic_norms(geo: &Geometry, ctx: &FlowContext) -> BasicNorms {
    let rm = CompressedField::from_dense(&geo.curvature.rm, vec![SlotGroup::Single; 4]);
    let t = CompressedField::from_dense(&geo.torsion.t, vec![SlotGroup::Single; 2]);
    BasicNorms {
        rm_sq: rm.norm_sq_field(&geo.metric),
        t_sq: t.norm_sq_field(&geo.metric),
        dt_sq: t.next_norm_sq_field(&geo.metric, &geo.gamma, &ctx.diff),
    }
}

pub fn lambda_field(geo: &Geometry, ctx: &FlowContext) -> LambdaField {
    let b = basic_norms(geo, ctx);
    let values: Vec<f64> = (0..b.rm_sq.len())
        .map(|n| (b.rm_sq[n] + b.dt_sq[n] + b.t_sq[n] * b.t_sq[n]).sqrt())
        .collect();
    let sup = values.iter().cloned().fold(0.0, f64::max);
    LambdaField { values, sup }
}
