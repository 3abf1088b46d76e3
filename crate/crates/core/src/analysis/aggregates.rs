use serde::{Deserialize, Serialize};

use super::error::AnalysisError;
use super::shi::ShiSequences;
use crate::coflow::Geometry;
use crate::fields::FormField;

/// Sums of squared sequence entries and the two combined quantities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateQuantities {
    pub n: usize,
    pub a_n: f64,
    pub b_n: f64,
    /// Zero when the form sequences were not computed.
    pub c_n: f64,
    pub d_n: f64,
    /// Tilde sums from k = 1; `None` at t = 0.
    pub tilde_from_one: Option<[f64; 4]>,
    /// Tilde sums from k = 0.
    pub tilde_from_zero: Option<[f64; 4]>,
    /// sup |T|^2, sup |phi|^2, sup |psi|^2
    pub t_sq: f64,
    pub phi_sq: f64,
    pub psi_sq: f64,
    pub a_sq: f64,
    pub phi_n: f64,
    /// Sum of the tilde sums from k = 1.
    pub psi_n: Option<f64>,
    /// The same sum started at k = 0.
    pub psi_n_from_zero: Option<f64>,
}

fn sum_sq(v: &[f64], from: usize) -> f64 {
    v.iter().skip(from).map(|x| x * x).sum()
}

/// Pointwise sup of |T|^2, |phi|^2 and |psi|^2 over the grid.
pub fn structure_norms(geo: &Geometry, psi: &FormField) -> (f64, f64, f64) {
    let mut out = (0.0f64, 0.0f64, 0.0f64);
    for n in 0..psi.grid().node_count() {
        let m = geo.metric.at(n);
        let t = geo.torsion.at(n);
        let t_up = m.inv() * t * m.inv();
        out.0 = out.0.max(t.component_mul(&t_up).sum());
        out.1 = out.1.max(geo.phi.at(n).tensor_norm_sq(m));
        out.2 = out.2.max(psi.at(n).tensor_norm_sq(m));
    }
    out
}

pub fn aggregates(
    seq: &ShiSequences,
    geo: &Geometry,
    psi: &FormField,
    a: f64,
) -> AggregateQuantities {
    let (t_sq, phi_sq, psi_sq) = structure_norms(geo, psi);
    let (a_n, b_n, c_n, d_n) = (
        sum_sq(&seq.a, 0),
        sum_sq(&seq.b, 0),
        sum_sq(&seq.c, 0),
        sum_sq(&seq.d, 0),
    );
    let tildes = |from: usize| {
        seq.tilde.as_ref().map(|t| {
            [
                sum_sq(&t.a, from),
                sum_sq(&t.b, from),
                sum_sq(&t.c, from),
                sum_sq(&t.d, from),
            ]
        })
    };
    let tilde_from_one = tildes(1);
    let tilde_from_zero = tildes(0);
    AggregateQuantities {
        n: seq.kmax,
        a_n,
        b_n,
        c_n,
        d_n,
        tilde_from_one,
        tilde_from_zero,
        t_sq,
        phi_sq,
        psi_sq,
        a_sq: a * a,
        phi_n: a_n + b_n + c_n + d_n + t_sq + a * a + phi_sq + psi_sq,
        psi_n: tilde_from_one.map(|v| v.iter().sum()),
        psi_n_from_zero: tilde_from_zero.map(|v| v.iter().sum()),
    }
}

/// The product of powered partial sums minus the product of the powered
/// negative-index entries, both weighted by t^((x+y+2z+2w)/2).
pub fn p_function(
    x: u32,
    y: u32,
    z: u32,
    w: u32,
    seq: &ShiSequences,
    agg: &AggregateQuantities,
) -> Result<f64, AnalysisError> {
    let tilde = seq
        .tilde
        .as_ref()
        .ok_or_else(|| AnalysisError::Unavailable("P needs t > 0".into()))?;
    let need = |v: Option<f64>| {
        v.ok_or_else(|| AnalysisError::Unavailable("P needs the form sequences".into()))
    };
    let b1 = tilde.b_m1;
    let (c1, c2, d1, d2) = (
        need(tilde.c_m1)?,
        need(tilde.c_m2)?,
        need(tilde.d_m1)?,
        need(tilde.d_m2)?,
    );
    let e = (x + y + 2 * z + 2 * w) as f64;
    let weight = seq.t.powf(e / 2.0);
    let sums = (agg.b_n + b1 * b1).powf(x as f64 / 2.0)
        * (agg.c_n + c1 * c1).powf(y as f64 / 2.0)
        * (agg.c_n + c1 * c1 + c2 * c2).powf(z as f64 / 2.0)
        * (agg.d_n + d1 * d1 + d2 * d2).powf(w as f64 / 2.0);
    let singles = b1.powi(x as i32) * c1.powi(y as i32) * c2.powi(z as i32) * d2.powi(w as i32);
    Ok(weight * sums - weight * singles)
}
