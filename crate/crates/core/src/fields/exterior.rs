use rayon::prelude::*;

use super::connection::{covariant_derivative, ConnectionField, MetricField};
use super::derivative::Differentiator;
use super::tensor::{FormField, TensorField, Variance};
use crate::algebra::tables::{form_dim, mask_of, position_of_mask};
use crate::algebra::{hodge_star, DIM};

/// Exterior derivative, (d a)_K = sum_s (-1)^s d_{K_s} a_{K without K_s}.
pub fn exterior_derivative(a: &FormField, diff: &Differentiator) -> FormField {
    let p = a.degree();
    assert!(p < DIM, "d of a top form");
    let grid = *a.grid();
    let src_len = form_dim(p);
    let grads = diff.gradient(a.data(), src_len);
    let out_len = form_dim(p + 1);
    let mut data = vec![0.0; grid.node_count() * out_len];
    data.par_chunks_mut(out_len)
        .enumerate()
        .for_each(|(node, out)| {
            for (k, slot) in out.iter_mut().enumerate() {
                let mask = mask_of(p + 1, k);
                let mut acc = 0.0;
                let mut s = 0;
                for axis in 0..DIM {
                    if mask & (1 << axis) == 0 {
                        continue;
                    }
                    if let Some(g) = &grads[axis] {
                        let v = g[node * src_len + position_of_mask(mask & !(1 << axis))];
                        acc += if s % 2 == 0 { v } else { -v };
                    }
                    s += 1;
                }
                *slot = acc;
            }
        });
    FormField::from_data(grid, p + 1, data)
}

pub fn star_field(a: &FormField, g: &MetricField) -> FormField {
    let points: Vec<_> = (0..a.grid().node_count())
        .into_par_iter()
        .map(|n| hodge_star(&a.at(n), g.at(n)))
        .collect();
    FormField::from_points(*a.grid(), DIM - a.degree(), &points)
}

/// delta = (-1)^p * d * on p-forms, the adjoint of d for the grid inner
/// product.
pub fn codifferential(a: &FormField, g: &MetricField, diff: &Differentiator) -> FormField {
    let p = a.degree();
    assert!(p > 0, "codifferential of a function");
    let out = star_field(&exterior_derivative(&star_field(a, g), diff), g);
    if p % 2 == 0 {
        out
    } else {
        out.scale(-1.0)
    }
}

/// d delta + delta d.
pub fn hodge_laplacian(a: &FormField, g: &MetricField, diff: &Differentiator) -> FormField {
    let p = a.degree();
    let mut out = FormField::zeros(*a.grid(), p);
    if p > 0 {
        out = exterior_derivative(&codifferential(a, g, diff), diff);
    }
    if p < DIM {
        out = &out + &codifferential(&exterior_derivative(a, diff), g, diff);
    }
    out
}

/// g^{ij} nabla_i nabla_j f, componentwise.
pub fn trace_laplacian(
    f: &TensorField,
    g: &MetricField,
    gamma: &ConnectionField,
    diff: &Differentiator,
) -> TensorField {
    let second = covariant_derivative(&covariant_derivative(f, gamma, diff), gamma, diff);
    let block = f.block_len();
    let mut out = TensorField::zeros(*f.grid(), f.variance().to_vec());
    out.data_mut()
        .par_chunks_mut(block)
        .enumerate()
        .for_each(|(n, dst)| {
            let src = second.at(n);
            let gi = g.at(n).inv();
            for i in 0..DIM {
                for j in 0..DIM {
                    let c = gi[(i, j)];
                    let off = (i * DIM + j) * block;
                    for (d, s) in dst.iter_mut().zip(&src[off..off + block]) {
                        *d += c * s;
                    }
                }
            }
        });
    out
}

/// Sum over nodes of <a, b>_g vol times the node weight.
pub fn grid_inner(a: &FormField, b: &FormField, g: &MetricField) -> f64 {
    assert_eq!(a.degree(), b.degree());
    let w = a.grid().node_weight();
    let parts: Vec<f64> = (0..a.grid().node_count())
        .into_par_iter()
        .map(|n| a.at(n).inner(&b.at(n), g.at(n)) * g.at(n).vol())
        .collect();
    parts.iter().sum::<f64>() * w
}

/// The four operators on one form.
#[derive(Clone, Debug)]
pub struct ExteriorSet {
    pub d: Option<FormField>,
    pub delta: Option<FormField>,
    pub hodge_laplacian: FormField,
    pub trace_laplacian: TensorField,
}

pub fn exterior_calculus(
    a: &FormField,
    g: &MetricField,
    gamma: &ConnectionField,
    diff: &Differentiator,
) -> ExteriorSet {
    let p = a.degree();
    let dense = a.to_tensor();
    debug_assert!(dense.variance().iter().all(|v| *v == Variance::Co));
    ExteriorSet {
        d: (p < DIM).then(|| exterior_derivative(a, diff)),
        delta: (p > 0).then(|| codifferential(a, g, diff)),
        hodge_laplacian: hodge_laplacian(a, g, diff),
        trace_laplacian: trace_laplacian(&dense, g, gamma, diff),
    }
}
