use rayon::prelude::*;

use super::state::{FlowContext, FlowState, Geometry, Route};
use crate::algebra::tables::{mask_of, position_of_mask, sort_sign};
use crate::algebra::{Mat7, PointForm, DIM};
use crate::fields::{exterior_derivative, star_field, FormField, TensorField, Variance};

/// Metric velocity h, vector field X (as a 1-form) and the 4-form rate
/// they induce.
#[derive(Clone, Debug)]
pub struct FlowVelocity {
    pub h: TensorField,
    pub x: FormField,
    pub psi_rate: FormField,
}

/// Derivation action of a matrix on a form: every slot index n is replaced
/// by q with weight mat[(n, q)].
pub fn derivation(form: &PointForm, mat: &Mat7) -> PointForm {
    let p = form.degree();
    let mut out = PointForm::zero(p);
    let comps = out.components_mut();
    for (k, slot) in comps.iter_mut().enumerate() {
        let mask = mask_of(p, k);
        let idx: Vec<usize> = (0..DIM).filter(|i| mask & (1 << i) != 0).collect();
        let mut acc = 0.0;
        for s in 0..p {
            for q in 0..DIM {
                let c = mat[(idx[s], q)];
                if c == 0.0 {
                    continue;
                }
                let mut moved = idx.clone();
                moved[s] = q;
                if let Some((m, sign)) = sort_sign(&moved) {
                    acc += c * sign * form.components()[position_of_mask(m)];
                }
            }
        }
        *slot = acc;
    }
    out
}

/// h_ij = -R_ij + 1/2 T^km T^ln phi_ikl phi_jmn + (2A - tr T) T_ij, made
/// exactly symmetric.
pub fn metric_velocity(geo: &Geometry, a: f64) -> TensorField {
    let grid = *geo.phi.grid();
    let mut data = vec![0.0; grid.node_count() * 49];
    data.par_chunks_mut(49).enumerate().for_each(|(n, out)| {
        let m = geo.metric.at(n);
        let t = geo.torsion.at(n);
        let t_up = m.inv() * t * m.inv();
        let phi = geo.phi.at(n).expand();
        let ph = |i: usize, j: usize, k: usize| phi[(i * DIM + j) * DIM + k];
        // w[i][m][l] = phi_ikl T^km, v[j][m][l] = phi_jmn T^ln
        let mut w = vec![0.0; 343];
        let mut v = vec![0.0; 343];
        for i in 0..DIM {
            for mm in 0..DIM {
                for l in 0..DIM {
                    w[(i * DIM + mm) * DIM + l] =
                        (0..DIM).map(|k| ph(i, k, l) * t_up[(k, mm)]).sum();
                    v[(i * DIM + mm) * DIM + l] =
                        (0..DIM).map(|nn| ph(i, mm, nn) * t_up[(l, nn)]).sum();
                }
            }
        }
        let ric = geo.curvature.ric.at(n);
        let tr = geo.trace_t[n];
        let mut h = Mat7::zeros();
        for i in 0..DIM {
            for j in 0..DIM {
                let quad: f64 = (0..49).map(|r| w[i * 49 + r] * v[j * 49 + r]).sum();
                h[(i, j)] = -ric[i * DIM + j] + 0.5 * quad + (2.0 * a - tr) * t[(i, j)];
            }
        }
        let h = (h + h.transpose()) * 0.5;
        for i in 0..DIM {
            for j in 0..DIM {
                out[i * DIM + j] = h[(i, j)];
            }
        }
    });
    TensorField::from_data(grid, vec![Variance::Co; 2], data)
}

/// X = grad tr T, as the 1-form d(tr T).
pub fn rotation_field(geo: &Geometry, ctx: &FlowContext) -> FormField {
    let grid = *geo.phi.grid();
    let tr = FormField::from_data(grid, 0, geo.trace_t.clone());
    exterior_derivative(&tr, &ctx.diff)
}

/// Rate of psi under a general flow with velocity pair (h, X):
/// (h g^-1) acting as a derivation on psi, minus X ^ phi.
pub fn general_flow_rate(
    psi: &FormField,
    geo: &Geometry,
    h: &TensorField,
    x: &FormField,
) -> FormField {
    let grid = *psi.grid();
    let points: Vec<PointForm> = (0..grid.node_count())
        .into_par_iter()
        .map(|n| {
            let hm = Mat7::from_row_slice(h.at(n));
            let mat = hm * geo.metric.at(n).inv();
            derivation(&psi.at(n), &mat) - x.at(n).wedge(&geo.phi.at(n))
        })
        .collect();
    FormField::from_points(grid, 4, &points)
}

pub fn velocity(state: &FlowState, ctx: &FlowContext) -> FlowVelocity {
    velocity_of(&state.psi, &state.geometry, state.a, ctx)
}

pub fn velocity_of(psi: &FormField, geo: &Geometry, a: f64, ctx: &FlowContext) -> FlowVelocity {
    let h = metric_velocity(geo, a);
    let x = rotation_field(geo, ctx);
    let psi_rate = general_flow_rate(psi, geo, &h, &x);
    FlowVelocity { h, x, psi_rate }
}

/// d[*d phi + 2(A - tr T) phi], which equals the Hodge Laplacian of psi
/// plus 2 d[(A - tr T) phi] when d psi = 0.
pub fn psi_rate_direct_of(geo: &Geometry, a: f64, ctx: &FlowContext) -> FormField {
    let grid = *geo.phi.grid();
    let codiff = star_field(&exterior_derivative(&geo.phi, &ctx.diff), &geo.metric);
    let mut inner = codiff;
    let block = inner.block_len();
    inner
        .data_mut()
        .par_chunks_mut(block)
        .enumerate()
        .for_each(|(n, chunk)| {
            let c = 2.0 * (a - geo.trace_t[n]);
            for (v, p) in chunk.iter_mut().zip(geo.phi.raw(n)) {
                *v += c * p;
            }
        });
    debug_assert_eq!(*inner.grid(), grid);
    exterior_derivative(&inner, &ctx.diff)
}

pub fn psi_rate_direct(state: &FlowState, ctx: &FlowContext) -> FormField {
    psi_rate_direct_of(&state.geometry, state.a, ctx)
}

/// Rate of the route selected in the state.
pub fn psi_rate(
    psi: &FormField,
    geo: &Geometry,
    a: f64,
    route: Route,
    ctx: &FlowContext,
) -> FormField {
    match route {
        Route::Direct => psi_rate_direct_of(geo, a, ctx),
        Route::Velocity => velocity_of(psi, geo, a, ctx).psi_rate,
    }
}
