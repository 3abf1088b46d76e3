//! Full torsion tensor of a G2-structure and its intrinsic torsion forms.

use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{project, Component, Mat7, Metric, PointForm, DIM};
use crate::fields::{
    exterior_derivative, CompressedField, ConnectionField, Differentiator, FormField, Grid,
    MetricField, Scheme, TensorField, Variance,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TorsionError {
    #[error("psi is not coclosed: |d psi| = {residual:e} exceeds {threshold:e}")]
    NotCoclosed { residual: f64, threshold: f64 },
}

/// T_ij at every node.
#[derive(Clone, Debug, PartialEq)]
pub struct TorsionTensor {
    pub t: TensorField,
}

impl TorsionTensor {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            t: TensorField::covariant(grid, 2),
        }
    }

    pub fn at(&self, node: usize) -> Mat7 {
        Mat7::from_row_slice(self.t.at(node))
    }

    /// tr_g T at each node.
    pub fn trace(&self, g: &MetricField) -> Vec<f64> {
        (0..self.t.grid().node_count())
            .map(|n| g.at(n).inv().component_mul(&self.at(n)).sum())
            .collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.t.sup_norm()
    }

    /// max |T_ij - T_ji|
    pub fn antisymmetry(&self) -> f64 {
        (0..self.t.grid().node_count())
            .map(|n| {
                let m = self.at(n);
                (m - m.transpose()).abs().max()
            })
            .fold(0.0, f64::max)
    }
}

/// T_i^j = 1/24 nabla_i phi_lmn psi^{jlmn}, lowered with g.
pub fn full_torsion(
    phi: &FormField,
    psi: &FormField,
    g: &MetricField,
    gamma: &ConnectionField,
    diff: &Differentiator,
) -> TorsionTensor {
    let grid = *phi.grid();
    let dphi = CompressedField::from_form(phi).covariant_derivative(gamma, diff);
    let triples = crate::algebra::tables::tuples(3);
    let mut data = vec![0.0; grid.node_count() * 49];
    data.par_chunks_mut(49).enumerate().for_each(|(n, out)| {
        let m = g.at(n);
        let up = psi.at(n).raise(m);
        let d = dphi.at(n);
        let mut mixed = Mat7::zeros();
        for i in 0..DIM {
            for j in 0..DIM {
                let mut acc = 0.0;
                for (k, t) in triples.iter().enumerate() {
                    let v = d[i * 35 + k];
                    if v != 0.0 {
                        acc += v * up.get(&[j, t[0], t[1], t[2]]);
                    }
                }
                mixed[(i, j)] = 0.25 * acc;
            }
        }
        let low = mixed * m.g();
        for i in 0..DIM {
            for j in 0..DIM {
                out[i * DIM + j] = low[(i, j)];
            }
        }
    });
    TorsionTensor {
        t: TensorField::from_data(grid, vec![Variance::Co; 2], data),
    }
}

/// Torsion forms at one point. tau1 is stored as a 1-form, tau3 as its
/// symmetric traceless 2-tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct PointTorsionForms {
    pub tau0: f64,
    pub tau1: PointForm,
    pub tau2: PointForm,
    pub tau3: Mat7,
}

fn skew_form(t: &Mat7) -> PointForm {
    let comps = crate::algebra::tables::tuples(2)
        .iter()
        .map(|ij| 0.5 * (t[(ij[0], ij[1])] - t[(ij[1], ij[0])]))
        .collect();
    PointForm::from_components(2, comps)
}

fn form_matrix(b: &PointForm) -> Mat7 {
    Mat7::from_fn(|i, j| if i == j { 0.0 } else { b.get(&[i, j]) })
}

/// Splits T into tau0 g/4 - tau3 - tau1#.phi - tau2/2.
pub fn decompose_point(t: &Mat7, phi: &PointForm, m: &Metric) -> PointTorsionForms {
    let tau0 = 4.0 / 7.0 * m.inv().component_mul(t).sum();
    let sym = (t + t.transpose()) * 0.5;
    let tau3 = m.g() * (tau0 / 4.0) - sym;
    let split = project(&skew_form(t), phi, m);
    let a7 = split.part(Component::Two7);
    let phi_up = phi.raise(m);
    // tau1^l = -1/6 A7_ij phi^{lij}, summed over all i, j
    let mut vec = [0.0; DIM];
    for (l, v) in vec.iter_mut().enumerate() {
        let mut acc = 0.0;
        for i in 0..DIM {
            for j in 0..DIM {
                if i != j {
                    acc += a7.get(&[i, j]) * phi_up.get(&[l, i, j]);
                }
            }
        }
        *v = -acc / 6.0;
    }
    let low: Vec<f64> = (0..DIM)
        .map(|i| (0..DIM).map(|l| m.g()[(i, l)] * vec[l]).sum())
        .collect();
    PointTorsionForms {
        tau0,
        tau1: PointForm::from_components(1, low),
        tau2: split.part(Component::Two14).scale(-2.0),
        tau3,
    }
}

pub fn reconstruct_point(f: &PointTorsionForms, phi: &PointForm, m: &Metric) -> Mat7 {
    let raised: Vec<f64> = (0..DIM)
        .map(|l| {
            (0..DIM)
                .map(|i| m.inv()[(l, i)] * f.tau1.components()[i])
                .sum()
        })
        .collect();
    let contracted = phi.interior(&raised.try_into().expect("seven components"));
    m.g() * (f.tau0 / 4.0) - f.tau3 - form_matrix(&contracted) - form_matrix(&f.tau2) * 0.5
}

/// Intrinsic torsion forms as fields.
#[derive(Clone, Debug, PartialEq)]
pub struct TorsionForms {
    pub tau0: TensorField,
    pub tau1: FormField,
    pub tau2: FormField,
    pub tau3: TensorField,
}

pub fn torsion_forms(t: &TorsionTensor, phi: &FormField, g: &MetricField) -> TorsionForms {
    let grid = *phi.grid();
    let parts: Vec<PointTorsionForms> = (0..grid.node_count())
        .into_par_iter()
        .map(|n| decompose_point(&t.at(n), &phi.at(n), g.at(n)))
        .collect();
    let tau0 = parts.iter().map(|p| p.tau0).collect();
    let tau1: Vec<PointForm> = parts.iter().map(|p| p.tau1.clone()).collect();
    let tau2: Vec<PointForm> = parts.iter().map(|p| p.tau2.clone()).collect();
    let tau3 = parts
        .iter()
        .flat_map(|p| p.tau3.transpose().iter().cloned().collect::<Vec<_>>())
        .collect();
    TorsionForms {
        tau0: TensorField::from_data(grid, vec![], tau0),
        tau1: FormField::from_points(grid, 1, &tau1),
        tau2: FormField::from_points(grid, 2, &tau2),
        tau3: TensorField::from_data(grid, vec![Variance::Co; 2], tau3),
    }
}

pub fn reconstruct(forms: &TorsionForms, phi: &FormField, g: &MetricField) -> TorsionTensor {
    let grid = *phi.grid();
    let mut data = Vec::with_capacity(grid.node_count() * 49);
    for n in 0..grid.node_count() {
        let p = PointTorsionForms {
            tau0: forms.tau0.at(n)[0],
            tau1: forms.tau1.at(n),
            tau2: forms.tau2.at(n),
            tau3: Mat7::from_row_slice(forms.tau3.at(n)),
        };
        let t = reconstruct_point(&p, &phi.at(n), g.at(n));
        data.extend(t.transpose().iter());
    }
    TorsionTensor {
        t: TensorField::from_data(grid, vec![Variance::Co; 2], data),
    }
}

/// sup |d psi|, with the metric-free exterior derivative.
pub fn coclosed_residual(psi: &FormField, diff: &Differentiator) -> f64 {
    exterior_derivative(psi, diff).sup_norm()
}

/// Threshold separating scheme error from genuine failure of d psi = 0.
pub fn default_coclosed_threshold(grid: &Grid, scheme: Scheme, psi_sup: f64) -> f64 {
    match scheme {
        Scheme::Spectral => 1e-8,
        Scheme::Fd4 => 10.0 * grid.h_min().powi(4) * psi_sup,
    }
}

/// sup |T - T^t|, after checking that psi is coclosed.
pub fn coclosed_symmetry_check(
    t: &TorsionTensor,
    psi: &FormField,
    diff: &Differentiator,
    threshold: f64,
) -> Result<f64, TorsionError> {
    let residual = coclosed_residual(psi, diff);
    if !(residual <= threshold) {
        return Err(TorsionError::NotCoclosed {
            residual,
            threshold,
        });
    }
    Ok(t.antisymmetry())
}
