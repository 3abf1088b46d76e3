use rayon::prelude::*;

use super::derivative::Differentiator;
use super::error::FieldError;
use super::grid::Grid;
use super::tensor::{TensorField, Variance};
use crate::algebra::{Mat7, Metric, DIM};

/// A metric at every node.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricField {
    grid: Grid,
    metrics: Vec<Metric>,
}

impl MetricField {
    pub fn new(grid: Grid, metrics: Vec<Metric>) -> Self {
        assert_eq!(metrics.len(), grid.node_count());
        Self { grid, metrics }
    }

    pub fn flat(grid: Grid) -> Self {
        Self::new(grid, vec![Metric::identity(); grid.node_count()])
    }

    /// Reads a symmetric rank-2 field; fails at the first node that is not
    /// positive definite.
    pub fn from_tensor(g: &TensorField) -> Result<Self, FieldError> {
        assert_eq!(g.rank(), 2);
        let metrics = (0..g.grid().node_count())
            .map(|n| {
                Metric::new(Mat7::from_row_slice(g.at(n)))
                    .map_err(|_| FieldError::SingularMetric { node: n })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(*g.grid(), metrics))
    }

    pub fn from_fn<F>(grid: Grid, f: F) -> Result<Self, FieldError>
    where
        F: Fn([f64; DIM]) -> Mat7 + Sync,
    {
        let metrics = (0..grid.node_count())
            .into_par_iter()
            .map(|n| {
                Metric::new(f(grid.position(n))).map_err(|_| FieldError::SingularMetric { node: n })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(grid, metrics))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn at(&self, node: usize) -> &Metric {
        &self.metrics[node]
    }

    pub fn metrics(&self) -> &[Metric] {
        &self.metrics
    }

    pub fn to_tensor(&self) -> TensorField {
        let mut data = Vec::with_capacity(self.metrics.len() * 49);
        for m in &self.metrics {
            for i in 0..DIM {
                for j in 0..DIM {
                    data.push(m.g()[(i, j)]);
                }
            }
        }
        TensorField::from_data(self.grid, vec![Variance::Co; 2], data)
    }

    pub fn inverse_tensor(&self) -> TensorField {
        let mut data = Vec::with_capacity(self.metrics.len() * 49);
        for m in &self.metrics {
            for i in 0..DIM {
                for j in 0..DIM {
                    data.push(m.inv()[(i, j)]);
                }
            }
        }
        TensorField::from_data(self.grid, vec![Variance::Contra; 2], data)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.metrics
            .iter()
            .map(Metric::min_eigenvalue)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Christoffel symbols, component (l, i, j) holding Gamma^l_ij.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionField {
    gamma: TensorField,
}

impl ConnectionField {
    pub fn flat(grid: Grid) -> Self {
        Self {
            gamma: TensorField::zeros(grid, vec![Variance::Contra, Variance::Co, Variance::Co]),
        }
    }

    pub fn from_tensor(gamma: TensorField) -> Self {
        assert_eq!(
            gamma.variance(),
            [Variance::Contra, Variance::Co, Variance::Co]
        );
        Self { gamma }
    }

    pub fn tensor(&self) -> &TensorField {
        &self.gamma
    }

    pub fn grid(&self) -> &Grid {
        self.gamma.grid()
    }

    pub fn at(&self, node: usize) -> &[f64] {
        self.gamma.at(node)
    }

    /// Matrix acting on a lower index in direction m: entry (i, p) is
    /// Gamma^p_{m i}.
    pub fn direction_matrix(&self, node: usize, m: usize) -> Mat7 {
        let g = self.at(node);
        Mat7::from_fn(|i, p| g[(p * DIM + m) * DIM + i])
    }

    /// max |Gamma^l_ij - Gamma^l_ji|
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for n in 0..self.grid().node_count() {
            let g = self.at(n);
            for l in 0..DIM {
                for i in 0..DIM {
                    for j in 0..i {
                        worst = worst
                            .max((g[(l * DIM + i) * DIM + j] - g[(l * DIM + j) * DIM + i]).abs());
                    }
                }
            }
        }
        worst
    }
}

/// Gamma^l_ij = 1/2 g^{lm}(d_i g_jm + d_j g_im - d_m g_ij).
pub fn levi_civita(g: &MetricField, diff: &Differentiator) -> ConnectionField {
    let grid = *g.grid();
    let gt = g.to_tensor();
    let dg = diff.gradient(gt.data(), 49);
    let deriv = |a: usize, node: usize, i: usize, j: usize| -> f64 {
        dg[a].as_ref().map_or(0.0, |d| d[node * 49 + i * DIM + j])
    };
    let mut data = vec![0.0; grid.node_count() * 343];
    data.par_chunks_mut(343)
        .enumerate()
        .for_each(|(node, out)| {
            // lowered symbols Gamma_{ij m}
            let mut low = [0.0; 343];
            for i in 0..DIM {
                for j in 0..DIM {
                    for m in 0..DIM {
                        low[(i * DIM + j) * DIM + m] = 0.5
                            * (deriv(i, node, j, m) + deriv(j, node, i, m) - deriv(m, node, i, j));
                    }
                }
            }
            let gi = g.at(node).inv();
            for l in 0..DIM {
                for i in 0..DIM {
                    for j in 0..DIM {
                        out[(l * DIM + i) * DIM + j] = (0..DIM)
                            .map(|m| gi[(l, m)] * low[(i * DIM + j) * DIM + m])
                            .sum();
                    }
                }
            }
        });
    ConnectionField::from_tensor(TensorField::from_data(
        grid,
        vec![Variance::Contra, Variance::Co, Variance::Co],
        data,
    ))
}

/// Applies `mat` to slot `slot` of a dense block with `rank` slots, adding
/// `scale * sum_p mat[(idx, p)] in[.., p, ..]` into `out[.., idx, ..]`.
pub(crate) fn add_slot_action(
    input: &[f64],
    out: &mut [f64],
    rank: usize,
    slot: usize,
    mat: &Mat7,
    scale: f64,
) {
    let inner = DIM.pow((rank - 1 - slot) as u32);
    let outer = input.len() / (inner * DIM);
    for o in 0..outer {
        for i in 0..DIM {
            let dst = (o * DIM + i) * inner;
            for p in 0..DIM {
                let c = scale * mat[(i, p)];
                if c == 0.0 {
                    continue;
                }
                let src = (o * DIM + p) * inner;
                for r in 0..inner {
                    out[dst + r] += c * input[src + r];
                }
            }
        }
    }
}

/// Covariant derivative; the new slot comes first:
/// (nabla f)_{m i..}^{j..} = d_m f - Gamma^p_{mi} f_{p..} + Gamma^j_{mp} f^{p..}.
pub fn covariant_derivative(
    f: &TensorField,
    gamma: &ConnectionField,
    diff: &Differentiator,
) -> TensorField {
    let grid = *f.grid();
    let rank = f.rank();
    let block = f.block_len();
    let grads = diff.gradient(f.data(), block);
    let mut variance = vec![Variance::Co];
    variance.extend_from_slice(f.variance());
    let mut data = vec![0.0; grid.node_count() * block * DIM];
    data.par_chunks_mut(block * DIM)
        .enumerate()
        .for_each(|(node, out)| {
            let src = f.at(node);
            for m in 0..DIM {
                let dst = &mut out[m * block..(m + 1) * block];
                if let Some(d) = &grads[m] {
                    dst.copy_from_slice(&d[node * block..(node + 1) * block]);
                }
                let mat = gamma.direction_matrix(node, m);
                for (slot, v) in f.variance().iter().enumerate() {
                    match v {
                        Variance::Co => add_slot_action(src, dst, rank, slot, &mat, -1.0),
                        Variance::Contra => {
                            add_slot_action(src, dst, rank, slot, &mat.transpose(), 1.0)
                        }
                    }
                }
            }
        });
    TensorField::from_data(grid, variance, data)
}
