use rayon::prelude::*;

use super::connection::{ConnectionField, MetricField};
use super::derivative::Differentiator;
use super::tensor::{TensorField, Variance};
use crate::algebra::DIM;

/// Riemann, Ricci and scalar curvature.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureField {
    /// R_ijk^l, component (i, j, k, l).
    pub rm_up: TensorField,
    /// R_ijkl = g_lm R_ijk^m.
    pub rm: TensorField,
    /// R_jk = R_ijk^i.
    pub ric: TensorField,
    pub scalar: TensorField,
}

#[inline]
fn at4(i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * DIM + j) * DIM + k) * DIM + l
}

/// R_ijk^l = d_i G^l_jk - d_j G^l_ik + G^l_ip G^p_jk - G^l_jp G^p_ik.
pub fn riemann(g: &MetricField, gamma: &ConnectionField, diff: &Differentiator) -> CurvatureField {
    let grid = *g.grid();
    let n = grid.node_count();
    let dgam = diff.gradient(gamma.tensor().data(), 343);
    let mut up = vec![0.0; n * 2401];
    up.par_chunks_mut(2401).enumerate().for_each(|(node, out)| {
        let gm = gamma.at(node);
        let gg = |l: usize, i: usize, j: usize| gm[(l * DIM + i) * DIM + j];
        let dg = |a: usize, l: usize, i: usize, j: usize| {
            dgam[a]
                .as_ref()
                .map_or(0.0, |d| d[node * 343 + (l * DIM + i) * DIM + j])
        };
        for i in 0..DIM {
            for j in 0..DIM {
                if i == j {
                    continue;
                }
                for k in 0..DIM {
                    for l in 0..DIM {
                        let mut v = dg(i, l, j, k) - dg(j, l, i, k);
                        for p in 0..DIM {
                            v += gg(l, i, p) * gg(p, j, k) - gg(l, j, p) * gg(p, i, k);
                        }
                        out[at4(i, j, k, l)] = v;
                    }
                }
            }
        }
        // exact antisymmetry in the first pair
        for i in 0..DIM {
            for j in 0..i {
                for k in 0..DIM {
                    for l in 0..DIM {
                        let a = 0.5 * (out[at4(i, j, k, l)] - out[at4(j, i, k, l)]);
                        out[at4(i, j, k, l)] = a;
                        out[at4(j, i, k, l)] = -a;
                    }
                }
            }
        }
    });
    let mut low = vec![0.0; n * 2401];
    let mut ric = vec![0.0; n * 49];
    let mut scal = vec![0.0; n];
    low.par_chunks_mut(2401)
        .zip(ric.par_chunks_mut(49))
        .zip(scal.par_iter_mut())
        .enumerate()
        .for_each(|(node, ((lo, rc), sc))| {
            let r = &up[node * 2401..(node + 1) * 2401];
            let m = g.at(node);
            for i in 0..DIM {
                for j in 0..DIM {
                    for k in 0..DIM {
                        for l in 0..DIM {
                            lo[at4(i, j, k, l)] =
                                (0..DIM).map(|q| m.g()[(l, q)] * r[at4(i, j, k, q)]).sum();
                        }
                    }
                }
            }
            for j in 0..DIM {
                for k in 0..DIM {
                    rc[j * DIM + k] = (0..DIM).map(|i| r[at4(i, j, k, i)]).sum();
                }
            }
            *sc = (0..DIM)
                .flat_map(|j| (0..DIM).map(move |k| (j, k)))
                .map(|(j, k)| m.inv()[(j, k)] * rc[j * DIM + k])
                .sum();
        });
    CurvatureField {
        rm_up: TensorField::from_data(
            grid,
            vec![Variance::Co, Variance::Co, Variance::Co, Variance::Contra],
            up,
        ),
        rm: TensorField::from_data(grid, vec![Variance::Co; 4], low),
        ric: TensorField::from_data(grid, vec![Variance::Co; 2], ric),
        scalar: TensorField::from_data(grid, vec![], scal),
    }
}

/// Largest violations of the algebraic symmetries of R_ijkl.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureSymmetry {
    pub first_pair: f64,
    pub second_pair: f64,
    pub pair_exchange: f64,
    pub bianchi: f64,
}

impl CurvatureField {
    pub fn symmetry(&self) -> CurvatureSymmetry {
        let mut s = CurvatureSymmetry {
            first_pair: 0.0,
            second_pair: 0.0,
            pair_exchange: 0.0,
            bianchi: 0.0,
        };
        for node in 0..self.rm.grid().node_count() {
            let r = self.rm.at(node);
            for i in 0..DIM {
                for j in 0..DIM {
                    for k in 0..DIM {
                        for l in 0..DIM {
                            let v = r[at4(i, j, k, l)];
                            s.first_pair = s.first_pair.max((v + r[at4(j, i, k, l)]).abs());
                            s.second_pair = s.second_pair.max((v + r[at4(i, j, l, k)]).abs());
                            s.pair_exchange = s.pair_exchange.max((v - r[at4(k, l, i, j)]).abs());
                            s.bianchi = s
                                .bianchi
                                .max((v + r[at4(j, k, i, l)] + r[at4(k, i, j, l)]).abs());
                        }
                    }
                }
            }
        }
        s
    }
}
