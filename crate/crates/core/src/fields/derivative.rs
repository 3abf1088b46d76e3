use std::f64::consts::TAU;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use super::tensor::{FormField, TensorField};
use crate::algebra::DIM;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Spectral,
    Fd4,
}

#[derive(Clone)]
struct AxisPlan {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// i k_j / n for each FFT bin, with the Nyquist bin zeroed.
    symbol: Vec<Complex64>,
}

/// Partial derivatives of node-major data along the axes of a grid.
#[derive(Clone)]
pub struct Differentiator {
    grid: Grid,
    scheme: Scheme,
    plans: Vec<Option<AxisPlan>>,
}

fn wavenumber(j: usize, n: usize, length: f64) -> f64 {
    let j = j as isize;
    let n = n as isize;
    let k = if j <= n / 2 { j } else { j - n };
    k as f64 * TAU / length
}

impl Differentiator {
    pub fn new(grid: Grid, scheme: Scheme) -> Self {
        let mut planner = FftPlanner::new();
        let plans = (0..DIM)
            .map(|a| {
                if !grid.is_active(a) {
                    return None;
                }
                let n = grid.dims()[a];
                let symbol = (0..n)
                    .map(|j| {
                        if 2 * j == n {
                            Complex64::new(0.0, 0.0)
                        } else {
                            Complex64::new(0.0, wavenumber(j, n, grid.lengths()[a]) / n as f64)
                        }
                    })
                    .collect();
                Some(AxisPlan {
                    n,
                    forward: planner.plan_fft_forward(n),
                    inverse: planner.plan_fft_inverse(n),
                    symbol,
                })
            })
            .collect();
        Self {
            grid,
            scheme,
            plans,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Lines along `axis`: base node index of each line.
    fn line_starts(&self, axis: usize) -> Vec<usize> {
        let stride = self.grid.stride(axis);
        let n = self.grid.dims()[axis];
        let total = self.grid.node_count();
        (0..total / n)
            .map(|l| (l / stride) * stride * n + l % stride)
            .collect()
    }

    /// Derivative along `axis` of data with `ncomp` components per node.
    /// An inactive axis gives zeros.
    pub fn partial(&self, data: &[f64], ncomp: usize, axis: usize) -> Vec<f64> {
        let total = self.grid.node_count();
        assert_eq!(data.len(), total * ncomp);
        let Some(plan) = &self.plans[axis] else {
            return vec![0.0; data.len()];
        };
        let n = plan.n;
        let stride = self.grid.stride(axis);
        let h = self.grid.spacing(axis);
        let starts = self.line_starts(axis);
        let scheme = self.scheme;
        let lines: Vec<Vec<f64>> = starts
            .par_iter()
            .map(|&start| {
                let mut out = vec![0.0; n * ncomp];
                let at = |i: usize, c: usize| data[(start + i * stride) * ncomp + c];
                match scheme {
                    Scheme::Fd4 => {
                        for i in 0..n {
                            let (p1, p2) = ((i + 1) % n, (i + 2) % n);
                            let (m1, m2) = ((i + n - 1) % n, (i + n - 2) % n);
                            for c in 0..ncomp {
                                out[i * ncomp + c] =
                                    (-at(p2, c) + 8.0 * at(p1, c) - 8.0 * at(m1, c) + at(m2, c))
                                        / (12.0 * h);
                            }
                        }
                    }
                    Scheme::Spectral => {
                        let mut buf = vec![Complex64::new(0.0, 0.0); n];
                        let mut scratch =
                            vec![Complex64::new(0.0, 0.0); plan.forward.get_inplace_scratch_len()];
                        let mut c = 0;
                        while c < ncomp {
                            let pair = c + 1 < ncomp;
                            for (i, z) in buf.iter_mut().enumerate() {
                                let im = if pair { at(i, c + 1) } else { 0.0 };
                                *z = Complex64::new(at(i, c), im);
                            }
                            plan.forward.process_with_scratch(&mut buf, &mut scratch);
                            for (z, s) in buf.iter_mut().zip(&plan.symbol) {
                                *z *= s;
                            }
                            plan.inverse.process_with_scratch(&mut buf, &mut scratch);
                            for (i, z) in buf.iter().enumerate() {
                                out[i * ncomp + c] = z.re;
                                if pair {
                                    out[i * ncomp + c + 1] = z.im;
                                }
                            }
                            c += 2;
                        }
                    }
                }
                out
            })
            .collect();
        let mut result = vec![0.0; data.len()];
        for (start, line) in starts.iter().zip(lines) {
            for i in 0..n {
                let node = start + i * stride;
                result[node * ncomp..(node + 1) * ncomp]
                    .copy_from_slice(&line[i * ncomp..(i + 1) * ncomp]);
            }
        }
        result
    }

    /// Partials along every axis; `None` for inactive axes.
    pub fn gradient(&self, data: &[f64], ncomp: usize) -> Vec<Option<Vec<f64>>> {
        (0..DIM)
            .map(|a| self.grid.is_active(a).then(|| self.partial(data, ncomp, a)))
            .collect()
    }

    pub fn partial_derivative(&self, f: &TensorField, axis: usize) -> TensorField {
        let data = self.partial(f.data(), f.block_len(), axis);
        TensorField::from_data(*f.grid(), f.variance().to_vec(), data)
    }

    pub fn partial_form(&self, f: &FormField, axis: usize) -> FormField {
        let data = self.partial(f.data(), f.block_len(), axis);
        FormField::from_data(*f.grid(), f.degree(), data)
    }

    /// Fraction of spectral energy in modes above 2/3 of the Nyquist
    /// wavenumber, maximized over active axes.
    pub fn high_mode_fraction(&self, data: &[f64], ncomp: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for (axis, plan) in self.plans.iter().enumerate() {
            let Some(plan) = plan else { continue };
            let n = plan.n;
            let cut = n / 3;
            let stride = self.grid.stride(axis);
            let starts = self.line_starts(axis);
            let sums: Vec<(f64, f64)> = starts
                .par_iter()
                .map(|&start| {
                    let mut buf = vec![Complex64::new(0.0, 0.0); n];
                    let (mut hi, mut tot) = (0.0, 0.0);
                    for c in 0..ncomp {
                        for (i, z) in buf.iter_mut().enumerate() {
                            *z = Complex64::new(data[(start + i * stride) * ncomp + c], 0.0);
                        }
                        plan.forward.process(&mut buf);
                        for (j, z) in buf.iter().enumerate() {
                            let e = z.norm_sqr();
                            tot += e;
                            let k = if j <= n / 2 { j } else { n - j };
                            if k > cut {
                                hi += e;
                            }
                        }
                    }
                    (hi, tot)
                })
                .collect();
            let (hi, tot) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
            if tot > 0.0 {
                worst = worst.max(hi / tot);
            }
        }
        worst
    }
}
