//! Commutator of the trace Laplacian with covariant derivatives on a
//! conformally flat background, compared with the curvature bound.

use g2flow::algebra::Mat7;
use g2flow::analysis::{commutator_monitor, Background};
use g2flow::fields::{Differentiator, Grid, MetricField, Scheme, TensorField, Variance};

fn main() {
    for n in [16, 32] {
        let grid = Grid::with_active(&[0], n).unwrap();
        let diff = Differentiator::new(grid, Scheme::Spectral);
        let metric =
            MetricField::from_fn(grid, |x| Mat7::identity() * (0.6 * x[0].sin()).exp()).unwrap();
        let bg = Background::from_metric(metric, &diff);
        let s = TensorField::from_fn(grid, vec![Variance::Co], |x, out| {
            for (i, o) in out.iter_mut().enumerate() {
                *o = (x[0] + i as f64).sin();
            }
        });
        for k in 1..=2 {
            let rep = commutator_monitor(&s, &bg, &diff, k).unwrap();
            println!(
                "N={n} k={k}: lhs {:.4e}, rhs {:.4e}, constant {:.4}",
                rep.lhs_sup,
                rep.rhs_sup,
                rep.c_hat.unwrap_or(0.0)
            );
        }
    }
}
