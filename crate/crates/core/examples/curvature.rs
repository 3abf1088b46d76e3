//! Metric fields on the torus: Christoffel symbols and curvature of a
//! warped product, and exterior calculus with spectral derivatives.

use g2flow::algebra::Mat7;
use g2flow::fields::{
    exterior_derivative, hodge_laplacian, levi_civita, riemann, Differentiator, FormField, Grid,
    MetricField, Scheme,
};

fn main() {
    let n = 32;
    let grid = Grid::with_active(&[0], n).unwrap();
    let diff = Differentiator::new(grid, Scheme::Spectral);

    // dx0^2 + e^{2f} dx1^2 + ..., f = 0.3 sin x0
    let f = |x: f64| 0.3 * x.sin();
    let g = MetricField::from_fn(grid, |x| {
        let mut m = Mat7::identity();
        m[(1, 1)] = (2.0 * f(x[0])).exp();
        m
    })
    .unwrap();
    let gamma = levi_civita(&g, &diff);
    let curv = riemann(&g, &gamma, &diff);
    let mut worst: f64 = 0.0;
    for node in 0..grid.node_count() {
        let x = grid.position(node)[0];
        // sectional curvature -(f'' + f'^2), scalar curvature twice that
        let (d1, d2) = (0.3 * x.cos(), -0.3 * x.sin());
        let want = -2.0 * (d2 + d1 * d1);
        worst = worst.max((curv.scalar.at(node)[0] - want).abs());
    }
    println!("scalar curvature vs closed form: {worst:.2e}");
    let sym = curv.symmetry();
    println!(
        "symmetries: first pair {:.1e}, pair exchange {:.1e}, Bianchi {:.1e}",
        sym.first_pair, sym.pair_exchange, sym.bianchi
    );

    let a = FormField::from_fn(grid, 2, |x, out| out[0] = x[0].sin());
    let da = exterior_derivative(&a, &diff);
    println!(
        "|d d a| = {:.1e}",
        exterior_derivative(&da, &diff).sup_norm()
    );
    let flat = MetricField::flat(grid);
    let lap = hodge_laplacian(&a, &flat, &diff);
    println!(
        "Hodge Laplacian of sin(x0) e01 has sup {:.6}",
        lap.sup_norm()
    );
}
