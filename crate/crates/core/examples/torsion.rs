//! Torsion of a coclosed perturbation of the standard structure and its
//! splitting into the four torsion forms.

use g2flow::coflow::{build_initial, refresh_geometry, FlowContext, InitialData, Perturbation};
use g2flow::fields::{Differentiator, Grid, Scheme};
use g2flow::torsion::{coclosed_residual, coclosed_symmetry_check, reconstruct, torsion_forms};

fn main() {
    let grid = Grid::with_active(&[0, 3], 16).unwrap();
    let ctx = FlowContext::new(Differentiator::new(grid, Scheme::Spectral));
    let spec = InitialData::Perturbation(Perturbation {
        amplitude: 1e-2,
        modes: vec![1, 2],
        seed: 11,
        axes: vec![0, 3],
    });
    let psi = build_initial(&spec, &grid, &ctx.diff).unwrap();
    println!("|d psi| = {:.1e}", coclosed_residual(&psi, &ctx.diff));

    let geo = refresh_geometry(&psi, None, &ctx).unwrap();
    println!(
        "phi recovered in at most {} iterations, |*phi - psi| = {:.1e}",
        geo.iterations, geo.star_residual
    );
    println!("sup |T| = {:.4e}", geo.torsion.sup_norm());
    let sym = coclosed_symmetry_check(&geo.torsion, &psi, &ctx.diff, 1e-8).unwrap();
    println!("|T - T^t| = {sym:.1e}");

    let forms = torsion_forms(&geo.torsion, &geo.phi, &geo.metric);
    println!(
        "tau0 {:.3e}, tau1 {:.1e}, tau2 {:.1e}, tau3 {:.3e}",
        forms.tau0.sup_norm(),
        forms.tau1.sup_norm(),
        forms.tau2.sup_norm(),
        forms.tau3.sup_norm()
    );
    let back = reconstruct(&forms, &geo.phi, &geo.metric);
    let err = back
        .t
        .data()
        .iter()
        .zip(geo.torsion.t.data())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    println!("reconstruction error {err:.1e}");
}
