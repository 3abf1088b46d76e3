//! Pointwise G2 linear algebra: the model structure, a deformed positive
//! 3-form, its metric and dual 4-form, and recovery of phi from psi.

use g2flow::algebra::{
    flat_guess, hodge_star, identity_residuals, metric_from_phi, recover_phi, standard_structure,
    Mat7, DEFAULT_MAX_ITER, DEFAULT_TOL,
};

fn main() {
    let (phi0, psi0) = standard_structure();
    println!(
        "phi0 has {} nonzero components",
        phi0.components().iter().filter(|c| **c != 0.0).count()
    );

    // pull phi0 back along a linear map close to the identity
    let a = Mat7::from_fn(|i, j| {
        if i == j {
            1.0
        } else {
            0.05 * ((i * 7 + j) as f64).sin()
        }
    });
    let phi = phi0.pullback(&a);
    let (m, b) = metric_from_phi(&phi).expect("positive 3-form");
    println!("det B = {:.6}, vol = {:.6}", b.b.determinant(), m.vol());
    println!(
        "|g - A^T A| = {:.2e}",
        (m.g() - a.transpose() * a).abs().max()
    );

    let psi = hodge_star(&phi, &m);
    println!(
        "|phi|^2 = {:.12}, |psi|^2 = {:.12}",
        phi.tensor_norm_sq(&m),
        psi.tensor_norm_sq(&m)
    );
    println!(
        "identity residuals {:?}",
        identity_residuals(&phi, &m, &psi).0
    );

    let rec = recover_phi(&psi, &flat_guess(&psi), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    println!(
        "phi recovered from psi in {} metric evaluations, error {:.2e}",
        rec.iterations,
        (rec.phi - phi).sup_norm()
    );
    println!(
        "*psi0 = phi0: {:.1e}",
        (hodge_star(&psi0, &metric_from_phi(&phi0).unwrap().0) - phi0).sup_norm()
    );
}
