mod common;

use approx::assert_abs_diff_eq;
use common::*;
use g2flow::algebra::*;
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

fn flat() -> Metric {
    Metric::identity()
}

#[test]
fn standard_components() {
    let (phi, psi) = standard_structure();
    // 1-based (1,2,3) and (2,5,7)
    assert_eq!(phi.get(&[0, 1, 2]), 1.0);
    assert_eq!(phi.get(&[1, 4, 6]), -1.0);
    // 1-based (4,5,6,7) and (1,2,4,7)
    assert_eq!(psi.get(&[3, 4, 5, 6]), 1.0);
    assert_eq!(psi.get(&[0, 1, 3, 6]), -1.0);
    assert_eq!(phi.components().iter().filter(|c| **c != 0.0).count(), 7);
    assert_eq!(psi.components().iter().filter(|c| **c != 0.0).count(), 7);
    assert_eq!(phi.tensor_norm_sq(&flat()), 42.0);
    assert_eq!(psi.tensor_norm_sq(&flat()), 168.0);
}

#[test]
fn metric_of_standard_is_identity() {
    let (phi, _) = standard_structure();
    let (m, b) = metric_from_phi(&phi).unwrap();
    assert!((m.g() - Mat7::identity()).abs().max() < 1e-14);
    assert_abs_diff_eq!(b.det(), 1.0, epsilon = 1e-13);
    assert!((brute_b(&phi) - Mat7::identity()).abs().max() < 1e-14);
    assert!((m.g() * m.inv() - Mat7::identity()).abs().max() < 1e-13);
    assert_abs_diff_eq!(m.vol() * m.vol(), m.det(), epsilon = 1e-13);
}

#[test]
fn metric_scales_with_two_thirds_power() {
    let (phi0, _) = standard_structure();
    for c in [0.5, 2.0] {
        let phi = phi0.scale(c);
        let (m, _) = metric_from_phi(&phi).unwrap();
        let want = Mat7::identity() * c.powf(2.0 / 3.0);
        assert!((m.g() - want).abs().max() < 1e-13);
        assert!((brute_metric(&phi) - want).abs().max() < 1e-13);
    }
}

#[test]
fn flipped_term_is_not_positive() {
    let (phi0, _) = standard_structure();
    let mut phi = phi0.clone();
    phi.components_mut()[0] = -1.0;
    assert!(matches!(
        metric_from_phi(&phi),
        Err(AlgebraError::NotPositive { .. })
    ));
    let b = brute_b(&phi);
    let eig = SymmetricEigen::new(b).eigenvalues;
    assert!(eig.min() < 0.0 || b.determinant() <= 0.0);
}

#[test]
fn star_of_standard_forms() {
    let (phi, psi) = standard_structure();
    assert_eq!(hodge_star(&phi, &flat()), psi);
    let vol = hodge_star(&PointForm::scalar(1.0), &flat());
    assert_eq!(vol.degree(), 7);
    assert_eq!(vol.components(), &[1.0]);
    assert_eq!(hodge_star(&vol, &flat()).components(), &[1.0]);
}

// Under g = c^2 I the star of a 3-form picks up c^(7-6) = c.
#[test]
fn star_under_constant_rescaling() {
    let (phi, psi) = standard_structure();
    for c in [0.5f64, 3.0] {
        let m = Metric::new(Mat7::identity() * (c * c)).unwrap();
        let got = hodge_star(&phi, &m);
        assert!((got.clone() - psi.scale(c)).sup_norm() < 1e-13);
        assert!((got - brute_star(&phi, m.g())).sup_norm() < 1e-13);
    }
}

#[test]
fn recovery_examples() {
    let (phi0, psi0) = standard_structure();
    let r = recover_phi(&psi0, &phi0, 1e-12, 50).unwrap();
    assert_eq!(r.iterations, 1);
    assert_eq!(r.phi, phi0);

    // a small pointwise perturbation, as produced by psi0 + d(beta)
    let mut g = rng(3);
    let psi = psi0.clone() + random_form(&mut g, 4, 1e-3);
    let r = recover_phi(&psi, &phi0, 1e-12, 50).unwrap();
    let (m, _) = metric_from_phi(&r.phi).unwrap();
    assert!((hodge_star(&r.phi, &m) - psi).sup_norm() <= 1e-11);
    assert!(r.iterations <= 6, "{} iterations", r.iterations);

    assert!(matches!(
        phi_from_psi(&-psi0, &phi0, 1e-12, 50),
        Err(AlgebraError::NoConvergence { .. })
    ));
}

#[test]
fn recovery_far_from_standard() {
    let mut g = rng(11);
    for _ in 0..20 {
        let phi = pulled_back_phi0(&random_frame(&mut g, 0.3));
        let (m, _) = metric_from_phi(&phi).unwrap();
        let psi = hodge_star(&phi, &m);
        let r = recover_phi(&psi, &flat_guess(&psi), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!((r.phi - phi).sup_norm() < 1e-10);
    }
}

#[test]
fn projection_examples() {
    let (phi, _) = standard_structure();
    let m = flat();
    let beta = phi.interior_basis(0);
    let split = project(&beta, &phi, &m);
    assert!((split.part(Component::Two7).clone() - beta).sup_norm() < 1e-14);
    assert!(split.part(Component::Two14).sup_norm() < 1e-14);

    let split = project(&phi, &phi, &m);
    assert!((split.part(Component::Three1).clone() - phi.clone()).sup_norm() < 1e-14);
    assert!(split.part(Component::Three7).sup_norm() < 1e-14);
    assert!(split.part(Component::Three27).sup_norm() < 1e-14);
}

/// (*(phi ^ b))_ab = 1/(3! 2!) phi_cde b_fg eps_cdefgab on the flat metric.
fn brute_two_form_operator(phi: &PointForm, b: &PointForm) -> PointForm {
    let dp = dense(phi);
    let db = dense(b);
    let mut out = vec![0.0; 49];
    for (p, s) in permutations7() {
        let v = dp[(p[0] * 7 + p[1]) * 7 + p[2]] * db[p[3] * 7 + p[4]];
        out[p[5] * 7 + p[6]] += s * v / 12.0;
    }
    from_dense(2, &out)
}

#[test]
fn two_form_split_matches_eigendecomposition() {
    let (phi, _) = standard_structure();
    let basis: Vec<PointForm> = (0..21)
        .map(|i| {
            let mut c = vec![0.0; 21];
            c[i] = 1.0;
            PointForm::from_components(2, c)
        })
        .collect();
    let op = DMatrix::from_fn(21, 21, |i, j| {
        brute_two_form_operator(&phi, &basis[j]).components()[i]
    });
    assert!((&op - op.transpose()).abs().max() < 1e-14);
    let eig = SymmetricEigen::new(op);
    let mut p7 = DMatrix::zeros(21, 21);
    let (mut n7, mut n14) = (0, 0);
    for (k, ev) in eig.eigenvalues.iter().enumerate() {
        if (ev - 2.0).abs() < 1e-10 {
            n7 += 1;
            let v = eig.eigenvectors.column(k);
            p7 += v * v.transpose();
        } else {
            assert!((ev + 1.0).abs() < 1e-10, "eigenvalue {ev}");
            n14 += 1;
        }
    }
    assert_eq!((n7, n14), (7, 14));
    let mut g = rng(5);
    for _ in 0..10 {
        let b = random_form(&mut g, 2, 1.0);
        let want = &p7 * DMatrix::from_column_slice(21, 1, b.components());
        let split = project(&b, &phi, &flat());
        let got = split.part(Component::Two7).components();
        for i in 0..21 {
            assert!((got[i] - want[i]).abs() < 1e-12);
        }
    }
}

#[test]
fn identity_residuals_on_orbit() {
    let (phi0, psi0) = standard_structure();
    assert!(identity_residuals(&phi0, &flat(), &psi0).max() <= 1e-12);
    for c in [0.5, 1.0, 2.0] {
        let phi = phi0.scale(c);
        let (m, _) = metric_from_phi(&phi).unwrap();
        let psi = hodge_star(&phi, &m);
        assert!(identity_residuals(&phi, &m, &psi).max() <= 1e-11);
    }
}

// Second identity written out with explicit loops: phi_ijk phi_abc g^jb g^kc = 6 g_ia.
#[test]
fn double_contraction_by_loops() {
    let mut g = rng(8);
    let phi = pulled_back_phi0(&random_frame(&mut g, 0.2));
    let gm = brute_metric(&phi);
    let gi = gm.try_inverse().unwrap();
    let d = dense(&phi);
    let at = |i: usize, j: usize, k: usize| d[(i * 7 + j) * 7 + k];
    for i in 0..7 {
        for a in 0..7 {
            let mut acc = 0.0;
            for j in 0..7 {
                for k in 0..7 {
                    for b in 0..7 {
                        for c in 0..7 {
                            acc += at(i, j, k) * at(a, b, c) * gi[(j, b)] * gi[(k, c)];
                        }
                    }
                }
            }
            assert!((acc - 6.0 * gm[(i, a)]).abs() < 1e-10);
        }
    }
}

#[test]
fn split_dimensions() {
    let mut g = rng(9);
    let phi = pulled_back_phi0(&random_frame(&mut g, 0.2));
    let (m, _) = metric_from_phi(&phi).unwrap();
    for (p, comps) in [
        (2, vec![Component::Two7, Component::Two14]),
        (
            3,
            vec![Component::Three1, Component::Three7, Component::Three27],
        ),
    ] {
        let n = g2flow::algebra::tables::form_dim(p);
        for c in comps {
            // trace of the projector counts the dimension
            let tr: f64 = (0..n)
                .map(|i| {
                    let mut e = vec![0.0; n];
                    e[i] = 1.0;
                    project(&PointForm::from_components(p, e), &phi, &m)
                        .part(c)
                        .components()[i]
                })
                .sum();
            assert_abs_diff_eq!(tr, c.rank() as f64, epsilon = 1e-10);
        }
    }
}

fn frame_strategy() -> impl Strategy<Value = Mat7> {
    (any::<u64>(), 0.0..0.35f64).prop_map(|(seed, spread)| random_frame(&mut rng(seed), spread))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn positive_forms_have_fixed_norms(a in frame_strategy()) {
        let phi = pulled_back_phi0(&a);
        let (m, _) = metric_from_phi(&phi).unwrap();
        prop_assert!(m.min_eigenvalue() > 0.0);
        prop_assert!((m.g() - m.g().transpose()).abs().max() < 1e-13);
        prop_assert!((m.g() - brute_metric(&phi)).abs().max() < 1e-10);
        let psi = hodge_star(&phi, &m);
        prop_assert!((phi.tensor_norm_sq(&m) - 42.0).abs() < 1e-10);
        prop_assert!((psi.tensor_norm_sq(&m) - 168.0).abs() < 1e-10);
        let top = phi.wedge(&psi);
        prop_assert!((top.components()[0] - 7.0 * m.vol()).abs() < 1e-10);
        prop_assert!(identity_residuals(&phi, &m, &psi).max() < 1e-10);
    }

    #[test]
    fn scaling_law(a in frame_strategy(), c in 0.3..3.0f64) {
        let phi = pulled_back_phi0(&a);
        let (m, _) = metric_from_phi(&phi).unwrap();
        let (mc, _) = metric_from_phi(&phi.scale(c)).unwrap();
        prop_assert!((mc.g() - m.g() * c.powf(2.0 / 3.0)).abs().max() < 1e-12 * c.max(1.0));
    }

    #[test]
    fn star_is_an_involution(seed in any::<u64>(), p in 0usize..=7) {
        let mut g = rng(seed);
        let m = Metric::new(random_spd(&mut g, 0.2)).unwrap();
        let a = random_form(&mut g, p, 1.0);
        let back = hodge_star(&hodge_star(&a, &m), &m);
        prop_assert!((back - a.clone()).sup_norm() < 1e-11);
        // <a, a> vol = a ^ *a
        let top = a.wedge(&hodge_star(&a, &m));
        prop_assert!((top.components()[0] - a.inner(&a, &m) * m.vol()).abs() < 1e-11);
    }

    #[test]
    fn star_matches_brute_force(seed in any::<u64>(), p in 2usize..=4) {
        let mut g = rng(seed);
        let m = Metric::new(random_spd(&mut g, 0.2)).unwrap();
        let a = random_form(&mut g, p, 1.0);
        prop_assert!((hodge_star(&a, &m) - brute_star(&a, m.g())).sup_norm() < 1e-11);
    }

    #[test]
    fn splits_are_orthogonal_and_idempotent(a in frame_strategy(), seed in any::<u64>(), p in 2usize..=3) {
        let phi = pulled_back_phi0(&a);
        let (m, _) = metric_from_phi(&phi).unwrap();
        let x = random_form(&mut rng(seed), p, 1.0);
        let split = project(&x, &phi, &m);
        prop_assert!((split.sum() - x).sup_norm() < 1e-12);
        let parts: Vec<_> = split.parts().iter().collect();
        for (i, (ci, pi)) in parts.iter().enumerate() {
            let again = project(pi, &phi, &m);
            prop_assert!((again.part(**ci).clone() - (*pi).clone()).sup_norm() < 1e-12);
            for (_, pj) in &parts[i + 1..] {
                prop_assert!(pi.inner(pj, &m).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dense_expansion_alternates(seed in any::<u64>(), p in 1usize..=4) {
        let a = random_form(&mut rng(seed), p, 1.0);
        prop_assert_eq!(a.expand(), dense(&a));
        prop_assert_eq!(PointForm::from_dense(p, &dense(&a)), a);
    }
}
