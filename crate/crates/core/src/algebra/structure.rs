use super::error::AlgebraError;
use super::form::PointForm;
use super::metric::{hodge_star, metric_from_phi, Metric};
use super::projection::{project, Component};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 50;

/// Standard 3-form and its dual 4-form on R^7 (0-based indices).
pub fn standard_structure() -> (PointForm, PointForm) {
    let phi = PointForm::from_terms(
        3,
        &[
            (1.0, &[0, 1, 2]),
            (1.0, &[0, 3, 4]),
            (1.0, &[0, 5, 6]),
            (1.0, &[1, 3, 5]),
            (-1.0, &[1, 4, 6]),
            (-1.0, &[2, 3, 6]),
            (-1.0, &[2, 4, 5]),
        ],
    );
    let psi = PointForm::from_terms(
        4,
        &[
            (1.0, &[3, 4, 5, 6]),
            (1.0, &[1, 2, 5, 6]),
            (1.0, &[1, 2, 3, 4]),
            (1.0, &[0, 2, 4, 6]),
            (-1.0, &[0, 2, 3, 5]),
            (-1.0, &[0, 1, 4, 5]),
            (-1.0, &[0, 1, 3, 6]),
        ],
    );
    (phi, psi)
}

/// Outcome of recovering the 3-form from a 4-form.
#[derive(Clone, Debug)]
pub struct PhiRecovery {
    pub phi: PointForm,
    pub metric: Metric,
    pub iterations: usize,
    /// Sup norm of *phi - psi at the returned phi.
    pub residual: f64,
}

/// Starting guess that depends on psi alone: its Euclidean Hodge dual.
pub fn flat_guess(psi: &PointForm) -> PointForm {
    hodge_star(psi, &Metric::identity())
}

/// Solves *_{g(phi)} phi = psi for phi.
///
/// Each step inverts the linearization of phi -> *phi, which acts on the
/// 1, 7 and 27 dimensional pieces of a 3-form by 4/3, 1 and -1 after
/// dualizing. The plain iteration phi <- *_{g(phi)} psi is not used since
/// it amplifies the 7 and 27 pieces by 2 per step. Steps are halved until
/// phi stays positive and the residual drops; `max_iter` bounds the number
/// of metric evaluations, line search included.
pub fn recover_phi(
    psi: &PointForm,
    guess: &PointForm,
    tol: f64,
    max_iter: usize,
) -> Result<PhiRecovery, AlgebraError> {
    assert_eq!(psi.degree(), 4);
    let evaluate = |phi: &PointForm| {
        metric_from_phi(phi).ok().map(|(m, _)| {
            let r = psi.clone() - hodge_star(phi, &m);
            (m, r)
        })
    };
    let mut evals = 1;
    let mut phi = guess.clone();
    let (mut m, mut r) = evaluate(&phi).ok_or(AlgebraError::NoConvergence {
        iterations: evals,
        residual: f64::INFINITY,
    })?;
    let mut residual = r.sup_norm();
    let fail = |iterations, residual| AlgebraError::NoConvergence {
        iterations,
        residual,
    };
    loop {
        if !residual.is_finite() {
            return Err(fail(evals, residual));
        }
        if residual <= tol {
            return Ok(PhiRecovery {
                phi,
                metric: m,
                iterations: evals,
                residual,
            });
        }
        let rho = hodge_star(&r, &m);
        let split = project(&rho, &phi, &m);
        let mut dir = split.part(Component::Three1).scale(0.75);
        dir += split.part(Component::Three7);
        dir -= split.part(Component::Three27);
        let mut s = 1.0;
        loop {
            if evals >= max_iter {
                return Err(fail(evals, residual));
            }
            evals += 1;
            let trial = phi.clone() + dir.scale(s);
            if let Some((mt, rt)) = evaluate(&trial) {
                let res = rt.sup_norm();
                if res < residual {
                    (phi, m, r, residual) = (trial, mt, rt, res);
                    break;
                }
            }
            s *= 0.5;
        }
    }
}

/// Recovers phi from psi; see [`recover_phi`].
pub fn phi_from_psi(
    psi: &PointForm,
    guess: &PointForm,
    tol: f64,
    max_iter: usize,
) -> Result<PointForm, AlgebraError> {
    recover_phi(psi, guess, tol, max_iter).map(|r| r.phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wobble(seed: u64, degree: usize, scale: f64) -> PointForm {
        let n = super::super::tables::form_dim(degree);
        let comps = (0..n)
            .map(|i| scale * (((i as u64 + 1) * (seed + 7)) as f64 * 0.618).sin())
            .collect();
        PointForm::from_components(degree, comps)
    }

    #[test]
    fn standard_is_a_fixed_point() {
        let (phi, psi) = standard_structure();
        let r = recover_phi(&psi, &phi, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(r.iterations, 1);
        assert_eq!(r.phi, phi);
    }

    #[test]
    fn linearization_matches_finite_differences() {
        // d/de *_{g(phi + e v)}(phi + e v), dualized, acts by 4/3, 1, -1
        let (phi0, _) = standard_structure();
        let phi = phi0 + wobble(3, 3, 0.05);
        let (m, _) = metric_from_phi(&phi).unwrap();
        let v = wobble(11, 3, 1.0);
        let eps = 1e-6;
        let plus = phi.clone() + v.scale(eps);
        let minus = phi.clone() - v.scale(eps);
        let star = |f: &PointForm| hodge_star(f, &metric_from_phi(f).unwrap().0);
        let dpsi = (star(&plus) - star(&minus)).scale(0.5 / eps);
        let got = hodge_star(&dpsi, &m);
        let split = project(&v, &phi, &m);
        let want = split.part(Component::Three1).scale(4.0 / 3.0)
            + split.part(Component::Three7).clone()
            - split.part(Component::Three27).clone();
        assert!((got - want).sup_norm() < 1e-7);
    }

    #[test]
    fn negated_dual_is_not_recoverable() {
        let (phi, psi) = standard_structure();
        let err = recover_phi(&-psi, &phi, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap_err();
        assert!(matches!(err, AlgebraError::NoConvergence { .. }));
    }
}
