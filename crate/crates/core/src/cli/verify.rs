//! Quick self-checks of the numerical core, printed as a pass/fail table.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::checkpoint::Checkpoint;
use super::config::RouteChoice;
use crate::algebra::{
    flat_guess, hodge_star, identity_residuals, metric_from_phi, phi_from_psi, standard_structure,
    Mat7, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use crate::analysis::{commutator_monitor, fit_analyticity, Background, FitSample};
use crate::coflow::{
    build_initial, psi_rate_direct, run, velocity, FlowContext, FlowState, InitialData, Integrator,
    Perturbation, Route, StepPlan,
};
use crate::fields::{Differentiator, FormField, Grid, MetricField, Scheme, TensorField, Variance};
use crate::torsion::{decompose_point, reconstruct_point};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value <= self.tolerance
    }
}

/// Random orientation-preserving linear map near the identity.
fn random_frame(rng: &mut ChaCha8Rng, spread: f64) -> Mat7 {
    let mut a =
        Mat7::from_fn(|i, j| f64::from(u8::from(i == j)) + spread * rng.gen_range(-1.0..1.0));
    if a.determinant() < 0.0 {
        a.row_mut(0).neg_mut();
    }
    a
}

fn algebra_checks(rng: &mut ChaCha8Rng, out: &mut Vec<Check>) {
    let (phi0, _) = standard_structure();
    let (mut ident, mut norms, mut recover, mut round_trip) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let phi = phi0.pullback(&random_frame(rng, 0.3));
        let Ok((m, _)) = metric_from_phi(&phi) else {
            continue;
        };
        let psi = hodge_star(&phi, &m);
        ident = ident.max(identity_residuals(&phi, &m, &psi).max());
        norms = norms
            .max((phi.tensor_norm_sq(&m) - 42.0).abs())
            .max((psi.tensor_norm_sq(&m) - 168.0).abs());
        if let Ok(r) = phi_from_psi(&psi, &flat_guess(&psi), DEFAULT_TOL, DEFAULT_MAX_ITER) {
            recover = recover.max((r - phi.clone()).sup_norm());
        } else {
            recover = f64::INFINITY;
        }
        let t = Mat7::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        round_trip = round_trip.max(
            (reconstruct_point(&decompose_point(&t, &phi, &m), &phi, &m) - t)
                .abs()
                .max(),
        );
    }
    out.push(Check {
        name: "contraction identities of phi and psi",
        value: ident,
        tolerance: 1e-10,
    });
    out.push(Check {
        name: "|phi|^2 = 42 and |psi|^2 = 168",
        value: norms,
        tolerance: 1e-10,
    });
    out.push(Check {
        name: "phi recovered from psi",
        value: recover,
        tolerance: 1e-10,
    });
    out.push(Check {
        name: "torsion form decomposition round trip",
        value: round_trip,
        tolerance: 1e-11,
    });
}

fn flow_checks(out: &mut Vec<Check>) {
    let grid = Grid::with_active(&[0], 32).expect("valid grid");
    let ctx = FlowContext::new(Differentiator::new(grid, Scheme::Spectral));

    let flat = FormField::constant(grid, &standard_structure().1);
    let state = FlowState::new(flat.clone(), 1.0, Route::Direct, &ctx).expect("flat state");
    let end = run(
        state,
        StepPlan {
            dt: 1e-3,
            n_steps: 20,
        },
        Integrator::Rk4,
        &ctx,
        |_| {},
    )
    .expect("flat run");
    out.push(Check {
        name: "flat structure is stationary",
        value: (&end.psi - &flat).sup_norm(),
        tolerance: 1e-10,
    });

    let spec = InitialData::Perturbation(Perturbation {
        amplitude: 1e-2,
        modes: vec![1, 2],
        seed: 7,
        axes: vec![0],
    });
    let psi = build_initial(&spec, &grid, &ctx.diff).expect("perturbed data");
    let state = FlowState::new(psi, 1.0, Route::Direct, &ctx).expect("perturbed state");
    let direct = psi_rate_direct(&state, &ctx);
    let vel = velocity(&state, &ctx).psi_rate;
    out.push(Check {
        name: "direct and velocity rates agree",
        value: (&direct - &vel).sup_norm(),
        tolerance: 1e-10,
    });
    out.push(Check {
        name: "torsion of coclosed data is symmetric",
        value: state.geometry.torsion.antisymmetry(),
        tolerance: 1e-10,
    });

    let s = TensorField::from_fn(grid, vec![Variance::Co; 2], |x, c| {
        for (i, v) in c.iter_mut().enumerate() {
            *v = ((i % 5) as f64 * x[0]).cos() + 0.1 * i as f64;
        }
    });
    let bg = Background::from_metric(MetricField::flat(grid), &ctx.diff);
    let lhs = (1..=2)
        .map(|k| {
            commutator_monitor(&s, &bg, &ctx.diff, k)
                .map(|r| r.lhs_sup)
                .unwrap_or(f64::INFINITY)
        })
        .fold(0.0, f64::max);
    out.push(Check {
        name: "commutator vanishes on a flat background",
        value: lhs,
        tolerance: 1e-10,
    });
}

fn misc_checks(rng: &mut ChaCha8Rng, out: &mut Vec<Check>) {
    let samples: Vec<FitSample> = (0..5)
        .map(|k| {
            let d = 3.0 * 2f64.powf(k as f64 / 2.0) * (1..=k + 1).product::<usize>() as f64;
            FitSample::from_numerator(k, 1.0, d, false)
        })
        .collect();
    let err = fit_analyticity(&samples)
        .map(|f| (f.c_fit - 3.0).abs().max((f.l_fit - 2.0).abs()))
        .unwrap_or(f64::INFINITY);
    out.push(Check {
        name: "analyticity fit on exact factorial data",
        value: err,
        tolerance: 1e-10,
    });

    let grid = Grid::with_active(&[1, 3], 8).expect("valid grid");
    let values: Vec<f64> = (0..grid.node_count() * 35)
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    let psi = FormField::from_data(grid, 4, values);
    let ck = Checkpoint {
        grid,
        t: rng.gen(),
        coupling: 1.0,
        route: RouteChoice::Direct,
        scheme: Scheme::Spectral,
        integrator: Integrator::Rk4,
        step: 3,
        dt: rng.gen(),
        n_steps: 9,
        psi: vec![psi],
    };
    let bytes = ck.to_bytes();
    let same = Checkpoint::from_bytes(&bytes)
        .map(|c| c == ck && c.to_bytes() == bytes)
        .unwrap_or(false);
    out.push(Check {
        name: "checkpoint round trip is bit exact",
        value: if same { 0.0 } else { 1.0 },
        tolerance: 0.0,
    });
}

/// Runs every check; takes a few seconds.
pub fn verify_all() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut out = Vec::new();
    algebra_checks(&mut rng, &mut out);
    flow_checks(&mut out);
    misc_checks(&mut rng, &mut out);
    out
}

pub fn format_table(checks: &[Check]) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut s = format!(
        "{:<width$}  {:>10}  {:>10}  result\n",
        "check", "value", "tolerance"
    );
    for c in checks {
        s += &format!(
            "{:<width$}  {:>10.3e}  {:>10.1e}  {}\n",
            c.name,
            c.value,
            c.tolerance,
            if c.passed() { "pass" } else { "FAIL" }
        );
    }
    s
}
