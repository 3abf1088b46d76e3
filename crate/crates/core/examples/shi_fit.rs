//! Derivative sequences of curvature and torsion on a flowed state, the
//! factorial-growth fit and the reference curve for the aggregate.

use g2flow::analysis::{
    aggregates, blow_up_time, fit_analyticity, initial_bound, lambda_field, reference_curve,
    shi_sequences, FitSample, ShiOptions,
};
use g2flow::coflow::{
    build_initial, plan_steps, run, FlowContext, FlowState, InitialData, Integrator, Perturbation,
    Route,
};
use g2flow::fields::{Differentiator, Grid, Scheme};

fn main() {
    let grid = Grid::with_active(&[0], 32).unwrap();
    let ctx = FlowContext::new(Differentiator::new(grid, Scheme::Spectral));
    let spec = InitialData::Perturbation(Perturbation {
        amplitude: 1e-2,
        modes: vec![1, 2],
        seed: 7,
        axes: vec![0],
    });
    let psi = build_initial(&spec, &grid, &ctx.diff).unwrap();
    let state = FlowState::new(psi, 1.0, Route::Direct, &ctx).unwrap();
    let m0 = lambda_field(&state.geometry, &ctx).sup;
    let plan = plan_steps(&state, 0.05, 0.1);
    let s = run(state, plan, Integrator::Rk4, &ctx, |_| {}).unwrap();

    let opts = ShiOptions {
        kmax: 4,
        include_forms: false,
    };
    let seq = shi_sequences(&s.geometry, &s.psi, s.t, opts, &ctx).unwrap();
    println!("t = {}", s.t);
    for k in 0..=seq.kmax {
        println!(
            "k={k}: |nabla^k Rm| = {:.4e}, |nabla^(k+1) T| = {:.4e}, a = {:.4e}, b = {:.4e}",
            seq.norms.rm[k],
            seq.norms.torsion[k + 1],
            seq.a[k],
            seq.b[k]
        );
    }
    println!("noise flags {:?}", seq.noise);

    let fit = fit_analyticity(&FitSample::from_sequences(&seq)).unwrap();
    println!(
        "fit: C = {:.4}, L = {:.4}, consistent {}, residuals {:?}",
        fit.c_fit, fit.l_fit, fit.consistent, fit.residuals
    );

    let agg = aggregates(&seq, &s.geometry, &s.psi, s.a);
    let bound = initial_bound(m0, s.a);
    println!(
        "Phi_N = {:.4}, initial bound {bound:.4e}, curve blows up at t = {:.2e} (value at t: {:.3e})",
        agg.phi_n,
        blow_up_time(m0, s.a, fit.c_fit),
        reference_curve(s.t, m0, s.a, fit.c_fit)
    );
}
