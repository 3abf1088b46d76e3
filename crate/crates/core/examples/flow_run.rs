//! Runs the flow from a perturbed structure on one active axis and prints
//! torsion, closedness and the metric along the way.

use g2flow::coflow::{
    build_initial, closedness_threshold, plan_steps, run, FlowContext, FlowState, InitialData,
    Integrator, Perturbation, Route,
};
use g2flow::fields::{Differentiator, Grid, Scheme};
use g2flow::torsion::coclosed_residual;

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
    let plan = plan_steps(&state, 0.1, 0.1);
    println!(
        "dt = {:.3e}, {} steps, closedness threshold {:.0e}",
        plan.dt,
        plan.n_steps,
        closedness_threshold(&state.psi, &ctx)
    );
    println!(
        "{:>5} {:>8} {:>12} {:>10} {:>9}",
        "step", "t", "sup|T|", "|d psi|", "min eig"
    );
    let end = run(state, plan, Integrator::Rk4, &ctx, |s| {
        if s.step % 10 == 0 || s.step == plan.n_steps {
            println!(
                "{:>5} {:>8.4} {:>12.5e} {:>10.1e} {:>9.6}",
                s.step,
                s.t,
                s.geometry.torsion.sup_norm(),
                coclosed_residual(&s.psi, &ctx.diff),
                s.geometry.metric.min_eigenvalue()
            );
        }
    })
    .unwrap_or_else(|f| panic!("stopped at step {}: {}", f.last.step, f.error));
    println!("finished at t = {}", end.t);
}
