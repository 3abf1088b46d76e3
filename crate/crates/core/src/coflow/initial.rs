use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::error::CoflowError;
use crate::algebra::tables::form_dim;
use crate::algebra::{
    flat_guess, recover_phi, standard_structure, DEFAULT_MAX_ITER, DEFAULT_TOL, DIM,
};
use crate::fields::{exterior_derivative, Differentiator, FormField, Grid};
use crate::torsion::{coclosed_residual, default_coclosed_threshold};

/// Band-limited random potential for psi0 + d(beta).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    /// Sup norm of d(beta) over all nodes and components.
    pub amplitude: f64,
    /// Integer wavenumbers used along each active axis.
    pub modes: Vec<usize>,
    pub seed: u64,
    /// Axes (0-based) the potential varies along.
    pub axes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialData {
    Flat,
    Perturbation(Perturbation),
}

struct Wave {
    /// wavenumber per axis
    k: [f64; DIM],
    cos: Vec<f64>,
    sin: Vec<f64>,
}

fn waves(grid: &Grid, p: &Perturbation) -> Result<Vec<Wave>, CoflowError> {
    for &a in &p.axes {
        if a >= DIM || !grid.is_active(a) {
            return Err(CoflowError::InvalidSpec(format!(
                "axis {} is not active on the grid",
                a + 1
            )));
        }
        for &m in &p.modes {
            if m == 0 || 2 * m >= grid.dims()[a] {
                return Err(CoflowError::InvalidSpec(format!(
                    "mode {m} is not resolved by {} nodes on axis {}",
                    grid.dims()[a],
                    a + 1
                )));
            }
        }
    }
    if p.axes.is_empty() || p.modes.is_empty() {
        return Err(CoflowError::InvalidSpec(
            "perturbation needs axes and modes".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let n = form_dim(3);
    let mut draw = |k: [f64; DIM]| Wave {
        k,
        cos: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        sin: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    };
    let mut out = Vec::new();
    let lengths = grid.lengths();
    for &m in &p.modes {
        for (i, &a) in p.axes.iter().enumerate() {
            let mut k = [0.0; DIM];
            k[a] = std::f64::consts::TAU * m as f64 / lengths[a];
            out.push(draw(k));
            // one diagonal wave per pair of axes
            for &b in &p.axes[i + 1..] {
                let mut kk = k;
                kk[b] = std::f64::consts::TAU * m as f64 / lengths[b];
                out.push(draw(kk));
            }
        }
    }
    Ok(out)
}

/// The random 3-form potential, before normalization.
pub fn random_potential(grid: &Grid, p: &Perturbation) -> Result<FormField, CoflowError> {
    let ws = waves(grid, p)?;
    Ok(FormField::from_fn(*grid, 3, |x, out| {
        for w in &ws {
            let phase: f64 = (0..DIM).map(|a| w.k[a] * x[a]).sum();
            let (s, c) = phase.sin_cos();
            for (i, o) in out.iter_mut().enumerate() {
                *o += w.cos[i] * c + w.sin[i] * s;
            }
        }
    }))
}

/// d(beta) scaled to unit sup norm.
pub fn unit_exact_perturbation(
    grid: &Grid,
    p: &Perturbation,
    diff: &Differentiator,
) -> Result<FormField, CoflowError> {
    let d = exterior_derivative(&random_potential(grid, p)?, diff);
    let s = d.sup_norm();
    if s == 0.0 {
        return Err(CoflowError::InvalidSpec("potential is closed".into()));
    }
    Ok(d.scale(1.0 / s))
}

fn all_positive(psi: &FormField) -> bool {
    (0..psi.grid().node_count()).into_par_iter().all(|n| {
        let p = psi.at(n);
        recover_phi(&p, &flat_guess(&p), DEFAULT_TOL, DEFAULT_MAX_ITER).is_ok()
    })
}

/// Constant psi0, or psi0 + d(beta) with the potential drawn from the seed.
/// Checks closedness and that phi can be recovered at every node; on
/// failure, bisects for the largest amplitude that still works.
pub fn build_initial(
    spec: &InitialData,
    grid: &Grid,
    diff: &Differentiator,
) -> Result<FormField, CoflowError> {
    let (_, psi0) = standard_structure();
    let flat = FormField::constant(*grid, &psi0);
    let p = match spec {
        InitialData::Flat => return Ok(flat),
        InitialData::Perturbation(p) => p,
    };
    let amplitude = &p.amplitude;
    if !(*amplitude > 0.0 && amplitude.is_finite()) {
        return Err(CoflowError::InvalidSpec(format!(
            "amplitude {amplitude} must be positive"
        )));
    }
    let unit = unit_exact_perturbation(grid, p, diff)?;
    let psi = flat.axpy(*amplitude, &unit);
    let threshold = default_coclosed_threshold(grid, diff.scheme(), psi.sup_norm());
    let residual = coclosed_residual(&psi, diff);
    if residual > threshold {
        return Err(CoflowError::InvalidSpec(format!(
            "d psi = {residual:e} above threshold {threshold:e}"
        )));
    }
    if all_positive(&psi) {
        return Ok(psi);
    }
    let (mut lo, mut hi) = (0.0, *amplitude);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if all_positive(&flat.axpy(mid, &unit)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(CoflowError::NotPositive { safe_amplitude: lo })
}
