use serde::{Deserialize, Serialize};

use super::error::AnalysisError;
use crate::coflow::{FlowContext, Geometry};
use crate::fields::{
    iterated_norms_compressed, CompressedField, FieldError, FormField, SlotGroup, MAX_ORDER,
};

/// ln (n!) for n >= 0, and 0 for negative n.
pub fn ln_factorial(n: i64) -> f64 {
    (2..=n.max(0)).map(|k| (k as f64).ln()).sum()
}

/// t^(p/2) x / q!, in log space; zero when x is zero.
fn weighted(t: f64, half_power: i64, x: f64, fact: i64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if t == 0.0 {
        return if half_power == 0 {
            x / ln_factorial(fact).exp()
        } else {
            0.0
        };
    }
    (0.5 * half_power as f64 * t.ln() + x.ln() - ln_factorial(fact)).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiOptions {
    pub kmax: usize,
    /// Also compute the phi and psi sequences, which need two more
    /// derivatives than Rm.
    pub include_forms: bool,
}

/// Sup norms of the iterated derivatives feeding the sequences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeNorms {
    /// |nabla^k Rm|, k = 0..=kmax
    pub rm: Vec<f64>,
    /// |nabla^k T|, k = 0..=kmax+1
    pub torsion: Vec<f64>,
    /// |nabla^k phi|, k = 0..=kmax+2 (empty without forms)
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseFlags {
    pub rm: bool,
    pub torsion: bool,
    pub phi: bool,
    pub psi: bool,
}

/// Entries with tildes (k = 0..=kmax) and the negative-index entries;
/// only defined for t > 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TildeEntries {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub b_m1: f64,
    pub b_tilde_m1: f64,
    pub c_m1: Option<f64>,
    pub c_m2: Option<f64>,
    pub d_m1: Option<f64>,
    pub d_m2: Option<f64>,
    pub c_tilde_m1: Option<f64>,
    pub c_tilde_m2: Option<f64>,
    pub d_tilde_m1: Option<f64>,
    pub d_tilde_m2: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiSequences {
    pub t: f64,
    pub kmax: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub tilde: Option<TildeEntries>,
    pub norms: DerivativeNorms,
    pub noise: NoiseFlags,
}

impl ShiSequences {
    /// Builds every entry from the derivative norms.
    pub fn from_norms(t: f64, kmax: usize, norms: DerivativeNorms, noise: NoiseFlags) -> Self {
        let forms = !norms.phi.is_empty();
        let ks = 0..=kmax as i64;
        let seq = |v: &[f64], shift: usize| -> Vec<f64> {
            ks.clone()
                .map(|k| weighted(t, k, v[k as usize + shift], k + 1))
                .collect()
        };
        let tilde_seq = |v: &[f64], shift: usize| -> Vec<f64> {
            ks.clone()
                .map(|k| weighted(t, k - 1, v[k as usize + shift], k))
                .collect()
        };
        let a = seq(&norms.rm, 0);
        let b = seq(&norms.torsion, 1);
        let (c, d) = if forms {
            (seq(&norms.phi, 2), seq(&norms.psi, 2))
        } else {
            (vec![], vec![])
        };
        let tilde = (t > 0.0).then(|| {
            let neg = |v: &[f64], k: usize, half: i64| forms.then(|| weighted(t, half, v[k], 0));
            TildeEntries {
                a: tilde_seq(&norms.rm, 0),
                b: tilde_seq(&norms.torsion, 1),
                c: if forms {
                    tilde_seq(&norms.phi, 2)
                } else {
                    vec![]
                },
                d: if forms {
                    tilde_seq(&norms.psi, 2)
                } else {
                    vec![]
                },
                b_m1: weighted(t, -1, norms.torsion[0], 0),
                b_tilde_m1: weighted(t, -2, norms.torsion[0], 0),
                c_m1: neg(&norms.phi, 1, -1),
                c_m2: neg(&norms.phi, 0, -2),
                d_m1: neg(&norms.psi, 1, -1),
                d_m2: neg(&norms.psi, 0, -2),
                c_tilde_m1: neg(&norms.phi, 1, -2),
                c_tilde_m2: neg(&norms.phi, 0, -3),
                d_tilde_m1: neg(&norms.psi, 1, -2),
                d_tilde_m2: neg(&norms.psi, 0, -3),
            }
        });
        Self {
            t,
            kmax,
            a,
            b,
            c,
            d,
            tilde,
            norms,
            noise,
        }
    }

    /// Whether the combined entry a_k + b_k rests on noise-dominated data.
    pub fn flagged(&self, k: usize) -> bool {
        (k > 0 && self.noise.rm) || self.noise.torsion
    }
}

/// Sup norms of nabla^k Rm, nabla^{k+1} T and, optionally, nabla^{k+2} of
/// phi and psi, weighted into the sequences.
pub fn shi_sequences(
    geo: &Geometry,
    psi: &FormField,
    t: f64,
    opts: ShiOptions,
    ctx: &FlowContext,
) -> Result<ShiSequences, AnalysisError> {
    let need = opts.kmax + if opts.include_forms { 2 } else { 1 };
    if need > MAX_ORDER {
        return Err(FieldError::OrderTooHigh {
            requested: need,
            cap: MAX_ORDER,
        }
        .into());
    }
    let (g, gamma, diff) = (&geo.metric, &geo.gamma, &ctx.diff);
    let rm = CompressedField::from_dense(
        &geo.curvature.rm,
        vec![SlotGroup::Anti(2), SlotGroup::Anti(2)],
    );
    let rm = iterated_norms_compressed(&rm, g, gamma, diff, opts.kmax)?;
    let tt = CompressedField::from_dense(&geo.torsion.t, vec![SlotGroup::Single; 2]);
    let tt = iterated_norms_compressed(&tt, g, gamma, diff, opts.kmax + 1)?;
    let (phi, psi_n) = if opts.include_forms {
        (
            Some(iterated_norms_compressed(
                &CompressedField::from_form(&geo.phi),
                g,
                gamma,
                diff,
                opts.kmax + 2,
            )?),
            Some(iterated_norms_compressed(
                &CompressedField::from_form(psi),
                g,
                gamma,
                diff,
                opts.kmax + 2,
            )?),
        )
    } else {
        (None, None)
    };
    let noise = NoiseFlags {
        rm: rm.noise_floor,
        torsion: tt.noise_floor,
        phi: phi.as_ref().is_some_and(|p| p.noise_floor),
        psi: psi_n.as_ref().is_some_and(|p| p.noise_floor),
    };
    let norms = DerivativeNorms {
        rm: rm.sup,
        torsion: tt.sup,
        phi: phi.map(|p| p.sup).unwrap_or_default(),
        psi: psi_n.map(|p| p.sup).unwrap_or_default(),
    };
    Ok(ShiSequences::from_norms(t, opts.kmax, norms, noise))
}
