use serde::{Deserialize, Serialize};

use super::error::AnalysisError;
use super::shi::{ln_factorial, ShiSequences};

/// One derivative order at one time: the log of
/// t^(k/2) (|nabla^k Rm| + |nabla^(k+1) T|) / (k+1)!.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSample {
    pub k: usize,
    pub t: f64,
    /// `None` when the combined norm is zero.
    pub log_value: Option<f64>,
    pub flagged: bool,
}

impl FitSample {
    /// From the raw numerator |nabla^k Rm| + |nabla^(k+1) T|.
    pub fn from_numerator(k: usize, t: f64, numerator: f64, flagged: bool) -> Self {
        let log_value = (numerator > 0.0 && t > 0.0)
            .then(|| 0.5 * k as f64 * t.ln() + numerator.ln() - ln_factorial(k as i64 + 1));
        Self {
            k,
            t,
            log_value,
            flagged,
        }
    }

    /// From the already weighted entry a_k + b_k.
    pub fn from_weighted(k: usize, t: f64, value: f64, flagged: bool) -> Self {
        Self {
            k,
            t,
            log_value: (value > 0.0).then(|| value.ln()),
            flagged,
        }
    }

    pub fn from_sequences(seq: &ShiSequences) -> Vec<Self> {
        (0..=seq.kmax)
            .map(|k| {
                let num = seq.norms.rm[k] + seq.norms.torsion[k + 1];
                Self::from_numerator(k, seq.t, num, seq.flagged(k))
            })
            .collect()
    }
}

/// Least-squares fit of log D_k = (k/2) log L + log C.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticityFit {
    pub c_fit: f64,
    /// Zero in the degenerate case.
    pub l_fit: f64,
    pub kmax_used: usize,
    pub samples_used: usize,
    /// Observed minus fitted log values, in sample order.
    pub residuals: Vec<f64>,
    /// Every sample was exactly zero.
    pub degenerate: bool,
    /// Residual magnitudes do not trend upward in k.
    pub consistent: bool,
}

fn slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - b * mx, b)
}

pub fn fit_analyticity(samples: &[FitSample]) -> Result<AnalyticityFit, AnalysisError> {
    let usable: Vec<&FitSample> = samples.iter().filter(|s| !s.flagged).collect();
    if !usable.is_empty() && usable.iter().all(|s| s.log_value.is_none()) {
        return Ok(AnalyticityFit {
            c_fit: 0.0,
            l_fit: 0.0,
            kmax_used: usable.iter().map(|s| s.k).max().unwrap_or(0),
            samples_used: usable.len(),
            residuals: vec![],
            degenerate: true,
            consistent: true,
        });
    }
    let pts: Vec<(usize, f64)> = usable
        .iter()
        .filter_map(|s| s.log_value.map(|v| (s.k, v)))
        .collect();
    let mut orders: Vec<usize> = pts.iter().map(|p| p.0).collect();
    orders.sort_unstable();
    orders.dedup();
    if orders.len() < 3 {
        return Err(AnalysisError::InsufficientData(format!(
            "{} distinct unflagged nonzero orders, need 3",
            orders.len()
        )));
    }
    let xs: Vec<f64> = pts.iter().map(|p| 0.5 * p.0 as f64).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (ln_c, ln_l) = slope(&xs, &ys);
    let residuals: Vec<f64> = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - (ln_c + ln_l * x))
        .collect();
    let ks: Vec<f64> = pts.iter().map(|p| p.0 as f64).collect();
    let mags: Vec<f64> = residuals.iter().map(|r| r.abs()).collect();
    let (_, trend) = slope(&ks, &mags);
    Ok(AnalyticityFit {
        c_fit: ln_c.exp(),
        l_fit: ln_l.exp(),
        kmax_used: *orders.last().expect("nonempty"),
        samples_used: pts.len(),
        residuals,
        degenerate: false,
        consistent: trend <= 1e-12,
    })
}

/// Bound t^(k/2) C L^(k/2) (k+1)! predicted by a fit, for comparison with
/// the measured numerators.
pub fn predicted_numerator(fit: &AnalyticityFit, k: usize, t: f64) -> f64 {
    (fit.c_fit.ln() + 0.5 * k as f64 * (fit.l_fit.ln() - t.ln()) + ln_factorial(k as i64 + 1)).exp()
}
