/// Constant bounding the combined quantity at t = 0: 5376 (M0 + A + 1)^2,
/// with M0 the initial sup of Lambda.
pub fn initial_bound(m0: f64, a: f64) -> f64 {
    5376.0 * (m0 + a + 1.0).powi(2)
}

/// Comparison curve K / (1 - 4 (C + 1) t K^4)^(1/4) with K the initial
/// bound; infinite from the blow-up time on.
pub fn reference_curve(t: f64, m0: f64, a: f64, c: f64) -> f64 {
    let k = initial_bound(m0, a);
    let denom = 1.0 - 4.0 * (c + 1.0) * t * k.powi(4);
    if denom <= 0.0 {
        f64::INFINITY
    } else {
        k / denom.powf(0.25)
    }
}

/// Time at which the comparison curve blows up.
pub fn blow_up_time(m0: f64, a: f64, c: f64) -> f64 {
    1.0 / (4.0 * (c + 1.0) * initial_bound(m0, a).powi(4))
}

/// First sample time at which `values` exceed the curve, if any.
pub fn first_exit(times: &[f64], values: &[f64], m0: f64, a: f64, c: f64) -> Option<f64> {
    times
        .iter()
        .zip(values)
        .find(|(t, v)| **v > reference_curve(**t, m0, a, c))
        .map(|(t, _)| *t)
}
