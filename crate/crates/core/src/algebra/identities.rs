use super::form::PointForm;
use super::metric::Metric;
use super::tables::DIM;

/// Max-abs residuals of the four contraction identities between phi, psi
/// and g. Index 0 is the single contraction, 1 and 2 the double and triple
/// self-contractions of phi and psi, 3 the mixed phi/psi contraction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityResiduals(pub [f64; 4]);

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        self.0.iter().fold(0.0, |a: f64, &b| a.max(b))
    }
}

/// Contracts slot `slot` of a dense 7^rank array with a 7x7 matrix:
/// out[.., a, ..] = sum_b m[a][b] t[.., b, ..].
fn mode_product(t: &[f64], rank: usize, slot: usize, m: &nalgebra::SMatrix<f64, 7, 7>) -> Vec<f64> {
    let inner = DIM.pow((rank - 1 - slot) as u32);
    let outer = DIM.pow(slot as u32);
    let mut out = vec![0.0; t.len()];
    for o in 0..outer {
        for a in 0..DIM {
            for b in 0..DIM {
                let c = m[(a, b)];
                if c == 0.0 {
                    continue;
                }
                let src = (o * DIM + b) * inner;
                let dst = (o * DIM + a) * inner;
                for r in 0..inner {
                    out[dst + r] += c * t[src + r];
                }
            }
        }
    }
    out
}

pub fn identity_residuals(phi: &PointForm, m: &Metric, psi: &PointForm) -> IdentityResiduals {
    let g = m.g();
    let gi = m.inv();
    let p = phi.expand();
    let s = psi.expand();
    let at3 = |i: usize, j: usize, k: usize| (i * DIM + j) * DIM + k;
    let at4 = |i: usize, j: usize, k: usize, l: usize| ((i * DIM + j) * DIM + k) * DIM + l;

    // phi with the last slot raised
    let p_last = mode_product(&p, 3, 2, gi);
    let mut r0: f64 = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            for a in 0..DIM {
                for b in 0..DIM {
                    let lhs: f64 = (0..DIM)
                        .map(|k| p[at3(i, j, k)] * p_last[at3(a, b, k)])
                        .sum();
                    let rhs = g[(i, a)] * g[(j, b)] - g[(i, b)] * g[(j, a)] + s[at4(i, j, a, b)];
                    r0 = r0.max((lhs - rhs).abs());
                }
            }
        }
    }

    let p_two = mode_product(&p_last, 3, 1, gi);
    let mut r1: f64 = 0.0;
    for i in 0..DIM {
        for a in 0..DIM {
            let mut lhs = 0.0;
            for j in 0..DIM {
                for k in 0..DIM {
                    lhs += p[at3(i, j, k)] * p_two[at3(a, j, k)];
                }
            }
            r1 = r1.max((lhs - 6.0 * g[(i, a)]).abs());
        }
    }

    let mut s_up = s.clone();
    for slot in 1..4 {
        s_up = mode_product(&s_up, 4, slot, gi);
    }
    let mut r2: f64 = 0.0;
    for i in 0..DIM {
        for a in 0..DIM {
            let mut lhs = 0.0;
            for rest in 0..DIM.pow(3) {
                lhs += s[i * 343 + rest] * s_up[a * 343 + rest];
            }
            r2 = r2.max((lhs - 24.0 * g[(i, a)]).abs());
        }
    }

    let p_front = mode_product(&mode_product(&p, 3, 0, gi), 3, 1, gi);
    let mut r3: f64 = 0.0;
    for q in 0..DIM {
        for k in 0..DIM {
            for l in 0..DIM {
                let mut lhs = 0.0;
                for i in 0..DIM {
                    for j in 0..DIM {
                        lhs += p_front[at3(i, j, q)] * s[at4(i, j, k, l)];
                    }
                }
                r3 = r3.max((lhs - 4.0 * p[at3(q, k, l)]).abs());
            }
        }
    }
    IdentityResiduals([r0, r1, r2, r3])
}
