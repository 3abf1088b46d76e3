//! Brute-force oracles shared by the integration tests: dense index
//! arrays, the Levi-Civita symbol, random positive 3-forms, torsion from
//! nabla psi and the Ricci identity.
#![allow(dead_code)]

use g2flow::algebra::{standard_structure, tables::tuples, Mat7, PointForm, DIM};
use g2flow::analysis::Background;
use g2flow::coflow::{FlowContext, Geometry};
use g2flow::fields::{
    covariant_derivative, CompressedField, Differentiator, FormField, TensorField, Variance,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sign of a permutation given as an index list, 0 on repeats.
pub fn perm_sign(idx: &[usize]) -> f64 {
    let mut sign = 1.0;
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            if idx[a] == idx[b] {
                return 0.0;
            }
            if idx[a] > idx[b] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Every index list of length p, row-major.
pub fn all_indices(p: usize) -> Vec<Vec<usize>> {
    (0..DIM.pow(p as u32))
        .map(|mut flat| {
            let mut v = vec![0; p];
            for s in (0..p).rev() {
                v[s] = flat % DIM;
                flat /= DIM;
            }
            v
        })
        .collect()
}

pub fn flat_index(idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * DIM + i)
}

/// Dense antisymmetric array of a form, built from its increasing
/// components by sorting each index list.
pub fn dense(f: &PointForm) -> Vec<f64> {
    let p = f.degree();
    let mut out = vec![0.0; DIM.pow(p as u32)];
    for (k, t) in tuples(p).iter().enumerate() {
        let c = f.components()[k];
        for idx in all_indices(p) {
            let mut sorted = idx.clone();
            sorted.sort_unstable();
            if sorted == *t {
                out[flat_index(&idx)] = perm_sign(&idx) * c;
            }
        }
    }
    out
}

pub fn from_dense(p: usize, d: &[f64]) -> PointForm {
    PointForm::from_components(p, tuples(p).iter().map(|t| d[flat_index(t)]).collect())
}

/// Permutations of 0..7 with their signs.
pub fn permutations7() -> Vec<([usize; 7], f64)> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool; 7], out: &mut Vec<([usize; 7], f64)>) {
        if cur.len() == 7 {
            let arr: [usize; 7] = cur.clone().try_into().unwrap();
            out.push((arr, perm_sign(cur)));
            return;
        }
        for i in 0..7 {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::with_capacity(5040);
    rec(&mut Vec::new(), &mut [false; 7], &mut out);
    out
}

/// B_ij = (1/144) eps^{abcdefg} phi_iab phi_jcd phi_efg.
pub fn brute_b(phi: &PointForm) -> Mat7 {
    let d = dense(phi);
    let at = |i: usize, j: usize, k: usize| d[(i * DIM + j) * DIM + k];
    let perms = permutations7();
    Mat7::from_fn(|i, j| {
        perms
            .iter()
            .map(|(p, s)| s * at(i, p[0], p[1]) * at(j, p[2], p[3]) * at(p[4], p[5], p[6]))
            .sum::<f64>()
            / 144.0
    })
}

/// g = B det(B)^(-1/9).
pub fn brute_metric(phi: &PointForm) -> Mat7 {
    let b = brute_b(phi);
    b * b.determinant().powf(-1.0 / 9.0)
}

/// (*a)_J = sqrt(det g)/p! a^{I} eps_{I J} over all index lists.
pub fn brute_star(a: &PointForm, g: &Mat7) -> PointForm {
    let p = a.degree();
    let gi = g.try_inverse().unwrap();
    let d = dense(a);
    // raise every slot
    let mut up = d.clone();
    for slot in 0..p {
        let inner = DIM.pow((p - 1 - slot) as u32);
        let outer = DIM.pow(slot as u32);
        let mut next = vec![0.0; up.len()];
        for o in 0..outer {
            for x in 0..DIM {
                for y in 0..DIM {
                    for r in 0..inner {
                        next[(o * DIM + x) * inner + r] +=
                            gi[(x, y)] * up[(o * DIM + y) * inner + r];
                    }
                }
            }
        }
        up = next;
    }
    let vol = g.determinant().sqrt();
    let fact: f64 = (1..=p).map(|k| k as f64).product();
    let q = DIM - p;
    let comps = tuples(q)
        .iter()
        .map(|j| {
            all_indices(p)
                .iter()
                .map(|i| {
                    let mut full = i.clone();
                    full.extend_from_slice(j);
                    let s = perm_sign(&full);
                    if s == 0.0 {
                        0.0
                    } else {
                        s * up[flat_index(i)]
                    }
                })
                .sum::<f64>()
                * vol
                / fact
        })
        .collect();
    PointForm::from_components(q, comps)
}

/// Orientation-preserving linear map within `spread` of the identity.
pub fn random_frame(rng: &mut ChaCha8Rng, spread: f64) -> Mat7 {
    let mut a =
        Mat7::from_fn(|i, j| f64::from(u8::from(i == j)) + spread * rng.gen_range(-1.0..1.0));
    if a.determinant() < 0.0 {
        a.row_mut(0).neg_mut();
    }
    a
}

/// Pullback of phi0 along a linear map, by dense contraction.
pub fn pulled_back_phi0(a: &Mat7) -> PointForm {
    let d = dense(&standard_structure().0);
    let mut out = vec![0.0; 343];
    for i in 0..7 {
        for j in 0..7 {
            for k in 0..7 {
                let mut acc = 0.0;
                for p in 0..7 {
                    for q in 0..7 {
                        for r in 0..7 {
                            acc += a[(p, i)] * a[(q, j)] * a[(r, k)] * d[(p * 7 + q) * 7 + r];
                        }
                    }
                }
                out[(i * 7 + j) * 7 + k] = acc;
            }
        }
    }
    from_dense(3, &out)
}

pub fn random_form(rng: &mut ChaCha8Rng, p: usize, scale: f64) -> PointForm {
    let n = tuples(p).len();
    PointForm::from_components(
        p,
        (0..n).map(|_| scale * rng.gen_range(-1.0..1.0)).collect(),
    )
}

pub fn random_spd(rng: &mut ChaCha8Rng, spread: f64) -> Mat7 {
    let a = Mat7::from_fn(|i, j| f64::from(u8::from(i == j)) + spread * rng.gen_range(-1.0..1.0));
    a * a.transpose()
}

/// Full contraction a_{i..} b_{j..} g^{ij}... of two dense rank-r arrays.
pub fn dense_inner(a: &[f64], b: &[f64], rank: usize, g: &Mat7) -> f64 {
    let gi = g.try_inverse().unwrap();
    let mut up = b.to_vec();
    for slot in 0..rank {
        let inner = DIM.pow((rank - 1 - slot) as u32);
        let outer = DIM.pow(slot as u32);
        let mut next = vec![0.0; up.len()];
        for o in 0..outer {
            for x in 0..DIM {
                for y in 0..DIM {
                    let c = gi[(x, y)];
                    for r in 0..inner {
                        next[(o * DIM + x) * inner + r] += c * up[(o * DIM + y) * inner + r];
                    }
                }
            }
        }
        up = next;
    }
    a.iter().zip(&up).map(|(x, y)| x * y).sum()
}

/// Least-squares T from
/// nabla_m psi_ijkl = -(T_mi phi_jkl - T_mj phi_ikl - T_mk phi_jil - T_ml phi_jki).
pub fn torsion_from_psi(psi: &FormField, geo: &Geometry, ctx: &FlowContext) -> Vec<Mat7> {
    let dpsi = CompressedField::from_form(psi).covariant_derivative(&geo.gamma, &ctx.diff);
    let quads = tuples(4);
    (0..psi.grid().node_count())
        .map(|n| {
            let phi = geo.phi.at(n);
            let d = dpsi.at(n);
            let mut coef = DMatrix::zeros(35, DIM);
            for (row, q) in quads.iter().enumerate() {
                let [i, j, k, l] = [q[0], q[1], q[2], q[3]];
                for p in 0..DIM {
                    let delta = |a: usize| f64::from(u8::from(a == p));
                    coef[(row, p)] = -(delta(i) * phi.get(&[j, k, l])
                        - delta(j) * phi.get(&[i, k, l])
                        - delta(k) * phi.get(&[j, i, l])
                        - delta(l) * phi.get(&[j, k, i]));
                }
            }
            let svd = coef.svd(true, true);
            let mut t = Mat7::zeros();
            for m in 0..DIM {
                let rhs = DVector::from_fn(35, |row, _| d[m * 35 + row]);
                let sol = svd.solve(&rhs, 1e-14).unwrap();
                for p in 0..DIM {
                    t[(m, p)] = sol[p];
                }
            }
            t
        })
        .collect()
}

/// First-order commutator g^{bc}[nabla_a, nabla_b] nabla_c S_m of a 1-form,
/// assembled from the Ricci identity:
/// g^{bc}(-R_abc^p nabla_p S_m - R_abm^p nabla_c S_p + nabla_b Q_acm)
/// with Q_acm = -R_acm^p S_p.
pub fn ricci_commutator(s: &TensorField, bg: &Background, diff: &Differentiator) -> Vec<Vec<f64>> {
    let grid = *diff.grid();
    let u = covariant_derivative(s, &bg.gamma, diff);
    let mut q = TensorField::from_fn(grid, vec![Variance::Co; 3], |_, _| {});
    let r_up = &bg.curvature.rm_up;
    let at4 = |i: usize, j: usize, k: usize, l: usize| ((i * DIM + j) * DIM + k) * DIM + l;
    for n in 0..grid.node_count() {
        let r = r_up.at(n).to_vec();
        let sv = s.at(n).to_vec();
        let dst = q.at_mut(n);
        for a in 0..DIM {
            for c in 0..DIM {
                for m in 0..DIM {
                    dst[(a * DIM + c) * DIM + m] =
                        -(0..DIM).map(|p| r[at4(a, c, m, p)] * sv[p]).sum::<f64>();
                }
            }
        }
    }
    let dq = covariant_derivative(&q, &bg.gamma, diff);
    (0..grid.node_count())
        .map(|n| {
            let gi = bg.metric.at(n).inv();
            let r = r_up.at(n);
            let un = u.at(n);
            let dqn = dq.at(n);
            let mut out = vec![0.0; DIM * DIM];
            for a in 0..DIM {
                for m in 0..DIM {
                    let mut want = 0.0;
                    for b in 0..DIM {
                        for c in 0..DIM {
                            let w = gi[(b, c)];
                            if w == 0.0 {
                                continue;
                            }
                            let mut ricci = 0.0;
                            for p in 0..DIM {
                                ricci -= r[at4(a, b, c, p)] * un[p * DIM + m];
                                ricci -= r[at4(a, b, m, p)] * un[c * DIM + p];
                            }
                            want += w * (ricci + dqn[((b * DIM + a) * DIM + c) * DIM + m]);
                        }
                    }
                    out[a * DIM + m] = want;
                }
            }
            out
        })
        .collect()
}
