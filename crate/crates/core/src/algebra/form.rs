use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use super::metric::Metric;
use super::tables::{
    self, compound, form_dim, mask_of, position_of_mask, rank_below, shuffle_sign, sort_sign, DIM,
};

/// An antisymmetric p-tensor at a single point, stored on increasing index
/// tuples. Indices are 0-based throughout the crate.
#[derive(Clone, Debug, PartialEq)]
pub struct PointForm {
    degree: usize,
    comps: Vec<f64>,
}

impl PointForm {
    pub fn zero(degree: usize) -> Self {
        assert!(degree <= DIM, "form degree {degree} exceeds {DIM}");
        Self {
            degree,
            comps: vec![0.0; form_dim(degree)],
        }
    }

    pub fn from_components(degree: usize, comps: Vec<f64>) -> Self {
        assert_eq!(
            comps.len(),
            form_dim(degree),
            "component count for degree {degree}"
        );
        Self { degree, comps }
    }

    pub fn scalar(value: f64) -> Self {
        Self::from_components(0, vec![value])
    }

    /// Builds a form from `(coefficient, indices)` terms; unsorted indices
    /// pick up the permutation sign.
    pub fn from_terms(degree: usize, terms: &[(f64, &[usize])]) -> Self {
        let mut out = Self::zero(degree);
        for (c, idx) in terms {
            assert_eq!(idx.len(), degree);
            if let Some((mask, sign)) = sort_sign(idx) {
                out.comps[position_of_mask(mask)] += sign * c;
            }
        }
        out
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> &[f64] {
        &self.comps
    }

    pub fn components_mut(&mut self) -> &mut [f64] {
        &mut self.comps
    }

    pub fn into_components(self) -> Vec<f64> {
        self.comps
    }

    /// Component on an arbitrary index list, with antisymmetry applied.
    pub fn get(&self, indices: &[usize]) -> f64 {
        debug_assert_eq!(indices.len(), self.degree);
        match sort_sign(indices) {
            Some((mask, sign)) => sign * self.comps[position_of_mask(mask)],
            None => 0.0,
        }
    }

    /// Dense row-major array over all 7^p index lists.
    pub fn expand(&self) -> Vec<f64> {
        let n = DIM.pow(self.degree as u32);
        let mut out = vec![0.0; n];
        let mut idx = vec![0usize; self.degree];
        for (flat, slot) in out.iter_mut().enumerate() {
            let mut rem = flat;
            for s in (0..self.degree).rev() {
                idx[s] = rem % DIM;
                rem /= DIM;
            }
            *slot = self.get(&idx);
        }
        out
    }

    /// Reads the increasing-tuple components out of a dense array; the
    /// caller is responsible for the array being antisymmetric.
    pub fn from_dense(degree: usize, dense: &[f64]) -> Self {
        assert_eq!(dense.len(), DIM.pow(degree as u32));
        let comps = tables::tuples(degree)
            .iter()
            .map(|t| dense[t.iter().fold(0, |acc, &i| acc * DIM + i)])
            .collect();
        Self { degree, comps }
    }

    pub fn wedge(&self, other: &PointForm) -> PointForm {
        let degree = self.degree + other.degree;
        assert!(degree <= DIM, "wedge product of degree {degree}");
        let mut out = PointForm::zero(degree);
        for (i, &a) in self.comps.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let ma = mask_of(self.degree, i);
            for (j, &b) in other.comps.iter().enumerate() {
                if b == 0.0 {
                    continue;
                }
                let mb = mask_of(other.degree, j);
                if ma & mb != 0 {
                    continue;
                }
                out.comps[position_of_mask(ma | mb)] += shuffle_sign(ma, mb) * a * b;
            }
        }
        out
    }

    /// Interior product with a vector, contracting the first slot.
    pub fn interior(&self, v: &[f64; DIM]) -> PointForm {
        assert!(self.degree > 0, "interior product of a 0-form");
        let mut out = PointForm::zero(self.degree - 1);
        for (k, &c) in self.comps.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let mask = mask_of(self.degree, k);
            for (i, &vi) in v.iter().enumerate() {
                if vi == 0.0 || mask & (1 << i) == 0 {
                    continue;
                }
                // moving i to the front passes the indices below it
                let sign = if rank_below(mask, i) % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                out.comps[position_of_mask(mask & !(1 << i))] += sign * vi * c;
            }
        }
        out
    }

    /// Interior product with the coordinate vector e_i.
    pub fn interior_basis(&self, i: usize) -> PointForm {
        let mut v = [0.0; DIM];
        v[i] = 1.0;
        self.interior(&v)
    }

    /// All indices raised with the inverse metric.
    pub fn raise(&self, m: &Metric) -> PointForm {
        let c = compound(m.inv(), self.degree);
        let comps = (0..self.comps.len())
            .map(|i| {
                self.comps
                    .iter()
                    .enumerate()
                    .map(|(k, a)| c[(i, k)] * a)
                    .sum()
            })
            .collect();
        PointForm::from_components(self.degree, comps)
    }

    /// Form inner product: sum over increasing tuples of a_I b^I, which is
    /// the full index contraction divided by p!.
    pub fn inner(&self, other: &PointForm, m: &Metric) -> f64 {
        assert_eq!(self.degree, other.degree);
        let raised = other.raise(m);
        self.comps
            .iter()
            .zip(raised.comps.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Full tensor norm squared, a_{i1..ip} a^{i1..ip}.
    pub fn tensor_norm_sq(&self, m: &Metric) -> f64 {
        factorial(self.degree) * self.inner(self, m)
    }

    /// Pullback under a linear map: (a^* f)_I = sum_K f_K det a[K, I].
    pub fn pullback(&self, a: &tables::Mat7) -> PointForm {
        let c = compound(a, self.degree);
        let comps = (0..self.comps.len())
            .map(|i| {
                self.comps
                    .iter()
                    .enumerate()
                    .map(|(k, f)| f * c[(k, i)])
                    .sum()
            })
            .collect();
        PointForm::from_components(self.degree, comps)
    }

    pub fn sup_norm(&self) -> f64 {
        self.comps.iter().fold(0.0, |acc, c| acc.max(c.abs()))
    }

    pub fn scale(&self, s: f64) -> PointForm {
        self.clone() * s
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

impl Add for PointForm {
    type Output = PointForm;
    fn add(mut self, rhs: PointForm) -> PointForm {
        self += &rhs;
        self
    }
}

impl Sub for PointForm {
    type Output = PointForm;
    fn sub(mut self, rhs: PointForm) -> PointForm {
        self -= &rhs;
        self
    }
}

impl AddAssign<&PointForm> for PointForm {
    fn add_assign(&mut self, rhs: &PointForm) {
        assert_eq!(self.degree, rhs.degree);
        for (a, b) in self.comps.iter_mut().zip(&rhs.comps) {
            *a += b;
        }
    }
}

impl SubAssign<&PointForm> for PointForm {
    fn sub_assign(&mut self, rhs: &PointForm) {
        assert_eq!(self.degree, rhs.degree);
        for (a, b) in self.comps.iter_mut().zip(&rhs.comps) {
            *a -= b;
        }
    }
}

impl Mul<f64> for PointForm {
    type Output = PointForm;
    fn mul(mut self, s: f64) -> PointForm {
        self.comps.iter_mut().for_each(|c| *c *= s);
        self
    }
}

impl Neg for PointForm {
    type Output = PointForm;
    fn neg(self) -> PointForm {
        self * -1.0
    }
}
