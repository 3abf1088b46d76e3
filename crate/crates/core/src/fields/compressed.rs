//! Tensors whose base slots are grouped into antisymmetric blocks, with any
//! number of covariant derivative slots in front. This keeps high
//! derivatives of forms and curvature affordable: the sixth derivative of a
//! 4-form has 7^6 * 35 components per node instead of 7^10.

use std::sync::Arc;

use nalgebra::{DMatrix, DMatrixView, DMatrixViewMut};
use rayon::prelude::*;

use super::connection::{ConnectionField, MetricField};
use super::derivative::Differentiator;
use super::error::FieldError;
use super::grid::Grid;
use super::tensor::{FormField, TensorField, Variance};
use crate::algebra::factorial;
use crate::algebra::tables::{compound, form_dim, position_of_mask, sort_sign, tuples};
use crate::algebra::{Mat7, DIM};

/// Highest derivative order handled by [`iterated_norms`].
pub const MAX_ORDER: usize = 6;

/// Relative spectral energy above 2/3 Nyquist beyond which derivative
/// norms are flagged as noise dominated.
pub const NOISE_FLOOR: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotGroup {
    /// One covariant index.
    Single,
    /// q covariant indices, totally antisymmetric.
    Anti(usize),
}

impl SlotGroup {
    fn len(self) -> usize {
        match self {
            SlotGroup::Single => DIM,
            SlotGroup::Anti(q) => form_dim(q),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct ActionEntry {
    out: u32,
    inp: u32,
    sign: f64,
    i: u8,
    p: u8,
}

/// Component layout of the base tensor.
#[derive(Debug)]
pub struct BaseLayout {
    groups: Vec<SlotGroup>,
    len: usize,
    entries: Vec<ActionEntry>,
    weight: f64,
}

impl BaseLayout {
    pub fn new(groups: Vec<SlotGroup>) -> Arc<Self> {
        let sizes: Vec<usize> = groups.iter().map(|g| g.len()).collect();
        let len: usize = sizes.iter().product();
        let strides: Vec<usize> = (0..sizes.len())
            .map(|g| sizes[g + 1..].iter().product())
            .collect();
        let mut entries = Vec::new();
        for b in 0..len {
            for (gi, group) in groups.iter().enumerate() {
                let idx = (b / strides[gi]) % sizes[gi];
                let base = b - idx * strides[gi];
                match *group {
                    SlotGroup::Single => {
                        for p in 0..DIM {
                            entries.push(ActionEntry {
                                out: b as u32,
                                inp: (base + p * strides[gi]) as u32,
                                sign: 1.0,
                                i: idx as u8,
                                p: p as u8,
                            });
                        }
                    }
                    SlotGroup::Anti(q) => {
                        let tuple = &tuples(q)[idx];
                        for s in 0..q {
                            for p in 0..DIM {
                                let mut moved = tuple.clone();
                                moved[s] = p;
                                if let Some((mask, sign)) = sort_sign(&moved) {
                                    entries.push(ActionEntry {
                                        out: b as u32,
                                        inp: (base + position_of_mask(mask) * strides[gi]) as u32,
                                        sign,
                                        i: tuple[s] as u8,
                                        p: p as u8,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        let weight = groups
            .iter()
            .map(|g| match g {
                SlotGroup::Single => 1.0,
                SlotGroup::Anti(q) => factorial(*q),
            })
            .product();
        Arc::new(Self {
            groups,
            len,
            entries,
            weight,
        })
    }

    pub fn groups(&self) -> &[SlotGroup] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// Adds `scale * sum_p mat[(i, p)] in[o, p, r]` into `out[o, i, r]`.
fn add_mode(input: &[f64], out: &mut [f64], inner: usize, mat: &Mat7, scale: f64) {
    let outer = input.len() / (inner * DIM);
    for o in 0..outer {
        for i in 0..DIM {
            let dst = (o * DIM + i) * inner;
            for p in 0..DIM {
                let c = scale * mat[(i, p)];
                if c == 0.0 {
                    continue;
                }
                let src = (o * DIM + p) * inner;
                let (d, s) = (&mut out[dst..dst + inner], &input[src..src + inner]);
                for (x, y) in d.iter_mut().zip(s) {
                    *x += c * y;
                }
            }
        }
    }
}

/// out[o, a, r] = sum_b mat[(a, b)] in[o, b, r] for an n x n matrix.
fn apply_mode(input: &[f64], n: usize, inner: usize, mat: &DMatrix<f64>) -> Vec<f64> {
    let outer = input.len() / (inner * n);
    let mut out = vec![0.0; input.len()];
    if inner == 1 {
        // one product over all outer indices: (n x outer) column-major
        let x = DMatrixView::from_slice(input, n, outer);
        let mut y = DMatrixViewMut::from_slice(&mut out, n, outer);
        y.gemm(1.0, mat, &x, 0.0);
        return out;
    }
    // each outer block is an (inner x n) column-major matrix
    let mt = mat.transpose();
    for (src, dst) in input
        .chunks_exact(n * inner)
        .zip(out.chunks_exact_mut(n * inner))
    {
        let x = DMatrixView::from_slice(src, inner, n);
        let mut y = DMatrixViewMut::from_slice(dst, inner, n);
        y.gemm(1.0, &x, &mt, 0.0);
    }
    out
}

/// A base tensor, or one of its iterated covariant derivatives, over a grid.
/// Per node the block is (deriv slots, newest first) x base components.
#[derive(Clone, Debug)]
pub struct CompressedField {
    grid: Grid,
    layout: Arc<BaseLayout>,
    deriv: usize,
    data: Vec<f64>,
}

impl CompressedField {
    pub fn new(grid: Grid, layout: Arc<BaseLayout>, deriv: usize, data: Vec<f64>) -> Self {
        assert_eq!(
            data.len(),
            grid.node_count() * DIM.pow(deriv as u32) * layout.len()
        );
        Self {
            grid,
            layout,
            deriv,
            data,
        }
    }

    pub fn from_form(f: &FormField) -> Self {
        let layout = BaseLayout::new(vec![SlotGroup::Anti(f.degree())]);
        Self::new(*f.grid(), layout, 0, f.data().to_vec())
    }

    /// Reads a dense covariant tensor, keeping the antisymmetric part of
    /// each group; slot counts of `groups` must add up to the rank.
    pub fn from_dense(t: &TensorField, groups: Vec<SlotGroup>) -> Self {
        assert!(
            t.variance().iter().all(|v| *v == Variance::Co),
            "lower all indices first"
        );
        let slots: usize = groups
            .iter()
            .map(|g| match g {
                SlotGroup::Single => 1,
                SlotGroup::Anti(q) => *q,
            })
            .sum();
        assert_eq!(slots, t.rank());
        let layout = BaseLayout::new(groups.clone());
        // index lists of each group component, with signed permutations
        let group_terms: Vec<Vec<Vec<(f64, Vec<usize>)>>> = groups
            .iter()
            .map(|g| match *g {
                SlotGroup::Single => (0..DIM).map(|i| vec![(1.0, vec![i])]).collect(),
                SlotGroup::Anti(q) => tuples(q)
                    .iter()
                    .map(|tuple| {
                        permutations(q)
                            .into_iter()
                            .map(|perm| {
                                let idx: Vec<usize> = perm.iter().map(|&s| tuple[s]).collect();
                                let (_, sign) = sort_sign(&perm).expect("permutation");
                                (sign / factorial(q), idx)
                            })
                            .collect()
                    })
                    .collect(),
            })
            .collect();
        let sizes: Vec<usize> = groups.iter().map(|g| g.len()).collect();
        let blen = layout.len();
        let mut data = Vec::with_capacity(t.grid().node_count() * blen);
        for node in 0..t.grid().node_count() {
            let src = t.at(node);
            for b in 0..blen {
                let mut rem = b;
                let mut comps = vec![0usize; sizes.len()];
                for g in (0..sizes.len()).rev() {
                    comps[g] = rem % sizes[g];
                    rem /= sizes[g];
                }
                let mut acc = vec![(1.0, 0usize)];
                for (g, &c) in comps.iter().enumerate() {
                    let mut next = Vec::new();
                    for &(w, flat) in &acc {
                        for (s, idx) in &group_terms[g][c] {
                            let f = idx.iter().fold(flat, |a, &i| a * DIM + i);
                            next.push((w * s, f));
                        }
                    }
                    acc = next;
                }
                data.push(acc.iter().map(|(w, f)| w * src[*f]).sum());
            }
        }
        Self::new(*t.grid(), layout, 0, data)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn layout(&self) -> &Arc<BaseLayout> {
        &self.layout
    }

    pub fn deriv_order(&self) -> usize {
        self.deriv
    }

    pub fn block_len(&self) -> usize {
        DIM.pow(self.deriv as u32) * self.layout.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn at(&self, node: usize) -> &[f64] {
        let b = self.block_len();
        &self.data[node * b..(node + 1) * b]
    }

    fn derivative_block(
        &self,
        node: usize,
        grads: &[Option<Vec<f64>>],
        gamma: &ConnectionField,
        out: &mut [f64],
    ) {
        let block = self.block_len();
        let blen = self.layout.len();
        let src = self.at(node);
        let mut terms: Vec<(usize, usize, f64)> = Vec::with_capacity(self.layout.entries.len());
        for m in 0..DIM {
            let dst = &mut out[m * block..(m + 1) * block];
            match &grads[m] {
                Some(d) => dst.copy_from_slice(&d[node * block..(node + 1) * block]),
                None => dst.iter_mut().for_each(|v| *v = 0.0),
            }
            let mat = gamma.direction_matrix(node, m);
            if mat.iter().all(|v| *v == 0.0) {
                continue;
            }
            for s in 0..self.deriv {
                let inner = DIM.pow((self.deriv - 1 - s) as u32) * blen;
                add_mode(src, dst, inner, &mat, -1.0);
            }
            terms.clear();
            for e in &self.layout.entries {
                let c = e.sign * mat[(e.i as usize, e.p as usize)];
                if c != 0.0 {
                    terms.push((e.out as usize, e.inp as usize, c));
                }
            }
            for (d, s) in dst.chunks_exact_mut(blen).zip(src.chunks_exact(blen)) {
                for &(o, i, c) in &terms {
                    d[o] -= c * s[i];
                }
            }
        }
    }

    /// One more covariant derivative slot, prepended.
    pub fn covariant_derivative(&self, gamma: &ConnectionField, diff: &Differentiator) -> Self {
        let block = self.block_len();
        let grads = diff.gradient(&self.data, block);
        let mut data = vec![0.0; self.data.len() * DIM];
        data.par_chunks_mut(block * DIM)
            .enumerate()
            .for_each(|(node, out)| self.derivative_block(node, &grads, gamma, out));
        Self::new(self.grid, self.layout.clone(), self.deriv + 1, data)
    }

    /// Squared full tensor norm of a block at a node.
    fn block_norm_sq(&self, block: &[f64], deriv: usize, frame: &FrameTransforms) -> f64 {
        let blen = self.layout.len();
        let mut v = block.to_vec();
        for s in 0..deriv {
            let inner = DIM.pow((deriv - 1 - s) as u32) * blen;
            v = apply_mode(&v, DIM, inner, &frame.single);
        }
        let sizes: Vec<usize> = self.layout.groups.iter().map(|g| g.len()).collect();
        for (g, group) in self.layout.groups.iter().enumerate() {
            let inner: usize = sizes[g + 1..].iter().product();
            let mat = match group {
                SlotGroup::Single => &frame.single,
                SlotGroup::Anti(q) => &frame.compounds[*q],
            };
            v = apply_mode(&v, sizes[g], inner, mat);
        }
        self.layout.weight * v.iter().map(|x| x * x).sum::<f64>()
    }

    /// Pointwise squared norms.
    pub fn norm_sq_field(&self, g: &MetricField) -> Vec<f64> {
        (0..self.grid.node_count())
            .into_par_iter()
            .map(|n| {
                let frame = FrameTransforms::new(g.at(n).orthonormal_frame(), &self.layout);
                self.block_norm_sq(self.at(n), self.deriv, &frame)
            })
            .collect()
    }

    /// Pointwise squared norms of the next covariant derivative, computed
    /// node by node without storing it.
    pub fn next_norm_sq_field(
        &self,
        g: &MetricField,
        gamma: &ConnectionField,
        diff: &Differentiator,
    ) -> Vec<f64> {
        let block = self.block_len();
        let grads = diff.gradient(&self.data, block);
        (0..self.grid.node_count())
            .into_par_iter()
            .map(|n| {
                let mut out = vec![0.0; block * DIM];
                self.derivative_block(n, &grads, gamma, &mut out);
                let frame = FrameTransforms::new(g.at(n).orthonormal_frame(), &self.layout);
                self.block_norm_sq(&out, self.deriv + 1, &frame)
            })
            .collect()
    }
}

struct FrameTransforms {
    single: DMatrix<f64>,
    compounds: Vec<DMatrix<f64>>,
}

impl FrameTransforms {
    fn new(e: Mat7, layout: &BaseLayout) -> Self {
        let mut compounds = vec![DMatrix::zeros(0, 0); DIM + 1];
        for g in &layout.groups {
            if let SlotGroup::Anti(q) = *g {
                compounds[q] = compound(&e, q);
            }
        }
        Self {
            single: DMatrix::from_fn(DIM, DIM, |i, j| e[(i, j)]),
            compounds,
        }
    }
}

fn permutations(q: usize) -> Vec<Vec<usize>> {
    if q == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(q - 1) {
        for pos in 0..=p.len() {
            let mut v = p.clone();
            v.insert(pos, q - 1);
            out.push(v);
        }
    }
    out
}

/// Sup and L2 norms of nabla^k f for k = 0..=kmax.
#[derive(Clone, Debug, PartialEq)]
pub struct IteratedNorms {
    pub sup: Vec<f64>,
    pub l2: Vec<f64>,
    /// Relative spectral energy of f above 2/3 Nyquist.
    pub high_mode_fraction: f64,
    pub noise_floor: bool,
}

fn reduce(norm_sq: &[f64], g: &MetricField) -> (f64, f64) {
    let w = g.grid().node_weight();
    let mut sup: f64 = 0.0;
    let mut l2 = 0.0;
    for (n, v) in norm_sq.iter().enumerate() {
        sup = sup.max(*v);
        l2 += v * g.at(n).vol() * w;
    }
    (sup.sqrt(), l2.sqrt())
}

/// Norms of iterated covariant derivatives of a base field (no derivative
/// slots yet), all indices contracted with g.
pub fn iterated_norms_compressed(
    f: &CompressedField,
    g: &MetricField,
    gamma: &ConnectionField,
    diff: &Differentiator,
    kmax: usize,
) -> Result<IteratedNorms, FieldError> {
    if kmax > MAX_ORDER {
        return Err(FieldError::OrderTooHigh {
            requested: kmax,
            cap: MAX_ORDER,
        });
    }
    let high = diff.high_mode_fraction(f.data(), f.block_len());
    let mut sup = Vec::with_capacity(kmax + 1);
    let mut l2 = Vec::with_capacity(kmax + 1);
    let (s, l) = reduce(&f.norm_sq_field(g), g);
    sup.push(s);
    l2.push(l);
    let mut level = f.clone();
    for k in 1..=kmax {
        let sq = if k < kmax {
            level = level.covariant_derivative(gamma, diff);
            level.norm_sq_field(g)
        } else {
            level.next_norm_sq_field(g, gamma, diff)
        };
        let (s, l) = reduce(&sq, g);
        sup.push(s);
        l2.push(l);
    }
    Ok(IteratedNorms {
        sup,
        l2,
        high_mode_fraction: high,
        noise_floor: high > NOISE_FLOOR,
    })
}

/// [`iterated_norms_compressed`] for a dense tensor; upper indices are
/// lowered first.
pub fn iterated_norms(
    f: &TensorField,
    g: &MetricField,
    gamma: &ConnectionField,
    diff: &Differentiator,
    kmax: usize,
) -> Result<IteratedNorms, FieldError> {
    let lowered = lower_all(f, g);
    let c = CompressedField::from_dense(&lowered, vec![SlotGroup::Single; f.rank()]);
    iterated_norms_compressed(&c, g, gamma, diff, kmax)
}

/// Lowers every contravariant slot with g.
pub fn lower_all(f: &TensorField, g: &MetricField) -> TensorField {
    let rank = f.rank();
    let mut data = f.data().to_vec();
    let block = f.block_len();
    for (slot, v) in f.variance().iter().enumerate() {
        if *v == Variance::Co {
            continue;
        }
        let inner = DIM.pow((rank - 1 - slot) as u32);
        data.par_chunks_mut(block)
            .enumerate()
            .for_each(|(n, chunk)| {
                let mut out = vec![0.0; block];
                add_mode(chunk, &mut out, inner, g.at(n).g(), 1.0);
                chunk.copy_from_slice(&out);
            });
    }
    TensorField::from_data(*f.grid(), vec![Variance::Co; rank], data)
}
