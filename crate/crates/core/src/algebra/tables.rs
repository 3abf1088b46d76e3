//! Index bookkeeping for antisymmetric components in seven dimensions.
//!
//! A p-form is stored by its components on strictly increasing index tuples,
//! enumerated in lexicographic order. Every tuple is also identified by a
//! 7-bit mask, which makes disjointness tests and complements cheap.

use std::sync::LazyLock;

use nalgebra::{DMatrix, SMatrix};

/// Dimension of the underlying manifold.
pub const DIM: usize = 7;

pub type Mat7 = SMatrix<f64, 7, 7>;

struct Tables {
    tuples: Vec<Vec<Vec<usize>>>,
    masks: Vec<Vec<u8>>,
    position: [usize; 128],
}

static TABLES: LazyLock<Tables> = LazyLock::new(|| {
    let mut tuples = vec![Vec::new(); DIM + 1];
    let mut masks = vec![Vec::new(); DIM + 1];
    let mut position = [0usize; 128];
    for p in 0..=DIM {
        let mut current = Vec::with_capacity(p);
        combinations(0, p, &mut current, &mut tuples[p]);
        for (idx, t) in tuples[p].iter().enumerate() {
            let m = t.iter().fold(0u8, |acc, &i| acc | (1 << i));
            masks[p].push(m);
            position[m as usize] = idx;
        }
    }
    Tables {
        tuples,
        masks,
        position,
    }
});

fn combinations(start: usize, left: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if left == 0 {
        out.push(current.clone());
        return;
    }
    for i in start..=(DIM - left) {
        current.push(i);
        combinations(i + 1, left - 1, current, out);
        current.pop();
    }
}

/// Number of independent components of a p-form, C(7, p).
pub fn form_dim(p: usize) -> usize {
    const BINOM: [usize; 8] = [1, 7, 21, 35, 35, 21, 7, 1];
    BINOM[p]
}

/// Increasing index tuples of length `p`, in storage order.
pub fn tuples(p: usize) -> &'static [Vec<usize>] {
    &TABLES.tuples[p]
}

pub fn mask_of(p: usize, idx: usize) -> u8 {
    TABLES.masks[p][idx]
}

pub fn masks(p: usize) -> &'static [u8] {
    &TABLES.masks[p]
}

/// Storage position of the tuple with the given mask (within its degree).
pub fn position_of_mask(mask: u8) -> usize {
    TABLES.position[mask as usize]
}

pub fn complement(mask: u8) -> u8 {
    !mask & 0x7f
}

/// Sorts an index list, returning its mask and the permutation sign, or
/// `None` when an index repeats.
pub fn sort_sign(indices: &[usize]) -> Option<(u8, f64)> {
    let mut mask = 0u8;
    let mut inversions = 0usize;
    for (a, &i) in indices.iter().enumerate() {
        if mask & (1 << i) != 0 {
            return None;
        }
        mask |= 1 << i;
        inversions += indices[..a].iter().filter(|&&j| j > i).count();
    }
    Some((mask, if inversions % 2 == 0 { 1.0 } else { -1.0 }))
}

/// Sign of the concatenation (A, B) of two disjoint increasing tuples
/// relative to their sorted union.
pub fn shuffle_sign(a: u8, b: u8) -> f64 {
    let mut inversions = 0u32;
    for i in 0..DIM {
        if b & (1 << i) != 0 {
            // entries of A larger than i
            inversions += (a & !((1u8 << (i + 1)) - 1)).count_ones();
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Number of set bits of `mask` strictly below position `i`.
pub fn rank_below(mask: u8, i: usize) -> u32 {
    (mask & ((1u8 << i) - 1)).count_ones()
}

/// p-th compound matrix: entry (I, K) is the minor det(m[I, K]) over
/// increasing tuples I, K.
pub fn compound(m: &Mat7, p: usize) -> DMatrix<f64> {
    let mut prev = DMatrix::from_element(1, 1, 1.0);
    for q in 1..=p {
        let n = form_dim(q);
        let mut next = DMatrix::zeros(n, n);
        let tq = tuples(q);
        for (r, row) in tq.iter().enumerate() {
            let rest_row = position_of_mask(mask_of(q, r) & !(1 << row[0]));
            for (c, col) in tq.iter().enumerate() {
                let cmask = mask_of(q, c);
                let mut acc = 0.0;
                for (j, &cj) in col.iter().enumerate() {
                    let entry = m[(row[0], cj)];
                    if entry == 0.0 {
                        continue;
                    }
                    let minor = prev[(rest_row, position_of_mask(cmask & !(1 << cj)))];
                    if j % 2 == 0 {
                        acc += entry * minor;
                    } else {
                        acc -= entry * minor;
                    }
                }
                next[(r, c)] = acc;
            }
        }
        prev = next;
    }
    prev
}
