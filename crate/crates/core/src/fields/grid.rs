use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::error::FieldError;
use crate::algebra::DIM;

/// Uniform periodic lattice on the 7-torus. Axes with one node are
/// inactive: fields are constant along them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dims: [usize; DIM],
    lengths: [f64; DIM],
}

impl Grid {
    pub fn new(dims: [usize; DIM], lengths: [f64; DIM]) -> Result<Self, FieldError> {
        for a in 0..DIM {
            let n = dims[a];
            if n == 0 {
                return Err(FieldError::InvalidGrid(format!(
                    "axis {} has no nodes",
                    a + 1
                )));
            }
            if n > 1 && (n < 8 || n % 2 != 0) {
                return Err(FieldError::InvalidGrid(format!(
                    "active axis {} has {n} nodes; need an even count of at least 8",
                    a + 1
                )));
            }
            if !(lengths[a] > 0.0 && lengths[a].is_finite()) {
                return Err(FieldError::InvalidGrid(format!(
                    "axis {} has period {}",
                    a + 1,
                    lengths[a]
                )));
            }
        }
        Ok(Self { dims, lengths })
    }

    /// All periods equal to 2 pi.
    pub fn periodic(dims: [usize; DIM]) -> Result<Self, FieldError> {
        Self::new(dims, [TAU; DIM])
    }

    /// `n` nodes along each listed axis (0-based), the rest inactive.
    pub fn with_active(axes: &[usize], n: usize) -> Result<Self, FieldError> {
        let mut dims = [1; DIM];
        for &a in axes {
            dims[a] = n;
        }
        Self::periodic(dims)
    }

    pub fn dims(&self) -> [usize; DIM] {
        self.dims
    }

    pub fn lengths(&self) -> [f64; DIM] {
        self.lengths
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.dims[axis] as f64
    }

    pub fn is_active(&self, axis: usize) -> bool {
        self.dims[axis] > 1
    }

    pub fn active_axes(&self) -> Vec<usize> {
        (0..DIM).filter(|&a| self.is_active(a)).collect()
    }

    pub fn node_count(&self) -> usize {
        self.dims.iter().product()
    }

    /// Smallest spacing over active axes (the largest period if none).
    pub fn h_min(&self) -> f64 {
        let active = self.active_axes();
        if active.is_empty() {
            return self.lengths.iter().cloned().fold(0.0, f64::max);
        }
        active
            .iter()
            .map(|&a| self.spacing(a))
            .fold(f64::INFINITY, f64::min)
    }

    /// Quadrature weight of one node, the product of all spacings.
    pub fn node_weight(&self) -> f64 {
        (0..DIM).map(|a| self.spacing(a)).product()
    }

    /// Distance in the node index between neighbours along `axis`; the
    /// last axis varies fastest.
    pub fn stride(&self, axis: usize) -> usize {
        self.dims[axis + 1..].iter().product()
    }

    pub fn coords(&self, node: usize) -> [usize; DIM] {
        let mut c = [0; DIM];
        let mut rem = node;
        for a in (0..DIM).rev() {
            c[a] = rem % self.dims[a];
            rem /= self.dims[a];
        }
        c
    }

    pub fn node_of(&self, coords: [usize; DIM]) -> usize {
        coords
            .iter()
            .zip(self.dims.iter())
            .fold(0, |acc, (&c, &n)| acc * n + c)
    }

    pub fn position(&self, node: usize) -> [f64; DIM] {
        let c = self.coords(node);
        std::array::from_fn(|a| c[a] as f64 * self.spacing(a))
    }
}
