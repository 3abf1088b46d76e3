use std::ops::{Add, Mul, Sub};

use rayon::prelude::*;

use super::grid::Grid;
use crate::algebra::{tables::form_dim, PointForm, DIM};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variance {
    Co,
    Contra,
}

/// A rank-r tensor at every node, dense 7^r components per node, node-major.
/// Component order is row-major in the slot indices.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField {
    grid: Grid,
    variance: Vec<Variance>,
    data: Vec<f64>,
}

impl TensorField {
    pub fn zeros(grid: Grid, variance: Vec<Variance>) -> Self {
        let len = grid.node_count() * DIM.pow(variance.len() as u32);
        Self {
            grid,
            variance,
            data: vec![0.0; len],
        }
    }

    pub fn covariant(grid: Grid, rank: usize) -> Self {
        Self::zeros(grid, vec![Variance::Co; rank])
    }

    pub fn from_data(grid: Grid, variance: Vec<Variance>, data: Vec<f64>) -> Self {
        assert_eq!(
            data.len(),
            grid.node_count() * DIM.pow(variance.len() as u32)
        );
        Self {
            grid,
            variance,
            data,
        }
    }

    /// Fills each node from its position.
    pub fn from_fn<F>(grid: Grid, variance: Vec<Variance>, f: F) -> Self
    where
        F: Fn([f64; DIM], &mut [f64]) + Sync,
    {
        let mut out = Self::zeros(grid, variance);
        let block = out.block_len();
        out.data
            .par_chunks_mut(block)
            .enumerate()
            .for_each(|(node, chunk)| f(grid.position(node), chunk));
        out
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn block_len(&self) -> usize {
        DIM.pow(self.rank() as u32)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn at(&self, node: usize) -> &[f64] {
        let b = self.block_len();
        &self.data[node * b..(node + 1) * b]
    }

    pub fn at_mut(&mut self, node: usize) -> &mut [f64] {
        let b = self.block_len();
        &mut self.data[node * b..(node + 1) * b]
    }

    pub fn sup_norm(&self) -> f64 {
        sup_abs(&self.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    fn check_compatible(&self, other: &Self) {
        assert_eq!(self.grid, other.grid);
        assert_eq!(self.variance, other.variance);
    }
}

pub(crate) fn sup_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()))
}

impl Add<&TensorField> for &TensorField {
    type Output = TensorField;
    fn add(self, rhs: &TensorField) -> TensorField {
        self.check_compatible(rhs);
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a + b)
            .collect();
        TensorField::from_data(self.grid, self.variance.clone(), data)
    }
}

impl Sub<&TensorField> for &TensorField {
    type Output = TensorField;
    fn sub(self, rhs: &TensorField) -> TensorField {
        self.check_compatible(rhs);
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        TensorField::from_data(self.grid, self.variance.clone(), data)
    }
}

impl Mul<f64> for &TensorField {
    type Output = TensorField;
    fn mul(self, s: f64) -> TensorField {
        let data = self.data.iter().map(|a| a * s).collect();
        TensorField::from_data(self.grid, self.variance.clone(), data)
    }
}

/// A p-form at every node, stored on increasing index tuples like
/// [`PointForm`].
#[derive(Clone, Debug, PartialEq)]
pub struct FormField {
    grid: Grid,
    degree: usize,
    data: Vec<f64>,
}

impl FormField {
    pub fn zeros(grid: Grid, degree: usize) -> Self {
        Self {
            grid,
            degree,
            data: vec![0.0; grid.node_count() * form_dim(degree)],
        }
    }

    pub fn constant(grid: Grid, value: &PointForm) -> Self {
        let data = value
            .components()
            .iter()
            .cycle()
            .take(grid.node_count() * value.components().len())
            .cloned()
            .collect();
        Self {
            grid,
            degree: value.degree(),
            data,
        }
    }

    pub fn from_data(grid: Grid, degree: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), grid.node_count() * form_dim(degree));
        Self { grid, degree, data }
    }

    pub fn from_fn<F>(grid: Grid, degree: usize, f: F) -> Self
    where
        F: Fn([f64; DIM], &mut [f64]) + Sync,
    {
        let mut out = Self::zeros(grid, degree);
        let block = form_dim(degree);
        out.data
            .par_chunks_mut(block)
            .enumerate()
            .for_each(|(node, chunk)| f(grid.position(node), chunk));
        out
    }

    pub fn from_points(grid: Grid, degree: usize, points: &[PointForm]) -> Self {
        assert_eq!(points.len(), grid.node_count());
        let mut data = Vec::with_capacity(points.len() * form_dim(degree));
        for p in points {
            assert_eq!(p.degree(), degree);
            data.extend_from_slice(p.components());
        }
        Self { grid, degree, data }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn block_len(&self) -> usize {
        form_dim(self.degree)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn at(&self, node: usize) -> PointForm {
        let b = self.block_len();
        PointForm::from_components(self.degree, self.data[node * b..(node + 1) * b].to_vec())
    }

    pub fn raw(&self, node: usize) -> &[f64] {
        let b = self.block_len();
        &self.data[node * b..(node + 1) * b]
    }

    pub fn set(&mut self, node: usize, value: &PointForm) {
        assert_eq!(value.degree(), self.degree);
        let b = self.block_len();
        self.data[node * b..(node + 1) * b].copy_from_slice(value.components());
    }

    pub fn points(&self) -> Vec<PointForm> {
        (0..self.grid.node_count()).map(|n| self.at(n)).collect()
    }

    /// Dense antisymmetric expansion.
    pub fn to_tensor(&self) -> TensorField {
        let mut data = Vec::with_capacity(self.grid.node_count() * DIM.pow(self.degree as u32));
        for n in 0..self.grid.node_count() {
            data.extend(self.at(n).expand());
        }
        TensorField::from_data(self.grid, vec![Variance::Co; self.degree], data)
    }

    pub fn sup_norm(&self) -> f64 {
        sup_abs(&self.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// self + s * other
    pub fn axpy(&self, s: f64, other: &FormField) -> FormField {
        assert_eq!(self.degree, other.degree);
        assert_eq!(self.grid, other.grid);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + s * b)
            .collect();
        FormField::from_data(self.grid, self.degree, data)
    }

    pub fn scale(&self, s: f64) -> FormField {
        FormField::from_data(
            self.grid,
            self.degree,
            self.data.iter().map(|a| a * s).collect(),
        )
    }
}

impl Add<&FormField> for &FormField {
    type Output = FormField;
    fn add(self, rhs: &FormField) -> FormField {
        self.axpy(1.0, rhs)
    }
}

impl Sub<&FormField> for &FormField {
    type Output = FormField;
    fn sub(self, rhs: &FormField) -> FormField {
        self.axpy(-1.0, rhs)
    }
}
