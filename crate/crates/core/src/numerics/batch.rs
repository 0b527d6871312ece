use serde::{Deserialize, Serialize};

use super::complex::{is_finite, ComplexScalar};
use crate::error::{CvkanError, Result};

/// Dense row-major matrix of complex values: one row per sample, one column per feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexBatch {
    rows: usize,
    cols: usize,
    data: Vec<ComplexScalar>,
}

impl ComplexBatch {
    pub fn new(rows: usize, cols: usize, data: Vec<ComplexScalar>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(CvkanError::Shape(format!(
                "batch must have at least one row and column, got {rows}x{cols}"
            )));
        }
        if rows * cols != data.len() {
            return Err(CvkanError::Shape(format!(
                "{rows}x{cols} batch needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|z| !is_finite(*z)) {
            return Err(CvkanError::NonFinite(format!(
                "batch entry ({}, {}) is {}",
                i / cols,
                i % cols,
                data[i]
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ComplexScalar::new(0.0, 0.0); rows * cols],
        }
    }

    /// Builds a batch from per-sample rows. All rows must share one width.
    pub fn from_rows(rows: &[Vec<ComplexScalar>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(CvkanError::Shape("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[ComplexScalar] {
        &self.data
    }

    pub fn into_data(self) -> Vec<ComplexScalar> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> ComplexScalar {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[ComplexScalar] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column(&self, col: usize) -> Vec<ComplexScalar> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    /// New batch holding the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    /// New batch holding the given columns, in the given order.
    pub fn select_cols(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.rows);
        for r in 0..self.rows {
            data.extend(indices.iter().map(|&c| self.get(r, c)));
        }
        Self {
            rows: self.rows,
            cols: indices.len(),
            data,
        }
    }
}
