use serde::{Deserialize, Serialize};

use crate::error::{CvkanError, Result};
use crate::numerics::ComplexScalar;

/// Uniform grid over `[lo, hi]` per axis, with `points_per_dim` centers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_lo")]
    pub lo: f64,
    #[serde(default = "default_hi")]
    pub hi: f64,
    #[serde(default = "default_points")]
    pub points_per_dim: usize,
    /// RBF width divisor.
    #[serde(default = "default_bandwidth")]
    pub bandwidth: f64,
}

fn default_lo() -> f64 {
    -2.0
}
fn default_hi() -> f64 {
    2.0
}
fn default_points() -> usize {
    8
}
fn default_bandwidth() -> f64 {
    1.0
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            lo: default_lo(),
            hi: default_hi(),
            points_per_dim: default_points(),
            bandwidth: default_bandwidth(),
        }
    }
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, points_per_dim: usize) -> Result<Self> {
        let spec = Self {
            lo,
            hi,
            points_per_dim,
            bandwidth: 1.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_bandwidth(mut self, bandwidth: f64) -> Self {
        self.bandwidth = bandwidth;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.points_per_dim < 2 {
            return Err(CvkanError::Config(format!(
                "grid needs at least 2 points per dimension, got {}",
                self.points_per_dim
            )));
        }
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(CvkanError::Config(format!(
                "grid range [{}, {}] is empty or non-finite",
                self.lo, self.hi
            )));
        }
        if !(self.bandwidth.is_finite() && self.bandwidth > 0.0) {
            return Err(CvkanError::Config(format!(
                "bandwidth must be positive, got {}",
                self.bandwidth
            )));
        }
        Ok(())
    }

    /// Distance between neighbouring grid points.
    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.points_per_dim - 1) as f64
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Grid coordinates along one axis; the last point is exactly `hi`.
    pub fn axis(&self) -> Vec<f64> {
        let g = self.points_per_dim;
        let h = self.spacing();
        (0..g)
            .map(|i| if i + 1 == g { self.hi } else { self.lo + i as f64 * h })
            .collect()
    }
}

/// The `G²` complex grid points `g_{u,v} = axis[u] + i·axis[v]`, row-major in `u`.
pub fn make_grid(spec: &GridSpec) -> Result<Vec<ComplexScalar>> {
    spec.validate()?;
    let axis = spec.axis();
    Ok(axis
        .iter()
        .flat_map(|&re| axis.iter().map(move |&im| ComplexScalar::new(re, im)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_point_axis() {
        let spec = GridSpec::new(-2.0, 2.0, 3).unwrap();
        assert_eq!(spec.axis(), vec![-2.0, 0.0, 2.0]);
        let grid = make_grid(&spec).unwrap();
        assert_eq!(grid.len(), 9);
        assert_eq!(grid[5], ComplexScalar::new(0.0, 2.0));
    }

    #[test]
    fn two_point_grid_is_the_corners() {
        let grid = make_grid(&GridSpec::new(-2.0, 2.0, 2).unwrap()).unwrap();
        let expected = [(-2.0, -2.0), (-2.0, 2.0), (2.0, -2.0), (2.0, 2.0)];
        for (g, (re, im)) in grid.iter().zip(expected) {
            assert_eq!(*g, ComplexScalar::new(re, im));
        }
    }

    #[test]
    fn eight_point_spacing() {
        let spec = GridSpec::default();
        assert!((spec.spacing() - 4.0 / 7.0).abs() < 1e-15);
        let axis = spec.axis();
        assert_eq!(axis[0], -2.0);
        assert_eq!(axis[7], 2.0);
        for w in axis.windows(2) {
            assert!((w[1] - w[0] - 4.0 / 7.0).abs() < 1e-14);
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(GridSpec::new(-2.0, 2.0, 1).is_err());
        assert!(GridSpec::new(2.0, -2.0, 4).is_err());
        assert!(GridSpec::default().with_bandwidth(0.0).validate().is_err());
        let bad = GridSpec {
            points_per_dim: 1,
            ..GridSpec::default()
        };
        assert!(make_grid(&bad).is_err());
    }
}
