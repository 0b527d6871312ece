use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{CvkanError, Result};
use crate::layers::{edge_forward, EdgeFunction, GridSpec};
use crate::numerics::ComplexScalar;

pub const DEFAULT_RESOLUTION: usize = 64;

/// Magnitude and phase of an edge function on an `R × R` lattice, row-major
/// over (real index, imaginary index).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSurface {
    pub resolution: usize,
    pub magnitude: Vec<f64>,
    /// Radians in `(−π, π]`.
    pub phase: Vec<f64>,
}

/// `R` evenly spaced points from `lo` to exactly `hi`.
pub fn lattice_axis(grid: &GridSpec, resolution: usize) -> Vec<f64> {
    let step = (grid.hi - grid.lo) / (resolution - 1) as f64;
    (0..resolution)
        .map(|i| if i + 1 == resolution { grid.hi } else { grid.lo + step * i as f64 })
        .collect()
}

/// `arg z` folded into `(−π, π]`.
pub(crate) fn phase(z: ComplexScalar) -> f64 {
    let a = z.im.atan2(z.re);
    if a <= -PI {
        PI
    } else {
        a
    }
}

pub fn sample_edge_surface(edge: &EdgeFunction, resolution: usize) -> Result<EdgeSurface> {
    if resolution < 2 {
        return Err(CvkanError::Config(format!("surface resolution must be at least 2, got {resolution}")));
    }
    let axis = lattice_axis(&edge.grid, resolution);
    let mut magnitude = Vec::with_capacity(resolution * resolution);
    let mut phases = Vec::with_capacity(resolution * resolution);
    for &re in &axis {
        for &im in &axis {
            let w = edge_forward(ComplexScalar::new(re, im), edge);
            magnitude.push(w.norm());
            phases.push(phase(w));
        }
    }
    Ok(EdgeSurface {
        resolution,
        magnitude,
        phase: phases,
    })
}
