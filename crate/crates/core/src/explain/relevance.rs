//! Relevance scores propagated backwards from the outputs.
//!
//! Every output vertex scores 1. An edge into vertex `q` of layer `l + 1`
//! receives that vertex's score in proportion to its share of the standard
//! deviations of all edges into `q`. A vertex scores the sum of its outgoing
//! edges, so incoming edge scores always add up to the head's score.

use serde::{Deserialize, Serialize};

use super::stats::complex_std;
use crate::error::{CvkanError, Result};
use crate::layers::CvkanModel;
use crate::numerics::ComplexBatch;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceReport {
    pub dataset: String,
    pub samples: usize,
    pub widths: Vec<usize>,
    /// `edges[l][q * n_in + p]` for edge `E_{l,q,p}`.
    pub edges: Vec<Vec<f64>>,
    /// `vertices[l][i]` for vertex `i` of vertex layer `l` (0 = inputs).
    pub vertices: Vec<Vec<f64>>,
    /// Standard deviation of each edge output over the samples.
    pub edge_std: Vec<Vec<f64>>,
    /// Standard deviation of each vertex value over the samples.
    pub vertex_std: Vec<Vec<f64>>,
}

impl RelevanceReport {
    pub fn edge(&self, l: usize, q: usize, p: usize) -> f64 {
        self.edges[l][q * self.widths[l] + p]
    }

    pub fn input_scores(&self) -> &[f64] {
        &self.vertices[0]
    }

    /// Largest gap between a vertex score and the sum of its incoming edges.
    pub fn conservation_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for l in 0..self.edges.len() {
            let n_in = self.widths[l];
            for q in 0..self.widths[l + 1] {
                let incoming: f64 = (0..n_in).map(|p| self.edge(l, q, p)).sum();
                worst = worst.max((incoming - self.vertices[l + 1][q]).abs());
            }
        }
        worst
    }
}

/// Runs the backward recursion on precomputed edge deviations
/// (`edge_std[l][q * n_in + p]`).
pub fn relevance_from_sigma(widths: &[usize], edge_std: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let depth = widths.len().saturating_sub(1);
    if depth == 0 || edge_std.len() != depth {
        return Err(CvkanError::Shape(format!(
            "{} edge layers of deviations for {} widths",
            edge_std.len(),
            widths.len()
        )));
    }
    let mut vertices: Vec<Vec<f64>> = widths.iter().map(|&w| vec![0.0; w]).collect();
    let mut edges: Vec<Vec<f64>> = (0..depth).map(|l| vec![0.0; widths[l] * widths[l + 1]]).collect();
    vertices[depth].fill(1.0);
    for l in (0..depth).rev() {
        let (n_in, n_out) = (widths[l], widths[l + 1]);
        if edge_std[l].len() != n_in * n_out {
            return Err(CvkanError::Shape(format!("layer {l} has {} deviations", edge_std[l].len())));
        }
        for q in 0..n_out {
            let sigma = &edge_std[l][q * n_in..(q + 1) * n_in];
            let total: f64 = sigma.iter().sum();
            let head = vertices[l + 1][q];
            for p in 0..n_in {
                let share = if total > 0.0 {
                    sigma[p] / total
                } else {
                    1.0 / n_in as f64
                };
                edges[l][q * n_in + p] = head * share;
            }
            if total <= 0.0 {
                log::warn!("edges into vertex {q} of layer {} are all constant; splitting its score evenly", l + 1);
            }
        }
        for p in 0..n_in {
            vertices[l][p] = (0..n_out).map(|q| edges[l][q * n_in + p]).sum();
        }
    }
    Ok((edges, vertices))
}

/// Scores every edge and vertex of `model` over the samples `x` (already in
/// the model's input layout).
pub fn relevance(model: &CvkanModel, x: &ComplexBatch, dataset: &str) -> Result<RelevanceReport> {
    if x.rows() < 2 {
        return Err(CvkanError::Statistics { required: 2, got: x.rows() });
    }
    let widths = model.spec().widths.clone();
    let trace = model.trace(x)?;
    let mut edge_std = Vec::with_capacity(widths.len() - 1);
    for l in 0..widths.len() - 1 {
        let (n_in, n_out) = (widths[l], widths[l + 1]);
        let mut layer = Vec::with_capacity(n_in * n_out);
        for q in 0..n_out {
            for p in 0..n_in {
                layer.push(complex_std(trace.edge_values(l, q, p, n_in))?);
            }
        }
        edge_std.push(layer);
    }
    let vertex_std = (0..widths.len())
        .map(|l| (0..widths[l]).map(|i| complex_std(trace.vertex(l, i))).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let (edges, vertices) = relevance_from_sigma(&widths, &edge_std)?;
    let report = RelevanceReport {
        dataset: dataset.to_string(),
        samples: x.rows(),
        widths,
        edges,
        vertices,
        edge_std,
        vertex_std,
    };
    debug_assert!(report.conservation_error() < 1e-9);
    Ok(report)
}
