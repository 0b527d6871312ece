//! Versioned JSON document consumed by the browser viewer.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::relevance::RelevanceReport;
use super::surface::sample_edge_surface;
use crate::error::{CvkanError, Result};
use crate::layers::{CsiluVariant, CvkanModel, GridSpec, ModelDocument, ModelKind, ModelSpec, OutputDomain};
use crate::layers::{LayoutSegment, MODEL_FORMAT_VERSION};
use crate::norm::{NormVariant, RunningStats};

pub const VIZ_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterBlock {
    pub values: Vec<f64>,
    pub layout: Vec<LayoutSegment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeScore {
    pub l: usize,
    pub q: usize,
    pub p: usize,
    pub score: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexScore {
    pub l: usize,
    pub i: usize,
    pub score: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelevanceBlock {
    pub dataset: String,
    pub samples: usize,
    pub edges: Vec<EdgeScore>,
    pub vertices: Vec<VertexScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceEntry {
    pub l: usize,
    pub q: usize,
    pub p: usize,
    pub resolution: usize,
    /// Row-major over (real index, imaginary index).
    pub magnitude: Vec<f64>,
    pub phase: Vec<f64>,
}

/// Running statistics, so the document alone can rebuild the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormState {
    pub running: Vec<Vec<RunningStats>>,
    pub momentum: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VizDocument {
    pub version: u32,
    pub widths: Vec<usize>,
    pub output_domain: OutputDomain,
    pub grid: GridSpec,
    pub norm_variant: NormVariant,
    pub csilu_variant: CsiluVariant,
    pub parameters: ParameterBlock,
    pub relevance: RelevanceBlock,
    pub surfaces: Vec<SurfaceEntry>,
    pub feature_names: Vec<String>,
    pub norm_state: NormState,
}

impl VizDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn spec(&self) -> ModelSpec {
        ModelSpec {
            kind: ModelKind::Cvkan,
            widths: self.widths.clone(),
            grid: self.grid,
            norm: self.norm_variant,
            csilu: self.csilu_variant,
            output_domain: self.output_domain,
        }
    }

    /// Rebuilds the exported model.
    pub fn to_model(&self) -> Result<CvkanModel> {
        CvkanModel::from_document(ModelDocument {
            version: MODEL_FORMAT_VERSION,
            spec: self.spec(),
            params: self.parameters.values.clone(),
            running: self.norm_state.running.clone(),
            momentum: self.norm_state.momentum,
            eps: self.norm_state.eps,
        })
    }

    /// Structural checks a reader can rely on.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CvkanError::Config(format!("invalid visualization document: {msg}")));
        if self.version != VIZ_FORMAT_VERSION {
            return Err(CvkanError::Version {
                expected: VIZ_FORMAT_VERSION,
                found: self.version,
            });
        }
        let spec = self.spec();
        spec.validate()?;
        if self.parameters.values.len() != spec.param_count() {
            return bad(format!("{} parameters, architecture needs {}", self.parameters.values.len(), spec.param_count()));
        }
        if self.feature_names.len() != self.widths[0] {
            return bad(format!("{} feature names for {} inputs", self.feature_names.len(), self.widths[0]));
        }
        let n_edges: usize = self.widths.windows(2).map(|w| w[0] * w[1]).sum();
        let n_vertices: usize = self.widths.iter().sum();
        if self.surfaces.len() != n_edges || self.relevance.edges.len() != n_edges {
            return bad(format!("expected {n_edges} edges"));
        }
        if self.relevance.vertices.len() != n_vertices {
            return bad(format!("expected {n_vertices} vertices"));
        }
        let scores_ok = self
            .relevance
            .edges
            .iter()
            .map(|e| e.score)
            .chain(self.relevance.vertices.iter().map(|v| v.score))
            .all(|s| s.is_finite() && s >= 0.0);
        if !scores_ok {
            return bad("relevance scores must be finite and nonnegative".into());
        }
        for s in &self.surfaces {
            let cells = s.resolution * s.resolution;
            if s.resolution < 2 || s.magnitude.len() != cells || s.phase.len() != cells {
                return bad(format!("surface ({}, {}, {}) has the wrong size", s.l, s.q, s.p));
            }
            if !s.magnitude.iter().all(|m| m.is_finite() && *m >= 0.0) {
                return bad(format!("surface ({}, {}, {}) has invalid magnitudes", s.l, s.q, s.p));
            }
            if !s.phase.iter().all(|a| *a > -PI && *a <= PI) {
                return bad(format!("surface ({}, {}, {}) has phases outside (-pi, pi]", s.l, s.q, s.p));
            }
        }
        Ok(())
    }
}

/// Assembles the document; a pure function of its inputs.
pub fn build_viz_document(
    model: &CvkanModel,
    report: &RelevanceReport,
    resolution: usize,
    feature_names: &[String],
) -> Result<VizDocument> {
    let spec = model.spec();
    if spec.kind != ModelKind::Cvkan {
        return Err(CvkanError::Config("visualization export needs complex edges".into()));
    }
    if report.widths != spec.widths {
        return Err(CvkanError::Shape("relevance report belongs to another architecture".into()));
    }
    if feature_names.len() != spec.widths[0] {
        return Err(CvkanError::Shape(format!(
            "{} feature names for {} inputs",
            feature_names.len(),
            spec.widths[0]
        )));
    }
    let mut surfaces = Vec::new();
    let mut edges = Vec::new();
    for l in 0..spec.depth() {
        let n_in = spec.widths[l];
        for q in 0..spec.widths[l + 1] {
            for p in 0..n_in {
                let s = sample_edge_surface(&model.edge(l, q, p)?, resolution)?;
                surfaces.push(SurfaceEntry {
                    l,
                    q,
                    p,
                    resolution,
                    magnitude: s.magnitude,
                    phase: s.phase,
                });
                edges.push(EdgeScore {
                    l,
                    q,
                    p,
                    score: report.edges[l][q * n_in + p],
                    std: report.edge_std[l][q * n_in + p],
                });
            }
        }
    }
    let vertices = report
        .vertices
        .iter()
        .enumerate()
        .flat_map(|(l, layer)| {
            layer.iter().enumerate().map(move |(i, &score)| VertexScore {
                l,
                i,
                score,
                std: report.vertex_std[l][i],
            })
        })
        .collect();
    let doc = model.to_document();
    Ok(VizDocument {
        version: VIZ_FORMAT_VERSION,
        widths: spec.widths.clone(),
        output_domain: spec.output_domain,
        grid: spec.grid,
        norm_variant: spec.norm,
        csilu_variant: spec.csilu,
        parameters: ParameterBlock {
            values: doc.params,
            layout: model.layout().segments(),
        },
        relevance: RelevanceBlock {
            dataset: report.dataset.clone(),
            samples: report.samples,
            edges,
            vertices,
        },
        surfaces,
        feature_names: feature_names.to_vec(),
        norm_state: NormState {
            running: doc.running,
            momentum: doc.momentum,
            eps: doc.eps,
        },
    })
}

/// Builds the document and writes it as JSON.
pub fn export_viz(
    model: &CvkanModel,
    report: &RelevanceReport,
    resolution: usize,
    feature_names: &[String],
    path: &Path,
) -> Result<VizDocument> {
    let doc = build_viz_document(model, report, resolution, feature_names)?;
    fs::write(path, doc.to_json()?)?;
    Ok(doc)
}
