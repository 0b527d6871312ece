use serde::{Deserialize, Serialize};

use super::csilu::CsiluVariant;
use super::edge::{edge_param_count, OutputDomain};
use super::grid::GridSpec;
use crate::error::{CvkanError, Result};
use crate::norm::NormVariant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Complex RBF edges on a `G × G` grid.
    #[default]
    Cvkan,
    /// Real RBF edges on a `G`-point grid (split-real baseline).
    Fastkan,
}

/// What a single edge of a layer maps between.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Complex,
    ComplexToReal,
    Real,
}

impl EdgeKind {
    pub fn param_count(self, grid: &GridSpec) -> usize {
        match self {
            Self::Complex => edge_param_count(grid, OutputDomain::Complex),
            Self::ComplexToReal => edge_param_count(grid, OutputDomain::Real),
            Self::Real => grid.points_per_dim + 1,
        }
    }
}

/// Architecture of a network: everything needed to size and evaluate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default)]
    pub kind: ModelKind,
    pub widths: Vec<usize>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub norm: NormVariant,
    #[serde(default)]
    pub csilu: CsiluVariant,
    #[serde(default)]
    pub output_domain: OutputDomain,
}

impl ModelSpec {
    pub fn cvkan(widths: &[usize], norm: NormVariant) -> Self {
        Self {
            kind: ModelKind::Cvkan,
            widths: widths.to_vec(),
            grid: GridSpec::default(),
            norm,
            csilu: CsiluVariant::Complex,
            output_domain: OutputDomain::Complex,
        }
    }

    pub fn with_output_domain(mut self, domain: OutputDomain) -> Self {
        self.output_domain = domain;
        self
    }

    pub fn with_csilu(mut self, csilu: CsiluVariant) -> Self {
        self.csilu = csilu;
        self
    }

    pub fn with_grid(mut self, grid: GridSpec) -> Self {
        self.grid = grid;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.widths.len() < 2 {
            return Err(CvkanError::Config(format!(
                "need at least an input and an output width, got {:?}",
                self.widths
            )));
        }
        if self.widths.contains(&0) {
            return Err(CvkanError::Config(format!(
                "layer widths must be positive, got {:?}",
                self.widths
            )));
        }
        match (self.kind, self.norm) {
            (ModelKind::Cvkan, NormVariant::BnReal) => Err(CvkanError::Config(
                "bn_real normalizes real activations; use bn_c, bn_v or bn_r2 for a CVKAN".into(),
            )),
            (ModelKind::Fastkan, NormVariant::BnC | NormVariant::BnV | NormVariant::BnR2) => {
                Err(CvkanError::Config(
                    "a FastKAN baseline supports only bn_real or none".into(),
                ))
            }
            _ => Ok(()),
        }
    }

    /// Number of edge layers `L`.
    pub fn depth(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn edge_kind(&self, layer: usize) -> EdgeKind {
        match self.kind {
            ModelKind::Fastkan => EdgeKind::Real,
            ModelKind::Cvkan
                if layer + 1 == self.depth() && self.output_domain == OutputDomain::Real =>
            {
                EdgeKind::ComplexToReal
            }
            ModelKind::Cvkan => EdgeKind::Complex,
        }
    }

    /// Whether a normalization layer follows edge layer `layer` (all but the last).
    pub fn has_norm(&self, layer: usize) -> bool {
        layer + 1 < self.depth() && self.norm != NormVariant::None
    }

    pub fn layout(&self) -> ParamLayout {
        let mut offset = 0;
        let mut layers = Vec::with_capacity(self.depth());
        for l in 0..self.depth() {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let kind = self.edge_kind(l);
            let edge_stride = kind.param_count(&self.grid);
            let edge_offset = offset;
            offset += n_in * n_out * edge_stride;
            let norm = if self.has_norm(l) {
                let stride = self.norm.params_per_feature();
                let start = offset;
                offset += n_out * stride;
                Some((start, stride))
            } else {
                None
            };
            layers.push(LayerLayout {
                n_in,
                n_out,
                kind,
                edge_offset,
                edge_stride,
                norm,
            });
        }
        ParamLayout {
            layers,
            total: offset,
        }
    }

    /// Exact count of real trainable scalars.
    pub fn param_count(&self) -> usize {
        self.layout().total
    }
}

/// Exact count of real trainable scalars of a model with this architecture.
pub fn param_count(spec: &ModelSpec) -> usize {
    spec.param_count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerLayout {
    pub n_in: usize,
    pub n_out: usize,
    pub kind: EdgeKind,
    pub edge_offset: usize,
    pub edge_stride: usize,
    /// Offset and per-feature stride of the following norm layer.
    pub norm: Option<(usize, usize)>,
}

impl LayerLayout {
    /// Offset of edge `E_{q,p}` (output `q`, input `p`).
    #[inline]
    pub fn edge(&self, q: usize, p: usize) -> usize {
        self.edge_offset + (q * self.n_in + p) * self.edge_stride
    }

    pub fn norm_feature(&self, q: usize) -> Option<usize> {
        self.norm.map(|(start, stride)| start + q * stride)
    }
}

/// Where each parameter block lives in the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamLayout {
    pub layers: Vec<LayerLayout>,
    pub total: usize,
}

/// Human-readable layout entry for exported documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutSegment {
    pub name: String,
    pub offset: usize,
    pub len: usize,
    pub shape: Vec<usize>,
}

impl ParamLayout {
    pub fn segments(&self) -> Vec<LayoutSegment> {
        let mut out = Vec::new();
        for (l, layer) in self.layers.iter().enumerate() {
            out.push(LayoutSegment {
                name: format!("layer{l}.edges"),
                offset: layer.edge_offset,
                len: layer.n_in * layer.n_out * layer.edge_stride,
                shape: vec![layer.n_out, layer.n_in, layer.edge_stride],
            });
            if let Some((start, stride)) = layer.norm {
                out.push(LayoutSegment {
                    name: format!("layer{l}.norm"),
                    offset: start,
                    len: layer.n_out * stride,
                    shape: vec![layer.n_out, stride],
                });
            }
        }
        out
    }
}
