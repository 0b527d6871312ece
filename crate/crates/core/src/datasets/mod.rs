//! Synthetic generators, knot-table ingestion and the split-real adapter.

mod knots;
mod physical;
mod split;
mod surrogate;
mod symbolic;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CvkanError, Result};
use crate::layers::GridSpec;
use crate::numerics::{ComplexBatch, ComplexScalar};

pub use knots::{knots_from_rows, load_knots, load_knots_with, ChannelScaling, KnotEncoding, KNOT_SCHEMA};
pub use physical::{circuit_voltage, gen_circuit, gen_holography, hologram, CircuitGeneration};
pub use split::{from_split_real, split_features, split_width, to_split_real, RealDataset, RealTargets};
pub use surrogate::{gen_knot_surrogate, write_knot_csv, SurrogateTable, SURROGATE_CLASSES};
pub use symbolic::{gen_symbolic, SymbolicFn};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMeta {
    pub name: String,
    /// Imaginary part is identically zero by construction.
    pub originally_real: bool,
}

impl FeatureMeta {
    pub fn complex(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            originally_real: false,
        }
    }

    pub fn real(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            originally_real: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    Regression(ComplexBatch),
    Classification { labels: Vec<usize>, classes: usize },
}

impl Targets {
    pub fn len(&self) -> usize {
        match self {
            Targets::Regression(t) => t.rows(),
            Targets::Classification { labels, .. } => labels.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Output width a model needs: target columns or class count.
    pub fn width(&self) -> usize {
        match self {
            Targets::Regression(t) => t.cols(),
            Targets::Classification { classes, .. } => *classes,
        }
    }

    pub fn select(&self, indices: &[usize]) -> Targets {
        match self {
            Targets::Regression(t) => Targets::Regression(t.select_rows(indices)),
            Targets::Classification { labels, classes } => Targets::Classification {
                labels: indices.iter().map(|&i| labels[i]).collect(),
                classes: *classes,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub id: String,
    pub features: ComplexBatch,
    pub targets: Targets,
    pub feature_meta: Vec<FeatureMeta>,
    /// Knot ingestion keeps its normalization and class map here.
    pub encoding: Option<KnotEncoding>,
}

impl Dataset {
    pub fn new(
        id: impl Into<String>,
        features: ComplexBatch,
        targets: Targets,
        feature_meta: Vec<FeatureMeta>,
    ) -> Result<Self> {
        if features.rows() != targets.len() {
            return Err(CvkanError::Shape(format!(
                "{} feature rows but {} targets",
                features.rows(),
                targets.len()
            )));
        }
        if feature_meta.len() != features.cols() {
            return Err(CvkanError::Shape(format!(
                "{} feature columns but {} names",
                features.cols(),
                feature_meta.len()
            )));
        }
        for (j, meta) in feature_meta.iter().enumerate() {
            if meta.originally_real && features.column(j).iter().any(|z| z.im != 0.0) {
                return Err(CvkanError::Dataset(format!(
                    "real feature `{}` has a non-zero imaginary part",
                    meta.name
                )));
            }
        }
        Ok(Self {
            id: id.into(),
            features,
            targets,
            feature_meta,
            encoding: None,
        })
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.feature_meta.iter().map(|m| m.name.clone()).collect()
    }

    pub fn is_classification(&self) -> bool {
        matches!(self.targets, Targets::Classification { .. })
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            id: self.id.clone(),
            features: self.features.select_rows(indices),
            targets: self.targets.select(indices),
            feature_meta: self.feature_meta.clone(),
            encoding: self.encoding.clone(),
        }
    }

    /// Seeded random subset of at most `n` rows, in random order.
    pub fn sample(&self, n: usize, seed: u64) -> Dataset {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        order.truncate(n);
        self.subset(&order)
    }

    /// Keeps the given feature columns in the given order.
    pub fn select_features(&self, columns: &[usize]) -> Result<Dataset> {
        if let Some(&bad) = columns.iter().find(|&&c| c >= self.n_features()) {
            return Err(CvkanError::Shape(format!(
                "feature {bad} out of range for {} features",
                self.n_features()
            )));
        }
        if columns.is_empty() {
            return Err(CvkanError::Shape("cannot select zero features".into()));
        }
        Ok(Dataset {
            id: self.id.clone(),
            features: self.features.select_cols(columns),
            targets: self.targets.clone(),
            feature_meta: columns.iter().map(|&c| self.feature_meta[c].clone()).collect(),
            encoding: None,
        })
    }
}

pub(crate) fn uniform_on_grid(rng: &mut ChaCha8Rng, grid: &GridSpec) -> ComplexScalar {
    ComplexScalar::new(uniform_real(rng, grid), uniform_real(rng, grid))
}

pub(crate) fn uniform_real(rng: &mut ChaCha8Rng, grid: &GridSpec) -> f64 {
    rng.random_range(grid.lo..=grid.hi)
}

pub(crate) fn check_count(n: usize) -> Result<()> {
    if n == 0 {
        return Err(CvkanError::Config("sample count must be at least 1".into()));
    }
    Ok(())
}
