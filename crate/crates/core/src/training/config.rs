use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::adam::AdamConfig;
use crate::datasets::{
    gen_circuit, gen_holography, gen_knot_surrogate, gen_symbolic, knots_from_rows, load_knots, Dataset,
    SymbolicFn,
};
use crate::error::{CvkanError, Result};
use crate::explain::PruningFragment;
use crate::layers::{GridSpec, ModelKind, ModelSpec};

/// Where the samples of an experiment come from. Synthetic sets are drawn on
/// the model's grid square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetConfig {
    Symbolic {
        function: SymbolicFn,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    Holography {
        #[serde(default = "default_samples")]
        samples: usize,
    },
    Circuit {
        #[serde(default = "default_samples")]
        samples: usize,
    },
    Knots {
        path: PathBuf,
        /// Random subset size; the full table when absent.
        #[serde(default)]
        max_samples: Option<usize>,
    },
    KnotsSurrogate {
        #[serde(default = "default_samples")]
        samples: usize,
    },
}

fn default_samples() -> usize {
    5000
}

impl DatasetConfig {
    pub fn id(&self) -> String {
        match self {
            DatasetConfig::Symbolic { function, .. } => function.id().to_string(),
            DatasetConfig::Holography { .. } => "holography".into(),
            DatasetConfig::Circuit { .. } => "circuit".into(),
            DatasetConfig::Knots { .. } => "knots".into(),
            DatasetConfig::KnotsSurrogate { .. } => "knots_surrogate".into(),
        }
    }

    /// Builds the dataset. Relative knot paths resolve against `base`.
    pub fn load(&self, grid: &GridSpec, seed: u64, base: Option<&Path>) -> Result<Dataset> {
        let mut d = match self {
            DatasetConfig::Symbolic { function, samples } => gen_symbolic(*function, *samples, seed, grid)?,
            DatasetConfig::Holography { samples } => gen_holography(*samples, seed, grid)?,
            DatasetConfig::Circuit { samples } => gen_circuit(*samples, seed, grid)?.dataset,
            DatasetConfig::Knots { path, max_samples } => {
                let path = match base {
                    Some(b) if path.is_relative() => b.join(path),
                    _ => path.clone(),
                };
                let d = load_knots(&path, grid)?;
                match max_samples {
                    Some(n) => d.sample(*n, seed),
                    None => d,
                }
            }
            DatasetConfig::KnotsSurrogate { samples } => {
                let t = gen_knot_surrogate(*samples, seed);
                knots_from_rows(&t.header, &t.rows, &t.signatures, grid)?
            }
        };
        d.id = self.id();
        Ok(d)
    }
}

/// One experiment: data, architecture, optimizer and protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub dataset: DatasetConfig,
    pub model: ModelSpec,
    #[serde(default)]
    pub optimizer: AdamConfig,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default)]
    pub seed: u64,
    /// Feature selection applied after loading.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prune: Option<PruningFragment>,
}

fn default_epochs() -> usize {
    1000
}

fn default_folds() -> usize {
    5
}

impl ExperimentConfig {
    pub fn new(dataset: DatasetConfig, model: ModelSpec) -> Self {
        Self {
            name: None,
            dataset,
            model,
            optimizer: AdamConfig::default(),
            epochs: default_epochs(),
            folds: default_folds(),
            seed: 0,
            prune: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| CvkanError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.folds < 2 {
            return Err(CvkanError::Config(format!("folds must be at least 2, got {}", self.folds)));
        }
        if self.epochs < 1 {
            return Err(CvkanError::Config("epochs must be at least 1".into()));
        }
        let o = &self.optimizer;
        if !(o.lr > 0.0 && o.lr.is_finite()) {
            return Err(CvkanError::Config(format!("learning rate must be positive, got {}", o.lr)));
        }
        if !((0.0..1.0).contains(&o.beta1) && (0.0..1.0).contains(&o.beta2)) {
            return Err(CvkanError::Config("betas must lie in [0, 1)".into()));
        }
        if o.eps <= 0.0 || o.batch_size < 2 {
            return Err(CvkanError::Config("eps must be positive and batch_size at least 2".into()));
        }
        Ok(())
    }

    /// Loads the dataset and applies the pruning fragment, if any.
    pub fn load_dataset(&self, base: Option<&Path>) -> Result<Dataset> {
        let d = self.dataset.load(&self.model.grid, super::data_seed(self.seed), base)?;
        match &self.prune {
            Some(p) => p.apply(&d),
            None => Ok(d),
        }
    }

    pub fn param_count(&self) -> usize {
        self.model.param_count()
    }

    pub fn model_label(&self) -> &'static str {
        match self.model.kind {
            ModelKind::Cvkan => "CVKAN",
            ModelKind::Fastkan => "FastKAN",
        }
    }

    /// Widths joined by `x`, e.g. `2x4x2x1`.
    pub fn size_label(&self) -> String {
        self.model.widths.iter().map(|w| w.to_string()).collect::<Vec<_>>().join("x")
    }

    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            format!("{}_{}_{}", self.dataset.id(), self.model_label().to_lowercase(), self.size_label())
        })
    }
}
