//! Command implementations behind the `cvkan` binary.
//!
//! Every command that writes artifacts also writes `manifest.json` holding the
//! resolved configuration, its SHA-256 and the tool version, which is enough
//! to rerun it bit for bit.

pub mod suite;

use std::fs;
use std::path::{Path, PathBuf};

use cvkan::explain::{export_viz, relevance, VizDocument};
use cvkan::training::{evaluate, run_cv_full, write_fold_csv, ExperimentConfig, Metrics, ModelIo, RunSummary};
use cvkan::{CvkanError, CvkanModel};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const OUT_DIR_ENV: &str = "CVKAN_OUT_DIR";

/// Failure of a command, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad input: missing or invalid config, unreadable model, schema mismatch.
    Usage(String),
    /// Anything going wrong after the inputs were accepted.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    pub fn usage(context: impl std::fmt::Display, e: impl std::fmt::Display) -> Self {
        CliError::Usage(format!("{context}: {e}"))
    }

    pub fn runtime(context: impl std::fmt::Display, e: impl std::fmt::Display) -> Self {
        CliError::Runtime(format!("{context}: {e}"))
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub epochs: Option<usize>,
    pub folds: Option<usize>,
    pub batch_size: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, config: &mut ExperimentConfig) {
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(e) = self.epochs {
            config.epochs = e;
        }
        if let Some(f) = self.folds {
            config.folds = f;
        }
        if let Some(b) = self.batch_size {
            config.optimizer.batch_size = b;
        }
    }
}

pub fn load_config(path: &Path, overrides: &Overrides) -> CliResult<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::usage(path.display(), e))?;
    let mut config = ExperimentConfig::from_json(&text).map_err(|e| CliError::usage(path.display(), e))?;
    overrides.apply(&mut config);
    config.validate().map_err(|e| CliError::usage(path.display(), e))?;
    Ok(config)
}

fn config_base(path: &Path) -> Option<&Path> {
    path.parent().filter(|p| !p.as_os_str().is_empty())
}

/// SHA-256 of the canonical JSON form of a resolved config.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let canonical = serde_json::to_vec(config).expect("configs serialize");
    hex::encode(Sha256::digest(&canonical))
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config_sha256: String,
    pub seed: u64,
    pub config: &'a ExperimentConfig,
    pub artifacts: Vec<String>,
}

pub fn write_manifest(path: &Path, command: &str, config: &ExperimentConfig, artifacts: &[&str]) -> CliResult<()> {
    let manifest = Manifest {
        tool: "cvkan",
        version: VERSION,
        command,
        config_sha256: config_hash(config),
        seed: config.seed,
        config,
        artifacts: artifacts.iter().map(|s| s.to_string()).collect(),
    };
    write_json(path, &manifest)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::runtime(path.display(), e))?;
    fs::write(path, text + "\n").map_err(|e| CliError::runtime(path.display(), e))
}

pub fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::runtime(dir.display(), e))
}

fn training_error(name: &str, e: CvkanError) -> CliError {
    match e {
        CvkanError::Config(_) | CvkanError::Dataset(_) | CvkanError::Io(_) | CvkanError::Csv(_) => {
            CliError::usage(name, e)
        }
        other => CliError::runtime(name, other),
    }
}

#[derive(Debug)]
pub struct TrainArtifacts {
    pub dir: PathBuf,
    pub summary: RunSummary,
}

/// Cross-validates the config and writes `summary.json`, `folds.csv`,
/// `model_fold0.json` and `manifest.json` into `out_dir/<run name>/`.
pub fn cmd_train(config_path: &Path, overrides: &Overrides, out_dir: &Path) -> CliResult<TrainArtifacts> {
    let config = load_config(config_path, overrides)?;
    let name = config.display_name();
    let run = run_cv_full(&config, config_base(config_path)).map_err(|e| training_error(&name, e))?;
    let dir = out_dir.join(&name);
    create_dir(&dir)?;
    write_json(&dir.join("summary.json"), &run.summary)?;
    let mut csv = Vec::new();
    write_fold_csv(&mut csv, std::slice::from_ref(&run.summary)).map_err(|e| CliError::runtime("folds.csv", e))?;
    fs::write(dir.join("folds.csv"), csv).map_err(|e| CliError::runtime("folds.csv", e))?;
    run.models[0]
        .save(&dir.join("model_fold0.json"))
        .map_err(|e| CliError::runtime("model_fold0.json", e))?;
    write_manifest(&dir.join("manifest.json"), "train", &config, &["summary.json", "folds.csv", "model_fold0.json"])?;
    if !run.summary.diverged_folds.is_empty() {
        return Err(CliError::Runtime(format!(
            "{name}: folds {:?} diverged (artifacts written to {})",
            run.summary.diverged_folds,
            dir.display()
        )));
    }
    Ok(TrainArtifacts {
        dir,
        summary: run.summary,
    })
}

pub fn load_model(path: &Path) -> CliResult<CvkanModel> {
    CvkanModel::load(path).map_err(|e| CliError::usage(path.display(), e))
}

/// Metrics of a saved model on the config's full dataset.
pub fn cmd_eval(model_path: &Path, config_path: &Path, overrides: &Overrides) -> CliResult<Metrics> {
    let config = load_config(config_path, overrides)?;
    let model = load_model(model_path)?;
    let dataset = config
        .load_dataset(config_base(config_path))
        .map_err(|e| training_error("dataset", e))?;
    ModelIo::for_spec(model.spec())
        .check(model.spec(), &dataset)
        .map_err(|e| CliError::usage(model_path.display(), e))?;
    evaluate(&model, &dataset).map_err(|e| CliError::runtime("evaluation", e))
}

pub fn cmd_params(config_path: &Path) -> CliResult<usize> {
    Ok(load_config(config_path, &Overrides::default())?.param_count())
}

#[derive(Debug, Clone)]
pub struct ExportOptions {
    pub resolution: usize,
    /// Relevance is computed over at most this many samples.
    pub max_samples: Option<usize>,
}

/// Relevance over the config's dataset, edge surfaces, and the viewer document.
pub fn cmd_export_viz(
    model_path: &Path,
    config_path: &Path,
    options: &ExportOptions,
    out: &Path,
) -> CliResult<VizDocument> {
    let config = load_config(config_path, &Overrides::default())?;
    let model = load_model(model_path)?;
    let mut dataset = config
        .load_dataset(config_base(config_path))
        .map_err(|e| training_error("dataset", e))?;
    if let Some(n) = options.max_samples {
        dataset = dataset.sample(n, config.seed);
    }
    let io = ModelIo::for_spec(model.spec());
    io.check(model.spec(), &dataset)
        .map_err(|e| CliError::usage(model_path.display(), e))?;
    let x = io.inputs(&dataset).map_err(|e| CliError::runtime("inputs", e))?;
    let report = relevance(&model, &x, &dataset.id).map_err(|e| CliError::runtime("relevance", e))?;
    if let Some(parent) = config_base(out) {
        create_dir(parent)?;
    }
    let doc = export_viz(&model, &report, options.resolution, &dataset.feature_names(), out)
        .map_err(|e| CliError::runtime(out.display(), e))?;
    let name = out.file_name().unwrap_or_default().to_string_lossy();
    write_manifest(&out.with_extension("manifest.json"), "export-viz", &config, &[&name])?;
    Ok(doc)
}
