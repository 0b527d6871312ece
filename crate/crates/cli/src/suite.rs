//! Experiment sweeps mirroring the published result tables.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use cvkan::datasets::SymbolicFn;
use cvkan::explain::{feature_scores, relevance, PruneMode, PruningFragment};
use cvkan::layers::{CsiluVariant, ModelKind};
use cvkan::norm::NormVariant;
use cvkan::training::{run_cv_on, write_fold_csv, CvRun, DatasetConfig, ExperimentConfig, ModelIo, RunSummary};
use cvkan::{ModelSpec, OutputDomain};
use serde::Serialize;

use crate::{config_hash, create_dir, write_json, CliError, CliResult, VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteId {
    Symbolic,
    Physical,
    Knots,
    Ablation,
}

#[derive(Debug, Clone, Default)]
pub struct SuiteOptions {
    pub seed: u64,
    pub epochs: Option<usize>,
    pub folds: Option<usize>,
    pub batch_size: Option<usize>,
    /// Samples per synthetic dataset, or the knot subset size.
    pub samples: Option<usize>,
    /// Local knot table; the synthetic surrogate is used without it.
    pub knots_csv: Option<PathBuf>,
}

/// One row of a suite table.
#[derive(Debug, Clone)]
pub struct Cell {
    pub group: String,
    pub label: String,
    pub config: ExperimentConfig,
}

fn cvkan(widths: &[usize], norm: NormVariant) -> ModelSpec {
    ModelSpec::cvkan(widths, norm)
}

fn cell(options: &SuiteOptions, group: &str, label: &str, dataset: DatasetConfig, model: ModelSpec) -> Cell {
    let mut config = ExperimentConfig::new(dataset, model);
    config.seed = options.seed;
    if let Some(e) = options.epochs {
        config.epochs = e;
    }
    if let Some(f) = options.folds {
        config.folds = f;
    }
    if let Some(b) = options.batch_size {
        config.optimizer.batch_size = b;
    }
    config.name = Some(format!("{group}_{label}").replace([' ', '/'], "_"));
    Cell {
        group: group.to_string(),
        label: label.to_string(),
        config,
    }
}

fn size_of(widths: &[usize]) -> String {
    widths.iter().map(|w| w.to_string()).collect::<Vec<_>>().join("x")
}

fn knot_dataset(options: &SuiteOptions) -> DatasetConfig {
    match &options.knots_csv {
        Some(path) => DatasetConfig::Knots {
            path: path.clone(),
            max_samples: options.samples,
        },
        None => DatasetConfig::KnotsSurrogate {
            samples: options.samples.unwrap_or(20_000),
        },
    }
}

fn knot_model(widths: &[usize], norm: NormVariant, csilu: CsiluVariant) -> ModelSpec {
    cvkan(widths, norm)
        .with_output_domain(OutputDomain::Real)
        .with_csilu(csilu)
}

/// The cells of a suite before any data-dependent additions.
pub fn suite_cells(id: SuiteId, options: &SuiteOptions) -> Vec<Cell> {
    let mut cells = Vec::new();
    match id {
        SuiteId::Symbolic => {
            let samples = options.samples.unwrap_or(5000);
            let rows: [(SymbolicFn, [&[usize]; 2]); 4] = [
                (SymbolicFn::F1, [&[1, 1], &[1, 2, 1]]),
                (SymbolicFn::F2, [&[1, 1], &[1, 2, 1]]),
                (SymbolicFn::F3, [&[2, 2, 1], &[2, 4, 2, 1]]),
                (SymbolicFn::F4, [&[2, 1, 1], &[2, 4, 2, 1]]),
            ];
            for (f, sizes) in rows {
                for widths in sizes {
                    let data = DatasetConfig::Symbolic { function: f, samples };
                    cells.push(cell(options, f.formula(), &size_of(widths), data, cvkan(widths, NormVariant::BnC)));
                }
            }
        }
        SuiteId::Physical => {
            let samples = options.samples.unwrap_or(100_000);
            let holography: [&[usize]; 6] = [&[3, 1], &[3, 1, 1], &[3, 3, 1], &[3, 10, 1], &[3, 10, 3, 1], &[3, 10, 5, 3, 1]];
            let circuit: [&[usize]; 6] = [&[6, 1], &[6, 1, 1], &[6, 3, 1], &[6, 10, 1], &[6, 10, 3, 1], &[6, 10, 5, 3, 1]];
            for widths in holography {
                let data = DatasetConfig::Holography { samples };
                cells.push(cell(options, "holography", &size_of(widths), data, cvkan(widths, NormVariant::BnC)));
            }
            for widths in circuit {
                let data = DatasetConfig::Circuit { samples };
                cells.push(cell(options, "circuit", &size_of(widths), data, cvkan(widths, NormVariant::BnC)));
            }
        }
        SuiteId::Knots => {
            for widths in [&[15usize, 1, 14][..], &[15, 2, 14]] {
                let model = knot_model(widths, NormVariant::BnV, CsiluVariant::Complex);
                cells.push(cell(options, "knots", &size_of(widths), knot_dataset(options), model));
            }
        }
        SuiteId::Ablation => {
            for norm in [NormVariant::BnC, NormVariant::BnV, NormVariant::BnR2, NormVariant::None] {
                for csilu in [CsiluVariant::Complex, CsiluVariant::Real] {
                    let model = knot_model(&[15, 1, 14], norm, csilu);
                    let label = format!("{} {}", norm.name(), csilu.short_name());
                    cells.push(cell(options, "ablation", &label, knot_dataset(options), model));
                }
            }
        }
    }
    cells
}

#[derive(Debug, Clone, Serialize)]
pub struct CellOutcome {
    pub group: String,
    pub label: String,
    pub name: String,
    pub params: usize,
    pub config_sha256: String,
    pub summary: Option<RunSummary>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: SuiteId,
    pub version: &'static str,
    pub cells: Vec<CellOutcome>,
}

impl SuiteReport {
    pub fn failures(&self) -> usize {
        self.cells
            .iter()
            .filter(|c| c.error.is_some() || c.summary.as_ref().is_some_and(|s| !s.diverged_folds.is_empty()))
            .count()
    }
}

fn run_cell(cell: &Cell) -> (CellOutcome, Option<CvRun>) {
    let config = &cell.config;
    let result = config
        .load_dataset(None)
        .and_then(|d| run_cv_on(config, &d));
    let mut outcome = CellOutcome {
        group: cell.group.clone(),
        label: cell.label.clone(),
        name: config.display_name(),
        params: config.param_count(),
        config_sha256: config_hash(config),
        summary: None,
        error: None,
    };
    match result {
        Ok(run) => {
            outcome.summary = Some(run.summary.clone());
            (outcome, Some(run))
        }
        Err(e) => {
            log::error!("{}: {e}", outcome.name);
            outcome.error = Some(e.to_string());
            (outcome, None)
        }
    }
}

/// Feature scores from the fold-0 model of a finished knot run.
fn knot_relevance(cell: &Cell, run: &CvRun) -> cvkan::Result<(Vec<String>, Vec<f64>)> {
    let dataset = cell.config.load_dataset(None)?;
    let model = &run.models[0];
    let io = ModelIo::for_spec(model.spec());
    let x = io.inputs(&dataset)?;
    let report = relevance(model, &x, &dataset.id)?;
    let split = model.spec().kind == ModelKind::Fastkan;
    Ok((dataset.feature_names(), feature_scores(&report, &dataset.feature_meta, split)?))
}

fn pruning_cells(base: &Cell, names: &[String], scores: &[f64]) -> cvkan::Result<Vec<Cell>> {
    let mut cells = Vec::new();
    for (mode, k, label) in [
        (PruneMode::KeepTopK, 7, "only 7 most important"),
        (PruneMode::KeepTopK, 3, "only 3 most important"),
        (PruneMode::DropTopK, 7, "all but 7 most important"),
        (PruneMode::DropTopK, 3, "all but 3 most important"),
    ] {
        let fragment = PruningFragment::from_scores(names, scores, mode, k)?;
        let mut config = base.config.clone();
        config.model.widths[0] = fragment.keep.len();
        config.name = Some(format!("knots_pruned_{}", label.replace(' ', "_")));
        config.prune = Some(fragment);
        cells.push(Cell {
            group: "knots pruning".into(),
            label: label.into(),
            config,
        });
    }
    Ok(cells)
}

pub fn run_suite(id: SuiteId, options: &SuiteOptions) -> SuiteReport {
    let cells = suite_cells(id, options);
    let mut outcomes = Vec::new();
    let mut first_run = None;
    for c in &cells {
        log::info!("suite {id:?}: {} ({} params)", c.config.display_name(), c.config.param_count());
        let (outcome, run) = run_cell(c);
        if first_run.is_none() {
            first_run = run;
        }
        outcomes.push(outcome);
    }
    if id == SuiteId::Knots {
        let pruned = match &first_run {
            Some(run) => knot_relevance(&cells[0], run).and_then(|(names, scores)| {
                log::info!("knot feature relevance: {names:?} {scores:?}");
                pruning_cells(&cells[0], &names, &scores)
            }),
            None => Err(cvkan::CvkanError::Config("base knot run failed; pruning study skipped".into())),
        };
        match pruned {
            Ok(pruned) => outcomes.extend(pruned.iter().map(|c| run_cell(c).0)),
            Err(e) => outcomes.push(CellOutcome {
                group: "knots pruning".into(),
                label: "all".into(),
                name: "knots_pruning".into(),
                params: 0,
                config_sha256: String::new(),
                summary: None,
                error: Some(e.to_string()),
            }),
        }
    }
    SuiteReport {
        suite: id,
        version: VERSION,
        cells: outcomes,
    }
}

fn mean_std(s: &RunSummary, metric: &str) -> String {
    match s.metric(metric) {
        Some(m) => format!("{:.3} ± {:.3}", m.mean, m.std),
        None => "-".into(),
    }
}

/// Markdown table in the layout of the corresponding published table.
pub fn render_table(report: &SuiteReport) -> String {
    let classification = matches!(report.suite, SuiteId::Knots | SuiteId::Ablation);
    let mut out = String::new();
    if classification {
        out.push_str("| Group | Model | # Params | Test Acc. | Test CE-Loss |\n|---|---|---|---|---|\n");
    } else {
        out.push_str("| Dataset | Size | # Params | Test MSE | Test MAE |\n|---|---|---|---|---|\n");
    }
    for c in &report.cells {
        let (a, b) = match (&c.summary, &c.error) {
            (Some(s), _) if classification => (mean_std(s, "acc"), mean_std(s, "ce")),
            (Some(s), _) => (mean_std(s, "mse"), mean_std(s, "mae")),
            (None, Some(e)) => (format!("failed: {e}"), "-".into()),
            (None, None) => ("-".into(), "-".into()),
        };
        let diverged = match &c.summary {
            Some(s) if !s.diverged_folds.is_empty() => format!(" (diverged folds {:?})", s.diverged_folds),
            _ => String::new(),
        };
        let _ = writeln!(out, "| {} | {} | {} | {a}{diverged} | {b} |", c.group, c.label, c.params);
    }
    out
}

/// Writes `table.md`, `folds.csv` and `suite.json` under `out_dir/suite_<id>/`.
pub fn write_suite(report: &SuiteReport, out_dir: &Path) -> CliResult<PathBuf> {
    let name = format!("suite_{}", format!("{:?}", report.suite).to_lowercase());
    let dir = out_dir.join(name);
    create_dir(&dir)?;
    fs::write(dir.join("table.md"), render_table(report)).map_err(|e| CliError::runtime("table.md", e))?;
    let runs: Vec<RunSummary> = report.cells.iter().filter_map(|c| c.summary.clone()).collect();
    let mut csv = Vec::new();
    write_fold_csv(&mut csv, &runs).map_err(|e| CliError::runtime("folds.csv", e))?;
    fs::write(dir.join("folds.csv"), csv).map_err(|e| CliError::runtime("folds.csv", e))?;
    write_json(&dir.join("suite.json"), report)?;
    Ok(dir)
}
