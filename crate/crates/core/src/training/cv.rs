//! K-fold cross-validation: partitioning, per-fold training, aggregation.

use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamConfig, AdamState};
use super::config::ExperimentConfig;
use super::loss::{ce_with_grad, loss_mae, loss_mse, metric_accuracy, mse_with_grad};
use crate::datasets::{split_features, Dataset, Targets};
use crate::error::{CvkanError, Result};
use crate::layers::{init_model, CvkanModel, ModelKind, ModelSpec};
use crate::numerics::{ComplexBatch, ComplexScalar};

/// Independent RNG stream `index` of purpose `stream`, derived from a master seed.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    // splitmix64 finalizer over a mixed key
    let mut z = master
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xBF58_476D_1CE4_E5B9))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const STREAM_DATA: u64 = 1;
const STREAM_FOLDS: u64 = 2;
const STREAM_INIT: u64 = 3;
const STREAM_BATCHES: u64 = 4;

pub fn data_seed(master: u64) -> u64 {
    derive_seed(master, STREAM_DATA, 0)
}

/// Seeded permutation cut into `k` contiguous folds; the first `n mod k`
/// folds get one extra sample.
pub fn fold_partition(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(CvkanError::Config(format!("cannot split {n} samples into {k} folds")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, STREAM_FOLDS, 0)));
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = n / k + usize::from(f < n % k);
        folds.push(order[start..start + size].to_vec());
        start += size;
    }
    Ok(folds)
}

/// Test metrics of one model on one dataset; regression and classification
/// fill disjoint fields.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub mse: Option<f64>,
    pub mae: Option<f64>,
    pub ce: Option<f64>,
    pub acc: Option<f64>,
}

impl Metrics {
    pub fn named(&self) -> Vec<(&'static str, f64)> {
        [("mse", self.mse), ("mae", self.mae), ("ce", self.ce), ("acc", self.acc)]
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k, v)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    /// Test metrics before the first update.
    pub initial: Metrics,
    /// Test metrics after training; absent when the fold diverged.
    pub metrics: Option<Metrics>,
    /// Mean training loss of each completed epoch.
    pub train_loss: Vec<f64>,
    pub diverged: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation (n − 1); 0 for a single value.
    pub std: f64,
    pub n: usize,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Option<Self> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Some(Self { mean, std, n })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub dataset: String,
    pub model: String,
    pub size: String,
    pub params: usize,
    pub seed: u64,
    pub epochs: usize,
    pub samples: usize,
    pub folds: Vec<FoldResult>,
    /// Aggregates over the folds that did not diverge.
    pub summary: BTreeMap<String, MeanStd>,
    pub diverged_folds: Vec<usize>,
}

impl RunSummary {
    pub fn metric(&self, name: &str) -> Option<MeanStd> {
        self.summary.get(name).copied()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_fold_csv(out, std::slice::from_ref(self))
    }
}

pub const FOLD_CSV_COLUMNS: [&str; 10] = ["dataset", "model", "size", "fold", "mse", "mae", "ce", "acc", "params", "seed"];

/// One row per fold; metrics of diverged folds are left empty.
pub fn write_fold_csv<W: Write>(out: W, runs: &[RunSummary]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FOLD_CSV_COLUMNS)?;
    let cell = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for run in runs {
        for f in &run.folds {
            let m = f.metrics.unwrap_or_default();
            w.write_record([
                run.dataset.clone(),
                run.model.clone(),
                run.size.clone(),
                f.fold.to_string(),
                cell(m.mse),
                cell(m.mae),
                cell(m.ce),
                cell(m.acc),
                run.params.to_string(),
                run.seed.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Adapts dataset features and targets to a model's input and output layout.
/// Real-edge models see split-real features and emit split-real regression
/// outputs, which are recombined into complex predictions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelIo {
    split: bool,
}

impl ModelIo {
    pub fn for_spec(spec: &ModelSpec) -> Self {
        Self {
            split: spec.kind == ModelKind::Fastkan,
        }
    }

    pub fn inputs(&self, d: &Dataset) -> Result<ComplexBatch> {
        if self.split {
            split_features(&d.features, &d.feature_meta)
        } else {
            Ok(d.features.clone())
        }
    }

    pub fn check(&self, spec: &ModelSpec, d: &Dataset) -> Result<()> {
        let inputs = self.inputs(&d.subset(&[0]))?.cols();
        let outputs = match (&d.targets, self.split) {
            (Targets::Regression(t), true) => 2 * t.cols(),
            (t, _) => t.width(),
        };
        let (first, last) = (spec.widths[0], *spec.widths.last().unwrap());
        if first != inputs || last != outputs {
            return Err(CvkanError::Config(format!(
                "model maps {first} -> {last} but dataset `{}` needs {inputs} -> {outputs}",
                d.id
            )));
        }
        Ok(())
    }

    /// Model outputs as predictions in target layout.
    pub fn predictions(&self, out: &ComplexBatch, classification: bool) -> Result<ComplexBatch> {
        if !self.split || classification {
            return Ok(out.clone());
        }
        let data = out
            .data()
            .chunks(2)
            .map(|p| ComplexScalar::new(p[0].re, p[1].re))
            .collect();
        ComplexBatch::new(out.rows(), out.cols() / 2, data)
    }

    /// Gradient with respect to predictions mapped back onto model outputs.
    pub fn output_grad(&self, grad: Vec<ComplexScalar>, classification: bool) -> Vec<ComplexScalar> {
        if !self.split || classification {
            return grad;
        }
        grad.iter()
            .flat_map(|g| [ComplexScalar::new(g.re, 0.0), ComplexScalar::new(g.im, 0.0)])
            .collect()
    }
}

/// Eval-mode test metrics.
pub fn evaluate(model: &CvkanModel, d: &Dataset) -> Result<Metrics> {
    let io = ModelIo::for_spec(model.spec());
    let out = model.predict(&io.inputs(d)?)?;
    let pred = io.predictions(&out, d.is_classification())?;
    Ok(match &d.targets {
        Targets::Regression(t) => Metrics {
            mse: Some(loss_mse(&pred, t)?),
            mae: Some(loss_mae(&pred, t)?),
            ..Metrics::default()
        },
        Targets::Classification { labels, .. } => Metrics {
            ce: Some(ce_with_grad(&pred, labels)?.0),
            acc: Some(metric_accuracy(&pred, labels)?),
            ..Metrics::default()
        },
    })
}

/// Minibatches of a shuffled index list; a trailing batch of one sample is
/// merged into its predecessor so batch statistics stay defined.
pub fn minibatches(order: &[usize], batch_size: usize) -> Vec<&[usize]> {
    let mut batches: Vec<&[usize]> = order.chunks(batch_size.max(1)).collect();
    if batches.len() > 1 && batches.last().is_some_and(|b| b.len() == 1) {
        batches.pop();
        let start = order.len() - 1 - batches.last().unwrap().len();
        *batches.last_mut().unwrap() = &order[start..];
    }
    batches
}

/// Takes one optimizer step on `x`; running statistics follow the batch.
pub fn train_step(
    model: &mut CvkanModel,
    state: &mut AdamState,
    hyper: &AdamConfig,
    x: &ComplexBatch,
    targets: &Targets,
) -> Result<f64> {
    let io = ModelIo::for_spec(model.spec());
    let (out, cache) = model.forward_train(x)?;
    let classification = matches!(targets, Targets::Classification { .. });
    let pred = io.predictions(&out, classification)?;
    let (loss, grad) = match targets {
        Targets::Regression(t) => mse_with_grad(&pred, t)?,
        Targets::Classification { labels, .. } => ce_with_grad(&pred, labels)?,
    };
    if !loss.is_finite() {
        return Err(CvkanError::Divergence(format!("training loss is {loss}")));
    }
    let grads = model.backward(&cache, &io.output_grad(grad, classification));
    adam_step(model.params_mut(), &grads, state, hyper)?;
    model.update_running_stats(&cache);
    Ok(loss)
}

/// Trains a fresh model on `train` and scores it on `test`.
pub fn train_fold(
    config: &ExperimentConfig,
    fold: usize,
    train: &Dataset,
    test: &Dataset,
) -> Result<(FoldResult, CvkanModel)> {
    let spec = &config.model;
    let io = ModelIo::for_spec(spec);
    io.check(spec, train)?;
    let mut model = init_model(spec, derive_seed(config.seed, STREAM_INIT, fold as u64))?;
    let initial = evaluate(&model, test)?;
    let x_train = io.inputs(train)?;
    let mut state = AdamState::new(model.param_count());
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, STREAM_BATCHES, fold as u64));
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut train_loss = Vec::with_capacity(config.epochs);
    let mut diverged = None;
    'epochs: for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in minibatches(&order, config.optimizer.batch_size) {
            let x = x_train.select_rows(batch);
            let t = train.targets.select(batch);
            match train_step(&mut model, &mut state, &config.optimizer, &x, &t) {
                Ok(loss) => total += loss * batch.len() as f64,
                Err(CvkanError::Divergence(msg)) => {
                    diverged = Some(format!("epoch {epoch}: {msg}"));
                    break 'epochs;
                }
                Err(e) => return Err(e),
            }
        }
        let mean = total / train.len() as f64;
        train_loss.push(mean);
        if epoch % 100 == 0 || epoch + 1 == config.epochs {
            log::info!("{} fold {fold} epoch {epoch}: train loss {mean:.6}", config.display_name());
        }
    }
    let metrics = match diverged {
        Some(ref msg) => {
            log::warn!("{} fold {fold} diverged at {msg}", config.display_name());
            None
        }
        None => match evaluate(&model, test) {
            Ok(m) if m.named().iter().all(|(_, v)| v.is_finite()) => Some(m),
            Ok(_) => {
                diverged = Some("non-finite test metric".into());
                None
            }
            Err(CvkanError::NonFinite(msg)) => {
                diverged = Some(msg);
                None
            }
            Err(e) => return Err(e),
        },
    };
    let result = FoldResult {
        fold,
        train_size: train.len(),
        test_size: test.len(),
        initial,
        metrics,
        train_loss,
        diverged,
    };
    Ok((result, model))
}

/// Cross-validation result plus the trained model of every fold.
#[derive(Debug, Clone)]
pub struct CvRun {
    pub summary: RunSummary,
    pub models: Vec<CvkanModel>,
}

pub fn run_cv(config: &ExperimentConfig) -> Result<RunSummary> {
    Ok(run_cv_full(config, None)?.summary)
}

/// Resolves the dataset (relative paths against `base`) and cross-validates.
pub fn run_cv_full(config: &ExperimentConfig, base: Option<&std::path::Path>) -> Result<CvRun> {
    config.validate()?;
    let dataset = config.load_dataset(base)?;
    run_cv_on(config, &dataset)
}

pub fn run_cv_on(config: &ExperimentConfig, dataset: &Dataset) -> Result<CvRun> {
    config.validate()?;
    ModelIo::for_spec(&config.model).check(&config.model, dataset)?;
    let folds = fold_partition(dataset.len(), config.folds, config.seed)?;
    let mut results = Vec::with_capacity(folds.len());
    let mut models = Vec::with_capacity(folds.len());
    for (k, test_idx) in folds.iter().enumerate() {
        let train_idx: Vec<usize> = folds
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        let (result, model) = train_fold(config, k, &dataset.subset(&train_idx), &dataset.subset(test_idx))?;
        results.push(result);
        models.push(model);
    }
    Ok(CvRun {
        summary: summarize(config, dataset, results),
        models,
    })
}

pub fn summarize(config: &ExperimentConfig, dataset: &Dataset, folds: Vec<FoldResult>) -> RunSummary {
    let mut columns: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for m in folds.iter().filter_map(|f| f.metrics) {
        for (name, v) in m.named() {
            columns.entry(name.to_string()).or_default().push(v);
        }
    }
    let summary = columns
        .into_iter()
        .filter_map(|(k, v)| MeanStd::of(&v).map(|s| (k, s)))
        .collect();
    RunSummary {
        name: config.display_name(),
        dataset: dataset.id.clone(),
        model: config.model_label().to_string(),
        size: config.size_label(),
        params: config.param_count(),
        seed: config.seed,
        epochs: config.epochs,
        samples: dataset.len(),
        diverged_folds: folds.iter().filter(|f| f.diverged.is_some()).map(|f| f.fold).collect(),
        folds,
        summary,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_sizes() {
        let folds = fold_partition(5000, 5, 1).unwrap();
        assert!(folds.iter().all(|f| f.len() == 1000));
        let folds = fold_partition(12, 5, 1).unwrap();
        assert_eq!(folds.iter().map(Vec::len).collect::<Vec<_>>(), vec![3, 3, 2, 2, 2]);
        assert!(fold_partition(3, 5, 1).is_err());
        assert!(fold_partition(10, 1, 1).is_err());
    }

    #[test]
    fn trailing_singleton_merged() {
        let order: Vec<usize> = (0..9).collect();
        let b = minibatches(&order, 4);
        assert_eq!(b.iter().map(|b| b.len()).collect::<Vec<_>>(), vec![4, 5]);
        let b = minibatches(&order, 3);
        assert_eq!(b.len(), 3);
        assert_eq!(minibatches(&order[..1], 4).len(), 1);
    }

    #[test]
    fn mean_std_sample_convention() {
        let s = MeanStd::of(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.mean, 2.5);
        assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(MeanStd::of(&[2.0]).unwrap().std, 0.0);
        assert!(MeanStd::of(&[]).is_none());
    }

    #[test]
    fn seeds_differ_per_stream() {
        let a = derive_seed(0, STREAM_INIT, 0);
        assert_ne!(a, derive_seed(0, STREAM_INIT, 1));
        assert_ne!(a, derive_seed(0, STREAM_BATCHES, 0));
        assert_ne!(a, derive_seed(1, STREAM_INIT, 0));
    }
}
