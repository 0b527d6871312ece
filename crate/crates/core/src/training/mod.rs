//! Losses, optimizer, experiment configuration and cross-validation.

mod adam;
mod config;
mod cv;
mod loss;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use config::{DatasetConfig, ExperimentConfig};
pub use cv::{
    data_seed, derive_seed, evaluate, fold_partition, minibatches, run_cv, run_cv_full, run_cv_on, summarize,
    train_fold, train_step, write_fold_csv, CvRun, FoldResult, MeanStd, Metrics, ModelIo, RunSummary,
    FOLD_CSV_COLUMNS,
};
pub use loss::{
    argmax, ce_with_grad, loss_ce, loss_mae, loss_mse, mae_with_grad, metric_accuracy, mse_with_grad,
};
