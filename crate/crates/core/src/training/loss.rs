//! Regression and classification losses on complex predictions.
//!
//! Regression residuals are measured by their complex modulus, so the MSE is
//! also the sum of the squared channel errors. Classification reads logits
//! from the real channel.

use crate::error::{CvkanError, Result};
use crate::numerics::{complex_abs2, ComplexBatch, ComplexScalar};

fn check_shapes(pred: &ComplexBatch, target: &ComplexBatch) -> Result<()> {
    if pred.rows() != target.rows() || pred.cols() != target.cols() {
        return Err(CvkanError::Shape(format!(
            "prediction is {}x{}, target is {}x{}",
            pred.rows(),
            pred.cols(),
            target.rows(),
            target.cols()
        )));
    }
    Ok(())
}

/// Mean of `|pred - target|²` over samples and outputs.
pub fn loss_mse(pred: &ComplexBatch, target: &ComplexBatch) -> Result<f64> {
    check_shapes(pred, target)?;
    let total: f64 = pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(p, t)| complex_abs2(p - t))
        .sum();
    Ok(total / pred.data().len() as f64)
}

/// Mean of `|pred - target|`.
pub fn loss_mae(pred: &ComplexBatch, target: &ComplexBatch) -> Result<f64> {
    check_shapes(pred, target)?;
    let total: f64 = pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(p, t)| (p - t).norm())
        .sum();
    Ok(total / pred.data().len() as f64)
}

/// MSE and its gradient with respect to each prediction.
pub fn mse_with_grad(pred: &ComplexBatch, target: &ComplexBatch) -> Result<(f64, Vec<ComplexScalar>)> {
    let loss = loss_mse(pred, target)?;
    let scale = 2.0 / pred.data().len() as f64;
    let grad = pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(p, t)| (p - t) * scale)
        .collect();
    Ok((loss, grad))
}

/// MAE and its (sub)gradient; zero at exact matches.
pub fn mae_with_grad(pred: &ComplexBatch, target: &ComplexBatch) -> Result<(f64, Vec<ComplexScalar>)> {
    let loss = loss_mae(pred, target)?;
    let n = pred.data().len() as f64;
    let grad = pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(p, t)| {
            let r = p - t;
            let m = r.norm();
            if m == 0.0 {
                ComplexScalar::new(0.0, 0.0)
            } else {
                r / (m * n)
            }
        })
        .collect();
    Ok((loss, grad))
}

fn check_labels(logits: &ComplexBatch, labels: &[usize]) -> Result<()> {
    if logits.rows() != labels.len() {
        return Err(CvkanError::Shape(format!(
            "{} logit rows for {} labels",
            logits.rows(),
            labels.len()
        )));
    }
    if let Some(bad) = labels.iter().find(|&&l| l >= logits.cols()) {
        return Err(CvkanError::Dataset(format!(
            "label {bad} out of range for {} classes",
            logits.cols()
        )));
    }
    Ok(())
}

fn log_softmax(row: &[ComplexScalar]) -> Vec<f64> {
    let max = row.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let lse = row.iter().map(|z| (z.re - max).exp()).sum::<f64>().ln() + max;
    row.iter().map(|z| z.re - lse).collect()
}

/// Mean softmax cross-entropy.
pub fn loss_ce(logits: &ComplexBatch, labels: &[usize]) -> Result<f64> {
    Ok(ce_with_grad(logits, labels)?.0)
}

/// Cross-entropy and its gradient with respect to the logits.
pub fn ce_with_grad(logits: &ComplexBatch, labels: &[usize]) -> Result<(f64, Vec<ComplexScalar>)> {
    check_labels(logits, labels)?;
    let n = labels.len() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(logits.data().len());
    for (s, &label) in labels.iter().enumerate() {
        let ls = log_softmax(logits.row(s));
        loss -= ls[label];
        for (c, l) in ls.iter().enumerate() {
            let onehot = if c == label { 1.0 } else { 0.0 };
            grad.push(ComplexScalar::new((l.exp() - onehot) / n, 0.0));
        }
    }
    Ok((loss / n, grad))
}

/// Fraction of rows whose largest real logit sits at the label (first maximum wins ties).
pub fn metric_accuracy(logits: &ComplexBatch, labels: &[usize]) -> Result<f64> {
    check_labels(logits, labels)?;
    let hits = labels
        .iter()
        .enumerate()
        .filter(|&(s, &label)| argmax(logits.row(s)) == label)
        .count();
    Ok(hits as f64 / labels.len() as f64)
}

pub fn argmax(row: &[ComplexScalar]) -> usize {
    let mut best = 0;
    for (i, z) in row.iter().enumerate() {
        if z.re > row[best].re {
            best = i;
        }
    }
    best
}
