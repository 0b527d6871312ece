//! Network evaluation over any [`Real`] scalar.
//!
//! This is a direct transcription of the model equations: the RBF double sum
//! is evaluated term by term and normalization uses train-mode batch
//! statistics. Run on [`crate::numerics::Var`] it records a full
//! differentiable trace of the loss, which [`crate::numerics::grad`] turns
//! into exact parameter gradients.

use super::csilu::CsiluVariant;
use super::spec::{EdgeKind, ModelSpec};
use crate::error::{CvkanError, Result};
use crate::norm::NormVariant;
use crate::numerics::{ComplexBatch, Real};

/// A complex value as (real, imaginary) channels.
pub type Pair<T> = (T, T);

fn silu<T: Real>(x: T) -> T {
    x.silu()
}

/// Value of edge block `w` at input `(a, b)`.
pub fn edge_generic<T: Real>(
    spec: &ModelSpec,
    kind: EdgeKind,
    w: &[T],
    x: Pair<T>,
) -> Pair<T> {
    let axis = spec.grid.axis();
    let g = axis.len();
    let bw2 = spec.grid.bandwidth * spec.grid.bandwidth;
    let (a, b) = x;
    let zero = a.lift(0.0);
    match kind {
        EdgeKind::Real => {
            let mut y = zero;
            for (i, gi) in axis.iter().enumerate() {
                let t = a - *gi;
                y = y + w[i] * (-(t * t) / bw2).exp();
            }
            (y + w[g] * silu(a), zero)
        }
        EdgeKind::Complex | EdgeKind::ComplexToReal => {
            let complex = kind == EdgeKind::Complex;
            let (mut yr, mut yi) = (zero, zero);
            for (u, gu) in axis.iter().enumerate() {
                for (v, gv) in axis.iter().enumerate() {
                    let dr = a - *gu;
                    let di = b - *gv;
                    let phi = (-(dr * dr + di * di) / bw2).exp();
                    if complex {
                        yr = yr + w[2 * (u * g + v)] * phi;
                        yi = yi + w[2 * (u * g + v) + 1] * phi;
                    } else {
                        yr = yr + w[u * g + v] * phi;
                    }
                }
            }
            let (sr, si) = (silu(a), silu(b));
            let r = &w[if complex { 2 * g * g } else { g * g }..];
            let (rr, ri) = match spec.csilu {
                CsiluVariant::Complex => (r[0] * sr - r[1] * si, r[0] * si + r[1] * sr),
                CsiluVariant::Real => (r[0] * sr, r[1] * si),
            };
            if complex {
                (yr + rr + r[2], yi + ri + r[3])
            } else {
                (yr + rr + r[2], zero)
            }
        }
    }
}

/// Train-mode normalization of one feature column.
pub fn norm_generic<T: Real>(
    variant: NormVariant,
    p: &[T],
    col: &[Pair<T>],
    eps: f64,
) -> Vec<Pair<T>> {
    if variant == NormVariant::None {
        return col.to_vec();
    }
    let n = col.len() as f64;
    let zero = col[0].0.lift(0.0);
    let (mut mr, mut mi) = (zero, zero);
    for &(r, i) in col {
        mr = mr + r;
        mi = mi + i;
    }
    let (mr, mi) = (mr / n, mi / n);
    let d: Vec<Pair<T>> = col.iter().map(|&(r, i)| (r - mr, i - mi)).collect();
    let (mut c11, mut c12, mut c22) = (zero, zero, zero);
    for &(r, i) in &d {
        c11 = c11 + r * r;
        c12 = c12 + r * i;
        c22 = c22 + i * i;
    }
    let (c11, c12, c22) = (c11 / n, c12 / n, c22 / n);
    match variant {
        NormVariant::BnC => {
            let (c11, c22) = (c11 + eps, c22 + eps);
            let s = (c11 * c22 - c12 * c12).sqrt();
            let t = (c11 + c22 + s * 2.0).sqrt();
            let den = s * t;
            let (w11, w12, w22) = ((c22 + s) / den, -c12 / den, (c11 + s) / den);
            d.iter()
                .map(|&(r, i)| {
                    let (zr, zi) = (w11 * r + w12 * i, w12 * r + w22 * i);
                    (p[0] * zr + p[1] * zi + p[3], p[1] * zr + p[2] * zi + p[4])
                })
                .collect()
        }
        NormVariant::BnV => {
            let s = (c11 + c22 + eps).sqrt();
            d.iter()
                .map(|&(r, i)| (p[0] * r / s + p[1], p[0] * i / s + p[2]))
                .collect()
        }
        NormVariant::BnR2 => {
            let (sr, si) = ((c11 + eps).sqrt(), (c22 + eps).sqrt());
            d.iter()
                .map(|&(r, i)| (p[0] * r / sr + p[1], p[2] * i / si + p[3]))
                .collect()
        }
        NormVariant::BnReal => {
            let sr = (c11 + eps).sqrt();
            d.iter().map(|&(r, _)| (p[0] * r / sr + p[1], zero)).collect()
        }
        NormVariant::None => unreachable!(),
    }
}

/// Train-mode network output, `rows × n_out` in row-major order.
pub fn model_forward_generic<T: Real>(
    spec: &ModelSpec,
    params: &[T],
    x: &ComplexBatch,
    eps: f64,
) -> Result<Vec<Pair<T>>> {
    spec.validate()?;
    let layout = spec.layout();
    if params.len() != layout.total || x.cols() != spec.widths[0] {
        return Err(CvkanError::Shape(
            "parameters or inputs do not fit the architecture".into(),
        ));
    }
    let zero = params[0].lift(0.0);
    let rows = x.rows();
    let mut act: Vec<Pair<T>> = x
        .data()
        .iter()
        .map(|z| (zero.lift(z.re), zero.lift(z.im)))
        .collect();
    for ll in &layout.layers {
        let mut next = vec![(zero, zero); rows * ll.n_out];
        for s in 0..rows {
            for q in 0..ll.n_out {
                let (mut yr, mut yi) = (zero, zero);
                for p in 0..ll.n_in {
                    let at = ll.edge(q, p);
                    let (er, ei) = edge_generic(
                        spec,
                        ll.kind,
                        &params[at..at + ll.edge_stride],
                        act[s * ll.n_in + p],
                    );
                    yr = yr + er;
                    yi = yi + ei;
                }
                next[s * ll.n_out + q] = (yr, yi);
            }
        }
        if let Some((start, stride)) = ll.norm {
            for q in 0..ll.n_out {
                let col: Vec<Pair<T>> = (0..rows).map(|s| next[s * ll.n_out + q]).collect();
                let p = &params[start + q * stride..start + (q + 1) * stride];
                for (s, v) in norm_generic(spec.norm, p, &col, eps).into_iter().enumerate() {
                    next[s * ll.n_out + q] = v;
                }
            }
        }
        act = next;
    }
    Ok(act)
}

/// Mean squared modulus of the residuals.
pub fn mse_generic<T: Real>(pred: &[Pair<T>], target: &ComplexBatch) -> T {
    let zero = pred[0].0.lift(0.0);
    let mut total = zero;
    for (&(r, i), t) in pred.iter().zip(target.data()) {
        let (dr, di) = (r - t.re, i - t.im);
        total = total + dr * dr + di * di;
    }
    total / pred.len() as f64
}

/// Mean softmax cross-entropy over the real channels of `logits`.
pub fn cross_entropy_generic<T: Real>(logits: &[Pair<T>], classes: usize, labels: &[usize]) -> T {
    let zero = logits[0].0.lift(0.0);
    let mut total = zero;
    for (row, &label) in logits.chunks_exact(classes).zip(labels) {
        let max = row
            .iter()
            .map(|(r, _)| r.value())
            .fold(f64::NEG_INFINITY, f64::max);
        let mut sum = zero;
        for (r, _) in row {
            sum = sum + (*r - max).exp();
        }
        total = total + sum.ln() + max - row[label].0;
    }
    total / labels.len() as f64
}
