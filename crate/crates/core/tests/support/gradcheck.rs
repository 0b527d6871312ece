//! Finite-difference gradient checks shared by the gradient tests and the
//! acceptance target. Every check returns the worst relative error over
//! `POINTS` random draws.

#![allow(dead_code)]

use cvkan::layers::generic::{cross_entropy_generic, model_forward_generic, mse_generic};
use cvkan::layers::{CsiluVariant, ModelKind};
use cvkan::norm::{backward_feature, forward_train_feature, NormVariant, DEFAULT_EPS};
use cvkan::numerics::grad;
use cvkan::training::{ce_with_grad, mae_with_grad, mse_with_grad};
use cvkan::{init_model, ComplexBatch, ComplexScalar, ModelSpec, OutputDomain};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const STEP: f64 = 1e-5;
pub const TOLERANCE: f64 = 1e-4;
pub const POINTS: u64 = 10;

fn c(re: f64, im: f64) -> ComplexScalar {
    ComplexScalar::new(re, im)
}

pub fn central_difference(mut f: impl FnMut(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + STEP;
            let up = f(&probe);
            probe[i] = x[i] - STEP;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * STEP)
        })
        .collect()
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, zero when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b));
    if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    }
}

fn random_batch(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexBatch {
    let data = (0..rows * cols)
        .map(|_| c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
        .collect();
    ComplexBatch::new(rows, cols, data).unwrap()
}

enum Task {
    Regression(ComplexBatch),
    Classification(Vec<usize>),
}

/// Worst relative error of the (hand-derived, tape) parameter gradients of a
/// whole model under MSE, or cross-entropy when `classification`.
pub fn check_model(spec: &ModelSpec, classification: bool) -> (f64, f64) {
    let (n_in, n_out) = (spec.widths[0], *spec.widths.last().unwrap());
    let mut worst = (0.0f64, 0.0f64);
    for point in 0..POINTS {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + point);
        let mut model = init_model(spec, point).unwrap();
        for p in model.params_mut() {
            *p += rng.random_range(-0.3..0.3);
        }
        let rows = 7;
        let x = random_batch(&mut rng, rows, n_in);
        let task = if classification {
            Task::Classification((0..rows).map(|_| rng.random_range(0..n_out)).collect())
        } else {
            Task::Regression(random_batch(&mut rng, rows, n_out))
        };
        let (out, cache) = model.forward_train(&x).unwrap();
        let (_, g_out) = match &task {
            Task::Regression(t) => mse_with_grad(&out, t).unwrap(),
            Task::Classification(l) => ce_with_grad(&out, l).unwrap(),
        };
        let analytic = model.backward(&cache, &g_out);
        let fd = central_difference(
            |p| {
                let y = model_forward_generic(spec, p, &x, DEFAULT_EPS).unwrap();
                match &task {
                    Task::Regression(t) => mse_generic(&y, t),
                    Task::Classification(l) => cross_entropy_generic(&y, n_out, l),
                }
            },
            model.params(),
        );
        let tape = grad(
            |_, p| {
                let y = model_forward_generic(spec, p, &x, DEFAULT_EPS).unwrap();
                match &task {
                    Task::Regression(t) => mse_generic(&y, t),
                    Task::Classification(l) => cross_entropy_generic(&y, n_out, l),
                }
            },
            model.params(),
        )
        .unwrap();
        worst.0 = worst.0.max(relative_error(&analytic, &fd));
        worst.1 = worst.1.max(relative_error(&tape, &fd));
    }
    worst
}

/// Architectures covering every edge type and residual variant, each norm,
/// and the classification head.
pub fn model_cases() -> Vec<(String, ModelSpec, bool)> {
    let mut cases = Vec::new();
    for csilu in [CsiluVariant::Complex, CsiluVariant::Real] {
        let tag = csilu.short_name();
        cases.push((
            format!("complex edge, csilu_{tag}"),
            ModelSpec::cvkan(&[1, 1], NormVariant::None).with_csilu(csilu),
            false,
        ));
        cases.push((
            format!("real-output edge, csilu_{tag}"),
            ModelSpec::cvkan(&[2, 3], NormVariant::None)
                .with_output_domain(OutputDomain::Real)
                .with_csilu(csilu),
            false,
        ));
        for norm in [NormVariant::BnC, NormVariant::BnV, NormVariant::BnR2] {
            cases.push((
                format!("{} network, csilu_{tag}", norm.name()),
                ModelSpec::cvkan(&[2, 3, 1], norm).with_csilu(csilu),
                false,
            ));
        }
    }
    let mut real = ModelSpec::cvkan(&[2, 2], NormVariant::None);
    real.kind = ModelKind::Fastkan;
    cases.push(("real edge".into(), real.clone(), false));
    real.widths = vec![2, 3, 2];
    real.norm = NormVariant::BnReal;
    cases.push(("bn_real network".into(), real, false));
    cases.push((
        "classifier".into(),
        ModelSpec::cvkan(&[3, 2, 2, 5], NormVariant::BnV).with_output_domain(OutputDomain::Real),
        true,
    ));
    cases
}

/// One normalization variant on its own: worst relative error over the
/// parameter and input gradients of `Σ Re(conj(c_s)·y_s)` for random `c`.
pub fn check_norm(variant: NormVariant) -> f64 {
    let mut worst: f64 = 0.0;
    for point in 0..POINTS {
        let mut rng = ChaCha8Rng::seed_from_u64(77 + point);
        let n = 9;
        let mut col: Vec<ComplexScalar> =
            (0..n).map(|_| c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect();
        if variant == NormVariant::BnReal {
            col.iter_mut().for_each(|z| z.im = 0.0);
        }
        let mut params = variant.identity_params().to_vec();
        for p in &mut params {
            *p += rng.random_range(-0.5..0.5);
        }
        let weights: Vec<ComplexScalar> =
            (0..n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let objective =
            |y: &[ComplexScalar]| -> f64 { y.iter().zip(&weights).map(|(y, w)| y.re * w.re + y.im * w.im).sum() };

        let (_, cache) = forward_train_feature(variant, &params, &col, DEFAULT_EPS).unwrap();
        let mut g_params = vec![0.0; params.len()];
        let g_in = backward_feature(variant, &params, &cache, &weights, &mut g_params);

        let fd_params = central_difference(
            |p| objective(&forward_train_feature(variant, p, &col, DEFAULT_EPS).unwrap().0),
            &params,
        );
        worst = worst.max(relative_error(&g_params, &fd_params));

        let flat: Vec<f64> = col.iter().flat_map(|z| [z.re, z.im]).collect();
        let mut fd_in = central_difference(
            |v| {
                let zs: Vec<ComplexScalar> = v.chunks(2).map(|p| c(p[0], p[1])).collect();
                objective(&forward_train_feature(variant, &params, &zs, DEFAULT_EPS).unwrap().0)
            },
            &flat,
        );
        let mut analytic_in: Vec<f64> = g_in.iter().flat_map(|z| [z.re, z.im]).collect();
        if variant == NormVariant::BnReal {
            // the imaginary channel is ignored by construction
            for i in (1..analytic_in.len()).step_by(2) {
                analytic_in[i] = 0.0;
                fd_in[i] = 0.0;
            }
        }
        worst = worst.max(relative_error(&analytic_in, &fd_in));
    }
    worst
}

type Loss = fn(&ComplexBatch, &ComplexBatch, &[usize]) -> (f64, Vec<ComplexScalar>);

/// Worst relative error of each loss gradient with respect to the predictions.
pub fn check_losses() -> Vec<(&'static str, f64)> {
    let losses: [(&str, Loss); 3] = [
        ("mse", |p, t, _| mse_with_grad(p, t).unwrap()),
        ("mae", |p, t, _| mae_with_grad(p, t).unwrap()),
        ("ce", |p, _, l| ce_with_grad(p, l).unwrap()),
    ];
    let mut worst = vec![0.0f64; losses.len()];
    for point in 0..POINTS {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + point);
        let pred = random_batch(&mut rng, 5, 3);
        let target = random_batch(&mut rng, 5, 3);
        let labels: Vec<usize> = (0..5).map(|_| rng.random_range(0..3)).collect();
        let flat: Vec<f64> = pred.data().iter().flat_map(|z| [z.re, z.im]).collect();
        let rebuild = |v: &[f64]| ComplexBatch::new(5, 3, v.chunks(2).map(|p| c(p[0], p[1])).collect()).unwrap();
        for (i, (_, f)) in losses.iter().enumerate() {
            let analytic: Vec<f64> = f(&pred, &target, &labels).1.iter().flat_map(|z| [z.re, z.im]).collect();
            let fd = central_difference(|v| f(&rebuild(v), &target, &labels).0, &flat);
            worst[i] = worst[i].max(relative_error(&analytic, &fd));
        }
    }
    losses.iter().map(|(n, _)| *n).zip(worst).collect()
}
