//! Brute-force reference implementations, written without the library's
//! helpers, shared by the property tests and the acceptance target.

#![allow(dead_code)]

use cvkan::datasets::SymbolicFn;
use cvkan::layers::{CsiluParams, EdgeFunction};
use cvkan::norm::{forward_train_feature, NormVariant};
use cvkan::{ComplexScalar, OutputDomain};

fn c(re: f64, im: f64) -> ComplexScalar {
    ComplexScalar::new(re, im)
}

fn silu(x: f64) -> f64 {
    x / (1.0 + (-x).exp())
}

/// `|a − b| ≤ tol·(1 + max(|a|, |b|))`.
pub fn close(a: ComplexScalar, b: ComplexScalar, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

/// Direct double loop over the grid.
pub fn edge(x: ComplexScalar, e: &EdgeFunction) -> ComplexScalar {
    let g = e.grid.points_per_dim;
    let coord = |i: usize| e.grid.lo + (e.grid.hi - e.grid.lo) * i as f64 / (g - 1) as f64;
    let mut acc = c(0.0, 0.0);
    for u in 0..g {
        for v in 0..g {
            let d2 = (x.re - coord(u)).powi(2) + (x.im - coord(v)).powi(2);
            acc += e.weights[u * g + v] * (-d2 / (e.grid.bandwidth * e.grid.bandwidth)).exp();
        }
    }
    let s = c(silu(x.re), silu(x.im));
    acc += match e.csilu {
        CsiluParams::Complex { w, beta } => w * s + beta,
        CsiluParams::Real { w1, w2, beta } => c(w1 * s.re, w2 * s.im) + beta,
    };
    match e.output_domain {
        OutputDomain::Complex => acc,
        OutputDomain::Real => c(acc.re, 0.0),
    }
}

/// Sample standard deviation from the two channel variances.
pub fn complex_std(values: &[ComplexScalar]) -> f64 {
    let sample_var = |xs: Vec<f64>| {
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
    };
    (sample_var(values.iter().map(|z| z.re).collect()) + sample_var(values.iter().map(|z| z.im).collect())).sqrt()
}

/// Benchmark functions expanded into real arithmetic.
pub fn symbolic(f: SymbolicFn, z: &[ComplexScalar]) -> ComplexScalar {
    let (x, y) = (z[0].re, z[0].im);
    match f {
        SymbolicFn::F1 => c(x * x - y * y, 2.0 * x * y),
        SymbolicFn::F2 => c(x.sin() * y.cosh(), x.cos() * y.sinh()),
        SymbolicFn::F3 => {
            let (u, v) = (z[1].re, z[1].im);
            c(x * u - y * v, x * v + y * u)
        }
        SymbolicFn::F4 => {
            let (u, v) = (z[1].re, z[1].im);
            let (a, b) = (x * x - y * y + u * u - v * v, 2.0 * (x * y + u * v));
            c(a * a - b * b, 2.0 * a * b)
        }
    }
}

/// Largest deviation of the identity-affine train-mode output of `variant`
/// (with `eps = 0`) from its defining batch statistics: zero mean and unit
/// covariance for bn_c, unit complex variance for bn_v, unit variance per
/// channel for bn_r2, unit real variance and a zero imaginary channel for
/// bn_real.
pub fn norm_invariant_error(variant: NormVariant, col: &[ComplexScalar]) -> f64 {
    let (y, _) = forward_train_feature(variant, variant.identity_params(), col, 0.0).unwrap();
    let n = y.len() as f64;
    let mean = y.iter().sum::<ComplexScalar>() / n;
    let var_re = y.iter().map(|z| z.re * z.re).sum::<f64>() / n;
    let var_im = y.iter().map(|z| z.im * z.im).sum::<f64>() / n;
    let cov = y.iter().map(|z| z.re * z.im).sum::<f64>() / n;
    let spread = match variant {
        NormVariant::BnC => (var_re - 1.0).abs().max((var_im - 1.0).abs()).max(cov.abs()),
        NormVariant::BnV => (var_re + var_im - 1.0).abs(),
        NormVariant::BnR2 => (var_re - 1.0).abs().max((var_im - 1.0).abs()),
        NormVariant::BnReal => (var_re - 1.0).abs().max(var_im),
        NormVariant::None => 0.0,
    };
    mean.norm().max(spread)
}

/// Whether the channel covariance of `col` is far enough from singular for
/// whitening without a stabilizer.
pub fn well_conditioned(col: &[ComplexScalar]) -> bool {
    let n = col.len() as f64;
    let mean = col.iter().sum::<ComplexScalar>() / n;
    let (mut crr, mut cri, mut cii) = (0.0, 0.0, 0.0);
    for z in col {
        let d = z - mean;
        crr += d.re * d.re / n;
        cri += d.re * d.im / n;
        cii += d.im * d.im / n;
    }
    crr * cii - cri * cri > 1e-3 * (crr + cii).powi(2)
}

/// Largest violation of score conservation: every vertex layer and every
/// edge layer sums to the output width, and each vertex equals the sum of
/// its outgoing edges.
pub fn conservation_error(widths: &[usize], edges: &[Vec<f64>], vertices: &[Vec<f64>]) -> f64 {
    let total = *widths.last().unwrap() as f64;
    let mut worst: f64 = 0.0;
    for layer in vertices.iter().chain(edges) {
        worst = worst.max((layer.iter().sum::<f64>() - total).abs());
    }
    for (l, layer) in edges.iter().enumerate() {
        let n_in = widths[l];
        for p in 0..n_in {
            let outgoing: f64 = (0..widths[l + 1]).map(|q| layer[q * n_in + p]).sum();
            worst = worst.max((outgoing - vertices[l][p]).abs());
        }
        if layer.iter().any(|&e| e < 0.0) {
            return f64::INFINITY;
        }
    }
    worst
}
