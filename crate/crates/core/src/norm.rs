//! Batch normalization over complex features.
//!
//! Four variants are supported, all acting on one feature column at a time:
//!
//! * `bn_c`: whitens the 2×2 covariance of the (Re, Im) pair with the analytic
//!   inverse square root, then applies a symmetric 2×2 scale `γ` and complex
//!   shift `β` (5 parameters).
//! * `bn_v`: divides the centred values by the square root of the complex
//!   variance `mean |z - z̄|²`, scales by a real `γ` and shifts by a complex `β`
//!   (3 parameters).
//! * `bn_r2`: independent real batch norm on each channel (4 parameters).
//! * `bn_real`: real batch norm on the real channel, for real-valued
//!   networks (2 parameters).
//!
//! Batch statistics use the population convention (divide by `n`). Running
//! statistics track the mean and the full channel covariance with an
//! exponential moving average; every variant derives what it needs from them.

use serde::{Deserialize, Serialize};

use crate::error::{CvkanError, Result};
use crate::numerics::{ComplexBatch, ComplexScalar};

pub const DEFAULT_MOMENTUM: f64 = 0.1;
pub const DEFAULT_EPS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NormVariant {
    #[default]
    BnC,
    BnV,
    BnR2,
    BnReal,
    None,
}

impl NormVariant {
    pub fn params_per_feature(self) -> usize {
        match self {
            Self::BnC => 5,
            Self::BnV => 3,
            Self::BnR2 => 4,
            Self::BnReal => 2,
            Self::None => 0,
        }
    }

    /// Parameters of the identity affine map.
    pub fn identity_params(self) -> &'static [f64] {
        match self {
            Self::BnC => &[1.0, 0.0, 1.0, 0.0, 0.0],
            Self::BnV => &[1.0, 0.0, 0.0],
            Self::BnR2 => &[1.0, 0.0, 1.0, 0.0],
            Self::BnReal => &[1.0, 0.0],
            Self::None => &[],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::BnC => "bn_c",
            Self::BnV => "bn_v",
            Self::BnR2 => "bn_r2",
            Self::BnReal => "bn_real",
            Self::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMode {
    Train,
    Eval,
}

/// Mean and channel covariance `[c_rr, c_ri, c_ii]` of one feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunningStats {
    pub mean: ComplexScalar,
    pub cov: [f64; 3],
}

impl RunningStats {
    pub fn initial(variant: NormVariant) -> Self {
        let cov = match variant {
            NormVariant::BnC | NormVariant::BnV => [0.5, 0.0, 0.5],
            _ => [1.0, 0.0, 1.0],
        };
        Self {
            mean: ComplexScalar::new(0.0, 0.0),
            cov,
        }
    }

    pub fn update(&mut self, batch: &RunningStats, momentum: f64) {
        let keep = 1.0 - momentum;
        self.mean = self.mean * keep + batch.mean * momentum;
        for (r, b) in self.cov.iter_mut().zip(batch.cov) {
            *r = keep * *r + momentum * b;
        }
    }
}

/// Population mean and channel covariance of a column.
pub fn batch_stats(col: &[ComplexScalar]) -> RunningStats {
    let n = col.len() as f64;
    let mut mean = ComplexScalar::new(0.0, 0.0);
    for z in col {
        mean += z;
    }
    mean /= n;
    let mut cov = [0.0; 3];
    for z in col {
        let d = z - mean;
        cov[0] += d.re * d.re;
        cov[1] += d.re * d.im;
        cov[2] += d.im * d.im;
    }
    for c in &mut cov {
        *c /= n;
    }
    RunningStats { mean, cov }
}

/// Analytic inverse square root `[w_rr, w_ri, w_ii]` of a symmetric positive
/// definite 2×2 matrix `[c_rr, c_ri, c_ii]`.
pub fn inv_sqrt_2x2(c: [f64; 3]) -> [f64; 3] {
    let s = (c[0] * c[2] - c[1] * c[1]).sqrt();
    let t = (c[0] + c[2] + 2.0 * s).sqrt();
    let d = s * t;
    [(c[2] + s) / d, -c[1] / d, (c[0] + s) / d]
}

/// Jacobian of [`inv_sqrt_2x2`]: row `i` holds `∂w_i/∂c_j`.
fn inv_sqrt_2x2_jacobian(c: [f64; 3]) -> [[f64; 3]; 3] {
    let s = (c[0] * c[2] - c[1] * c[1]).sqrt();
    let t = (c[0] + c[2] + 2.0 * s).sqrt();
    let d = s * t;
    let w = [(c[2] + s) / d, -c[1] / d, (c[0] + s) / d];
    let ds = [c[2] / (2.0 * s), -c[1] / s, c[0] / (2.0 * s)];
    let dtr = [1.0, 0.0, 1.0];
    let mut jac = [[0.0; 3]; 3];
    for j in 0..3 {
        let dt = (dtr[j] + 2.0 * ds[j]) / (2.0 * t);
        let dd = t * ds[j] + s * dt;
        let num = [
            if j == 2 { 1.0 } else { 0.0 } + ds[j],
            if j == 1 { -1.0 } else { 0.0 },
            if j == 0 { 1.0 } else { 0.0 } + ds[j],
        ];
        for i in 0..3 {
            jac[i][j] = num[i] / d - w[i] * dd / d;
        }
    }
    jac
}

/// Intermediate values of a train-mode forward pass over one column.
#[derive(Debug, Clone)]
pub struct FeatureCache {
    pub centered: Vec<ComplexScalar>,
    pub normalized: Vec<ComplexScalar>,
    /// bn_c: whitening matrix; bn_v: `[s, 0, 0]`; bn_r2/bn_real: `[s_re, 0, s_im]`.
    pub scale: [f64; 3],
    /// Regularised covariance used for whitening (bn_c only).
    pub cov: [f64; 3],
    pub stats: RunningStats,
}

fn affine(variant: NormVariant, p: &[f64], zhat: ComplexScalar) -> ComplexScalar {
    match variant {
        NormVariant::BnC => ComplexScalar::new(
            p[0] * zhat.re + p[1] * zhat.im + p[3],
            p[1] * zhat.re + p[2] * zhat.im + p[4],
        ),
        NormVariant::BnV => zhat * p[0] + ComplexScalar::new(p[1], p[2]),
        NormVariant::BnR2 => ComplexScalar::new(p[0] * zhat.re + p[1], p[2] * zhat.im + p[3]),
        NormVariant::BnReal => ComplexScalar::new(p[0] * zhat.re + p[1], 0.0),
        NormVariant::None => zhat,
    }
}

fn whiten(variant: NormVariant, scale: [f64; 3], d: ComplexScalar) -> ComplexScalar {
    match variant {
        NormVariant::BnC => ComplexScalar::new(
            scale[0] * d.re + scale[1] * d.im,
            scale[1] * d.re + scale[2] * d.im,
        ),
        NormVariant::BnV => d / scale[0],
        NormVariant::BnR2 => ComplexScalar::new(d.re / scale[0], d.im / scale[2]),
        NormVariant::BnReal => ComplexScalar::new(d.re / scale[0], 0.0),
        NormVariant::None => d,
    }
}

fn scale_from_cov(variant: NormVariant, cov: [f64; 3], eps: f64) -> ([f64; 3], [f64; 3]) {
    let reg = [cov[0] + eps, cov[1], cov[2] + eps];
    let scale = match variant {
        NormVariant::BnC => inv_sqrt_2x2(reg),
        NormVariant::BnV => [(cov[0] + cov[2] + eps).sqrt(), 0.0, 0.0],
        NormVariant::BnR2 | NormVariant::BnReal => [reg[0].sqrt(), 0.0, reg[2].sqrt()],
        NormVariant::None => [1.0, 0.0, 1.0],
    };
    (scale, reg)
}

/// Train-mode normalization of one column with batch statistics.
pub fn forward_train_feature(
    variant: NormVariant,
    params: &[f64],
    col: &[ComplexScalar],
    eps: f64,
) -> Result<(Vec<ComplexScalar>, FeatureCache)> {
    if variant != NormVariant::None && col.len() < 2 {
        return Err(CvkanError::Statistics {
            required: 2,
            got: col.len(),
        });
    }
    let stats = batch_stats(col);
    let (scale, cov) = scale_from_cov(variant, stats.cov, eps);
    let centered: Vec<ComplexScalar> = if variant == NormVariant::None {
        col.to_vec()
    } else {
        col.iter().map(|z| z - stats.mean).collect()
    };
    let normalized: Vec<ComplexScalar> = centered
        .iter()
        .map(|&d| whiten(variant, scale, d))
        .collect();
    let out = normalized.iter().map(|&z| affine(variant, params, z)).collect();
    Ok((
        out,
        FeatureCache {
            centered,
            normalized,
            scale,
            cov,
            stats,
        },
    ))
}

/// Eval-mode normalization with frozen running statistics.
pub fn forward_eval_feature(
    variant: NormVariant,
    params: &[f64],
    stats: &RunningStats,
    col: &[ComplexScalar],
    eps: f64,
) -> Vec<ComplexScalar> {
    if variant == NormVariant::None {
        return col.to_vec();
    }
    let (scale, _) = scale_from_cov(variant, stats.cov, eps);
    col.iter()
        .map(|z| affine(variant, params, whiten(variant, scale, z - stats.mean)))
        .collect()
}

/// Backpropagates through a train-mode forward pass. Parameter gradients are
/// accumulated into `grad_params`; the gradient with respect to the input
/// column is returned. Gradients of complex values are `∂L/∂re + i·∂L/∂im`.
pub fn backward_feature(
    variant: NormVariant,
    params: &[f64],
    cache: &FeatureCache,
    grad_out: &[ComplexScalar],
    grad_params: &mut [f64],
) -> Vec<ComplexScalar> {
    let n = grad_out.len() as f64;
    let d = &cache.centered;
    let zhat = &cache.normalized;
    let mut gd: Vec<ComplexScalar> = match variant {
        NormVariant::None => return grad_out.to_vec(),
        NormVariant::BnC => {
            let (g11, g12, g22) = (params[0], params[1], params[2]);
            let w = cache.scale;
            let mut gw = [0.0; 3];
            let mut gz = Vec::with_capacity(grad_out.len());
            for ((gy, zh), dk) in grad_out.iter().zip(zhat).zip(d) {
                grad_params[0] += gy.re * zh.re;
                grad_params[1] += gy.re * zh.im + gy.im * zh.re;
                grad_params[2] += gy.im * zh.im;
                grad_params[3] += gy.re;
                grad_params[4] += gy.im;
                let gzr = g11 * gy.re + g12 * gy.im;
                let gzi = g12 * gy.re + g22 * gy.im;
                gw[0] += gzr * dk.re;
                gw[1] += gzr * dk.im + gzi * dk.re;
                gw[2] += gzi * dk.im;
                gz.push(ComplexScalar::new(
                    w[0] * gzr + w[1] * gzi,
                    w[1] * gzr + w[2] * gzi,
                ));
            }
            let jac = inv_sqrt_2x2_jacobian(cache.cov);
            let mut gc = [0.0; 3];
            for (j, g) in gc.iter_mut().enumerate() {
                *g = (0..3).map(|i| gw[i] * jac[i][j]).sum();
            }
            for (g, dk) in gz.iter_mut().zip(d) {
                g.re += (2.0 * gc[0] * dk.re + gc[1] * dk.im) / n;
                g.im += (gc[1] * dk.re + 2.0 * gc[2] * dk.im) / n;
            }
            gz
        }
        NormVariant::BnV => {
            let gamma = params[0];
            let s = cache.scale[0];
            let mut gs = 0.0;
            let mut gzhat = Vec::with_capacity(grad_out.len());
            for ((gy, zh), dk) in grad_out.iter().zip(zhat).zip(d) {
                grad_params[0] += gy.re * zh.re + gy.im * zh.im;
                grad_params[1] += gy.re;
                grad_params[2] += gy.im;
                let g = gy * gamma;
                gs -= (g.re * dk.re + g.im * dk.im) / (s * s);
                gzhat.push(g);
            }
            gzhat
                .iter()
                .zip(d)
                .map(|(g, dk)| g / s + dk * (gs / (s * n)))
                .collect()
        }
        NormVariant::BnR2 | NormVariant::BnReal => {
            let real_only = variant == NormVariant::BnReal;
            let (sr, si) = (cache.scale[0], cache.scale[2]);
            let mut gsr = 0.0;
            let mut gsi = 0.0;
            let mut gzhat = Vec::with_capacity(grad_out.len());
            for ((gy, zh), dk) in grad_out.iter().zip(zhat).zip(d) {
                grad_params[0] += gy.re * zh.re;
                grad_params[1] += gy.re;
                let gr = params[0] * gy.re;
                gsr -= gr * dk.re / (sr * sr);
                let gi = if real_only {
                    0.0
                } else {
                    grad_params[2] += gy.im * zh.im;
                    grad_params[3] += gy.im;
                    let gi = params[2] * gy.im;
                    gsi -= gi * dk.im / (si * si);
                    gi
                };
                gzhat.push(ComplexScalar::new(gr, gi));
            }
            gzhat
                .iter()
                .zip(d)
                .map(|(g, dk)| {
                    ComplexScalar::new(
                        g.re / sr + gsr * dk.re / (sr * n),
                        g.im / si + gsi * dk.im / (si * n),
                    )
                })
                .collect()
        }
    };
    let mut mean = ComplexScalar::new(0.0, 0.0);
    for g in &gd {
        mean += g;
    }
    mean /= n;
    for g in &mut gd {
        *g -= mean;
    }
    gd
}

/// A standalone normalization layer owning its parameters and running state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormLayer {
    pub variant: NormVariant,
    pub width: usize,
    /// `width × params_per_feature` affine parameters.
    pub params: Vec<f64>,
    pub running: Vec<RunningStats>,
    pub momentum: f64,
    pub eps: f64,
    #[serde(skip, default = "default_mode")]
    pub mode: NormMode,
}

fn default_mode() -> NormMode {
    NormMode::Eval
}

impl NormLayer {
    pub fn new(variant: NormVariant, width: usize) -> Self {
        Self {
            variant,
            width,
            params: variant.identity_params().repeat(width),
            running: vec![RunningStats::initial(variant); width],
            momentum: DEFAULT_MOMENTUM,
            eps: DEFAULT_EPS,
            mode: NormMode::Train,
        }
    }

    pub fn param_count(&self) -> usize {
        self.variant.params_per_feature() * self.width
    }

    pub fn feature_params(&self, feature: usize) -> &[f64] {
        let k = self.variant.params_per_feature();
        &self.params[feature * k..(feature + 1) * k]
    }

    pub fn feature_params_mut(&mut self, feature: usize) -> &mut [f64] {
        let k = self.variant.params_per_feature();
        &mut self.params[feature * k..(feature + 1) * k]
    }

    /// Normalizes every column. In train mode batch statistics are used and
    /// the running statistics are updated.
    pub fn forward(&mut self, batch: &ComplexBatch) -> Result<ComplexBatch> {
        if batch.cols() != self.width {
            return Err(CvkanError::Shape(format!(
                "norm layer has width {}, batch has {} columns",
                self.width,
                batch.cols()
            )));
        }
        let mut out = vec![ComplexScalar::new(0.0, 0.0); batch.rows() * self.width];
        for f in 0..self.width {
            let col = batch.column(f);
            let y = match self.mode {
                NormMode::Train => {
                    let (y, cache) =
                        forward_train_feature(self.variant, self.feature_params(f), &col, self.eps)?;
                    self.running[f].update(&cache.stats, self.momentum);
                    y
                }
                NormMode::Eval => forward_eval_feature(
                    self.variant,
                    self.feature_params(f),
                    &self.running[f],
                    &col,
                    self.eps,
                ),
            };
            for (r, v) in y.into_iter().enumerate() {
                out[r * self.width + f] = v;
            }
        }
        ComplexBatch::new(batch.rows(), self.width, out)
    }
}

fn expect_variant(layer: &NormLayer, variant: NormVariant) -> Result<()> {
    if layer.variant == variant {
        Ok(())
    } else {
        Err(CvkanError::Config(format!(
            "expected a {} layer, got {}",
            variant.name(),
            layer.variant.name()
        )))
    }
}

pub fn bn_c_forward(batch: &ComplexBatch, layer: &mut NormLayer) -> Result<ComplexBatch> {
    expect_variant(layer, NormVariant::BnC)?;
    layer.forward(batch)
}

pub fn bn_v_forward(batch: &ComplexBatch, layer: &mut NormLayer) -> Result<ComplexBatch> {
    expect_variant(layer, NormVariant::BnV)?;
    layer.forward(batch)
}

pub fn bn_r2_forward(batch: &ComplexBatch, layer: &mut NormLayer) -> Result<ComplexBatch> {
    expect_variant(layer, NormVariant::BnR2)?;
    layer.forward(batch)
}

pub fn bn_real_forward(batch: &ComplexBatch, layer: &mut NormLayer) -> Result<ComplexBatch> {
    expect_variant(layer, NormVariant::BnReal)?;
    layer.forward(batch)
}
