use serde::{Deserialize, Serialize};

use super::rbf::silu;
use crate::numerics::ComplexScalar;

/// How the residual SiLU is weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CsiluVariant {
    /// One complex weight on the whole output.
    #[default]
    #[serde(alias = "c")]
    Complex,
    /// Separate real weights on the real and imaginary channels.
    #[serde(alias = "r")]
    Real,
}

impl CsiluVariant {
    pub fn short_name(self) -> &'static str {
        match self {
            Self::Complex => "c",
            Self::Real => "r",
        }
    }
}

/// Weights and bias of the residual activation on one edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum CsiluParams {
    Complex { w: ComplexScalar, beta: ComplexScalar },
    Real { w1: f64, w2: f64, beta: ComplexScalar },
}

impl CsiluParams {
    /// Identity weighting with zero bias.
    pub fn identity(variant: CsiluVariant) -> Self {
        let beta = ComplexScalar::new(0.0, 0.0);
        match variant {
            CsiluVariant::Complex => Self::Complex {
                w: ComplexScalar::new(1.0, 0.0),
                beta,
            },
            CsiluVariant::Real => Self::Real {
                w1: 1.0,
                w2: 1.0,
                beta,
            },
        }
    }

    pub fn zeroed(variant: CsiluVariant) -> Self {
        let zero = ComplexScalar::new(0.0, 0.0);
        match variant {
            CsiluVariant::Complex => Self::Complex { w: zero, beta: zero },
            CsiluVariant::Real => Self::Real {
                w1: 0.0,
                w2: 0.0,
                beta: zero,
            },
        }
    }

    pub fn variant(&self) -> CsiluVariant {
        match self {
            Self::Complex { .. } => CsiluVariant::Complex,
            Self::Real { .. } => CsiluVariant::Real,
        }
    }

    pub fn beta(&self) -> ComplexScalar {
        match self {
            Self::Complex { beta, .. } | Self::Real { beta, .. } => *beta,
        }
    }

    /// Four reals: `[w.re, w.im, β.re, β.im]` or `[w1, w2, β.re, β.im]`.
    pub fn to_reals(&self) -> [f64; 4] {
        match *self {
            Self::Complex { w, beta } => [w.re, w.im, beta.re, beta.im],
            Self::Real { w1, w2, beta } => [w1, w2, beta.re, beta.im],
        }
    }

    pub fn from_reals(variant: CsiluVariant, p: &[f64]) -> Self {
        let beta = ComplexScalar::new(p[2], p.get(3).copied().unwrap_or(0.0));
        match variant {
            CsiluVariant::Complex => Self::Complex {
                w: ComplexScalar::new(p[0], p[1]),
                beta,
            },
            CsiluVariant::Real => Self::Real {
                w1: p[0],
                w2: p[1],
                beta,
            },
        }
    }
}

/// `SiLU(Re x) + i·SiLU(Im x)`.
#[inline]
pub fn csilu_unweighted(x: ComplexScalar) -> ComplexScalar {
    ComplexScalar::new(silu(x.re), silu(x.im))
}

/// Weighted residual activation.
pub fn csilu(x: ComplexScalar, p: &CsiluParams) -> ComplexScalar {
    let s = csilu_unweighted(x);
    match *p {
        CsiluParams::Complex { w, beta } => w * s + beta,
        CsiluParams::Real { w1, w2, beta } => ComplexScalar::new(w1 * s.re, w2 * s.im) + beta,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> ComplexScalar {
        ComplexScalar::new(re, im)
    }

    #[test]
    fn zero_input_zero_bias_gives_zero() {
        for p in [
            CsiluParams::Complex { w: c(0.3, -2.0), beta: c(0.0, 0.0) },
            CsiluParams::Real { w1: 4.0, w2: -1.0, beta: c(0.0, 0.0) },
        ] {
            assert_eq!(csilu(c(0.0, 0.0), &p), c(0.0, 0.0));
        }
    }

    #[test]
    fn imaginary_input_only_feeds_imaginary_channel() {
        let p = CsiluParams::identity(CsiluVariant::Complex);
        let t = 1.7;
        let out = csilu(c(0.0, t), &p);
        assert_eq!(out.re, 0.0);
        assert!((out.im - silu(t)).abs() < 1e-15);
    }

    #[test]
    fn real_input_two() {
        let out = csilu(c(2.0, 0.0), &CsiluParams::identity(CsiluVariant::Complex));
        assert!((out.re - 2.0 / (1.0 + (-2.0f64).exp())).abs() < 1e-15);
        assert!((out.re - 1.761594).abs() < 1e-6);
        assert_eq!(out.im, 0.0);
    }

    #[test]
    fn real_weight_variant_scales_channels_independently() {
        let p = CsiluParams::Real { w1: 2.0, w2: -3.0, beta: c(0.5, 0.25) };
        let x = c(0.4, -1.1);
        let out = csilu(x, &p);
        assert!((out.re - (2.0 * silu(0.4) + 0.5)).abs() < 1e-15);
        assert!((out.im - (-3.0 * silu(-1.1) + 0.25)).abs() < 1e-15);
    }

    #[test]
    fn both_variants_have_four_degrees_of_freedom() {
        for v in [CsiluVariant::Complex, CsiluVariant::Real] {
            let p = CsiluParams::from_reals(v, &[1.0, 2.0, 3.0, 4.0]);
            assert_eq!(p.to_reals(), [1.0, 2.0, 3.0, 4.0]);
        }
    }
}
