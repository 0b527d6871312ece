use crate::numerics::tape::sigmoid;
use crate::numerics::{complex_abs2, ComplexScalar};

/// Gaussian bump `exp(-((x - g) / bandwidth)²)`.
#[inline]
pub fn rbf_real(x: f64, g: f64, bandwidth: f64) -> f64 {
    let t = (x - g) / bandwidth;
    (-t * t).exp()
}

/// Radial bump over the complex plane, `exp(-|x - g|² / bandwidth²)`.
#[inline]
pub fn rbf_complex(x: ComplexScalar, g: ComplexScalar, bandwidth: f64) -> f64 {
    (-complex_abs2(x - g) / (bandwidth * bandwidth)).exp()
}

#[inline]
pub fn silu(x: f64) -> f64 {
    x * sigmoid(x)
}

#[inline]
pub fn silu_derivative(x: f64) -> f64 {
    let s = sigmoid(x);
    s * (1.0 + x * (1.0 - s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_rbf_values() {
        assert_eq!(rbf_real(0.3, 0.3, 1.0), 1.0);
        assert!((rbf_real(1.5, 0.5, 1.0) - (-1.0f64).exp()).abs() < 1e-15);
        for d in [0.1, 0.7, 2.5] {
            assert_eq!(rbf_real(d, 0.0, 0.8), rbf_real(-d, 0.0, 0.8));
        }
    }

    #[test]
    fn complex_rbf_values() {
        let g = ComplexScalar::new(0.5, -1.0);
        assert_eq!(rbf_complex(g, g, 1.0), 1.0);
        let x = g + ComplexScalar::new(1.0, 1.0);
        assert!((rbf_complex(x, g, 1.0) - (-2.0f64).exp()).abs() < 1e-15);
        assert!((rbf_complex(x, g, 1.0) - 0.135335).abs() < 1e-6);
    }

    #[test]
    fn complex_rbf_is_rotation_invariant() {
        let g = ComplexScalar::new(0.2, 0.1);
        let d = ComplexScalar::new(0.9, -0.4);
        let base = rbf_complex(g + d, g, 1.3);
        for k in 1..8 {
            let rot = ComplexScalar::from_polar(1.0, k as f64 * 0.7);
            assert!((rbf_complex(g + d * rot, g, 1.3) - base).abs() < 1e-14);
        }
    }

    #[test]
    fn silu_derivative_matches_central_difference() {
        for x in [-4.0, -0.5, 0.0, 0.3, 2.0, 7.5] {
            let h = 1e-6;
            let fd = (silu(x + h) - silu(x - h)) / (2.0 * h);
            assert!((fd - silu_derivative(x)).abs() < 1e-8, "x={x}");
        }
        assert!((silu(2.0) - 1.761594).abs() < 1e-6);
    }
}
