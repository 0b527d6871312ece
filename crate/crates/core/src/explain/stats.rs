use crate::error::{CvkanError, Result};
use crate::numerics::ComplexScalar;

/// Sample standard deviation of complex values: `sqrt(Σ|zᵢ − z̄|² / (n − 1))`.
pub fn complex_std(values: &[ComplexScalar]) -> Result<f64> {
    let n = values.len();
    if n < 2 {
        return Err(CvkanError::Statistics { required: 2, got: n });
    }
    let mean = values.iter().sum::<ComplexScalar>() / n as f64;
    let ss: f64 = values.iter().map(|z| (z - mean).norm_sqr()).sum();
    Ok((ss / (n - 1) as f64).sqrt())
}
