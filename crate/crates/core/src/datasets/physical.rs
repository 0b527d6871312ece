use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_count, uniform_on_grid, uniform_real, Dataset, FeatureMeta, Targets};
use crate::error::{CvkanError, Result};
use crate::layers::GridSpec;
use crate::numerics::{ComplexBatch, ComplexScalar};

/// Targets above this magnitude are resampled.
pub const CIRCUIT_TARGET_LIMIT: f64 = 1e6;

/// Reconstructed hologram `Ê_R·|E_R + E_0|²`.
pub fn hologram(e_r_hat: ComplexScalar, e_r: ComplexScalar, e_0: ComplexScalar) -> ComplexScalar {
    e_r_hat * (e_r + e_0).norm_sqr()
}

/// Voltage across the load resistor of a generator–RLC–load circuit.
pub fn circuit_voltage(u_g: ComplexScalar, r_g: f64, r_l: f64, l: f64, c: f64, omega: f64) -> ComplexScalar {
    let denom = ComplexScalar::new(
        1.0 + r_g / r_l - omega * omega * l * c,
        omega * (l / r_l + r_g * c),
    );
    u_g / denom
}

pub fn gen_holography(n: usize, seed: u64, grid: &GridSpec) -> Result<Dataset> {
    check_count(n)?;
    grid.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(3 * n);
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let v = [
            uniform_on_grid(&mut rng, grid),
            uniform_on_grid(&mut rng, grid),
            uniform_on_grid(&mut rng, grid),
        ];
        features.extend_from_slice(&v);
        targets.push(hologram(v[0], v[1], v[2]));
    }
    Dataset::new(
        "holography",
        ComplexBatch::new(n, 3, features)?,
        Targets::Regression(ComplexBatch::new(n, 1, targets)?),
        vec![
            FeatureMeta::complex("E_R_hat"),
            FeatureMeta::complex("E_R"),
            FeatureMeta::complex("E_0"),
        ],
    )
}

#[derive(Debug, Clone)]
pub struct CircuitGeneration {
    pub dataset: Dataset,
    /// Draws discarded because the target was non-finite or too large.
    pub rejected: usize,
}

/// Every quantity is drawn from the grid range, negative values included.
pub fn gen_circuit(n: usize, seed: u64, grid: &GridSpec) -> Result<CircuitGeneration> {
    check_count(n)?;
    grid.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(6 * n);
    let mut targets = Vec::with_capacity(n);
    let mut rejected = 0usize;
    while targets.len() < n {
        let u_g = uniform_on_grid(&mut rng, grid);
        let r: [f64; 5] = std::array::from_fn(|_| uniform_real(&mut rng, grid));
        let u = circuit_voltage(u_g, r[0], r[1], r[2], r[3], r[4]);
        if !(u.re.is_finite() && u.im.is_finite()) || u.norm() > CIRCUIT_TARGET_LIMIT {
            rejected += 1;
            if rejected > n {
                return Err(CvkanError::Dataset(format!(
                    "circuit generation rejected more than half of its draws ({rejected} rejected, {} kept)",
                    targets.len()
                )));
            }
            continue;
        }
        features.push(u_g);
        features.extend(r.iter().map(|&v| ComplexScalar::new(v, 0.0)));
        targets.push(u);
    }
    if rejected > 0 {
        log::info!("circuit generation resampled {rejected} draws");
    }
    let dataset = Dataset::new(
        "circuit",
        ComplexBatch::new(n, 6, features)?,
        Targets::Regression(ComplexBatch::new(n, 1, targets)?),
        vec![
            FeatureMeta::complex("U_G"),
            FeatureMeta::real("R_G"),
            FeatureMeta::real("R_L"),
            FeatureMeta::real("L"),
            FeatureMeta::real("C"),
            FeatureMeta::real("omega"),
        ],
    )?;
    Ok(CircuitGeneration { dataset, rejected })
}
