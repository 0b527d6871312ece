//! Synthetic stand-in for the knot-invariant table, used when the real CSV
//! is not available locally.
//!
//! The label is a binned latent score driven by the meridional translation
//! (both channels) and the longitudinal translation; the remaining invariants
//! are weakly informative or pure noise.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::knots::KNOT_SCHEMA;
use crate::error::Result;

pub const SURROGATE_CLASSES: usize = 14;

/// Raw rows in file column order plus their signatures.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub signatures: Vec<i64>,
}

pub fn gen_knot_surrogate(n: usize, seed: u64) -> SurrogateTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = |rng: &mut ChaCha8Rng| -> f64 { StandardNormal.sample(rng) };
    let mut rows = Vec::with_capacity(n);
    let mut scores = Vec::with_capacity(n);
    for _ in 0..n {
        let merid = (normal(&mut rng), normal(&mut rng));
        let longitudinal = 8.0 + 3.0 * normal(&mut rng);
        let volume = 10.0 + 0.4 * longitudinal + 2.0 * normal(&mut rng);
        let score = 1.6 * merid.0 + 0.5 * (longitudinal - 8.0) / 3.0 + 0.6 * merid.1 + 0.05 * normal(&mut rng);
        let mut real = [0.0; 13];
        real[0] = rng.random_range(-0.5..0.5);
        real[1] = volume / 3.0 + 0.5 * normal(&mut rng);
        real[2] = (2.0 + 3.0 * normal(&mut rng).abs()).round();
        real[3] = (4.0 + 6.0 * normal(&mut rng).abs()).round();
        real[4] = 0.1 + 0.3 * rng.random::<f64>();
        real[5] = longitudinal;
        real[6] = volume;
        let symmetry = rng.random_range(0..6);
        for (k, slot) in real[7..].iter_mut().enumerate() {
            *slot = if k == symmetry { 1.0 } else { 0.0 };
        }
        let short_geodesic = (0.2 + 0.5 * rng.random::<f64>(), rng.random_range(-3.0..3.0));
        let mut row = real.to_vec();
        row.extend([merid.0, merid.1, short_geodesic.0, short_geodesic.1]);
        rows.push(row);
        scores.push(score);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    let mut signatures = vec![0i64; n];
    for (rank, &i) in order.iter().enumerate() {
        let class = rank * SURROGATE_CLASSES / n.max(1);
        signatures[i] = 2 * class as i64 - 12;
    }
    let mut header: Vec<String> = KNOT_SCHEMA.real.iter().map(|s| s.to_string()).collect();
    for c in KNOT_SCHEMA.complex {
        header.push(format!("{c}_re"));
        header.push(format!("{c}_im"));
    }
    header.push("signature".into());
    SurrogateTable {
        header,
        rows,
        signatures,
    }
}

/// Writes a table in the knot CSV layout.
pub fn write_knot_csv(path: &Path, table: &SurrogateTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&table.header)?;
    for (row, sig) in table.rows.iter().zip(&table.signatures) {
        let mut record: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        record.push(sig.to_string());
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}
