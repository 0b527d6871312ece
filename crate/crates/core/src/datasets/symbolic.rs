use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_count, uniform_on_grid, Dataset, FeatureMeta, Targets};
use crate::error::Result;
use crate::layers::GridSpec;
use crate::numerics::{ComplexBatch, ComplexScalar};

/// The four closed-form benchmark functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolicFn {
    /// `z²`
    F1,
    /// `sin z`
    F2,
    /// `z1·z2`
    F3,
    /// `(z1² + z2²)²`
    F4,
}

impl SymbolicFn {
    pub const ALL: [SymbolicFn; 4] = [SymbolicFn::F1, SymbolicFn::F2, SymbolicFn::F3, SymbolicFn::F4];

    pub fn n_inputs(self) -> usize {
        match self {
            SymbolicFn::F1 | SymbolicFn::F2 => 1,
            SymbolicFn::F3 | SymbolicFn::F4 => 2,
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            SymbolicFn::F1 => "f1",
            SymbolicFn::F2 => "f2",
            SymbolicFn::F3 => "f3",
            SymbolicFn::F4 => "f4",
        }
    }

    pub fn formula(self) -> &'static str {
        match self {
            SymbolicFn::F1 => "z^2",
            SymbolicFn::F2 => "sin(z)",
            SymbolicFn::F3 => "z1*z2",
            SymbolicFn::F4 => "(z1^2+z2^2)^2",
        }
    }

    /// Complex evaluation. `z` must hold `n_inputs()` values.
    pub fn eval(self, z: &[ComplexScalar]) -> ComplexScalar {
        match self {
            SymbolicFn::F1 => z[0] * z[0],
            SymbolicFn::F2 => {
                let (x, y) = (z[0].re, z[0].im);
                ComplexScalar::new(x.sin() * y.cosh(), x.cos() * y.sinh())
            }
            SymbolicFn::F3 => z[0] * z[1],
            SymbolicFn::F4 => {
                let s = z[0] * z[0] + z[1] * z[1];
                s * s
            }
        }
    }
}

/// Features uniform on the grid square per complex variable.
pub fn gen_symbolic(f: SymbolicFn, n: usize, seed: u64, grid: &GridSpec) -> Result<Dataset> {
    check_count(n)?;
    grid.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = f.n_inputs();
    let mut features = Vec::with_capacity(n * d);
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let start = features.len();
        for _ in 0..d {
            features.push(uniform_on_grid(&mut rng, grid));
        }
        targets.push(f.eval(&features[start..]));
    }
    let meta = (1..=d)
        .map(|i| FeatureMeta::complex(if d == 1 { "z".to_string() } else { format!("z{i}") }))
        .collect();
    Dataset::new(
        f.id(),
        ComplexBatch::new(n, d, features)?,
        Targets::Regression(ComplexBatch::new(n, 1, targets)?),
        meta,
    )
}
