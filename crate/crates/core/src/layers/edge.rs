//! Learnable edge functions and edge banks.
//!
//! A complex edge maps `x ∈ ℂ` to
//!
//! ```text
//! Σ_{u,v} w_{u,v} · exp(-|x - g_{u,v}|² / bw²) + csilu(x)
//! ```
//!
//! over the `G × G` grid. Edges with a real output domain keep only real RBF
//! weights and the real part of the residual term.

use serde::{Deserialize, Serialize};

use super::csilu::{csilu, CsiluParams, CsiluVariant};
use super::grid::{make_grid, GridSpec};
use super::rbf::{rbf_complex, rbf_real, silu};
use crate::error::{CvkanError, Result};
use crate::numerics::ComplexScalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputDomain {
    #[default]
    Complex,
    Real,
}

/// Real parameters carried by one edge of the given domain.
pub fn edge_param_count(grid: &GridSpec, domain: OutputDomain) -> usize {
    let g2 = grid.points_per_dim * grid.points_per_dim;
    match domain {
        OutputDomain::Complex => 2 * g2 + 4,
        OutputDomain::Real => g2 + 3,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeFunction {
    pub grid: GridSpec,
    /// `G²` weights, row-major over (real index, imaginary index).
    pub weights: Vec<ComplexScalar>,
    pub csilu: CsiluParams,
    pub output_domain: OutputDomain,
}

impl EdgeFunction {
    /// All-zero edge.
    pub fn zeroed(grid: GridSpec, variant: CsiluVariant, output_domain: OutputDomain) -> Self {
        let g2 = grid.points_per_dim * grid.points_per_dim;
        Self {
            grid,
            weights: vec![ComplexScalar::new(0.0, 0.0); g2],
            csilu: CsiluParams::zeroed(variant),
            output_domain,
        }
    }

    pub fn param_count(&self) -> usize {
        edge_param_count(&self.grid, self.output_domain)
    }

    /// Reads an edge from its flat parameter block.
    pub fn from_flat(
        grid: GridSpec,
        variant: CsiluVariant,
        output_domain: OutputDomain,
        flat: &[f64],
    ) -> Result<Self> {
        let expected = edge_param_count(&grid, output_domain);
        if flat.len() != expected {
            return Err(CvkanError::Shape(format!(
                "edge block needs {expected} reals, got {}",
                flat.len()
            )));
        }
        let g2 = grid.points_per_dim * grid.points_per_dim;
        let (weights, tail) = match output_domain {
            OutputDomain::Complex => (
                flat[..2 * g2]
                    .chunks_exact(2)
                    .map(|c| ComplexScalar::new(c[0], c[1]))
                    .collect(),
                &flat[2 * g2..],
            ),
            OutputDomain::Real => (
                flat[..g2]
                    .iter()
                    .map(|&w| ComplexScalar::new(w, 0.0))
                    .collect(),
                &flat[g2..],
            ),
        };
        Ok(Self {
            grid,
            weights,
            csilu: CsiluParams::from_reals(variant, tail),
            output_domain,
        })
    }

    /// Inverse of [`EdgeFunction::from_flat`].
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        let tail = self.csilu.to_reals();
        match self.output_domain {
            OutputDomain::Complex => {
                for w in &self.weights {
                    out.push(w.re);
                    out.push(w.im);
                }
                out.extend_from_slice(&tail);
            }
            OutputDomain::Real => {
                out.extend(self.weights.iter().map(|w| w.re));
                out.extend_from_slice(&tail[..3]);
            }
        }
        out
    }

    /// The RBF part alone, without the residual activation.
    pub fn rbf_sum(&self, x: ComplexScalar) -> ComplexScalar {
        let grid = make_grid(&self.grid).expect("edge grid validated at construction");
        let bw = self.grid.bandwidth;
        self.weights
            .iter()
            .zip(&grid)
            .map(|(w, g)| w * rbf_complex(x, *g, bw))
            .sum()
    }
}

/// Evaluates one edge. For a real output domain the imaginary part is zero.
pub fn edge_forward(x: ComplexScalar, e: &EdgeFunction) -> ComplexScalar {
    let y = e.rbf_sum(x) + csilu(x, &e.csilu);
    match e.output_domain {
        OutputDomain::Complex => y,
        OutputDomain::Real => ComplexScalar::new(y.re, 0.0),
    }
}

/// One ℂ→ℝ RBF expansion with real weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RealRbfSurface {
    pub grid: GridSpec,
    pub weights: Vec<f64>,
}

impl RealRbfSurface {
    pub fn eval(&self, x: ComplexScalar) -> f64 {
        let grid = make_grid(&self.grid).expect("validated grid");
        self.weights
            .iter()
            .zip(&grid)
            .map(|(w, g)| w * rbf_complex(x, *g, self.grid.bandwidth))
            .sum()
    }
}

/// Splits a complex edge's RBF sum into the two real-weight expansions on
/// `Re w` and `Im w`. Their recombination `f_re + i·f_im` equals the edge
/// output minus the residual activation.
pub fn split_real_equivalence(e: &EdgeFunction) -> Result<(RealRbfSurface, RealRbfSurface)> {
    if e.output_domain != OutputDomain::Complex {
        return Err(CvkanError::Config(
            "split-real decomposition needs a complex-output edge".into(),
        ));
    }
    let re = RealRbfSurface {
        grid: e.grid,
        weights: e.weights.iter().map(|w| w.re).collect(),
    };
    let im = RealRbfSurface {
        grid: e.grid,
        weights: e.weights.iter().map(|w| w.im).collect(),
    };
    Ok((re, im))
}

/// Real RBF edge with a weighted residual SiLU.
pub fn real_edge_forward(x: f64, weights: &[f64], grid: &GridSpec, silu_weight: f64) -> f64 {
    let rbf: f64 = weights
        .iter()
        .zip(grid.axis())
        .map(|(w, g)| w * rbf_real(x, g, grid.bandwidth))
        .sum();
    rbf + silu_weight * silu(x)
}

/// Dense bank of `n_out × n_in` edges, stored with the output index major.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeBank {
    pub n_in: usize,
    pub n_out: usize,
    pub edges: Vec<EdgeFunction>,
}

impl EdgeBank {
    pub fn new(n_in: usize, n_out: usize, edges: Vec<EdgeFunction>) -> Result<Self> {
        if edges.len() != n_in * n_out {
            return Err(CvkanError::Shape(format!(
                "{n_out}x{n_in} bank needs {} edges, got {}",
                n_in * n_out,
                edges.len()
            )));
        }
        Ok(Self { n_in, n_out, edges })
    }

    pub fn edge(&self, q: usize, p: usize) -> &EdgeFunction {
        &self.edges[q * self.n_in + p]
    }
}

/// Sums each output node's incoming edge values: `out_q = Σ_p φ_{q,p}(x_p)`.
pub fn layer_forward(x: &[ComplexScalar], bank: &EdgeBank) -> Result<Vec<ComplexScalar>> {
    if x.len() != bank.n_in {
        return Err(CvkanError::Shape(format!(
            "layer expects {} inputs, got {}",
            bank.n_in,
            x.len()
        )));
    }
    Ok((0..bank.n_out)
        .map(|q| {
            x.iter()
                .enumerate()
                .map(|(p, &xp)| edge_forward(xp, bank.edge(q, p)))
                .sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> ComplexScalar {
        ComplexScalar::new(re, im)
    }

    fn random_edge(rng: &mut ChaCha8Rng, g: usize, domain: OutputDomain) -> EdgeFunction {
        let grid = GridSpec::new(-2.0, 2.0, g).unwrap();
        let n = edge_param_count(&grid, domain);
        let flat: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        EdgeFunction::from_flat(grid, CsiluVariant::Complex, domain, &flat).unwrap()
    }

    #[test]
    fn zero_edge_is_zero_everywhere() {
        let e = EdgeFunction::zeroed(GridSpec::default(), CsiluVariant::Complex, OutputDomain::Complex);
        for x in [c(0.0, 0.0), c(1.3, -0.2), c(-5.0, 7.0)] {
            assert_eq!(edge_forward(x, &e), c(0.0, 0.0));
        }
    }

    #[test]
    fn single_rbf_at_its_peak() {
        let grid = GridSpec::new(-2.0, 2.0, 2).unwrap();
        let mut e = EdgeFunction::zeroed(grid, CsiluVariant::Complex, OutputDomain::Complex);
        e.weights[0] = c(1.0, 0.0);
        assert_eq!(edge_forward(c(-2.0, -2.0), &e), c(1.0, 0.0));
    }

    #[test]
    fn inputs_outside_the_grid_still_evaluate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let e = random_edge(&mut rng, 8, OutputDomain::Complex);
        let y = edge_forward(c(40.0, -35.0), &e);
        assert!(y.re.is_finite() && y.im.is_finite());
    }

    #[test]
    fn flat_round_trip_and_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for domain in [OutputDomain::Complex, OutputDomain::Real] {
            let e = random_edge(&mut rng, 8, domain);
            assert_eq!(e.param_count(), if domain == OutputDomain::Complex { 132 } else { 67 });
            let back = EdgeFunction::from_flat(e.grid, CsiluVariant::Complex, domain, &e.to_flat()).unwrap();
            assert_eq!(back, e);
        }
    }

    #[test]
    fn real_domain_edges_have_no_imaginary_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let e = random_edge(&mut rng, 3, OutputDomain::Real);
        assert!(e.weights.iter().all(|w| w.im == 0.0));
        assert_eq!(e.csilu.beta().im, 0.0);
        for _ in 0..20 {
            let x = c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            assert_eq!(edge_forward(x, &e).im, 0.0);
        }
    }

    #[test]
    fn split_real_parts_vanish_for_pure_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut e = random_edge(&mut rng, 3, OutputDomain::Complex);
        for w in &mut e.weights {
            w.im = 0.0;
        }
        let (_, im) = split_real_equivalence(&e).unwrap();
        assert_eq!(im.eval(c(0.3, 0.2)), 0.0);
        for w in &mut e.weights {
            *w = c(0.0, w.re);
        }
        let (re, _) = split_real_equivalence(&e).unwrap();
        assert_eq!(re.eval(c(0.3, 0.2)), 0.0);
        let real_edge = random_edge(&mut rng, 3, OutputDomain::Real);
        assert!(split_real_equivalence(&real_edge).is_err());
    }

    #[test]
    fn real_edge_profile() {
        let grid = GridSpec::new(-2.0, 2.0, 3).unwrap();
        assert_eq!(real_edge_forward(0.7, &[0.0; 3], &grid, 0.0), 0.0);
        let y = real_edge_forward(0.0, &[0.0, 1.0, 0.0], &grid, 0.0);
        assert_eq!(y, 1.0);
    }

    #[test]
    fn layer_width_mismatch_is_an_error() {
        let grid = GridSpec::new(-2.0, 2.0, 2).unwrap();
        let e = EdgeFunction::zeroed(grid, CsiluVariant::Complex, OutputDomain::Complex);
        let bank = EdgeBank::new(2, 1, vec![e.clone(), e]).unwrap();
        assert!(layer_forward(&[c(0.0, 0.0)], &bank).is_err());
        assert_eq!(layer_forward(&[c(1.0, 0.0), c(0.0, 1.0)], &bank).unwrap(), vec![c(0.0, 0.0)]);
    }
}
