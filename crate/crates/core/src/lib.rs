//! Complex-valued Kolmogorov-Arnold networks.
//!
//! Every edge of a CVKAN carries a learnable function `ℂ → ℂ` built from
//! Gaussian radial basis functions on a `G × G` grid over the complex plane
//! plus a weighted complex SiLU residual. Nodes sum their incoming edges and,
//! between layers, a complex batch normalization keeps activations on the
//! grid.
//!
//! Modules:
//! - [`numerics`]: complex scalars and batches, scalar reverse-mode tape
//! - [`layers`]: grids, RBFs, edge functions, models and parameter counting
//! - [`norm`]: complex batch-normalization variants
//! - [`training`]: losses, Adam, k-fold cross-validation
//! - [`datasets`]: synthetic generators, knot ingestion, split-real adapter
//! - [`explain`]: relevance scores, edge surfaces, feature pruning, viewer export

pub mod datasets;
pub mod error;
pub mod explain;
pub mod layers;
pub mod norm;
pub mod numerics;
pub mod training;

pub use error::{CvkanError, Result};
pub use layers::{init_model, CvkanModel, GridSpec, ModelSpec, OutputDomain};
pub use numerics::{ComplexBatch, ComplexScalar};
