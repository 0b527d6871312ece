//! Complex arithmetic, batched complex storage and reverse-mode differentiation.

pub mod batch;
pub mod complex;
pub mod tape;

pub use batch::ComplexBatch;
pub use complex::{complex_abs2, complex_add, complex_mul, ComplexScalar};
pub use tape::{grad, Real, Tape, Var};
