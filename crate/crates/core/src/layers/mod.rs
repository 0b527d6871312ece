//! Grids, radial basis functions, residual activations, edge functions and
//! assembled networks.

pub mod csilu;
pub mod edge;
pub mod generic;
pub mod grid;
pub mod model;
pub mod rbf;
pub mod spec;

pub use csilu::{csilu, CsiluParams, CsiluVariant};
pub use edge::{
    edge_forward, layer_forward, real_edge_forward, split_real_equivalence, EdgeBank,
    EdgeFunction, OutputDomain, RealRbfSurface,
};
pub use grid::{make_grid, GridSpec};
pub use model::{init_model, CvkanModel, ForwardCache, ModelDocument, ModelTrace, MODEL_FORMAT_VERSION};
pub use rbf::{rbf_complex, rbf_real, silu};
pub use spec::{param_count, EdgeKind, LayoutSegment, ModelKind, ModelSpec, ParamLayout};
