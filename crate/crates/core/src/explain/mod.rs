//! Relevance scores, edge-function surfaces, feature pruning and the viewer
//! document.

mod prune;
mod relevance;
mod stats;
mod surface;
mod viz;

pub use prune::{feature_scores, prune_features, rank_features, PruneMode, PruningFragment, PRUNING_FORMAT_VERSION};
pub use relevance::{relevance, relevance_from_sigma, RelevanceReport};
pub use stats::complex_std;
pub use surface::{lattice_axis, sample_edge_surface, EdgeSurface, DEFAULT_RESOLUTION};
pub use viz::{
    build_viz_document, export_viz, EdgeScore, NormState, ParameterBlock, RelevanceBlock, SurfaceEntry,
    VertexScore, VizDocument, VIZ_FORMAT_VERSION,
};
