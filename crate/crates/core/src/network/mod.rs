//! Multi-layer moment networks, density-weighted projection and node metrics.

mod bridge;
mod export;
mod layers;

pub use bridge::bridge_centrality;
pub use export::{
    export_network, read_network, EdgeRecord, LayerRecord, MetricRecord, NetworkDocument,
    NodeRecord,
};
pub use layers::{
    layer_weights, node_metrics, project_layers, project_matrices, Category, MomentLayer,
    MultiLayerNetwork, NodeMetrics,
};

#[derive(Debug, thiserror::Error)]
pub enum NetworkError {
    #[error("all layers have zero density")]
    DegenerateDensity,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid layer: {0}")]
    InvalidLayer(String),
    #[error("centrality needs at least 3 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
