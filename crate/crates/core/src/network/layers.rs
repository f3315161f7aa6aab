use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{bridge_centrality, NetworkError};
use crate::connectedness::Directional;
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Bond,
    Equity,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Bond => "bond",
            Category::Equity => "equity",
        }
    }
}

/// One moment layer: symmetric pairwise-total edges with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentLayer<T: Real> {
    pub name: String,
    pub names: Vec<String>,
    pub categories: Vec<Category>,
    pub edges: DMatrix<T>,
}

impl<T: Real> MomentLayer<T> {
    pub fn new(
        name: impl Into<String>,
        names: Vec<String>,
        categories: Vec<Category>,
        edges: DMatrix<T>,
    ) -> Result<Self, NetworkError> {
        let name = name.into();
        let n = names.len();
        if edges.shape() != (n, n) || categories.len() != n {
            return Err(NetworkError::Dimension(format!(
                "layer {name}: {}x{} edges, {n} names, {} categories",
                edges.nrows(),
                edges.ncols(),
                categories.len()
            )));
        }
        for i in 0..n {
            if edges[(i, i)] != T::zero() {
                return Err(NetworkError::InvalidLayer(format!(
                    "{name}: nonzero diagonal at {i}"
                )));
            }
            for j in 0..n {
                if edges[(i, j)] != edges[(j, i)] || !(edges[(i, j)] >= T::zero()) {
                    return Err(NetworkError::InvalidLayer(format!(
                        "{name}: edge ({i},{j}) is negative or asymmetric"
                    )));
                }
            }
        }
        Ok(Self {
            name,
            names,
            categories,
            edges,
        })
    }

    /// Edges `d_ij + d_ji` from row-normalized shares.
    pub fn from_shares(
        name: impl Into<String>,
        names: Vec<String>,
        categories: Vec<Category>,
        d: &DMatrix<T>,
    ) -> Result<Self, NetworkError> {
        let n = d.nrows();
        let edges = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                T::zero()
            } else {
                d[(i, j)] + d[(j, i)]
            }
        });
        Self::new(name, names, categories, edges)
    }

    /// Sum of edge weights over unordered pairs.
    pub fn density(&self) -> T {
        let n = self.names.len();
        let mut s = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                s += self.edges[(i, j)];
            }
        }
        s
    }
}

/// Layer densities and the weights `d_l / Σ d`.
pub fn layer_weights<T: Real>(layers: &[MomentLayer<T>]) -> Result<(Vec<T>, Vec<T>), NetworkError> {
    if layers.is_empty() {
        return Err(NetworkError::Dimension("no layers".into()));
    }
    let densities: Vec<T> = layers.iter().map(|l| l.density()).collect();
    let total = densities.iter().fold(T::zero(), |a, &d| a + d);
    if !(total > T::zero()) {
        return Err(NetworkError::DegenerateDensity);
    }
    let weights = densities.iter().map(|&d| d / total).collect();
    Ok((densities, weights))
}

/// `Σ_l w_l M_l` elementwise.
pub fn project_matrices<T: Real>(
    mats: &[&DMatrix<T>],
    weights: &[T],
) -> Result<DMatrix<T>, NetworkError> {
    let first = mats
        .first()
        .ok_or_else(|| NetworkError::Dimension("no layers".into()))?;
    if mats.len() != weights.len() || mats.iter().any(|m| m.shape() != first.shape()) {
        return Err(NetworkError::Dimension(format!(
            "{} matrices, {} weights or mismatched shapes",
            mats.len(),
            weights.len()
        )));
    }
    let mut out = DMatrix::zeros(first.nrows(), first.ncols());
    for (m, &w) in mats.iter().zip(weights) {
        out += *m * w;
    }
    Ok(out)
}

pub fn project_layers<T: Real>(
    layers: &[MomentLayer<T>],
    weights: &[T],
) -> Result<DMatrix<T>, NetworkError> {
    if let Some(first) = layers.first() {
        if layers.iter().any(|l| l.names != first.names) {
            return Err(NetworkError::Dimension(
                "layers list different nodes".into(),
            ));
        }
    }
    let mats: Vec<&DMatrix<T>> = layers.iter().map(|l| &l.edges).collect();
    project_matrices(&mats, weights)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiLayerNetwork<T: Real> {
    pub layers: Vec<MomentLayer<T>>,
    pub densities: Vec<T>,
    pub weights: Vec<T>,
    pub projection: MomentLayer<T>,
}

impl<T: Real> MultiLayerNetwork<T> {
    pub fn new(layers: Vec<MomentLayer<T>>) -> Result<Self, NetworkError> {
        let (densities, weights) = layer_weights(&layers)?;
        let edges = project_layers(&layers, &weights)?;
        let first = &layers[0];
        let projection = MomentLayer {
            name: "projection".into(),
            names: first.names.clone(),
            categories: first.categories.clone(),
            edges,
        };
        Ok(Self {
            layers,
            densities,
            weights,
            projection,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeMetrics<T: Real> {
    pub names: Vec<String>,
    /// `C^Total_i = To_i + From_i`
    pub degree: Vec<T>,
    /// `C^Net_i = To_i − From_i`
    pub net_degree: Vec<T>,
    pub bridge: Vec<T>,
}

/// Degrees from the directional indices plus bridge centrality of `layer`.
pub fn node_metrics<T: Real>(
    layer: &MomentLayer<T>,
    directional: &Directional<T>,
    directional_names: &[String],
) -> Result<NodeMetrics<T>, NetworkError> {
    if directional_names != layer.names.as_slice() {
        let missing = layer
            .names
            .iter()
            .find(|n| !directional_names.contains(n))
            .or_else(|| directional_names.iter().find(|n| !layer.names.contains(n)))
            .cloned()
            .unwrap_or_else(|| "node order".into());
        return Err(NetworkError::UnknownNode(missing));
    }
    let bridge = bridge_centrality(&layer.edges)?;
    Ok(NodeMetrics {
        names: layer.names.clone(),
        degree: directional.total.iter().copied().collect(),
        net_degree: directional.net.iter().copied().collect(),
        bridge,
    })
}
