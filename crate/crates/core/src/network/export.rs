use std::collections::BTreeMap;
use std::io::{Read, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{Category, MomentLayer, MultiLayerNetwork, NetworkError, NodeMetrics};
use crate::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: String,
    pub category: Category,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub source: String,
    pub target: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRecord {
    pub name: String,
    pub weight: f64,
    pub density: f64,
    pub edges: Vec<EdgeRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub id: String,
    pub degree: f64,
    pub net_degree: f64,
    pub bridge: f64,
}

/// Serialized form of a multi-layer network with node metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkDocument {
    pub nodes: Vec<NodeRecord>,
    pub layers: Vec<LayerRecord>,
    pub projection: LayerRecord,
    pub metrics: BTreeMap<String, Vec<MetricRecord>>,
}

fn layer_record<T: Real>(layer: &MomentLayer<T>, weight: T) -> LayerRecord {
    let n = layer.names.len();
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (&layer.names[i], &layer.names[j]);
            let (source, target) = if a <= b { (a, b) } else { (b, a) };
            edges.push(EdgeRecord {
                source: source.clone(),
                target: target.clone(),
                weight: layer.edges[(i, j)].f64(),
            });
        }
    }
    LayerRecord {
        name: layer.name.clone(),
        weight: weight.f64(),
        density: layer.density().f64(),
        edges,
    }
}

/// Builds the exported document. `metrics` is keyed by layer name.
pub fn export_network<T: Real>(
    network: &MultiLayerNetwork<T>,
    metrics: &BTreeMap<String, NodeMetrics<T>>,
) -> NetworkDocument {
    let p = &network.projection;
    NetworkDocument {
        nodes: p
            .names
            .iter()
            .zip(&p.categories)
            .map(|(id, &category)| NodeRecord {
                id: id.clone(),
                category,
            })
            .collect(),
        layers: network
            .layers
            .iter()
            .zip(&network.weights)
            .map(|(l, &w)| layer_record(l, w))
            .collect(),
        projection: layer_record(p, T::one()),
        metrics: metrics
            .iter()
            .map(|(name, m)| {
                let rows = (0..m.names.len())
                    .map(|i| MetricRecord {
                        id: m.names[i].clone(),
                        degree: m.degree[i].f64(),
                        net_degree: m.net_degree[i].f64(),
                        bridge: m.bridge[i].f64(),
                    })
                    .collect();
                (name.clone(), rows)
            })
            .collect(),
    }
}

impl NetworkDocument {
    pub fn write<W: Write>(&self, writer: W) -> Result<(), NetworkError> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }

    fn layer(&self, rec: &LayerRecord) -> Result<MomentLayer<f64>, NetworkError> {
        let names: Vec<String> = self.nodes.iter().map(|n| n.id.clone()).collect();
        let n = names.len();
        let index = |id: &str| {
            names
                .iter()
                .position(|x| x == id)
                .ok_or_else(|| NetworkError::UnknownNode(id.to_string()))
        };
        let mut edges = DMatrix::zeros(n, n);
        for e in &rec.edges {
            let (i, j) = (index(&e.source)?, index(&e.target)?);
            edges[(i, j)] = e.weight;
            edges[(j, i)] = e.weight;
        }
        MomentLayer::new(
            rec.name.clone(),
            names,
            self.nodes.iter().map(|n| n.category).collect(),
            edges,
        )
    }

    /// Rebuilds the network; weights and densities are taken from the document.
    pub fn to_network(&self) -> Result<MultiLayerNetwork<f64>, NetworkError> {
        let layers = self
            .layers
            .iter()
            .map(|r| self.layer(r))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MultiLayerNetwork {
            layers,
            densities: self.layers.iter().map(|l| l.density).collect(),
            weights: self.layers.iter().map(|l| l.weight).collect(),
            projection: self.layer(&self.projection)?,
        })
    }
}

pub fn read_network<R: Read>(reader: R) -> Result<NetworkDocument, NetworkError> {
    Ok(serde_json::from_reader(reader)?)
}
