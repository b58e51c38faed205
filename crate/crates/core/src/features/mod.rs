//! Topological decentralization features of a daily graph.
//!
//! All features use the unweighted topology: degree is neighbor count and
//! edge weights play no role.

mod community;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::DailyGraph;

pub use community::{detect_communities, modularity, Partition};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FeatureError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("undefined modularity: graph has no edges")]
    UndefinedModularity,
    #[error("degree centrality needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("partition covers {got} nodes, graph has {expected}")]
    PartitionSize { expected: usize, got: usize },
    #[error("partition community ids are not contiguous from 0")]
    PartitionIds,
}

/// Whether a rising value of a feature is labeled up or down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "up")]
    Up,
    #[serde(rename = "down")]
    Down,
}

/// Names of the six features in canonical column order.
pub const FEATURE_NAMES: [&str; 6] = [
    "n_components",
    "largest_component_ratio",
    "modularity",
    "degree_centrality_std",
    "n_core",
    "avg_core_degree",
];

/// Direction metadata per feature, same order as [`FEATURE_NAMES`].
pub const FEATURE_DIRECTIONS: [Direction; 6] = [
    Direction::Up,
    Direction::Down,
    Direction::Up,
    Direction::Down,
    Direction::Up,
    Direction::Down,
];

/// Six decentralization features of one day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub day: NaiveDate,
    pub n_components: usize,
    pub largest_component_ratio: f64,
    pub modularity: f64,
    pub degree_centrality_std: f64,
    pub n_core: usize,
    pub avg_core_degree: f64,
}

impl FeatureVector {
    /// Values in [`FEATURE_NAMES`] order.
    pub fn values(&self) -> [f64; 6] {
        [
            self.n_components as f64,
            self.largest_component_ratio,
            self.modularity,
            self.degree_centrality_std,
            self.n_core as f64,
            self.avg_core_degree,
        ]
    }
}

/// The four features that need no core-periphery detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopologyFeatures {
    pub n_components: usize,
    pub largest_component_ratio: f64,
    pub modularity: f64,
    pub degree_centrality_std: f64,
}

/// Connected-component id per node, numbered by first reachable node.
pub fn component_labels(graph: &DailyGraph) -> (Vec<u32>, usize) {
    let n = graph.node_count();
    let mut label = vec![u32::MAX; n];
    let mut stack = Vec::new();
    let mut next = 0u32;
    for start in 0..n {
        if label[start] != u32::MAX {
            continue;
        }
        label[start] = next;
        stack.push(start as u32);
        while let Some(v) = stack.pop() {
            for &w in graph.neighbors(v) {
                if label[w as usize] == u32::MAX {
                    label[w as usize] = next;
                    stack.push(w);
                }
            }
        }
        next += 1;
    }
    (label, next as usize)
}

pub fn count_components(graph: &DailyGraph) -> Result<usize, FeatureError> {
    if graph.is_empty() {
        return Err(FeatureError::EmptyGraph);
    }
    Ok(component_labels(graph).1)
}

/// Size of the largest component divided by the node count.
pub fn largest_component_ratio(graph: &DailyGraph) -> Result<f64, FeatureError> {
    if graph.is_empty() {
        return Err(FeatureError::EmptyGraph);
    }
    let (labels, count) = component_labels(graph);
    let mut sizes = vec![0usize; count];
    for l in labels {
        sizes[l as usize] += 1;
    }
    let largest = sizes.into_iter().max().unwrap_or(0);
    Ok(largest as f64 / graph.node_count() as f64)
}

/// Population standard deviation of `degree / (n - 1)`.
pub fn degree_centrality_std(graph: &DailyGraph) -> Result<f64, FeatureError> {
    let n = graph.node_count();
    if n < 2 {
        return Err(FeatureError::TooFewNodes(n));
    }
    let scale = 1.0 / (n - 1) as f64;
    let degrees = graph.degrees();
    let mean = degrees.iter().map(|&d| d as f64).sum::<f64>() / n as f64;
    // Integer degrees: the variance is exact-zero for regular graphs.
    let var = degrees
        .iter()
        .map(|&d| {
            let diff = d as f64 - mean;
            diff * diff
        })
        .sum::<f64>()
        / n as f64;
    Ok(var.sqrt() * scale)
}

/// Computes the four topology features, running community detection with `seed`.
pub fn topology_features(graph: &DailyGraph, seed: u64) -> Result<TopologyFeatures, FeatureError> {
    let partition = detect_communities(graph, seed)?;
    Ok(TopologyFeatures {
        n_components: count_components(graph)?,
        largest_component_ratio: largest_component_ratio(graph)?,
        modularity: modularity(graph, &partition)?,
        degree_centrality_std: degree_centrality_std(graph)?,
    })
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn component_counts() {
        assert_eq!(count_components(&two_triangles()).unwrap(), 2);
        assert_eq!(count_components(&star(4)).unwrap(), 1);
        assert_eq!(count_components(&graph(6, &[(0, 1), (2, 3), (4, 5)])).unwrap(), 3);
    }

    #[test]
    fn largest_component_ratios() {
        assert_eq!(largest_component_ratio(&two_triangles()).unwrap(), 0.5);
        assert_eq!(largest_component_ratio(&star(4)).unwrap(), 1.0);
        assert_eq!(
            largest_component_ratio(&graph(5, &[(0, 1), (1, 2), (2, 0), (3, 4)])).unwrap(),
            0.6
        );
    }

    #[test]
    fn empty_graph_errors() {
        let empty = DailyGraph::from_pairs(day(), 0, &[]).unwrap();
        assert_eq!(count_components(&empty), Err(FeatureError::EmptyGraph));
        assert_eq!(largest_component_ratio(&empty), Err(FeatureError::EmptyGraph));
        assert_eq!(degree_centrality_std(&empty), Err(FeatureError::TooFewNodes(0)));
    }

    #[test]
    fn centrality_std_values() {
        assert_eq!(degree_centrality_std(&cycle(4)).unwrap(), 0.0);
        assert!((degree_centrality_std(&path(3)).unwrap() - (1.0f64 / 18.0).sqrt()).abs() < 1e-12);
        assert!((degree_centrality_std(&star(4)).unwrap() - 0.3).abs() < 1e-12);
        assert_eq!(degree_centrality_std(&two_triangles()).unwrap(), 0.0);
    }

    #[test]
    fn directions_as_printed() {
        use Direction::*;
        assert_eq!(FEATURE_DIRECTIONS, [Up, Down, Up, Down, Up, Down]);
    }
}
