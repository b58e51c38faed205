//! Discrete core-periphery detection.
//!
//! The ideal pattern has a complete core, an empty periphery block and
//! unconstrained core-periphery pairs. Its error for a core of size `k` is
//!
//! ```text
//! Z = C(k,2) − e_cc + e_pp = C(k,2) + m − Σ_{v ∈ core} deg(v)
//! ```
//!
//! because every edge touching the core is counted in the degree sum once if
//! it crosses and twice if it is internal. For a fixed `k` the error is
//! therefore minimized by the `k` highest-degree nodes, and scanning degree
//! prefixes finds the global optimum.

mod rewire;
mod significance;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::address::Address;
use crate::ingest::{DailyGraph, NodeId};

pub use rewire::{rewire_configuration_model, Rewired};
pub use significance::{significance_test, NullModel, NullModelConfig, Significance, UntestedPolicy};

#[derive(Debug, Error, PartialEq)]
pub enum CoreError {
    #[error("core node {0} is not in the graph ({1} nodes)")]
    UnknownNode(NodeId, usize),
    #[error("address {0} is not in the graph")]
    UnknownAddress(Address),
    #[error("replicates must be at least 1")]
    NoReplicates,
    #[error("alpha must lie in (0, 1), got {0}")]
    BadAlpha(f64),
}

fn choose2(k: u64) -> u64 {
    k * k.saturating_sub(1) / 2
}

/// Borgatti–Everett error of a candidate core, counted edge by edge.
///
/// Missing core-core pairs plus present periphery-periphery edges.
/// Duplicate ids in `core` are counted once.
pub fn borgatti_everett_error(graph: &DailyGraph, core: &[NodeId]) -> Result<u64, CoreError> {
    let n = graph.node_count();
    let mut in_core = vec![false; n];
    for &v in core {
        if v as usize >= n {
            return Err(CoreError::UnknownNode(v, n));
        }
        in_core[v as usize] = true;
    }
    let k = in_core.iter().filter(|&&c| c).count() as u64;
    let (mut core_core, mut periphery) = (0u64, 0u64);
    for e in graph.edges() {
        match (in_core[e.a as usize], in_core[e.b as usize]) {
            (true, true) => core_core += 1,
            (false, false) => periphery += 1,
            _ => {}
        }
    }
    Ok(choose2(k) - core_core + periphery)
}

/// Maps addresses to node ids for [`borgatti_everett_error`] and friends.
pub fn core_nodes(graph: &DailyGraph, core: &[Address]) -> Result<Vec<NodeId>, CoreError> {
    core.iter()
        .map(|a| graph.node_of(a).ok_or(CoreError::UnknownAddress(*a)))
        .collect()
}

/// Nodes by degree descending, ties by ascending address.
pub fn degree_order(graph: &DailyGraph) -> Vec<NodeId> {
    let mut order: Vec<NodeId> = (0..graph.node_count() as NodeId).collect();
    order.sort_by(|&x, &y| {
        graph
            .degree(y)
            .cmp(&graph.degree(x))
            .then_with(|| graph.address(x).cmp(&graph.address(y)))
    });
    order
}

/// Scans all prefix sizes of a descending degree sequence.
///
/// Returns the smallest `k` reaching the minimum error, and that error.
pub(crate) fn best_prefix<I: IntoIterator<Item = usize>>(degrees_desc: I, edge_count: usize) -> (usize, u64) {
    let m = edge_count as i128;
    let mut best = (0usize, m);
    let mut sum = 0i128;
    for (i, d) in degrees_desc.into_iter().enumerate() {
        let k = (i + 1) as i128;
        sum += d as i128;
        let z = k * (k - 1) / 2 + m - sum;
        if z < best.1 {
            best = (i + 1, z);
        }
    }
    (best.0, best.1 as u64)
}

/// Core chosen as the error-minimizing degree prefix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LipPartition {
    /// Core nodes in degree order.
    pub core: Vec<NodeId>,
    pub z_error: u64,
}

impl LipPartition {
    pub fn core_addresses(&self, graph: &DailyGraph) -> Vec<Address> {
        let mut out: Vec<Address> = self.core.iter().map(|&v| graph.address(v)).collect();
        out.sort();
        out
    }
}

/// Detects the core in `O(m + n log n)`.
pub fn lip_partition(graph: &DailyGraph) -> LipPartition {
    let order = degree_order(graph);
    let (k, z_error) = best_prefix(order.iter().map(|&v| graph.degree(v)), graph.edge_count());
    LipPartition {
        core: order[..k].to_vec(),
        z_error,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoreMetrics {
    pub n_core: usize,
    /// Mean unnormalized degree over core nodes; 0 for an empty core.
    pub avg_core_degree: f64,
}

pub fn core_metrics(graph: &DailyGraph, core: &[NodeId]) -> CoreMetrics {
    if core.is_empty() {
        return CoreMetrics {
            n_core: 0,
            avg_core_degree: 0.0,
        };
    }
    let total: usize = core.iter().map(|&v| graph.degree(v)).sum();
    CoreMetrics {
        n_core: core.len(),
        avg_core_degree: total as f64 / core.len() as f64,
    }
}

/// Which core metrics feed the feature vector.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorePolicy {
    /// Zero the core metrics on days whose structure is not significant.
    #[default]
    Filtered,
    /// Always use the detected core.
    Raw,
}

/// Per-day detection outcome, serialized for downstream address profiling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorePeripheryResult {
    pub day: chrono::NaiveDate,
    /// Detected core, ascending by address.
    pub core: Vec<Address>,
    pub z_error: u64,
    pub p_value: Option<f64>,
    pub significant: bool,
    /// `|core|`.
    pub n_core: usize,
    pub avg_core_degree: f64,
}

impl CorePeripheryResult {
    /// Core metrics after applying `policy`.
    pub fn feature_metrics(&self, policy: CorePolicy) -> CoreMetrics {
        match policy {
            CorePolicy::Filtered if !self.significant => CoreMetrics {
                n_core: 0,
                avg_core_degree: 0.0,
            },
            _ => CoreMetrics {
                n_core: self.n_core,
                avg_core_degree: self.avg_core_degree,
            },
        }
    }

    /// Core addresses counted under `policy`.
    pub fn effective_core(&self, policy: CorePolicy) -> &[Address] {
        match policy {
            CorePolicy::Filtered if !self.significant => &[],
            _ => &self.core,
        }
    }
}

/// Detection plus optional significance testing for one day.
///
/// With `run_test == false` no null model is sampled, `p_value` is absent and
/// `significant` follows `config.untested`.
pub fn analyze_core(
    graph: &DailyGraph,
    config: &NullModelConfig,
    run_test: bool,
) -> Result<CorePeripheryResult, CoreError> {
    config.validate()?;
    let lip = lip_partition(graph);
    let metrics = core_metrics(graph, &lip.core);
    let p_value = if run_test {
        significance_test(graph, &lip, config)?.p_value
    } else {
        None
    };
    let significant = match p_value {
        Some(p) => p < config.alpha,
        None => config.untested == UntestedPolicy::Significant,
    };
    Ok(CorePeripheryResult {
        day: graph.day(),
        core: lip.core_addresses(graph),
        z_error: lip.z_error,
        p_value,
        significant,
        n_core: metrics.n_core,
        avg_core_degree: metrics.avg_core_degree,
    })
}
