//! Undirected weighted simple graph of one UTC day of transfers.

use std::collections::HashMap;

use chrono::NaiveDate;
use primitive_types::U256;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::records::TransferRecord;
use crate::address::Address;

/// Dense node index inside one [`DailyGraph`].
pub type NodeId = u32;

/// An undirected edge with `a < b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    /// Sum of transfer values between the pair, both directions.
    #[serde(with = "crate::util::u256_dec")]
    pub weight: U256,
    /// Number of transfers between the pair.
    pub count: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("empty day")]
    EmptyDay,
    #[error("record on {found} does not belong to day {expected}")]
    WrongDay { expected: NaiveDate, found: NaiveDate },
    #[error("null address in graph input")]
    NullAddress,
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(NodeId, NodeId),
    #[error("edge endpoint {0} out of range ({1} nodes)")]
    NodeOutOfRange(NodeId, usize),
    #[error("duplicate node address {0}")]
    DuplicateNode(Address),
    #[error("node {0} has no incident edge")]
    IsolatedNode(NodeId),
    #[error("edge weight overflow")]
    WeightOverflow,
    #[error("graph too large for 32-bit node ids")]
    TooLarge,
}

/// Immutable daily transfer graph.
///
/// Nodes are interned in order of first appearance. Edges are stored once
/// per unordered pair, in order of first appearance, together with a CSR
/// adjacency used by the topology algorithms.
#[derive(Debug, Clone)]
pub struct DailyGraph {
    day: NaiveDate,
    nodes: Vec<Address>,
    index: HashMap<Address, NodeId>,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
    neighbors: Vec<NodeId>,
}

impl PartialEq for DailyGraph {
    fn eq(&self, other: &Self) -> bool {
        self.day == other.day && self.nodes == other.nodes && self.edges == other.edges
    }
}

impl Eq for DailyGraph {}

impl DailyGraph {
    /// Builds a graph from already-aggregated parts, checking every invariant.
    pub fn from_parts(day: NaiveDate, nodes: Vec<Address>, mut edges: Vec<Edge>) -> Result<Self, GraphError> {
        let n = nodes.len();
        if n > u32::MAX as usize {
            return Err(GraphError::TooLarge);
        }
        let mut index = HashMap::with_capacity(n);
        for (i, addr) in nodes.iter().enumerate() {
            if addr.is_null() {
                return Err(GraphError::NullAddress);
            }
            if index.insert(*addr, i as NodeId).is_some() {
                return Err(GraphError::DuplicateNode(*addr));
            }
        }
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        for e in edges.iter_mut() {
            if e.a == e.b {
                return Err(GraphError::SelfLoop(e.a));
            }
            if e.a > e.b {
                std::mem::swap(&mut e.a, &mut e.b);
            }
            if e.b as usize >= n {
                return Err(GraphError::NodeOutOfRange(e.b, n));
            }
            if !seen.insert(pair_key(e.a, e.b)) {
                return Err(GraphError::DuplicateEdge(e.a, e.b));
            }
        }
        let (offsets, neighbors) = csr(n, &edges);
        if let Some(v) = (0..n).find(|&v| offsets[v] == offsets[v + 1]) {
            return Err(GraphError::IsolatedNode(v as NodeId));
        }
        Ok(DailyGraph {
            day,
            nodes,
            index,
            edges,
            offsets,
            neighbors,
        })
    }

    /// Unit-weight graph over synthetic addresses, one per node id.
    ///
    /// Node `i` gets [`Address::synthetic(i)`]; duplicate pairs and
    /// self-loops are rejected like any other input.
    pub fn from_pairs(day: NaiveDate, node_count: usize, pairs: &[(NodeId, NodeId)]) -> Result<Self, GraphError> {
        let nodes = (0..node_count as u64).map(Address::synthetic).collect();
        let edges = pairs
            .iter()
            .map(|&(a, b)| Edge {
                a,
                b,
                weight: U256::one(),
                count: 1,
            })
            .collect();
        Self::from_parts(day, nodes, edges)
    }

    pub fn day(&self) -> NaiveDate {
        self.day
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Address] {
        &self.nodes
    }

    pub fn address(&self, node: NodeId) -> Address {
        self.nodes[node as usize]
    }

    pub fn node_of(&self, address: &Address) -> Option<NodeId> {
        self.index.get(address).copied()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        let v = node as usize;
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Unweighted degree (neighbor count).
    pub fn degree(&self, node: NodeId) -> usize {
        let v = node as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        let (small, large) = if self.degree(a) <= self.degree(b) {
            (a, b)
        } else {
            (b, a)
        };
        self.neighbors(small).contains(&large)
    }

    pub fn total_weight(&self) -> U256 {
        self.edges
            .iter()
            .fold(U256::zero(), |acc, e| acc.saturating_add(e.weight))
    }

    pub fn transfer_count(&self) -> u64 {
        self.edges.iter().map(|e| e.count).sum()
    }
}

pub(crate) fn pair_key(a: NodeId, b: NodeId) -> u64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    ((lo as u64) << 32) | hi as u64
}

fn csr(n: usize, edges: &[Edge]) -> (Vec<usize>, Vec<NodeId>) {
    let mut offsets = vec![0usize; n + 1];
    for e in edges {
        offsets[e.a as usize + 1] += 1;
        offsets[e.b as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut cursor = offsets.clone();
    let mut neighbors = vec![0; 2 * edges.len()];
    for e in edges {
        neighbors[cursor[e.a as usize]] = e.b;
        cursor[e.a as usize] += 1;
        neighbors[cursor[e.b as usize]] = e.a;
        cursor[e.b as usize] += 1;
    }
    (offsets, neighbors)
}

/// Incremental builder folding one day's records into a [`DailyGraph`].
#[derive(Debug)]
pub struct GraphBuilder {
    day: NaiveDate,
    nodes: Vec<Address>,
    index: HashMap<Address, NodeId>,
    edges: Vec<Edge>,
    edge_index: HashMap<u64, usize>,
}

impl GraphBuilder {
    pub fn new(day: NaiveDate) -> Self {
        GraphBuilder {
            day,
            nodes: Vec::new(),
            index: HashMap::new(),
            edges: Vec::new(),
            edge_index: HashMap::new(),
        }
    }

    pub fn day(&self) -> NaiveDate {
        self.day
    }

    fn intern(&mut self, address: Address) -> Result<NodeId, GraphError> {
        if let Some(&id) = self.index.get(&address) {
            return Ok(id);
        }
        let id = NodeId::try_from(self.nodes.len()).map_err(|_| GraphError::TooLarge)?;
        self.nodes.push(address);
        self.index.insert(address, id);
        Ok(id)
    }

    /// Adds one filtered transfer. Direction is discarded.
    pub fn push(&mut self, record: &TransferRecord) -> Result<(), GraphError> {
        let found = record.timestamp.date_naive();
        if found != self.day {
            return Err(GraphError::WrongDay {
                expected: self.day,
                found,
            });
        }
        if record.from_address.is_null() || record.to_address.is_null() {
            return Err(GraphError::NullAddress);
        }
        let a = self.intern(record.from_address)?;
        let b = self.intern(record.to_address)?;
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        let key = pair_key(a, b);
        match self.edge_index.get(&key) {
            Some(&i) => {
                let e = &mut self.edges[i];
                e.weight = e.weight.checked_add(record.value).ok_or(GraphError::WeightOverflow)?;
                e.count += 1;
            }
            None => {
                self.edge_index.insert(key, self.edges.len());
                self.edges.push(Edge {
                    a: a.min(b),
                    b: a.max(b),
                    weight: record.value,
                    count: 1,
                });
            }
        }
        Ok(())
    }

    pub fn finish(self) -> Result<DailyGraph, GraphError> {
        if self.edges.is_empty() {
            return Err(GraphError::EmptyDay);
        }
        let (offsets, neighbors) = csr(self.nodes.len(), &self.edges);
        Ok(DailyGraph {
            day: self.day,
            nodes: self.nodes,
            index: self.index,
            edges: self.edges,
            offsets,
            neighbors,
        })
    }
}

/// Builds the graph for one day's filtered records.
pub fn build_daily_graph(day: NaiveDate, day_records: &[TransferRecord]) -> Result<DailyGraph, GraphError> {
    let mut builder = GraphBuilder::new(day);
    for r in day_records {
        builder.push(r)?;
    }
    builder.finish()
}
