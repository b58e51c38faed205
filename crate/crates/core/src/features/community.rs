//! Louvain community detection and Newman modularity on the unweighted topology.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::FeatureError;
use crate::ingest::DailyGraph;
use crate::util::mix_seed;

/// Assignment of every node to one community; ids are contiguous from 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    community_of: Vec<u32>,
    count: usize,
}

impl Partition {
    /// Validates that ids are exactly `0..k` for some `k`.
    pub fn new(community_of: Vec<u32>) -> Result<Self, FeatureError> {
        let count = community_of.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
        let mut used = vec![false; count];
        for &c in &community_of {
            used[c as usize] = true;
        }
        if used.iter().any(|u| !u) {
            return Err(FeatureError::PartitionIds);
        }
        Ok(Partition { community_of, count })
    }

    /// Relabels arbitrary ids by order of first appearance.
    pub fn from_labels<T: Eq + std::hash::Hash + Copy>(labels: &[T]) -> Self {
        let mut ids = HashMap::new();
        let community_of = labels
            .iter()
            .map(|l| {
                let next = ids.len() as u32;
                *ids.entry(*l).or_insert(next)
            })
            .collect();
        Partition {
            community_of,
            count: ids.len(),
        }
    }

    pub fn singletons(n: usize) -> Self {
        Partition {
            community_of: (0..n as u32).collect(),
            count: n,
        }
    }

    pub fn all_in_one(n: usize) -> Self {
        Partition {
            community_of: vec![0; n],
            count: usize::from(n > 0),
        }
    }

    pub fn community_of(&self) -> &[u32] {
        &self.community_of
    }

    pub fn community(&self, node: u32) -> u32 {
        self.community_of[node as usize]
    }

    pub fn len(&self) -> usize {
        self.community_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.community_of.is_empty()
    }

    pub fn community_count(&self) -> usize {
        self.count
    }
}

/// `Q = Σ_c [ e_c/m − (d_c/2m)² ]` with `e_c` intra-community edges and `d_c`
/// the degree total of community `c`.
pub fn modularity(graph: &DailyGraph, partition: &Partition) -> Result<f64, FeatureError> {
    if partition.len() != graph.node_count() {
        return Err(FeatureError::PartitionSize {
            expected: graph.node_count(),
            got: partition.len(),
        });
    }
    let m = graph.edge_count();
    if m == 0 {
        return Err(FeatureError::UndefinedModularity);
    }
    let k = partition.community_count();
    let mut internal = vec![0u64; k];
    let mut degree = vec![0u64; k];
    for e in graph.edges() {
        let (ca, cb) = (partition.community(e.a), partition.community(e.b));
        if ca == cb {
            internal[ca as usize] += 1;
        }
        degree[ca as usize] += 1;
        degree[cb as usize] += 1;
    }
    let m = m as f64;
    Ok(internal
        .iter()
        .zip(&degree)
        .map(|(&e, &d)| {
            let share = d as f64 / (2.0 * m);
            e as f64 / m - share * share
        })
        .sum())
}

/// Weighted multigraph for one Louvain level. Self-loop weight counts once
/// per loop; `strength` includes twice the loop weight.
struct Level {
    adj: Vec<Vec<(u32, f64)>>,
    loops: Vec<f64>,
    strength: Vec<f64>,
}

impl Level {
    fn from_graph(graph: &DailyGraph) -> Self {
        let n = graph.node_count();
        let adj: Vec<Vec<(u32, f64)>> = (0..n as u32)
            .map(|v| graph.neighbors(v).iter().map(|&w| (w, 1.0)).collect())
            .collect();
        let strength = adj.iter().map(|a| a.len() as f64).collect();
        Level {
            adj,
            loops: vec![0.0; n],
            strength,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    /// Local moving phase. Returns community per node and whether anything moved.
    fn local_moves(&self, seed: u64) -> (Vec<u32>, bool) {
        const MAX_PASSES: usize = 256;
        const EPS: f64 = 1e-12;

        let n = self.len();
        let two_m: f64 = self.strength.iter().sum();
        let mut community: Vec<u32> = (0..n as u32).collect();
        let mut total: Vec<f64> = self.strength.clone();
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

        let mut link = vec![0.0f64; n];
        let mut touched: Vec<u32> = Vec::new();
        let mut any_move = false;

        for _ in 0..MAX_PASSES {
            let mut moved = false;
            for &v in &order {
                let vi = v as usize;
                let k = self.strength[vi];
                let home = community[vi];

                for &(w, weight) in &self.adj[vi] {
                    if w == v {
                        continue;
                    }
                    let c = community[w as usize];
                    if link[c as usize] == 0.0 {
                        touched.push(c);
                    }
                    link[c as usize] += weight;
                }

                total[home as usize] -= k;
                let gain = |c: u32, link_c: f64| link_c - total[c as usize] * k / two_m;
                let mut best = home;
                let mut best_gain = gain(home, link[home as usize]);
                for &c in &touched {
                    let g = gain(c, link[c as usize]);
                    if g > best_gain + EPS {
                        best = c;
                        best_gain = g;
                    }
                }
                total[best as usize] += k;
                if best != home {
                    community[vi] = best;
                    moved = true;
                }

                for &c in &touched {
                    link[c as usize] = 0.0;
                }
                touched.clear();
            }
            if !moved {
                break;
            }
            any_move = true;
        }
        (community, any_move)
    }

    /// Collapses communities into nodes. `community` must be dense.
    fn aggregate(&self, community: &[u32], count: usize) -> Level {
        let mut loops = vec![0.0; count];
        let mut strength = vec![0.0; count];
        let mut links: HashMap<(u32, u32), f64> = HashMap::new();
        for v in 0..self.len() {
            let cv = community[v];
            strength[cv as usize] += self.strength[v];
            loops[cv as usize] += self.loops[v];
            for &(w, weight) in &self.adj[v] {
                if (w as usize) < v {
                    continue;
                }
                let cw = community[w as usize];
                if cv == cw {
                    loops[cv as usize] += weight;
                } else {
                    *links.entry((cv.min(cw), cv.max(cw))).or_insert(0.0) += weight;
                }
            }
        }
        let mut pairs: Vec<_> = links.into_iter().collect();
        pairs.sort_by_key(|&(key, _)| key);
        let mut adj = vec![Vec::new(); count];
        for ((a, b), w) in pairs {
            adj[a as usize].push((b, w));
            adj[b as usize].push((a, w));
        }
        Level { adj, loops, strength }
    }
}

/// Multi-level Louvain (resolution 1) on the unweighted topology.
///
/// Node visiting order at each level is a permutation drawn from `seed`, so
/// the result is a deterministic function of the graph and the seed.
pub fn detect_communities(graph: &DailyGraph, seed: u64) -> Result<Partition, FeatureError> {
    let n = graph.node_count();
    if n == 0 {
        return Err(FeatureError::EmptyGraph);
    }
    if graph.edge_count() == 0 {
        return Ok(Partition::singletons(n));
    }
    let mut membership: Vec<u32> = (0..n as u32).collect();
    let mut level = Level::from_graph(graph);
    for depth in 0u64.. {
        let (community, moved) = level.local_moves(mix_seed(seed, depth));
        if !moved {
            break;
        }
        let dense = Partition::from_labels(&community);
        for m in membership.iter_mut() {
            *m = dense.community(*m);
        }
        level = level.aggregate(dense.community_of(), dense.community_count());
    }
    let found = Partition::from_labels(&membership);
    // Never return something worse than the trivial one-community split.
    if modularity(graph, &found)? < 0.0 {
        return Ok(Partition::all_in_one(n));
    }
    Ok(found)
}
