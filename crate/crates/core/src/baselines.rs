//! Single-resolution reference detectors: asynchronous label propagation and
//! a Louvain-style greedy modularity optimizer.
//!
//! Both are seeded and deterministic: node visit orders come from a ChaCha
//! stream and every tie-break is explicit.

use std::collections::HashMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::PartitionState;

/// Knobs shared by the baseline detectors.
#[derive(Debug, Clone, Copy)]
pub struct DetectorConfig {
    pub seed: u64,
    /// Cap on label-propagation sweeps / local-moving passes per level.
    pub max_sweeps: u32,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            seed: 0,
            max_sweeps: 100,
        }
    }
}

/// Asynchronous label propagation: every sweep visits the nodes in a fresh
/// random order and each node adopts the most frequent label among its
/// neighbours. A node whose current label is already among the most frequent
/// keeps it (the usual convergence criterion); otherwise the tie is broken
/// uniformly at random. Stops when a sweep changes nothing or `max_sweeps`
/// is reached.
pub fn label_propagation(graph: &Graph, cfg: &DetectorConfig) -> Result<PartitionState> {
    if graph.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    assert!(cfg.max_sweeps >= 1);
    let n = graph.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut labels: Vec<u32> = (0..n as u32).collect();
    let mut order: Vec<u32> = (0..n as u32).collect();
    let mut counts: HashMap<u32, u32> = HashMap::new();

    for _ in 0..cfg.max_sweeps {
        order.shuffle(&mut rng);
        let mut changes = 0usize;
        for &v in &order {
            let adj = graph.neighbors(v);
            if adj.is_empty() {
                continue;
            }
            counts.clear();
            for &w in adj {
                *counts.entry(labels[w as usize]).or_insert(0) += 1;
            }
            let max = *counts.values().max().unwrap();
            let current = labels[v as usize];
            if counts.get(&current) == Some(&max) {
                continue;
            }
            let mut tied: Vec<u32> = counts
                .iter()
                .filter(|&(_, &c)| c == max)
                .map(|(&l, _)| l)
                .collect();
            tied.sort_unstable(); // hash order is not deterministic
            labels[v as usize] = *tied.choose(&mut rng).unwrap();
            changes += 1;
        }
        if changes == 0 {
            break;
        }
    }
    Ok(PartitionState::from_labels(graph, &labels))
}

/// One level of the Louvain hierarchy, in "doubled" edge units: `adj`
/// holds twice the original edge count for each node pair and `internal`
/// twice the collapsed-away edges inside a supernode, so `k = internal +
/// Σ adj weights` is the exact original degree mass.
struct Level {
    adj: Vec<Vec<(u32, u64)>>,
    internal: Vec<u64>,
    k: Vec<u64>,
}

impl Level {
    fn from_graph(graph: &Graph) -> Level {
        let n = graph.node_count();
        let mut adj = Vec::with_capacity(n);
        for v in 0..n as u32 {
            adj.push(graph.neighbors(v).iter().map(|&w| (w, 2u64)).collect());
        }
        Level {
            internal: vec![0; n],
            k: (0..n as u32).map(|v| graph.degree(v) as u64).collect(),
            adj,
        }
    }

    fn len(&self) -> usize {
        self.k.len()
    }

    /// Local moving at this level. Returns the final membership and whether
    /// any node moved.
    fn local_moving(&self, two_m: u64, rng: &mut ChaCha8Rng, max_sweeps: u32) -> (Vec<u32>, bool) {
        let n = self.len();
        let mut membership: Vec<u32> = (0..n as u32).collect();
        let mut sigma_tot: Vec<u64> = self.k.clone();
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.shuffle(rng);
        let two_m = two_m as f64;

        let mut moved_any = false;
        let mut neighbor_weight: HashMap<u32, u64> = HashMap::new();
        for _ in 0..max_sweeps {
            let mut moves = 0usize;
            for &v in &order {
                let current = membership[v as usize];
                neighbor_weight.clear();
                for &(w, b) in &self.adj[v as usize] {
                    *neighbor_weight.entry(membership[w as usize]).or_insert(0) += b;
                }
                // Detach v, then compare the gain of re-entering the current
                // community against every neighbouring one.
                sigma_tot[current as usize] -= self.k[v as usize];
                let k_v = self.k[v as usize] as f64;
                let gain = |community: u32| {
                    let e_vc = neighbor_weight.get(&community).copied().unwrap_or(0) as f64;
                    e_vc - sigma_tot[community as usize] as f64 * k_v / two_m
                };
                let mut best = (gain(current), current);
                let mut candidates: Vec<u32> = neighbor_weight.keys().copied().collect();
                candidates.sort_unstable(); // hash order is not deterministic
                for c in candidates {
                    if c == current {
                        continue;
                    }
                    let g = gain(c);
                    // Move only on strict improvement; the smallest id wins
                    // among equal gains.
                    if g > best.0 {
                        best = (g, c);
                    }
                }
                sigma_tot[best.1 as usize] += self.k[v as usize];
                if best.1 != current {
                    membership[v as usize] = best.1;
                    moves += 1;
                    moved_any = true;
                }
            }
            if moves == 0 {
                break;
            }
        }
        (membership, moved_any)
    }

    /// Collapse communities into supernodes, relabelling them 0..C in
    /// ascending id order. Returns the new level and the compacted labels.
    fn aggregate(&self, membership: &[u32]) -> (Level, Vec<u32>) {
        let mut ids: Vec<u32> = membership.to_vec();
        ids.sort_unstable();
        ids.dedup();
        let compact: HashMap<u32, u32> = ids
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i as u32))
            .collect();
        let compacted: Vec<u32> = membership.iter().map(|c| compact[c]).collect();

        let count = ids.len();
        let mut internal = vec![0u64; count];
        let mut k = vec![0u64; count];
        let mut cut: HashMap<(u32, u32), u64> = HashMap::new();
        for v in 0..self.len() {
            let cv = compacted[v];
            internal[cv as usize] += self.internal[v];
            k[cv as usize] += self.k[v];
            for &(w, b) in &self.adj[v] {
                let cw = compacted[w as usize];
                if cv == cw {
                    // Ordered pairs double-count the doubled units: halving
                    // here keeps `internal` in the same units as `e_C`.
                    internal[cv as usize] += b / 2;
                } else if cv < cw {
                    *cut.entry((cv, cw)).or_insert(0) += b;
                }
            }
        }
        let mut adj = vec![Vec::new(); count];
        let mut pairs: Vec<(&(u32, u32), &u64)> = cut.iter().collect();
        pairs.sort_unstable();
        for (&(a, b), &w) in pairs {
            adj[a as usize].push((b, w));
            adj[b as usize].push((a, w));
        }
        for list in &mut adj {
            list.sort_unstable_by_key(|&(c, _)| c);
        }
        (Level { adj, internal, k }, compacted)
    }
}

/// Louvain-style two-phase greedy modularity optimization: seeded local
/// moving, then graph aggregation, repeated until no node moves. Returns the
/// partition of the original graph and its modularity.
pub fn louvain(graph: &Graph, cfg: &DetectorConfig) -> Result<(PartitionState, f64)> {
    if graph.node_count() == 0 || graph.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    assert!(cfg.max_sweeps >= 1);
    let two_m = 2 * graph.edge_count() as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut leaf_membership: Vec<u32> = (0..graph.node_count() as u32).collect();
    let mut level = Level::from_graph(graph);
    loop {
        let (membership, moved) = level.local_moving(two_m, &mut rng, cfg.max_sweeps);
        if !moved {
            break;
        }
        let (next, compacted) = level.aggregate(&membership);
        for slot in leaf_membership.iter_mut() {
            *slot = compacted[membership[*slot as usize] as usize];
        }
        if next.len() == level.len() {
            break; // no shrink: a further pass cannot progress
        }
        level = next;
    }

    let state = PartitionState::from_labels(graph, &leaf_membership);
    let q = state.modularity()?;
    Ok((state, q))
}
