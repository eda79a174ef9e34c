//! Shared test oracles, kept deliberately naive and independent of the
//! library's incremental data structures.
#![allow(dead_code)] // each test binary uses its own subset

use std::collections::{HashMap, HashSet};

use deltacom_core::engine::weak_optimality_check_exact;
use deltacom_core::graph::GraphBuilder;
use deltacom_core::{Dendrogram, Graph, MergeEvent, PartitionState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Direct evaluation of modularity from its defining double sum
/// `(1/2m) Σ_ij [A_ij − k_i·k_j/2m] δ(c_i, c_j)`.
pub fn naive_modularity(graph: &Graph, labels: &[u32]) -> f64 {
    let two_m = 2.0 * graph.edge_count() as f64;
    let n = graph.node_count() as u32;
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i as usize] != labels[j as usize] {
                continue;
            }
            let a_ij = if i != j && graph.has_edge(i, j) { 1.0 } else { 0.0 };
            q += a_ij - graph.degree(i) as f64 * graph.degree(j) as f64 / two_m;
        }
    }
    q / two_m
}

/// Enumerate every set partition of `n` elements as label vectors
/// (restricted growth strings). Bell(8) = 4140, so this stays tiny.
pub fn all_partitions(n: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut labels = vec![0u32; n];
    fn rec(labels: &mut Vec<u32>, pos: usize, max_used: u32, out: &mut Vec<Vec<u32>>) {
        if pos == labels.len() {
            out.push(labels.clone());
            return;
        }
        for c in 0..=max_used + 1 {
            labels[pos] = c;
            rec(labels, pos + 1, max_used.max(c), out);
        }
    }
    if n == 0 {
        return vec![vec![]];
    }
    labels[0] = 0;
    rec(&mut labels, 1, 0, &mut out);
    out
}

/// Naive quadratic-state reimplementation of the multiresolution greedy
/// optimizer: dense cut map, full rescan per merge, the same zero-gain merge
/// rule (`t = e(C,C')·m/(k_C·k_C')`) and `(min id, max id)` tie-break.
/// Returns the merge sequence as `(t_num, t_den, a, b, result)` with
/// unreduced stamps.
pub fn naive_multires(graph: &Graph) -> Vec<(u128, u128, u32, u32, u32)> {
    let n = graph.node_count() as u32;
    let m = graph.edge_count() as u128;
    let mut k: HashMap<u32, u64> = (0..n).map(|v| (v, graph.degree(v) as u64)).collect();
    let mut cut: HashMap<(u32, u32), u64> = HashMap::new();
    for (i, j) in graph.edges() {
        cut.insert((i, j), 2);
    }
    let mut next_id = n;
    let mut events = Vec::new();

    loop {
        // Full rescan: the best pair is the one maximizing
        // e(C,C')·2m/(k_C·k_C'), ties to the lexicographically smallest ids.
        let mut best: Option<(u128, u128, u32, u32)> = None;
        for (&(a, b), &e) in &cut {
            let num = e as u128 * m;
            let den = k[&a] as u128 * k[&b] as u128;
            let better = match best {
                None => true,
                Some((bn, bd, ba, bb)) => {
                    let lhs = num * bd;
                    let rhs = bn * den;
                    lhs > rhs || (lhs == rhs && (a, b) < (ba, bb))
                }
            };
            if better {
                best = Some((num, den, a, b));
            }
        }
        let Some((num, den, a, b)) = best else { break };
        let result = next_id;
        next_id += 1;
        events.push((num, den, a, b, result));

        // Merge b into a fresh id: rebuild the cut map the slow way.
        let k_result = k[&a] + k[&b];
        k.remove(&a);
        k.remove(&b);
        k.insert(result, k_result);
        let mut new_cut: HashMap<(u32, u32), u64> = HashMap::new();
        for (&(x, y), &e) in &cut {
            if (x, y) == (a, b) {
                continue; // interior now
            }
            let mx = if x == a || x == b { result } else { x };
            let my = if y == a || y == b { result } else { y };
            let key = (mx.min(my), mx.max(my));
            *new_cut.entry(key).or_insert(0) += e;
        }
        cut = new_cut;
    }
    events
}

/// Compare an engine event stream against the naive oracle's, as exact
/// rationals.
pub fn assert_same_merges(events: &[MergeEvent], oracle: &[(u128, u128, u32, u32, u32)]) {
    assert_eq!(events.len(), oracle.len(), "merge counts differ");
    for (ev, &(num, den, a, b, result)) in events.iter().zip(oracle) {
        assert_eq!((ev.a, ev.b, ev.result), (a, b, result), "merge {}", ev.ordinal);
        // Cross-multiplied equality: the engine reduces its fractions.
        assert_eq!(
            ev.t.num * den,
            num * ev.t.den,
            "stamp differs at merge {}",
            ev.ordinal
        );
    }
}

/// Seeded random simple graph with `n` nodes and edge probability `p`,
/// discarding graphs without edges.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    loop {
        let mut builder = GraphBuilder::with_numeric_nodes(n);
        for i in 0..n as u32 {
            for j in i + 1..n as u32 {
                if rng.random::<f64>() < p {
                    builder.add_edge(i, j);
                }
            }
        }
        let (graph, _) = builder.build();
        if graph.edge_count() > 0 {
            return graph;
        }
    }
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Check that `coarse` is obtained from `fine` by merging whole communities.
pub fn assert_refines(fine: &[u32], coarse: &[u32]) {
    let mut map: HashMap<u32, u32> = HashMap::new();
    for i in 0..fine.len() {
        match map.get(&fine[i]) {
            Some(&c) => assert_eq!(c, coarse[i], "node {i} breaks nesting"),
            None => {
                map.insert(fine[i], coarse[i]);
            }
        }
    }
}

/// All distinct labels of a partition.
pub fn distinct(labels: &[u32]) -> HashSet<u32> {
    labels.iter().copied().collect()
}

/// The full battery of structural dendrogram checks:
/// non-increasing resolutions, nesting across breakpoints, weak optimality
/// of every interval (verified against a from-scratch recount), classical Q
/// maximal at the interval containing t = 1, and termination at one
/// community per connected component.
pub fn check_dendrogram_invariants(graph: &Graph, d: &Dendrogram) {
    for w in d.events().windows(2) {
        assert!(w[1].t <= w[0].t, "resolution increased");
    }

    let singletons: Vec<u32> = (0..graph.node_count() as u32).collect();
    let mut breakpoints: Vec<Vec<u32>> = vec![singletons.clone()];
    for p in 0..d.phase_count() {
        breakpoints.push(d.labels_after_phase(p));
    }
    for w in breakpoints.windows(2) {
        assert_refines(&w[0], &w[1]);
    }

    // Weak optimality: the singleton partition on [t_max, ∞), each phase's
    // partition on (next stamp, stamp], the final one on {t_min}.
    assert!(
        weak_optimality_check_exact(graph, &singletons, d.t_max()).is_none(),
        "singleton interval not optimal"
    );
    for p in 0..d.phase_count() {
        let t_lo = if p + 1 < d.phase_count() {
            d.phase_stamp(p + 1)
        } else {
            d.t_min()
        };
        if let Some(witness) = weak_optimality_check_exact(graph, &breakpoints[p + 1], t_lo) {
            panic!(
                "phase {p} interval not weakly optimal: pair ({}, {}) ratio {}",
                witness.a, witness.b, witness.ratio
            );
        }
    }

    // Classical Q peaks at the interval containing t = 1.
    let q1 = PartitionState::from_labels(graph, &d.labels_at(1.0))
        .modularity()
        .unwrap();
    for labels in &breakpoints {
        let q = PartitionState::from_labels(graph, labels).modularity().unwrap();
        assert!(q <= q1 + 1e-12, "breakpoint Q {q} exceeds Q at t=1 {q1}");
    }

    // Terminal partition: exactly the connected components.
    let (component_count, component) = graph.connected_components();
    let terminal = breakpoints.last().unwrap();
    assert_eq!(distinct(terminal).len(), component_count);
    let mut comp_to_label: HashMap<u32, u32> = HashMap::new();
    for v in 0..graph.node_count() {
        match comp_to_label.get(&component[v]) {
            Some(&l) => assert_eq!(l, terminal[v], "component split across communities"),
            None => {
                comp_to_label.insert(component[v], terminal[v]);
            }
        }
    }
}
