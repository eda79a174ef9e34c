//! Graph cleaning for router-level topologies: 2-core extraction, degree-2
//! chain detection, chain taxonomy and chain collapse.
//!
//! Tendrils (degree-2 runs ending in a leaf) disappear with the k-core;
//! chains (degree-2 runs between higher-degree endpoints, typically tunnel
//! artifacts) are replaced by a single edge between their endpoints. Because
//! collapsing can expose new low-degree nodes, [`clean`] optionally iterates
//! the two steps to a fixpoint.

use std::io::Write;

use crate::error::Result;
use crate::graph::{AffiliationMap, Graph};

/// Maximal run of degree-2 nodes between two endpoints of degree ≠ 2.
///
/// Canonical form: `endpoint_a <= endpoint_b`, interior listed from the
/// `a` side. A lollipop (both endpoints the same node) is allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub endpoint_a: u32,
    pub endpoint_b: u32,
    pub interior: Vec<u32>,
}

/// Chain taxonomy relative to the endpoint/interior affiliations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChainTaxonomy {
    /// Every node shares one affiliation.
    InternalConnection,
    /// Endpoints share an affiliation, at least one interior node has none.
    InternalTunnel,
    /// Endpoints carry different affiliations (interior ignored).
    InterAsTunnel,
    /// Anything else, e.g. an unaffiliated endpoint.
    Other,
}

impl ChainTaxonomy {
    pub fn name(self) -> &'static str {
        match self {
            ChainTaxonomy::InternalConnection => "internal_connection",
            ChainTaxonomy::InternalTunnel => "internal_tunnel",
            ChainTaxonomy::InterAsTunnel => "inter_as_tunnel",
            ChainTaxonomy::Other => "other",
        }
    }

    pub const ALL: [ChainTaxonomy; 4] = [
        ChainTaxonomy::InternalConnection,
        ChainTaxonomy::InternalTunnel,
        ChainTaxonomy::InterAsTunnel,
        ChainTaxonomy::Other,
    ];

    fn index(self) -> usize {
        match self {
            ChainTaxonomy::InternalConnection => 0,
            ChainTaxonomy::InternalTunnel => 1,
            ChainTaxonomy::InterAsTunnel => 2,
            ChainTaxonomy::Other => 3,
        }
    }
}

/// Output of [`find_chains`]: chains plus any pure degree-2 cycles, which
/// have no endpoints and are handled separately at collapse time.
#[derive(Debug, Clone, Default)]
pub struct ChainSet {
    pub chains: Vec<Chain>,
    pub cycles: Vec<Vec<u32>>,
}

/// Maximal subgraph in which every node has degree at least `k`, found by
/// iterative peeling.
pub fn k_core(graph: &Graph, k: u32) -> Graph {
    let n = graph.node_count();
    let mut degree: Vec<u32> = (0..n as u32).map(|i| graph.degree(i)).collect();
    let mut removed = vec![false; n];
    let mut queue: Vec<u32> = (0..n as u32).filter(|&i| degree[i as usize] < k).collect();
    while let Some(v) = queue.pop() {
        if removed[v as usize] {
            continue;
        }
        removed[v as usize] = true;
        for &w in graph.neighbors(v) {
            if !removed[w as usize] {
                degree[w as usize] -= 1;
                if degree[w as usize] < k {
                    queue.push(w);
                }
            }
        }
    }
    let keep: Vec<bool> = removed.iter().map(|&r| !r).collect();
    graph.subgraph(&keep).0
}

/// Find all maximal degree-2 chains and pure degree-2 cycles.
///
/// Intended for graphs that are already a 2-core (no leaves), but tolerant of
/// anything: a degree-1 or degree-0 node simply ends a run like any other
/// non-degree-2 node. Every degree-2 node lands in exactly one chain or one
/// cycle.
pub fn find_chains(graph: &Graph) -> ChainSet {
    let n = graph.node_count();
    let is_interior = |v: u32| graph.degree(v) == 2;
    let mut visited = vec![false; n];
    let mut chains = Vec::new();
    let mut cycles = Vec::new();

    for start in 0..n as u32 {
        if !is_interior(start) || visited[start as usize] {
            continue;
        }
        // Walk away from `start` until a non-degree-2 node (an endpoint) or
        // `start` itself (a pure cycle) appears.
        let walk = |first: u32| -> (u32, Vec<u32>) {
            let mut path = Vec::new();
            let mut prev = start;
            let mut cur = first;
            while is_interior(cur) && cur != start {
                path.push(cur);
                let nb = graph.neighbors(cur);
                let next = if nb[0] == prev { nb[1] } else { nb[0] };
                prev = cur;
                cur = next;
            }
            (cur, path)
        };

        let nb = graph.neighbors(start);
        let (end_a, path_a) = walk(nb[0]);
        if end_a == start {
            // Walked all the way around: start plus path_a is the cycle.
            let mut cycle = vec![start];
            cycle.extend(&path_a);
            for &v in &cycle {
                visited[v as usize] = true;
            }
            cycles.push(canonical_cycle(cycle));
            continue;
        }
        let (end_b, path_b) = walk(nb[1]);
        debug_assert_ne!(end_b, start, "one-sided cycle");

        // Interior from the a side to the b side.
        let mut interior: Vec<u32> = path_a.into_iter().rev().collect();
        interior.push(start);
        interior.extend(&path_b);
        for &v in &interior {
            visited[v as usize] = true;
        }
        chains.push(canonical_chain(end_a, end_b, interior));
    }

    chains.sort_by(|x, y| {
        (x.endpoint_a, x.endpoint_b, &x.interior).cmp(&(y.endpoint_a, y.endpoint_b, &y.interior))
    });
    cycles.sort_by_key(|c| c[0]);
    ChainSet { chains, cycles }
}

fn canonical_chain(end_a: u32, end_b: u32, mut interior: Vec<u32>) -> Chain {
    if end_b < end_a {
        interior.reverse();
        return Chain {
            endpoint_a: end_b,
            endpoint_b: end_a,
            interior,
        };
    }
    if end_a == end_b {
        // Lollipop: orientation is arbitrary, pick the smaller sequence.
        let mut rev = interior.clone();
        rev.reverse();
        if rev < interior {
            interior = rev;
        }
    }
    Chain {
        endpoint_a: end_a,
        endpoint_b: end_b,
        interior,
    }
}

fn canonical_cycle(cycle: Vec<u32>) -> Vec<u32> {
    let min_pos = cycle
        .iter()
        .enumerate()
        .min_by_key(|&(_, v)| v)
        .map(|(i, _)| i)
        .unwrap();
    let len = cycle.len();
    let forward: Vec<u32> = (0..len).map(|i| cycle[(min_pos + i) % len]).collect();
    let backward: Vec<u32> = (0..len).map(|i| cycle[(min_pos + len - i) % len]).collect();
    if forward <= backward {
        forward
    } else {
        backward
    }
}

/// Classify a chain against the affiliation map.
pub fn classify_chain(chain: &Chain, aff: &AffiliationMap) -> ChainTaxonomy {
    let ga = aff.group(chain.endpoint_a);
    let gb = aff.group(chain.endpoint_b);
    let (ga, gb) = match (ga, gb) {
        (Some(a), Some(b)) => (a, b),
        _ => return ChainTaxonomy::Other,
    };
    if ga != gb {
        return ChainTaxonomy::InterAsTunnel;
    }
    let interior_groups: Vec<Option<u32>> =
        chain.interior.iter().map(|&v| aff.group(v)).collect();
    if interior_groups.iter().all(|&g| g == Some(ga)) {
        ChainTaxonomy::InternalConnection
    } else if interior_groups.iter().any(|g| g.is_none()) {
        ChainTaxonomy::InternalTunnel
    } else {
        ChainTaxonomy::Other
    }
}

/// Counters produced by [`collapse_chains`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CollapseStats {
    pub interior_nodes_removed: usize,
    pub cycles_removed: usize,
    pub cycle_nodes_removed: usize,
    /// Chain replacement edges that duplicated an existing edge or another
    /// chain's replacement (parallel chains collapse to one edge).
    pub chain_edges_deduped: u64,
    /// Chains whose endpoints coincide; the would-be self-loop is suppressed.
    pub lollipops_suppressed: u64,
}

/// Remove chain interiors and degree-2 cycles, bridging each chain's
/// endpoints with a single (deduplicated) edge.
pub fn collapse_chains(graph: &Graph, chains: &ChainSet) -> (Graph, CollapseStats) {
    let n = graph.node_count();
    let mut keep = vec![true; n];
    let mut stats = CollapseStats::default();
    for chain in &chains.chains {
        for &v in &chain.interior {
            keep[v as usize] = false;
        }
        stats.interior_nodes_removed += chain.interior.len();
    }
    for cycle in &chains.cycles {
        for &v in cycle {
            keep[v as usize] = false;
        }
        stats.cycles_removed += 1;
        stats.cycle_nodes_removed += cycle.len();
    }

    let mut builder = crate::graph::GraphBuilder::new();
    let mut remap = vec![None; n];
    for (i, &k) in keep.iter().enumerate() {
        if k {
            remap[i] = Some(builder.intern(graph.token(i as u32)));
        }
    }
    for (a, b) in graph.edges() {
        if let (Some(x), Some(y)) = (remap[a as usize], remap[b as usize]) {
            builder.add_edge(x, y);
        }
    }
    for chain in &chains.chains {
        let a = remap[chain.endpoint_a as usize].expect("endpoints are kept");
        let b = remap[chain.endpoint_b as usize].expect("endpoints are kept");
        if a == b {
            stats.lollipops_suppressed += 1;
        }
        builder.add_edge(a, b);
    }
    let (collapsed, report) = builder.build();
    stats.chain_edges_deduped = report.duplicate_edges_dropped;
    (collapsed, stats)
}

/// Joint distribution of (degree = 2, has affiliation) with the φ
/// correlation coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Contingency {
    /// `counts[d][a]`: d = 1 for degree-2 nodes, a = 1 for affiliated nodes.
    pub counts: [[u64; 2]; 2],
    pub n: u64,
    /// `None` when a marginal is empty, making φ undefined.
    pub phi: Option<f64>,
}

impl Contingency {
    /// Cell probabilities in the same layout as `counts`.
    pub fn cells(&self) -> [[f64; 2]; 2] {
        let n = self.n as f64;
        [
            [self.counts[0][0] as f64 / n, self.counts[0][1] as f64 / n],
            [self.counts[1][0] as f64 / n, self.counts[1][1] as f64 / n],
        ]
    }
}

/// Tabulate the (degree-2, affiliated) joint distribution over all nodes.
pub fn degree2_affiliation_contingency(graph: &Graph, aff: &AffiliationMap) -> Contingency {
    let mut counts = [[0u64; 2]; 2];
    for i in 0..graph.node_count() as u32 {
        let d = usize::from(graph.degree(i) == 2);
        let a = usize::from(aff.group(i).is_some());
        counts[d][a] += 1;
    }
    let n = graph.node_count() as u64;
    let row1 = counts[1][0] + counts[1][1]; // degree-2
    let row0 = counts[0][0] + counts[0][1];
    let col1 = counts[0][1] + counts[1][1]; // affiliated
    let col0 = counts[0][0] + counts[1][0];
    let phi = if row0 == 0 || row1 == 0 || col0 == 0 || col1 == 0 {
        None
    } else {
        let num = counts[1][1] as f64 * counts[0][0] as f64
            - counts[1][0] as f64 * counts[0][1] as f64;
        let den = (row1 as f64 * row0 as f64 * col1 as f64 * col0 as f64).sqrt();
        Some(num / den)
    };
    Contingency { counts, n, phi }
}

/// Everything the cleaning pipeline observed, cumulative across iterations.
#[derive(Debug, Clone)]
pub struct CleaningReport {
    pub nodes_before: usize,
    pub edges_before: usize,
    pub nodes_removed_kcore: usize,
    pub chains_found: usize,
    pub taxonomy_counts: [usize; 4],
    pub cycles_removed: usize,
    pub chain_edges_deduped: u64,
    pub lollipops_suppressed: u64,
    pub iterations: usize,
    pub nodes_after: usize,
    pub edges_after: usize,
    pub affiliation_coverage_after: f64,
    /// Joint (degree-2, affiliated) distribution on the first k-core, before
    /// any collapse.
    pub contingency: Contingency,
}

impl CleaningReport {
    pub fn taxonomy_count(&self, t: ChainTaxonomy) -> usize {
        self.taxonomy_counts[t.index()]
    }

    /// Flat `key=value` serialization.
    pub fn write_text(&self, out: &mut dyn Write) -> Result<()> {
        writeln!(out, "nodes_before={}", self.nodes_before)?;
        writeln!(out, "edges_before={}", self.edges_before)?;
        writeln!(out, "nodes_removed_kcore={}", self.nodes_removed_kcore)?;
        writeln!(out, "chains_found={}", self.chains_found)?;
        for t in ChainTaxonomy::ALL {
            writeln!(out, "chains_{}={}", t.name(), self.taxonomy_count(t))?;
        }
        writeln!(out, "cycles_removed={}", self.cycles_removed)?;
        writeln!(out, "chain_edges_deduped={}", self.chain_edges_deduped)?;
        writeln!(out, "lollipops_suppressed={}", self.lollipops_suppressed)?;
        writeln!(out, "iterations={}", self.iterations)?;
        writeln!(out, "nodes_after={}", self.nodes_after)?;
        writeln!(out, "edges_after={}", self.edges_after)?;
        writeln!(
            out,
            "affiliation_coverage_after={:.6}",
            self.affiliation_coverage_after
        )?;
        let cells = self.contingency.cells();
        writeln!(out, "contingency_deg2_aff={:.6}", cells[1][1])?;
        writeln!(out, "contingency_deg2_noaff={:.6}", cells[1][0])?;
        writeln!(out, "contingency_other_aff={:.6}", cells[0][1])?;
        writeln!(out, "contingency_other_noaff={:.6}", cells[0][0])?;
        match self.contingency.phi {
            Some(phi) => writeln!(out, "contingency_phi={phi:.6}")?,
            None => writeln!(out, "contingency_phi=undefined")?,
        }
        Ok(())
    }

    /// Taxonomy counts as CSV.
    pub fn write_taxonomy_csv(&self, out: &mut dyn Write) -> Result<()> {
        writeln!(out, "taxonomy,count")?;
        for t in ChainTaxonomy::ALL {
            writeln!(out, "{},{}", t.name(), self.taxonomy_count(t))?;
        }
        Ok(())
    }
}

/// The full cleaning pipeline: k-core, then chain classification and
/// collapse, iterated to a fixpoint when `iterate` is set (collapsing can
/// expose new leaves and new degree-2 runs).
pub fn clean(
    graph: &Graph,
    aff: &AffiliationMap,
    k: u32,
    iterate: bool,
) -> (Graph, AffiliationMap, CleaningReport) {
    let mut report = CleaningReport {
        nodes_before: graph.node_count(),
        edges_before: graph.edge_count(),
        nodes_removed_kcore: 0,
        chains_found: 0,
        taxonomy_counts: [0; 4],
        cycles_removed: 0,
        chain_edges_deduped: 0,
        lollipops_suppressed: 0,
        iterations: 0,
        nodes_after: 0,
        edges_after: 0,
        affiliation_coverage_after: 0.0,
        contingency: Contingency {
            counts: [[0; 2]; 2],
            n: 0,
            phi: None,
        },
    };

    let mut current = graph.clone();
    let mut current_aff = aff.clone();
    loop {
        let core = k_core(&current, k);
        report.nodes_removed_kcore += current.node_count() - core.node_count();
        let core_aff = current_aff.project(&current, &core);
        if report.iterations == 0 {
            report.contingency = degree2_affiliation_contingency(&core, &core_aff);
        }

        let chains = find_chains(&core);
        let stable = core.node_count() == current.node_count()
            && chains.chains.is_empty()
            && chains.cycles.is_empty();

        for chain in &chains.chains {
            report.taxonomy_counts[classify_chain(chain, &core_aff).index()] += 1;
        }
        report.chains_found += chains.chains.len();

        let (collapsed, stats) = collapse_chains(&core, &chains);
        let collapsed_aff = core_aff.project(&core, &collapsed);
        report.cycles_removed += stats.cycles_removed;
        report.chain_edges_deduped += stats.chain_edges_deduped;
        report.lollipops_suppressed += stats.lollipops_suppressed;
        report.iterations += 1;

        current = collapsed;
        current_aff = collapsed_aff;
        if stable || !iterate {
            break;
        }
    }

    report.nodes_after = current.node_count();
    report.edges_after = current.edge_count();
    report.affiliation_coverage_after = current_aff.coverage();
    (current, current_aff, report)
}
