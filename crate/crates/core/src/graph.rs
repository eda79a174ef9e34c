//! Compact undirected simple graphs with optional node affiliations.
//!
//! Graphs are stored in CSR form with sorted neighbor lists. Nodes get dense
//! internal indices in first-seen order; the external tokens they were loaded
//! with live in a side table so files round-trip. Self-loops and parallel
//! edges are dropped on ingest (with counts reported): the modularity
//! machinery downstream assumes a simple graph.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use flate2::bufread::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use crate::error::{Error, Result};

/// Immutable undirected simple graph.
#[derive(Debug, Clone)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Graph {
    pub fn node_count(&self) -> usize {
        self.tokens.len()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn degree(&self, i: u32) -> u32 {
        (self.offsets[i as usize + 1] - self.offsets[i as usize]) as u32
    }

    /// Sorted neighbor list of `i`.
    pub fn neighbors(&self, i: u32) -> &[u32] {
        &self.neighbors[self.offsets[i as usize]..self.offsets[i as usize + 1]]
    }

    pub fn has_edge(&self, i: u32, j: u32) -> bool {
        self.neighbors(i).binary_search(&j).is_ok()
    }

    pub fn token(&self, i: u32) -> &str {
        &self.tokens[i as usize]
    }

    pub fn index_of(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    /// All edges as `(i, j)` pairs with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.node_count() as u32)
            .flat_map(move |i| self.neighbors(i).iter().map(move |&j| (i, j)))
            .filter(|&(i, j)| i < j)
    }

    /// Node subgraph. Returns the new graph and the old→new index map.
    pub fn subgraph(&self, keep: &[bool]) -> (Graph, Vec<Option<u32>>) {
        assert_eq!(keep.len(), self.node_count());
        let mut remap = vec![None; self.node_count()];
        let mut builder = GraphBuilder::new();
        for (i, &k) in keep.iter().enumerate() {
            if k {
                remap[i] = Some(builder.intern(&self.tokens[i]));
            }
        }
        for (a, b) in self.edges() {
            if let (Some(x), Some(y)) = (remap[a as usize], remap[b as usize]) {
                builder.add_edge(x, y);
            }
        }
        (builder.build().0, remap)
    }

    /// Connected components: count plus a per-node component label.
    pub fn connected_components(&self) -> (usize, Vec<u32>) {
        let n = self.node_count();
        let mut label = vec![u32::MAX; n];
        let mut count = 0u32;
        let mut stack = Vec::new();
        for start in 0..n as u32 {
            if label[start as usize] != u32::MAX {
                continue;
            }
            label[start as usize] = count;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for &w in self.neighbors(v) {
                    if label[w as usize] == u32::MAX {
                        label[w as usize] = count;
                        stack.push(w);
                    }
                }
            }
            count += 1;
        }
        (count as usize, label)
    }

    /// Verify the structural invariants: symmetric sorted adjacency with no
    /// self-loops or duplicates, and `Σ degree = 2m`.
    pub fn check_invariants(&self) -> Result<()> {
        let mut total = 0usize;
        for i in 0..self.node_count() as u32 {
            let adj = self.neighbors(i);
            total += adj.len();
            for w in adj.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::InvalidParameter(format!(
                        "adjacency of node {i} not strictly sorted"
                    )));
                }
            }
            for &j in adj {
                if j == i {
                    return Err(Error::InvalidParameter(format!("self-loop at node {i}")));
                }
                if !self.has_edge(j, i) {
                    return Err(Error::InvalidParameter(format!(
                        "edge {i}->{j} not symmetric"
                    )));
                }
            }
        }
        if total != 2 * self.edge_count() {
            return Err(Error::InvalidParameter(
                "degree sum does not equal 2m".into(),
            ));
        }
        Ok(())
    }
}

/// Ingest counters from [`GraphBuilder::build`] and the file loaders.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct LoadReport {
    pub duplicate_edges_dropped: u64,
    pub self_loops_dropped: u64,
    /// Affiliation lines naming a node absent from the graph.
    pub affiliations_skipped: u64,
}

/// Incremental construction of a [`Graph`].
pub struct GraphBuilder {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
    edges: Vec<(u32, u32)>,
    self_loops_dropped: u64,
}

impl Default for GraphBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl GraphBuilder {
    pub fn new() -> Self {
        GraphBuilder {
            tokens: Vec::new(),
            index: HashMap::new(),
            edges: Vec::new(),
            self_loops_dropped: 0,
        }
    }

    /// Builder pre-populated with nodes `0..n` whose tokens are their indices.
    pub fn with_numeric_nodes(n: usize) -> Self {
        let mut b = Self::new();
        for i in 0..n {
            b.intern(&i.to_string());
        }
        b
    }

    pub fn node_count(&self) -> usize {
        self.tokens.len()
    }

    /// Index of `token`, creating the node on first sight.
    pub fn intern(&mut self, token: &str) -> u32 {
        if let Some(&i) = self.index.get(token) {
            return i;
        }
        let i = self.tokens.len() as u32;
        self.tokens.push(token.to_string());
        self.index.insert(token.to_string(), i);
        i
    }

    /// Append a fresh node with the next numeric token.
    pub fn push_node(&mut self) -> u32 {
        let mut k = self.tokens.len();
        loop {
            let tok = k.to_string();
            if !self.index.contains_key(&tok) {
                return self.intern(&tok);
            }
            k += 1;
        }
    }

    pub fn add_edge(&mut self, a: u32, b: u32) {
        if a == b {
            self.self_loops_dropped += 1;
            return;
        }
        self.edges.push((a.min(b), a.max(b)));
    }

    pub fn add_edge_tokens(&mut self, a: &str, b: &str) {
        let x = self.intern(a);
        let y = self.intern(b);
        self.add_edge(x, y);
    }

    pub fn build(mut self) -> (Graph, LoadReport) {
        self.edges.sort_unstable();
        let before = self.edges.len();
        self.edges.dedup();
        let report = LoadReport {
            duplicate_edges_dropped: (before - self.edges.len()) as u64,
            self_loops_dropped: self.self_loops_dropped,
            affiliations_skipped: 0,
        };

        let n = self.tokens.len();
        let mut deg = vec![0usize; n];
        for &(a, b) in &self.edges {
            deg[a as usize] += 1;
            deg[b as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut acc = 0usize;
        offsets.push(0);
        for d in &deg {
            acc += d;
            offsets.push(acc);
        }
        let mut cursor = offsets.clone();
        let mut neighbors = vec![0u32; acc];
        for &(a, b) in &self.edges {
            neighbors[cursor[a as usize]] = b;
            cursor[a as usize] += 1;
            neighbors[cursor[b as usize]] = a;
            cursor[b as usize] += 1;
        }
        // Per-node lists are filled in increasing order of the far endpoint
        // for the forward direction but not for the reverse, so sort.
        for i in 0..n {
            neighbors[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        (
            Graph {
                offsets,
                neighbors,
                tokens: self.tokens,
                index: self.index,
            },
            report,
        )
    }
}

/// Per-node group membership (e.g. an AS number), aligned with a graph's
/// internal indices.
#[derive(Debug, Clone)]
pub struct AffiliationMap {
    group_of: Vec<Option<u32>>,
    group_tokens: Vec<String>,
    group_index: HashMap<String, u32>,
}

impl AffiliationMap {
    pub fn empty(n: usize) -> Self {
        AffiliationMap {
            group_of: vec![None; n],
            group_tokens: Vec::new(),
            group_index: HashMap::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.group_of.len()
    }

    pub fn group(&self, i: u32) -> Option<u32> {
        self.group_of[i as usize]
    }

    pub fn group_token(&self, g: u32) -> &str {
        &self.group_tokens[g as usize]
    }

    pub fn group_count(&self) -> usize {
        self.group_tokens.len()
    }

    pub fn group_index_of(&self, token: &str) -> Option<u32> {
        self.group_index.get(token).copied()
    }

    pub fn set(&mut self, node: u32, group_token: &str) {
        let g = match self.group_index.get(group_token) {
            Some(&g) => g,
            None => {
                let g = self.group_tokens.len() as u32;
                self.group_tokens.push(group_token.to_string());
                self.group_index.insert(group_token.to_string(), g);
                g
            }
        };
        self.group_of[node as usize] = Some(g);
    }

    /// Fraction of nodes carrying an affiliation.
    pub fn coverage(&self) -> f64 {
        if self.group_of.is_empty() {
            return 0.0;
        }
        let with = self.group_of.iter().filter(|g| g.is_some()).count();
        with as f64 / self.group_of.len() as f64
    }

    /// Re-aim the map at a different graph over (a subset of) the same
    /// external tokens, e.g. after 2-core extraction or chain collapse.
    pub fn project(&self, old: &Graph, new: &Graph) -> AffiliationMap {
        let mut out = AffiliationMap::empty(new.node_count());
        for i in 0..new.node_count() as u32 {
            if let Some(old_i) = old.index_of(new.token(i)) {
                if let Some(g) = self.group_of[old_i as usize] {
                    out.set(i, &self.group_tokens[g as usize]);
                }
            }
        }
        out
    }
}

/// Open a text stream, transparently decompressing gzip (detected from the
/// magic bytes, not the file name).
pub fn open_text(path: &Path) -> Result<Box<dyn BufRead>> {
    let file = File::open(path)?;
    let mut reader = BufReader::new(file);
    let magic = {
        let buf = reader.fill_buf()?;
        buf.len() >= 2 && buf[0] == 0x1f && buf[1] == 0x8b
    };
    if magic {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(reader))))
    } else {
        Ok(Box::new(reader))
    }
}

/// Create a text sink, gzip-compressing when the path ends in `.gz`.
pub fn create_text(path: &Path) -> Result<Box<dyn Write>> {
    let file = File::create(path)?;
    if path.extension().is_some_and(|e| e == "gz") {
        Ok(Box::new(BufWriter::new(GzEncoder::new(
            file,
            Compression::default(),
        ))))
    } else {
        Ok(Box::new(BufWriter::new(file)))
    }
}

pub(crate) fn parse_two_tokens(line: &str, lineno: usize) -> Result<Option<(&str, &str)>> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let mut it = trimmed.split_whitespace();
    let a = it.next();
    let b = it.next();
    let extra = it.next();
    match (a, b, extra) {
        (Some(a), Some(b), None) => Ok(Some((a, b))),
        _ => Err(Error::parse(lineno, format!("expected two tokens: `{trimmed}`"))),
    }
}

/// Load a graph from an edge-list stream: one edge per line, two
/// whitespace-separated tokens, `#` comments ignored.
pub fn load_edge_list_from(reader: impl BufRead) -> Result<(Graph, LoadReport)> {
    let mut builder = GraphBuilder::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if let Some((a, b)) = parse_two_tokens(&line, lineno + 1)? {
            builder.add_edge_tokens(a, b);
        }
    }
    Ok(builder.build())
}

/// Load an affiliation stream (`node_token group_token` per line) against an
/// existing graph. Lines naming unknown nodes are skipped and counted.
pub fn load_affiliations_from(
    reader: impl BufRead,
    graph: &Graph,
) -> Result<(AffiliationMap, u64)> {
    let mut aff = AffiliationMap::empty(graph.node_count());
    let mut skipped = 0u64;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if let Some((node, group)) = parse_two_tokens(&line, lineno + 1)? {
            match graph.index_of(node) {
                Some(i) => aff.set(i, group),
                None => skipped += 1,
            }
        }
    }
    Ok((aff, skipped))
}

/// Load a graph and, optionally, its affiliations from files (plain or gzip).
pub fn load_edge_list(
    graph_path: &Path,
    affiliation_path: Option<&Path>,
) -> Result<(Graph, AffiliationMap, LoadReport)> {
    let (graph, mut report) = load_edge_list_from(open_text(graph_path)?)?;
    let aff = match affiliation_path {
        Some(p) => {
            let (aff, skipped) = load_affiliations_from(open_text(p)?, &graph)?;
            report.affiliations_skipped = skipped;
            aff
        }
        None => AffiliationMap::empty(graph.node_count()),
    };
    Ok((graph, aff, report))
}

/// Write the canonical edge list: `(i, j)` with `i < j` in index order.
pub fn write_edge_list(graph: &Graph, out: &mut dyn Write) -> Result<()> {
    for (i, j) in graph.edges() {
        writeln!(out, "{} {}", graph.token(i), graph.token(j))?;
    }
    Ok(())
}

/// Write affiliations for every affiliated node, in index order.
pub fn write_affiliations(
    graph: &Graph,
    aff: &AffiliationMap,
    out: &mut dyn Write,
) -> Result<()> {
    for i in 0..graph.node_count() as u32 {
        if let Some(g) = aff.group(i) {
            writeln!(out, "{} {}", graph.token(i), aff.group_token(g))?;
        }
    }
    Ok(())
}
