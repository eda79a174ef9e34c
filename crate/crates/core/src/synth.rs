//! Seeded synthetic benchmarks: planted partitions with optional chain and
//! tendril decorations, plus the classic ring-of-cliques fixture.
//!
//! Communities are Erdős–Rényi inside (redrawn until connected, so Jaccard
//! scores against the planted groups stay meaningful) and Bernoulli across.
//! Decorations mimic the tunnel configurations seen in router maps: degree-2
//! paths grafted between existing nodes, with affiliations chosen per
//! configuration. Everything is a pure function of spec + seed.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{AffiliationMap, Graph, GraphBuilder};
use crate::matching::{GroundTruth, Group};
use crate::preprocess::ChainTaxonomy;

/// Affiliation rule for planted chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecorationTaxonomy {
    /// Endpoints in one group, interior affiliated to the same group.
    InternalConnection,
    /// Endpoints in one group, interior unaffiliated.
    InternalTunnel,
    /// Endpoints in different groups, interior unaffiliated.
    InterAsTunnel,
    /// Pick one of the three rows per chain.
    Mixed,
}

impl DecorationTaxonomy {
    pub fn name(self) -> &'static str {
        match self {
            DecorationTaxonomy::InternalConnection => "internal_connection",
            DecorationTaxonomy::InternalTunnel => "internal_tunnel",
            DecorationTaxonomy::InterAsTunnel => "inter_as_tunnel",
            DecorationTaxonomy::Mixed => "mixed",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "internal_connection" => DecorationTaxonomy::InternalConnection,
            "internal_tunnel" => DecorationTaxonomy::InternalTunnel,
            "inter_as_tunnel" => DecorationTaxonomy::InterAsTunnel,
            "mixed" => DecorationTaxonomy::Mixed,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown chain taxonomy `{other}`"
                )))
            }
        })
    }
}

/// Planted-partition description.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub sizes: Vec<u32>,
    pub p_in: f64,
    pub p_out: f64,
    pub chains: u32,
    pub chain_len_min: u32,
    pub chain_len_max: u32,
    pub chain_taxonomy: DecorationTaxonomy,
    pub tendrils: u32,
    pub tendril_len_min: u32,
    pub tendril_len_max: u32,
    pub seed: u64,
}

impl SynthSpec {
    /// Plain planted partition without decorations.
    pub fn planted(sizes: Vec<u32>, p_in: f64, p_out: f64, seed: u64) -> Self {
        SynthSpec {
            sizes,
            p_in,
            p_out,
            chains: 0,
            chain_len_min: 1,
            chain_len_max: 3,
            chain_taxonomy: DecorationTaxonomy::Mixed,
            tendrils: 0,
            tendril_len_min: 1,
            tendril_len_max: 3,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::InvalidParameter("no community sizes".into()));
        }
        if self.sizes.iter().any(|&s| s < 3) {
            return Err(Error::InvalidParameter(
                "community sizes must be at least 3".into(),
            ));
        }
        if !(self.p_in > 0.0 && self.p_in <= 1.0 && self.p_out >= 0.0 && self.p_out < self.p_in)
        {
            return Err(Error::InvalidParameter(
                "need 0 <= p_out < p_in <= 1".into(),
            ));
        }
        if self.chain_len_min < 1 || self.chain_len_min > self.chain_len_max {
            return Err(Error::InvalidParameter("bad chain length range".into()));
        }
        if self.tendril_len_min < 1 || self.tendril_len_min > self.tendril_len_max {
            return Err(Error::InvalidParameter("bad tendril length range".into()));
        }
        Ok(())
    }

    /// Flat `key=value` spec file.
    pub fn write_text(&self, out: &mut dyn Write) -> Result<()> {
        writeln!(out, "version=1")?;
        let sizes: Vec<String> = self.sizes.iter().map(u32::to_string).collect();
        writeln!(out, "sizes={}", sizes.join(","))?;
        writeln!(out, "p_in={}", self.p_in)?;
        writeln!(out, "p_out={}", self.p_out)?;
        writeln!(out, "chains={}", self.chains)?;
        writeln!(out, "chain_len_min={}", self.chain_len_min)?;
        writeln!(out, "chain_len_max={}", self.chain_len_max)?;
        writeln!(out, "chain_taxonomy={}", self.chain_taxonomy.name())?;
        writeln!(out, "tendrils={}", self.tendrils)?;
        writeln!(out, "tendril_len_min={}", self.tendril_len_min)?;
        writeln!(out, "tendril_len_max={}", self.tendril_len_max)?;
        writeln!(out, "seed={}", self.seed)?;
        Ok(())
    }

    pub fn read_text(reader: impl BufRead) -> Result<Self> {
        let mut map: HashMap<String, String> = HashMap::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (k, v) = trimmed
                .split_once('=')
                .ok_or_else(|| Error::parse(lineno + 1, "expected key=value"))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        match map.get("version").map(String::as_str) {
            Some("1") => {}
            Some(v) => {
                return Err(Error::InvalidParameter(format!(
                    "unsupported spec version {v}"
                )))
            }
            None => return Err(Error::InvalidParameter("spec file missing version".into())),
        }
        let get = |key: &str| -> Result<&String> {
            map.get(key)
                .ok_or_else(|| Error::InvalidParameter(format!("spec file missing `{key}`")))
        };
        let parse_num = |key: &str, value: &str| -> Result<f64> {
            value
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad value for `{key}`")))
        };
        let sizes = get("sizes")?
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::InvalidParameter(format!("bad size `{s}`")))
            })
            .collect::<Result<Vec<u32>>>()?;
        let opt_u32 = |key: &str, default: u32| -> Result<u32> {
            map.get(key)
                .map(|v| {
                    v.parse::<u32>()
                        .map_err(|_| Error::InvalidParameter(format!("bad value for `{key}`")))
                })
                .unwrap_or(Ok(default))
        };
        let spec = SynthSpec {
            sizes,
            p_in: parse_num("p_in", get("p_in")?)?,
            p_out: parse_num("p_out", get("p_out")?)?,
            chains: opt_u32("chains", 0)?,
            chain_len_min: opt_u32("chain_len_min", 1)?,
            chain_len_max: opt_u32("chain_len_max", 3)?,
            chain_taxonomy: map
                .get("chain_taxonomy")
                .map(|s| DecorationTaxonomy::parse(s))
                .unwrap_or(Ok(DecorationTaxonomy::Mixed))?,
            tendrils: opt_u32("tendrils", 0)?,
            tendril_len_min: opt_u32("tendril_len_min", 1)?,
            tendril_len_max: opt_u32("tendril_len_max", 3)?,
            seed: map
                .get("seed")
                .map(|v| {
                    v.parse::<u64>()
                        .map_err(|_| Error::InvalidParameter("bad seed".into()))
                })
                .unwrap_or(Ok(0))?,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// One planted chain with its ground-truth taxonomy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedChain {
    pub taxonomy: ChainTaxonomy,
    pub endpoint_a: u32,
    pub endpoint_b: u32,
    pub interior: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedTendril {
    pub attach: u32,
    /// Path nodes from the attachment outward; the last has degree 1.
    pub nodes: Vec<u32>,
}

/// A generated benchmark with its full ground truth.
#[derive(Debug)]
pub struct SynthOutput {
    pub graph: Graph,
    pub affiliations: AffiliationMap,
    pub ground_truth: GroundTruth,
    pub planted_chains: Vec<PlantedChain>,
    pub planted_tendrils: Vec<PlantedTendril>,
}

const CONNECTIVITY_RETRIES: usize = 100;

/// Erdős–Rényi edges over `0..n` via geometric jumps through the pair space.
fn gnp_edges(n: u64, p: f64, rng: &mut ChaCha8Rng) -> Vec<(u64, u64)> {
    let mut edges = Vec::new();
    if n < 2 || p <= 0.0 {
        return edges;
    }
    if p >= 1.0 {
        for v in 1..n {
            for w in 0..v {
                edges.push((w, v));
            }
        }
        return edges;
    }
    let log_q = (1.0 - p).ln();
    let mut v: u64 = 1;
    let mut w: i64 = -1;
    loop {
        let r: f64 = rng.random();
        let skip = ((1.0 - r).ln() / log_q).floor() as i64;
        w += 1 + skip;
        while v < n && w >= v as i64 {
            w -= v as i64;
            v += 1;
        }
        if v >= n {
            return edges;
        }
        edges.push((w as u64, v));
    }
}

fn is_connected(n: usize, edges: &[(u64, u64)]) -> bool {
    if n == 0 {
        return true;
    }
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a as usize].push(b as usize);
        adj[b as usize].push(a as usize);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == n
}

/// Generate a planted-partition graph with decorations and its ground truth.
pub fn generate(spec: &SynthSpec) -> Result<SynthOutput> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let core_n: u64 = spec.sizes.iter().map(|&s| s as u64).sum();
    let mut community_of: Vec<u32> = Vec::with_capacity(core_n as usize);
    let mut offsets = Vec::with_capacity(spec.sizes.len());
    {
        let mut off = 0u64;
        for (j, &s) in spec.sizes.iter().enumerate() {
            offsets.push(off);
            community_of.extend(std::iter::repeat_n(j as u32, s as usize));
            off += s as u64;
        }
    }

    let mut builder = GraphBuilder::with_numeric_nodes(core_n as usize);

    // Internal blocks, redrawn until connected.
    for (j, &s) in spec.sizes.iter().enumerate() {
        let off = offsets[j];
        let mut accepted = None;
        for _ in 0..CONNECTIVITY_RETRIES {
            let edges = gnp_edges(s as u64, spec.p_in, &mut rng);
            if is_connected(s as usize, &edges) {
                accepted = Some(edges);
                break;
            }
        }
        let edges = accepted.ok_or_else(|| {
            Error::Synthesis(format!(
                "community {j} (size {s}) stayed disconnected after \
                 {CONNECTIVITY_RETRIES} draws; raise p_in"
            ))
        })?;
        for (a, b) in edges {
            builder.add_edge((off + a) as u32, (off + b) as u32);
        }
    }

    // Cross-community edges: Bernoulli over the whole pair space, keeping
    // only pairs that straddle communities (intra pairs discard their coin).
    if spec.p_out > 0.0 {
        for (a, b) in gnp_edges(core_n, spec.p_out, &mut rng) {
            if community_of[a as usize] != community_of[b as usize] {
                builder.add_edge(a as u32, b as u32);
            }
        }
    }

    // Group tokens g0, g1, ... in community order.
    let mut affiliations: Vec<Option<String>> = (0..core_n)
        .map(|v| Some(format!("g{}", community_of[v as usize])))
        .collect();

    let planted_chains = plant_chains(
        spec,
        &mut builder,
        &mut affiliations,
        &offsets,
        &mut rng,
    )?;
    let planted_tendrils = plant_tendrils(spec, &mut builder, &mut affiliations, core_n, &mut rng);

    let (graph, _) = builder.build();
    let mut aff = AffiliationMap::empty(graph.node_count());
    for (v, group) in affiliations.iter().enumerate() {
        if let Some(gr) = group {
            aff.set(v as u32, gr);
        }
    }

    let ground_truth = GroundTruth::from_groups(
        spec.sizes
            .iter()
            .enumerate()
            .map(|(j, &s)| Group {
                token: format!("g{j}"),
                nodes: (offsets[j]..offsets[j] + s as u64).map(|v| v as u32).collect(),
            })
            .collect(),
    );

    Ok(SynthOutput {
        graph,
        affiliations: aff,
        ground_truth,
        planted_chains,
        planted_tendrils,
    })
}

fn plant_chains(
    spec: &SynthSpec,
    builder: &mut GraphBuilder,
    affiliations: &mut Vec<Option<String>>,
    offsets: &[u64],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<PlantedChain>> {
    let mut planted = Vec::with_capacity(spec.chains as usize);
    if spec.chains == 0 {
        return Ok(planted);
    }
    let rows = [
        ChainTaxonomy::InternalConnection,
        ChainTaxonomy::InternalTunnel,
        ChainTaxonomy::InterAsTunnel,
    ];
    for _ in 0..spec.chains {
        let taxonomy = match spec.chain_taxonomy {
            DecorationTaxonomy::InternalConnection => ChainTaxonomy::InternalConnection,
            DecorationTaxonomy::InternalTunnel => ChainTaxonomy::InternalTunnel,
            DecorationTaxonomy::InterAsTunnel => ChainTaxonomy::InterAsTunnel,
            DecorationTaxonomy::Mixed => *rows.choose(rng).unwrap(),
        };
        let (a, b, group) = match taxonomy {
            ChainTaxonomy::InterAsTunnel => {
                if spec.sizes.len() < 2 {
                    return Err(Error::Synthesis(
                        "inter-group chains need at least two communities".into(),
                    ));
                }
                let ja = rng.random_range(0..spec.sizes.len());
                let jb = loop {
                    let j = rng.random_range(0..spec.sizes.len());
                    if j != ja {
                        break j;
                    }
                };
                let a = offsets[ja] + rng.random_range(0..spec.sizes[ja] as u64);
                let b = offsets[jb] + rng.random_range(0..spec.sizes[jb] as u64);
                (a as u32, b as u32, None)
            }
            _ => {
                let j = rng.random_range(0..spec.sizes.len());
                let a = rng.random_range(0..spec.sizes[j] as u64);
                let b = loop {
                    let b = rng.random_range(0..spec.sizes[j] as u64);
                    if b != a {
                        break b;
                    }
                };
                (
                    (offsets[j] + a) as u32,
                    (offsets[j] + b) as u32,
                    Some(format!("g{j}")),
                )
            }
        };
        let len = rng.random_range(spec.chain_len_min..=spec.chain_len_max);
        let mut interior = Vec::with_capacity(len as usize);
        let mut prev = a;
        for _ in 0..len {
            let v = builder.push_node();
            affiliations.push(match taxonomy {
                ChainTaxonomy::InternalConnection => group.clone(),
                _ => None,
            });
            builder.add_edge(prev, v);
            interior.push(v);
            prev = v;
        }
        builder.add_edge(prev, b);
        planted.push(PlantedChain {
            taxonomy,
            endpoint_a: a,
            endpoint_b: b,
            interior,
        });
    }
    Ok(planted)
}

fn plant_tendrils(
    spec: &SynthSpec,
    builder: &mut GraphBuilder,
    affiliations: &mut Vec<Option<String>>,
    core_n: u64,
    rng: &mut ChaCha8Rng,
) -> Vec<PlantedTendril> {
    let mut planted = Vec::with_capacity(spec.tendrils as usize);
    for _ in 0..spec.tendrils {
        let attach = rng.random_range(0..core_n) as u32;
        let len = rng.random_range(spec.tendril_len_min..=spec.tendril_len_max);
        let mut nodes = Vec::with_capacity(len as usize);
        let mut prev = attach;
        for _ in 0..len {
            let v = builder.push_node();
            affiliations.push(None);
            builder.add_edge(prev, v);
            nodes.push(v);
            prev = v;
        }
        planted.push(PlantedTendril { attach, nodes });
    }
    planted
}

/// The classic resolution-limit fixture: `cliques` complete graphs of
/// `clique_size` nodes arranged in a ring, consecutive cliques joined by a
/// single edge. Ground-truth groups are the cliques.
pub fn ring_of_cliques(cliques: usize, clique_size: usize) -> (Graph, AffiliationMap) {
    assert!(cliques >= 3 && clique_size >= 3);
    let n = cliques * clique_size;
    let mut builder = GraphBuilder::with_numeric_nodes(n);
    for c in 0..cliques {
        let off = c * clique_size;
        for i in 0..clique_size {
            for j in i + 1..clique_size {
                builder.add_edge((off + i) as u32, (off + j) as u32);
            }
        }
        // Last node of this clique to the first node of the next.
        let from = off + clique_size - 1;
        let to = ((c + 1) % cliques) * clique_size;
        builder.add_edge(from as u32, to as u32);
    }
    let (graph, _) = builder.build();
    let mut aff = AffiliationMap::empty(n);
    for v in 0..n {
        aff.set(v as u32, &format!("clique{}", v / clique_size));
    }
    (graph, aff)
}

/// Ground-truth manifest: one `group node node ...` line per group.
pub fn write_ground_truth_manifest(
    gt: &GroundTruth,
    graph: &Graph,
    out: &mut dyn Write,
) -> Result<()> {
    for group in gt.groups() {
        write!(out, "{}", group.token)?;
        for &v in &group.nodes {
            write!(out, " {}", graph.token(v))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Planted-decoration manifest, one line per chain/tendril.
pub fn write_decoration_manifest(
    chains: &[PlantedChain],
    tendrils: &[PlantedTendril],
    graph: &Graph,
    out: &mut dyn Write,
) -> Result<()> {
    for c in chains {
        write!(
            out,
            "chain {} {} {}",
            c.taxonomy.name(),
            graph.token(c.endpoint_a),
            graph.token(c.endpoint_b)
        )?;
        for &v in &c.interior {
            write!(out, " {}", graph.token(v))?;
        }
        writeln!(out)?;
    }
    for t in tendrils {
        write!(out, "tendril {}", graph.token(t.attach))?;
        for &v in &t.nodes {
            write!(out, " {}", graph.token(v))?;
        }
        writeln!(out)?;
    }
    Ok(())
}
