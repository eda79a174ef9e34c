//! Ground-truth evaluation: Jaccard matching of communities against node
//! groups, the recall scores R1/R2/R3, the size–resolution regression and
//! sample-based retrieval, plus strong/relaxed community diagnostics.
//!
//! * R1 scores a single partition: per group, the best Jaccard similarity
//!   over its communities.
//! * R2 scores a whole dendrogram: the best similarity over every community
//!   of every breakpoint partition, together with the resolution where that
//!   community appears.
//! * R3 retrieves a group from a small node sample: the resolution is
//!   predicted from the group's size via the fitted size–resolution line,
//!   the best community is selected against the sample only, and the score
//!   is still measured against the full group.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::engine::Dendrogram;
use crate::error::{Error, Result};
use crate::graph::{parse_two_tokens, AffiliationMap, Graph};

/// Groups smaller than this are reported but flagged as noise-prone.
pub const SMALL_GROUP_FLAG: u32 = 5;

/// One ground-truth group: an external token and its member nodes.
#[derive(Debug, Clone)]
pub struct Group {
    pub token: String,
    /// Sorted internal node (or dendrogram leaf) indices.
    pub nodes: Vec<u32>,
}

/// Disjoint ground-truth groups, ordered by token.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    groups: Vec<Group>,
}

impl GroundTruth {
    pub fn from_groups(mut groups: Vec<Group>) -> Self {
        groups.retain(|g| !g.nodes.is_empty());
        for g in &mut groups {
            g.nodes.sort_unstable();
            g.nodes.dedup();
        }
        groups.sort_by(|a, b| a.token.cmp(&b.token));
        GroundTruth { groups }
    }

    /// Build from an affiliation map: one group per distinct affiliation.
    pub fn from_affiliations(aff: &AffiliationMap) -> Self {
        let mut nodes_of: HashMap<u32, Vec<u32>> = HashMap::new();
        for i in 0..aff.node_count() as u32 {
            if let Some(g) = aff.group(i) {
                nodes_of.entry(g).or_default().push(i);
            }
        }
        Self::from_groups(
            nodes_of
                .into_iter()
                .map(|(slot, nodes)| Group {
                    token: aff.group_token(slot).to_string(),
                    nodes,
                })
                .collect(),
        )
    }

    /// Parse an affiliation-format stream, resolving node tokens through
    /// `index_of` (e.g. a graph lookup or a dendrogram leaf table). Returns
    /// the ground truth and the number of lines skipped for unknown nodes.
    pub fn from_token_stream(
        reader: impl BufRead,
        index_of: impl Fn(&str) -> Option<u32>,
    ) -> Result<(Self, u64)> {
        let mut nodes_of: HashMap<String, Vec<u32>> = HashMap::new();
        let mut skipped = 0u64;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if let Some((node, group)) = parse_two_tokens(&line, lineno + 1)? {
                match index_of(node) {
                    Some(i) => nodes_of.entry(group.to_string()).or_default().push(i),
                    None => skipped += 1,
                }
            }
        }
        let gt = Self::from_groups(
            nodes_of
                .into_iter()
                .map(|(token, nodes)| Group { token, nodes })
                .collect(),
        );
        Ok((gt, skipped))
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// Jaccard similarity of two sorted node sets.
pub fn jaccard(a: &[u32], b: &[u32]) -> Result<f64> {
    if a.is_empty() && b.is_empty() {
        return Err(Error::EmptySets);
    }
    let mut inter = 0usize;
    let (mut x, mut y) = (0, 0);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                x += 1;
                y += 1;
            }
        }
    }
    Ok(inter as f64 / (a.len() + b.len() - inter) as f64)
}

/// Best-matching community for one group.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub group: String,
    pub group_size: u32,
    /// Groups below [`SMALL_GROUP_FLAG`] nodes are noise-prone.
    pub flagged_small: bool,
    pub community: u32,
    pub score: f64,
    /// Resolution where the best community was found (R2) or queried (R3).
    pub t: Option<f64>,
    pub method: &'static str,
}

fn result_for(group: &Group, community: u32, score: f64, t: Option<f64>, method: &'static str) -> MatchResult {
    MatchResult {
        group: group.token.clone(),
        group_size: group.nodes.len() as u32,
        flagged_small: (group.nodes.len() as u32) < SMALL_GROUP_FLAG,
        community,
        score,
        t,
        method,
    }
}

/// R1: per group, the maximum Jaccard similarity over the communities of a
/// single partition. Only communities intersecting the group can win (all
/// others score zero).
pub fn recall_r1(labels: &[u32], gt: &GroundTruth) -> Vec<MatchResult> {
    let mut community_size: HashMap<u32, u64> = HashMap::new();
    for &c in labels {
        *community_size.entry(c).or_insert(0) += 1;
    }
    gt.groups
        .par_iter()
        .map(|group| {
            let mut inter: HashMap<u32, u64> = HashMap::new();
            for &v in &group.nodes {
                *inter.entry(labels[v as usize]).or_insert(0) += 1;
            }
            let mut candidates: Vec<(u32, u64)> = inter.into_iter().collect();
            candidates.sort_unstable(); // deterministic over hash order
            let mut best = (f64::NEG_INFINITY, 0u32);
            for (c, i) in candidates {
                let union = group.nodes.len() as u64 + community_size[&c] - i;
                let j = i as f64 / union as f64;
                if j > best.0 {
                    best = (j, c);
                }
            }
            result_for(group, best.1, best.0, None, "r1")
        })
        .collect()
}

/// R2: per group, the maximum Jaccard similarity over every community of
/// every breakpoint partition of the dendrogram, with the resolution at
/// which that community was formed (the supremum of its interval).
///
/// Only communities intersecting the group are candidates, so each group
/// walks just the ancestor closure of its leaves; communities that are
/// created and consumed inside a single merge phase are skipped — they exist
/// at no breakpoint.
pub fn recall_r2(d: &Dendrogram, gt: &GroundTruth) -> Vec<MatchResult> {
    let n = d.leaf_count();
    gt.groups
        .par_iter()
        .map(|group| {
            // Ancestor closure; ids ascend from children to parents.
            let mut seen: HashMap<u32, u64> = HashMap::new();
            let mut ids: Vec<u32> = Vec::new();
            for &leaf in &group.nodes {
                let mut v = leaf;
                loop {
                    if seen.contains_key(&v) {
                        break;
                    }
                    seen.insert(v, 0);
                    ids.push(v);
                    match d.consuming_event(v) {
                        Some(ev) => v = ev.result,
                        None => break,
                    }
                }
            }
            ids.sort_unstable();
            for &leaf in &group.nodes {
                seen.insert(leaf, 1);
            }
            for &v in &ids {
                if v >= n {
                    let ev = &d.events()[(v - n) as usize];
                    let inter = seen.get(&ev.a).copied().unwrap_or(0)
                        + seen.get(&ev.b).copied().unwrap_or(0);
                    if inter > 0 {
                        seen.insert(v, inter);
                    }
                }
            }
            let size = group.nodes.len() as u64;
            let mut best: Option<(f64, crate::ratio::Ratio, u32)> = None;
            for &v in &ids {
                if !d.existed_at_breakpoint(v) {
                    continue;
                }
                let inter = seen[&v];
                let union = size + d.community_size(v) as u64 - inter;
                let j = inter as f64 / union as f64;
                let stamp = d.creation_stamp(v);
                let better = match best {
                    None => true,
                    // Higher score wins; among equals prefer the earliest
                    // (largest-resolution) formation, then the smaller id.
                    Some((bj, bs, bv)) => {
                        j > bj || (j == bj && (stamp > bs || (stamp == bs && v < bv)))
                    }
                };
                if better {
                    best = Some((j, stamp, v));
                }
            }
            let (score, stamp, community) = best.expect("group has at least one leaf");
            result_for(group, community, score, Some(stamp.to_f64()), "r2")
        })
        .collect()
}

/// Ordinary least squares of `log10(t_best)` on `log10(group size)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub pearson: f64,
    pub points: usize,
    pub min_size: u32,
}

impl RegressionFit {
    /// `t̃ = 10^(intercept + slope·log10(size))`, unclamped.
    pub fn predict(&self, size: u32) -> f64 {
        10f64.powf(self.intercept + self.slope * (size.max(1) as f64).log10())
    }

    /// Prediction clamped into a dendrogram's `[t_min, t_max]`.
    pub fn predict_clamped(&self, size: u32, t_min: f64, t_max: f64) -> f64 {
        self.predict(size).clamp(t_min, t_max)
    }
}

/// Fit the size–resolution line from R2 results, ignoring groups below
/// `min_size` and without a finite positive resolution.
pub fn size_resolution_regression(results: &[MatchResult], min_size: u32) -> Result<RegressionFit> {
    let points: Vec<(f64, f64)> = results
        .iter()
        .filter(|r| r.group_size >= min_size)
        .filter_map(|r| {
            r.t.filter(|t| t.is_finite() && *t > 0.0)
                .map(|t| ((r.group_size as f64).log10(), t.log10()))
        })
        .collect();
    if points.len() < 3 {
        return Err(Error::InsufficientPoints {
            need: 3,
            got: points.len(),
        });
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in &points {
        sxx += (x - mean_x) * (x - mean_x);
        syy += (y - mean_y) * (y - mean_y);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateSample(
            "group sizes have zero variance".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let (r2, pearson) = if syy == 0.0 {
        (1.0, 0.0) // flat response: the line fits exactly
    } else {
        let r = sxy / (sxx * syy).sqrt();
        (r * r, r)
    };
    Ok(RegressionFit {
        slope,
        intercept,
        r2,
        pearson,
        points: points.len(),
        min_size,
    })
}

/// R3: retrieve each group from a uniform node sample at the resolution
/// predicted from its size.
///
/// Per group: clamp `t̃ = fit.predict(size)` into the dendrogram range, draw
/// `⌈fraction·size⌉` nodes (at least one) without replacement, pick the
/// community of `𝒞_t̃` with the best Jaccard similarity against the sample,
/// then score that community against the full group. Sampling uses one RNG
/// stream per group (stream = group rank), so results are independent of
/// evaluation order.
pub fn recall_r3(
    d: &Dendrogram,
    gt: &GroundTruth,
    sample_fraction: f64,
    fit: &RegressionFit,
    seed: u64,
) -> Result<Vec<MatchResult>> {
    if !(sample_fraction > 0.0 && sample_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "sample fraction {sample_fraction} outside (0, 1]"
        )));
    }
    let (t_min, t_max) = (d.t_min().to_f64(), d.t_max().to_f64());

    // The per-group partitions 𝒞_t̃ are nested, so one incremental
    // union-find replay over groups sorted by descending t̃ covers them all.
    let mut jobs: Vec<(usize, usize, f64)> = gt
        .groups
        .iter()
        .enumerate()
        .map(|(rank, group)| {
            let t = fit.predict_clamped(group.nodes.len() as u32, t_min, t_max);
            (d.prefix_for(t), rank, t)
        })
        .collect();
    jobs.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));

    let total = d.node_total();
    let mut parent: Vec<u32> = (0..total as u32).collect();
    let mut applied = 0usize;
    let mut results: Vec<Option<MatchResult>> = vec![None; gt.groups.len()];
    for (prefix, rank, t) in jobs {
        while applied < prefix {
            let ev = &d.events()[applied];
            parent[ev.a as usize] = ev.result;
            parent[ev.b as usize] = ev.result;
            applied += 1;
        }
        let mut find = |mut v: u32| -> u32 {
            while parent[v as usize] != v {
                parent[v as usize] = parent[parent[v as usize] as usize];
                v = parent[v as usize];
            }
            v
        };

        let group = &gt.groups[rank];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(rank as u64);
        let want = ((sample_fraction * group.nodes.len() as f64).ceil() as usize)
            .clamp(1, group.nodes.len());
        let picked = rand::seq::index::sample(&mut rng, group.nodes.len(), want);
        let sample: Vec<u32> = picked.iter().map(|i| group.nodes[i]).collect();

        let mut by_root: HashMap<u32, u64> = HashMap::new();
        for &v in &sample {
            *by_root.entry(find(v)).or_insert(0) += 1;
        }
        let mut candidates: Vec<(u32, u64)> = by_root.into_iter().collect();
        candidates.sort_unstable();
        let mut best = (f64::NEG_INFINITY, 0u32);
        for (root, cnt) in candidates {
            let union = sample.len() as u64 + d.community_size(root) as u64 - cnt;
            let j = cnt as f64 / union as f64;
            if j > best.0 {
                best = (j, root);
            }
        }
        let chosen = best.1;
        let inter_full = group.nodes.iter().filter(|&&v| find(v) == chosen).count() as u64;
        let union_full =
            group.nodes.len() as u64 + d.community_size(chosen) as u64 - inter_full;
        let score = inter_full as f64 / union_full as f64;
        results[rank] = Some(result_for(group, chosen, score, Some(t), "r3"));
    }
    Ok(results.into_iter().map(|r| r.expect("every group scored")).collect())
}

/// Arithmetic mean of the recall scores (equivalently, the area above the
/// empirical CDF of the scores).
pub fn mean_recall(results: &[MatchResult]) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::InvalidParameter("no match results".into()));
    }
    Ok(results.iter().map(|r| r.score).sum::<f64>() / results.len() as f64)
}

/// Right-continuous empirical CDF: sorted distinct scores with the fraction
/// of scores `≤ s` at each.
pub fn cumulative_distribution(scores: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted: Vec<f64> = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, &s) in sorted.iter().enumerate() {
        let frac = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == s => last.1 = frac,
            _ => out.push((s, frac)),
        }
    }
    out
}

/// Per-node community-notion diagnostics for an (optional) group labelling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeDiagnostic {
    pub node: u32,
    pub group: u32,
    pub degree: u32,
    pub internal_degree: u32,
    /// The largest edge count towards any single other group.
    pub max_foreign: u32,
    /// Strong community sense: more internal than external connections.
    pub strong: bool,
    /// Relaxed sense: more internal connections than towards each other
    /// group separately (strict; ties fail).
    pub relaxed: bool,
}

/// Group- and graph-level aggregate of [`NodeDiagnostic`]s.
#[derive(Debug, Clone)]
pub struct Diagnostics {
    pub per_node: Vec<NodeDiagnostic>,
    /// group id -> (nodes, strong count, relaxed count), ascending by id.
    pub per_group: Vec<(u32, u64, u64, u64)>,
    pub unlabelled_skipped: u64,
    pub strong_fraction: f64,
    pub relaxed_fraction: f64,
}

/// Evaluate the strong (Radicchi) and relaxed (per-foreign-group) community
/// conditions for every labelled node.
pub fn community_notion_diagnostics(graph: &Graph, membership: &[Option<u32>]) -> Diagnostics {
    assert_eq!(membership.len(), graph.node_count());
    let mut per_node = Vec::new();
    let mut per_group: HashMap<u32, (u64, u64, u64)> = HashMap::new();
    let mut unlabelled = 0u64;
    let mut foreign: HashMap<u32, u32> = HashMap::new();
    for v in 0..graph.node_count() as u32 {
        let Some(group) = membership[v as usize] else {
            unlabelled += 1;
            continue;
        };
        let k = graph.degree(v);
        let mut k_in = 0u32;
        foreign.clear();
        for &w in graph.neighbors(v) {
            match membership[w as usize] {
                Some(g) if g == group => k_in += 1,
                Some(g) => *foreign.entry(g).or_insert(0) += 1,
                None => {}
            }
        }
        let max_foreign = foreign.values().copied().max().unwrap_or(0);
        let diag = NodeDiagnostic {
            node: v,
            group,
            degree: k,
            internal_degree: k_in,
            max_foreign,
            strong: 2 * k_in > k,
            relaxed: k_in > max_foreign,
        };
        let slot = per_group.entry(group).or_insert((0, 0, 0));
        slot.0 += 1;
        slot.1 += u64::from(diag.strong);
        slot.2 += u64::from(diag.relaxed);
        per_node.push(diag);
    }
    let labelled = per_node.len() as f64;
    let strong_total: u64 = per_node.iter().map(|d| u64::from(d.strong)).sum();
    let relaxed_total: u64 = per_node.iter().map(|d| u64::from(d.relaxed)).sum();
    let mut per_group: Vec<(u32, u64, u64, u64)> = per_group
        .into_iter()
        .map(|(g, (n, s, h))| (g, n, s, h))
        .collect();
    per_group.sort_unstable();
    Diagnostics {
        per_node,
        per_group,
        unlabelled_skipped: unlabelled,
        strong_fraction: if labelled > 0.0 { strong_total as f64 / labelled } else { 0.0 },
        relaxed_fraction: if labelled > 0.0 { relaxed_total as f64 / labelled } else { 0.0 },
    }
}

fn csv_field(s: &str) -> Result<&str> {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        return Err(Error::InvalidParameter(format!(
            "token `{s}` cannot be written to CSV"
        )));
    }
    Ok(s)
}

pub fn write_match_results_csv(results: &[MatchResult], out: &mut dyn Write) -> Result<()> {
    writeln!(out, "group,size,small,community,score,t,method")?;
    for r in results {
        let t = r.t.map(|t| t.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            csv_field(&r.group)?,
            r.group_size,
            r.flagged_small,
            r.community,
            r.score,
            t,
            r.method
        )?;
    }
    Ok(())
}

pub fn read_match_results_csv(reader: impl BufRead) -> Result<Vec<MatchResult>> {
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::parse(lineno + 1, "expected 7 CSV fields"));
        }
        let parse_err = |what: &str| Error::parse(lineno + 1, format!("bad {what}"));
        out.push(MatchResult {
            group: fields[0].to_string(),
            group_size: fields[1].parse().map_err(|_| parse_err("size"))?,
            flagged_small: fields[2].parse().map_err(|_| parse_err("small flag"))?,
            community: fields[3].parse().map_err(|_| parse_err("community"))?,
            score: fields[4].parse().map_err(|_| parse_err("score"))?,
            t: if fields[5].is_empty() {
                None
            } else {
                Some(fields[5].parse().map_err(|_| parse_err("t"))?)
            },
            method: match fields[6] {
                "r1" => "r1",
                "r2" => "r2",
                "r3" => "r3",
                _ => "unknown",
            },
        });
    }
    Ok(out)
}

pub fn write_cdf_csv(cdf: &[(f64, f64)], out: &mut dyn Write) -> Result<()> {
    writeln!(out, "score,cumulative_fraction")?;
    for &(s, f) in cdf {
        writeln!(out, "{s},{f}")?;
    }
    Ok(())
}

pub fn write_fit_csv(fit: &RegressionFit, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "slope,intercept,r2,pearson,points,min_size")?;
    writeln!(
        out,
        "{},{},{},{},{},{}",
        fit.slope, fit.intercept, fit.r2, fit.pearson, fit.points, fit.min_size
    )?;
    Ok(())
}

pub fn read_fit_csv(reader: impl BufRead) -> Result<RegressionFit> {
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::parse(lineno + 1, "expected 6 CSV fields"));
        }
        let num = |i: usize| -> Result<f64> {
            fields[i]
                .parse()
                .map_err(|_| Error::parse(lineno + 1, format!("bad field {i}")))
        };
        return Ok(RegressionFit {
            slope: num(0)?,
            intercept: num(1)?,
            r2: num(2)?,
            pearson: num(3)?,
            points: fields[4]
                .parse()
                .map_err(|_| Error::parse(lineno + 1, "bad points"))?,
            min_size: fields[5]
                .parse()
                .map_err(|_| Error::parse(lineno + 1, "bad min_size"))?,
        });
    }
    Err(Error::parse(0, "fit CSV has no data row"))
}
