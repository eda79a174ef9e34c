//! Descriptive statistics: clustering coefficients, neighbour degrees,
//! degree histograms and a power-law exponent fit.

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Local clustering coefficient of node `i`:
/// `triangles(i) / (k_i·(k_i−1)/2)`.
///
/// Undefined (`None`) for nodes of degree below 2; such nodes are also
/// omitted from the aggregate statistics.
pub fn clustering_coefficient(graph: &Graph, i: u32) -> Option<f64> {
    let k = graph.degree(i) as u64;
    if k < 2 {
        return None;
    }
    let mut triangles = 0u64;
    let adj = graph.neighbors(i);
    for (pos, &j) in adj.iter().enumerate() {
        // Count common neighbours of i and j among later entries, so each
        // triangle through i is seen once.
        let rest = &adj[pos + 1..];
        let nb_j = graph.neighbors(j);
        let (mut x, mut y) = (0, 0);
        while x < rest.len() && y < nb_j.len() {
            match rest[x].cmp(&nb_j[y]) {
                std::cmp::Ordering::Less => x += 1,
                std::cmp::Ordering::Greater => y += 1,
                std::cmp::Ordering::Equal => {
                    triangles += 1;
                    x += 1;
                    y += 1;
                }
            }
        }
    }
    Some(triangles as f64 / (k * (k - 1) / 2) as f64)
}

/// Mean degree over the neighbours of `i`; `None` for isolated nodes.
pub fn avg_neighbor_degree(graph: &Graph, i: u32) -> Option<f64> {
    let k = graph.degree(i);
    if k == 0 {
        return None;
    }
    let sum: u64 = graph
        .neighbors(i)
        .iter()
        .map(|&j| graph.degree(j) as u64)
        .sum();
    Some(sum as f64 / k as f64)
}

/// Continuous maximum-likelihood fit of a power-law exponent:
/// `α = 1 + N / Σ ln(k_i / (k_min − ½))`, over the degrees `≥ k_min`.
///
/// Needs at least 10 qualifying samples and a non-degenerate sample (all
/// degrees equal would send α to infinity).
pub fn fit_power_law(degrees: &[u32], k_min: u32) -> Result<f64> {
    if k_min < 1 {
        return Err(Error::InvalidParameter("k_min must be at least 1".into()));
    }
    let sample: Vec<u32> = degrees.iter().copied().filter(|&d| d >= k_min).collect();
    if sample.len() < 10 {
        return Err(Error::InsufficientSamples {
            need: 10,
            got: sample.len(),
        });
    }
    let (lo, hi) = sample
        .iter()
        .fold((u32::MAX, 0), |(lo, hi), &d| (lo.min(d), hi.max(d)));
    if lo == hi {
        return Err(Error::DegenerateSample(
            "all degrees equal; exponent diverges".into(),
        ));
    }
    let offset = k_min as f64 - 0.5;
    let log_sum: f64 = sample.iter().map(|&d| (d as f64 / offset).ln()).sum();
    Ok(1.0 + sample.len() as f64 / log_sum)
}

/// Aggregate degree/clustering statistics, binned the way the usual
/// log-log plots want them.
#[derive(Debug, Clone)]
pub struct DegreeStats {
    /// degree -> node count.
    pub degree_histogram: BTreeMap<u32, u64>,
    /// Histogram of clustering coefficients over nodes of degree ≥ 2.
    pub clustering_bins: Vec<u64>,
    /// degree -> (mean clustering, node count), degree ≥ 2.
    pub clustering_by_degree: BTreeMap<u32, (f64, u64)>,
    /// degree -> (mean neighbour degree, node count), degree ≥ 1.
    pub neighbor_degree_by_degree: BTreeMap<u32, (f64, u64)>,
    /// Power-law exponent of the degree distribution, when fittable.
    pub alpha: Option<f64>,
    pub alpha_k_min: u32,
}

pub const CLUSTERING_BINS: usize = 50;

/// Compute the whole [`DegreeStats`] bundle in one pass.
pub fn degree_stats(graph: &Graph, alpha_k_min: u32) -> DegreeStats {
    let mut degree_histogram: BTreeMap<u32, u64> = BTreeMap::new();
    let mut clustering_bins = vec![0u64; CLUSTERING_BINS];
    let mut cc_acc: BTreeMap<u32, (f64, u64)> = BTreeMap::new();
    let mut knn_acc: BTreeMap<u32, (f64, u64)> = BTreeMap::new();

    let mut degrees = Vec::with_capacity(graph.node_count());
    for i in 0..graph.node_count() as u32 {
        let k = graph.degree(i);
        degrees.push(k);
        *degree_histogram.entry(k).or_insert(0) += 1;
        if let Some(cc) = clustering_coefficient(graph, i) {
            let bin = ((cc * CLUSTERING_BINS as f64) as usize).min(CLUSTERING_BINS - 1);
            clustering_bins[bin] += 1;
            let e = cc_acc.entry(k).or_insert((0.0, 0));
            e.0 += cc;
            e.1 += 1;
        }
        if let Some(knn) = avg_neighbor_degree(graph, i) {
            let e = knn_acc.entry(k).or_insert((0.0, 0));
            e.0 += knn;
            e.1 += 1;
        }
    }

    let finish = |acc: BTreeMap<u32, (f64, u64)>| {
        acc.into_iter()
            .map(|(k, (sum, count))| (k, (sum / count as f64, count)))
            .collect()
    };
    DegreeStats {
        degree_histogram,
        clustering_bins,
        clustering_by_degree: finish(cc_acc),
        neighbor_degree_by_degree: finish(knn_acc),
        alpha: fit_power_law(&degrees, alpha_k_min).ok(),
        alpha_k_min,
    }
}

impl DegreeStats {
    pub fn write_degree_histogram_csv(&self, out: &mut dyn Write) -> Result<()> {
        writeln!(out, "degree,count")?;
        for (k, c) in &self.degree_histogram {
            writeln!(out, "{k},{c}")?;
        }
        Ok(())
    }

    pub fn write_clustering_histogram_csv(&self, out: &mut dyn Write) -> Result<()> {
        writeln!(out, "bin_lower,bin_upper,count")?;
        let w = 1.0 / CLUSTERING_BINS as f64;
        for (i, c) in self.clustering_bins.iter().enumerate() {
            writeln!(out, "{:.3},{:.3},{c}", i as f64 * w, (i + 1) as f64 * w)?;
        }
        Ok(())
    }

    pub fn write_clustering_by_degree_csv(&self, out: &mut dyn Write) -> Result<()> {
        writeln!(out, "degree,avg_clustering,nodes")?;
        for (k, (cc, n)) in &self.clustering_by_degree {
            writeln!(out, "{k},{cc},{n}")?;
        }
        Ok(())
    }

    pub fn write_neighbor_degree_csv(&self, out: &mut dyn Write) -> Result<()> {
        writeln!(out, "degree,avg_neighbor_degree,nodes")?;
        for (k, (knn, n)) in &self.neighbor_degree_by_degree {
            writeln!(out, "{k},{knn},{n}")?;
        }
        Ok(())
    }
}
