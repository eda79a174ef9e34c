//! Partition state and the modularity functionals.
//!
//! A [`PartitionState`] keeps, besides the node→community map, the aggregates
//! the functionals need: `k_C` (total degree of community `C`), `e_C` (twice
//! its internal edge count) and `e(C,C')` (twice the edge count between `C`
//! and `C'`). All three are integers, so everything except the final `Q`
//! value is exact.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::ratio::Ratio;

/// Per-community aggregates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Community {
    pub id: u32,
    /// Sum of node degrees.
    pub k: u64,
    /// Twice the number of internal edges.
    pub e_internal: u64,
    /// Neighbor communities with `e(C,C')` = twice the inter-community edge
    /// count, sorted by community id.
    pub cut: Vec<(u32, u64)>,
}

/// A node partition of a graph together with the aggregates used by the
/// modularity functionals.
#[derive(Debug, Clone)]
pub struct PartitionState {
    community_of: Vec<u32>,
    communities: Vec<Community>,
    slot_of: HashMap<u32, usize>,
    m: u64,
}

impl PartitionState {
    /// Build the full state from per-node community labels by a from-scratch
    /// recount of the graph. Labels may be arbitrary `u32`s.
    pub fn from_labels(graph: &Graph, labels: &[u32]) -> Self {
        assert_eq!(labels.len(), graph.node_count());
        let mut k: HashMap<u32, u64> = HashMap::new();
        for i in 0..graph.node_count() as u32 {
            *k.entry(labels[i as usize]).or_insert(0) += graph.degree(i) as u64;
        }
        let mut e_internal: HashMap<u32, u64> = HashMap::new();
        let mut cut: HashMap<(u32, u32), u64> = HashMap::new();
        for (i, j) in graph.edges() {
            let (a, b) = (labels[i as usize], labels[j as usize]);
            if a == b {
                *e_internal.entry(a).or_insert(0) += 2;
            } else {
                *cut.entry((a.min(b), a.max(b))).or_insert(0) += 2;
            }
        }
        let mut ids: Vec<u32> = k.keys().copied().collect();
        ids.sort_unstable();
        let mut communities: Vec<Community> = ids
            .iter()
            .map(|&id| Community {
                id,
                k: k[&id],
                e_internal: e_internal.get(&id).copied().unwrap_or(0),
                cut: Vec::new(),
            })
            .collect();
        let slot_of: HashMap<u32, usize> =
            ids.iter().enumerate().map(|(s, &id)| (id, s)).collect();
        for (&(a, b), &e) in &cut {
            communities[slot_of[&a]].cut.push((b, e));
            communities[slot_of[&b]].cut.push((a, e));
        }
        for c in &mut communities {
            c.cut.sort_unstable_by_key(|&(id, _)| id);
        }
        PartitionState {
            community_of: labels.to_vec(),
            communities,
            slot_of,
            m: graph.edge_count() as u64,
        }
    }

    /// Put every node in its own community (ids = node indices).
    pub fn singletons(graph: &Graph) -> Self {
        let labels: Vec<u32> = (0..graph.node_count() as u32).collect();
        Self::from_labels(graph, &labels)
    }

    pub fn node_count(&self) -> usize {
        self.community_of.len()
    }

    pub fn community_count(&self) -> usize {
        self.communities.len()
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// Community id of each node, indexed by node.
    pub fn community_of(&self) -> &[u32] {
        &self.community_of
    }

    pub fn communities(&self) -> &[Community] {
        &self.communities
    }

    pub fn community(&self, id: u32) -> Result<&Community> {
        self.slot_of
            .get(&id)
            .map(|&s| &self.communities[s])
            .ok_or(Error::UnknownCommunity(id))
    }

    /// `e(C,C')`: twice the number of edges between two communities.
    pub fn cut_between(&self, a: u32, b: u32) -> Result<u64> {
        let ca = self.community(a)?;
        self.community(b)?;
        Ok(match ca.cut.binary_search_by_key(&b, |&(id, _)| id) {
            Ok(pos) => ca.cut[pos].1,
            Err(_) => 0,
        })
    }

    /// Nodes of one community, in index order.
    pub fn members(&self, id: u32) -> Vec<u32> {
        (0..self.community_of.len() as u32)
            .filter(|&i| self.community_of[i as usize] == id)
            .collect()
    }

    /// Classical modularity `Q = (1/2m) Σ_C [e_C − k_C²/2m]`.
    pub fn modularity(&self) -> Result<f64> {
        self.generalized_modularity(1.0)
    }

    /// Generalized modularity `Q_t = (1/2m) Σ_C [e_C − t·k_C²/2m]`.
    pub fn generalized_modularity(&self, t: f64) -> Result<f64> {
        if self.m == 0 {
            return Err(Error::EmptyGraph);
        }
        let two_m = 2.0 * self.m as f64;
        let mut q = 0.0;
        for c in &self.communities {
            q += c.e_internal as f64 - t * (c.k as f64) * (c.k as f64) / two_m;
        }
        Ok(q / two_m)
    }

    /// Exact change in `Q_t` from joining communities `a` and `b`:
    ///
    /// `ΔQ_t = (1/2m)·(e(C,C') − t·k_C·k_C'/m)`
    ///
    /// (the merged community's penalty grows by `(k+k')² − k² − k'` `= 2kk'`,
    /// and `e(C,C')` is twice the joining edge count). The gain is zero
    /// exactly at `t = e(C,C')·m/(k_C·k_C')`, positive below, negative above.
    pub fn delta_q_t(&self, a: u32, b: u32, t: f64) -> Result<f64> {
        if a == b {
            return Err(Error::InvalidParameter(
                "delta_q_t needs two distinct communities".into(),
            ));
        }
        let e = self.cut_between(a, b)? as f64;
        let ka = self.community(a)?.k as f64;
        let kb = self.community(b)?.k as f64;
        let m = self.m as f64;
        Ok((e - t * ka * kb / m) / (2.0 * m))
    }

    /// The largest resolution at which some join becomes non-decreasing:
    /// `t(𝒞) = max e(C,C')·m/(k_C·k_C')` over connected community pairs —
    /// each pair's exact zero-gain resolution.
    ///
    /// Returns `None` when no two communities are connected (the run is
    /// exhausted: one community per component).
    pub fn next_resolution_exact(&self) -> Option<Ratio> {
        let m = self.m as u128;
        let mut best: Option<Ratio> = None;
        for c in &self.communities {
            for &(other, e) in &c.cut {
                if other <= c.id {
                    continue; // each unordered pair once
                }
                let r = Ratio::new(
                    e as u128 * m,
                    c.k as u128 * self.community(other).expect("cut neighbor exists").k as u128,
                );
                if best.is_none_or(|b| r > b) {
                    best = Some(r);
                }
            }
        }
        best
    }

    /// Float view of [`Self::next_resolution_exact`].
    pub fn next_resolution(&self) -> Option<f64> {
        self.next_resolution_exact().map(Ratio::to_f64)
    }

    /// Check the integer bookkeeping against a from-scratch recount.
    pub fn verify_against(&self, graph: &Graph) -> Result<()> {
        let fresh = PartitionState::from_labels(graph, &self.community_of);
        if fresh.communities != self.communities {
            return Err(Error::InvalidParameter(
                "partition aggregates disagree with recount".into(),
            ));
        }
        let k_total: u64 = self.communities.iter().map(|c| c.k).sum();
        if k_total != 2 * self.m {
            return Err(Error::InvalidParameter("Σ k_C != 2m".into()));
        }
        let e_total: u64 = self.communities.iter().map(|c| c.e_internal).sum();
        let cut_total: u64 = self
            .communities
            .iter()
            .flat_map(|c| c.cut.iter())
            .map(|&(_, e)| e)
            .sum();
        // Each unordered pair appears twice in the per-community cut lists.
        if e_total + cut_total / 2 != 2 * self.m {
            return Err(Error::InvalidParameter(
                "Σ e_C + Σ e(C,C') != 2m".into(),
            ));
        }
        Ok(())
    }
}

/// Write a partition as `node_token community_id` lines, in node order.
pub fn write_partition(graph: &Graph, labels: &[u32], out: &mut dyn Write) -> Result<()> {
    assert_eq!(labels.len(), graph.node_count());
    for i in 0..graph.node_count() as u32 {
        writeln!(out, "{} {}", graph.token(i), labels[i as usize])?;
    }
    Ok(())
}

/// Read a partition file back against a graph. Every graph node must be
/// assigned exactly once.
pub fn read_partition(reader: impl BufRead, graph: &Graph) -> Result<Vec<u32>> {
    let mut labels = vec![None; graph.node_count()];
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut it = trimmed.split_whitespace();
        let (tok, com) = match (it.next(), it.next(), it.next()) {
            (Some(t), Some(c), None) => (t, c),
            _ => return Err(Error::parse(lineno + 1, "expected `node community`")),
        };
        let node = graph
            .index_of(tok)
            .ok_or_else(|| Error::UnknownNode(tok.to_string()))?;
        let community: u32 = com
            .parse()
            .map_err(|_| Error::parse(lineno + 1, format!("bad community id `{com}`")))?;
        labels[node as usize] = Some(community);
    }
    labels
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            l.ok_or_else(|| {
                Error::InvalidParameter(format!("node `{}` missing from partition", graph.token(i as u32)))
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::load_edge_list_from;
    use std::io::Cursor;

    pub(crate) fn two_triangle_bridge() -> Graph {
        // 0-1-2 triangle, 3-4-5 triangle, bridge 2-3: 6 nodes, 7 edges.
        let (g, _) = load_edge_list_from(Cursor::new(
            "0 1\n0 2\n1 2\n3 4\n3 5\n4 5\n2 3\n",
        ))
        .unwrap();
        g
    }

    fn triangle() -> Graph {
        let (g, _) = load_edge_list_from(Cursor::new("0 1\n1 2\n2 0\n")).unwrap();
        g
    }

    #[test]
    fn whole_graph_has_zero_modularity() {
        let g = two_triangle_bridge();
        let p = PartitionState::from_labels(&g, &[7; 6]);
        assert_eq!(p.modularity().unwrap(), 0.0);
    }

    #[test]
    fn two_triangle_split_is_5_14() {
        let g = two_triangle_bridge();
        let p = PartitionState::from_labels(&g, &[0, 0, 0, 1, 1, 1]);
        assert!((p.modularity().unwrap() - 5.0 / 14.0).abs() < 1e-15);
        p.verify_against(&g).unwrap();
    }

    #[test]
    fn singleton_partition_of_regular_graph() {
        // Triangle is 2-regular on 3 nodes: Q = -1/n = -1/3.
        let g = triangle();
        let p = PartitionState::singletons(&g);
        assert!((p.modularity().unwrap() + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn generalized_reduces_to_classical_at_t1() {
        let g = two_triangle_bridge();
        let p = PartitionState::from_labels(&g, &[0, 0, 0, 1, 1, 1]);
        assert_eq!(
            p.generalized_modularity(1.0).unwrap(),
            p.modularity().unwrap()
        );
    }

    #[test]
    fn singletons_at_t0_have_zero_q() {
        let g = two_triangle_bridge();
        let p = PartitionState::singletons(&g);
        assert_eq!(p.generalized_modularity(0.0).unwrap(), 0.0);
    }

    #[test]
    fn two_triangle_split_at_t2() {
        let g = two_triangle_bridge();
        let p = PartitionState::from_labels(&g, &[0, 0, 0, 1, 1, 1]);
        assert!((p.generalized_modularity(2.0).unwrap() + 1.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn delta_q_on_triangle_singletons() {
        let g = triangle();
        let p = PartitionState::singletons(&g);
        // Zero gain exactly at e·m/(k·k') = 2·3/4 = 1.5.
        assert_eq!(p.delta_q_t(0, 1, 1.5).unwrap(), 0.0);
        assert!((p.delta_q_t(0, 1, 1.0).unwrap() - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn delta_q_is_the_exact_functional_difference() {
        // Independent route: evaluate Q_t before and after the join.
        let g = two_triangle_bridge();
        let before = PartitionState::from_labels(&g, &[0, 0, 0, 1, 1, 1]);
        let after = PartitionState::from_labels(&g, &[0, 0, 0, 0, 0, 0]);
        for t in [0.25, 0.5, 1.0, 1.5, 2.0, 3.0] {
            let direct = after.generalized_modularity(t).unwrap()
                - before.generalized_modularity(t).unwrap();
            let delta = before.delta_q_t(0, 1, t).unwrap();
            assert!((direct - delta).abs() < 1e-14, "t={t}: {direct} vs {delta}");
        }
    }

    #[test]
    fn disconnected_pair_has_negative_delta() {
        let (g, _) = load_edge_list_from(Cursor::new("0 1\n2 3\n")).unwrap();
        let p = PartitionState::singletons(&g);
        for t in [0.1, 1.0, 10.0] {
            assert!(p.delta_q_t(0, 2, t).unwrap() < 0.0);
        }
    }

    #[test]
    fn unknown_community_is_an_error() {
        let g = triangle();
        let p = PartitionState::singletons(&g);
        assert!(matches!(
            p.delta_q_t(0, 99, 1.0),
            Err(Error::UnknownCommunity(99))
        ));
    }

    #[test]
    fn next_resolution_examples() {
        let g = triangle();
        let p = PartitionState::singletons(&g);
        assert_eq!(p.next_resolution().unwrap(), 1.5);

        // K4 singletons: 2·m/(k·k') = 2·6/9 = 2/3.
        let (k4, _) = load_edge_list_from(Cursor::new("0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n")).unwrap();
        let p4 = PartitionState::singletons(&k4);
        assert_eq!(p4.next_resolution_exact().unwrap(), Ratio::new(12, 9));
        // At the returned t the argmax pair's gain is exactly zero.
        let t = p4.next_resolution().unwrap();
        assert_eq!(p4.delta_q_t(0, 1, t).unwrap(), 0.0);
    }

    #[test]
    fn next_resolution_exhausted_when_fully_merged() {
        let g = triangle();
        let p = PartitionState::from_labels(&g, &[0, 0, 0]);
        assert!(p.next_resolution().is_none());
    }

    #[test]
    fn partition_file_round_trip() {
        let g = two_triangle_bridge();
        let labels = [0u32, 0, 0, 9, 9, 9];
        let mut buf = Vec::new();
        write_partition(&g, &labels, &mut buf).unwrap();
        let back = read_partition(Cursor::new(&buf), &g).unwrap();
        assert_eq!(back, labels);
    }

    #[test]
    fn partition_file_missing_node_rejected() {
        let g = triangle();
        assert!(read_partition(Cursor::new("0 1\n1 1\n"), &g).is_err());
    }
}
