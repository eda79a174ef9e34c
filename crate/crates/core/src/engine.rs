//! Agglomerative multiresolution modularity optimization.
//!
//! Starting from singletons at the largest useful resolution, the engine
//! repeatedly merges every community pair whose generalized-modularity gain
//! `ΔQ_t` is exactly zero at the current resolution `t`, then lowers `t` as
//! little as possible so that another join becomes available:
//!
//! `t(𝒞) = max over connected pairs of e(C,C')·m / (k_C·k_C')`
//!
//! with `e(C,C')` twice the joining edge count — each pair's exact zero-gain
//! resolution. Every quantity in that ratio is an integer, so candidate pairs
//! are ordered by exact cross multiplication — never by floating point — and
//! ties are broken on the `(smaller id, larger id)` pair. Two runs over the
//! same graph therefore produce byte-identical dendrograms.
//!
//! The frontier of connected community pairs lives in an ordered set keyed by
//! the ratio (descending), mirroring the ordered-tree formulation: a merge
//! only rekeys pairs incident to the merged communities, and the next
//! resolution is read off the head.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::PartitionState;
use crate::ratio::Ratio;

/// One merge, stamped with the resolution at which it fired.
///
/// Community ids: `0..n` are the singleton leaves; the merge with ordinal
/// `o` creates community `n + o`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MergeEvent {
    pub ordinal: u32,
    /// Resolution `e(a,b)·m / (k_a·k_b)` at merge time: the exact zero of
    /// the pair's `ΔQ_t`.
    pub t: Ratio,
    pub a: u32,
    pub b: u32,
    pub result: u32,
}

/// Frontier entry for a connected community pair, ordered by ratio
/// descending and then by `(a, b)` ascending.
///
/// The ratio is stored as `e(C,C') / (k_C·k_C')` — the common `m` factor
/// of the resolution does not affect the ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct PairKey {
    /// `e(C,C')`, twice the edge count between the pair.
    num: u64,
    /// `k_C·k_C'`.
    den: u128,
    a: u32,
    b: u32,
}

impl PairKey {
    fn new(e: u64, ka: u64, kb: u64, x: u32, y: u32) -> Self {
        PairKey {
            num: e,
            den: ka as u128 * kb as u128,
            a: x.min(y),
            b: x.max(y),
        }
    }
}

impl Ord for PairKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // num/den descending: a smaller key sorts first in the BTreeSet, so
        // the set's first element is the maximum ratio.
        let lhs = other.num as u128 * self.den;
        let rhs = self.num as u128 * other.den;
        lhs.cmp(&rhs)
            .then_with(|| self.a.cmp(&other.a))
            .then_with(|| self.b.cmp(&other.b))
    }
}

impl PartialOrd for PairKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Ordered search structure over connected community pairs.
struct MergeFrontier {
    set: BTreeSet<PairKey>,
}

impl MergeFrontier {
    fn new() -> Self {
        MergeFrontier {
            set: BTreeSet::new(),
        }
    }

    fn head(&self) -> Option<PairKey> {
        self.set.first().copied()
    }

    fn pop(&mut self) -> Option<PairKey> {
        self.set.pop_first()
    }

    fn insert(&mut self, key: PairKey) {
        let fresh = self.set.insert(key);
        debug_assert!(fresh, "pair present twice in frontier");
    }

    fn remove(&mut self, key: &PairKey) {
        let existed = self.set.remove(key);
        debug_assert!(existed, "removing absent frontier pair");
    }
}

/// Read-only view of the engine state handed to an audit callback after each
/// merge.
pub struct AuditView<'a> {
    pub n: usize,
    pub m: u64,
    pub events: &'a [MergeEvent],
    alive: &'a [bool],
    k: &'a [u64],
    e_internal: &'a [u64],
    adj: &'a [Vec<(u32, u64)>],
}

impl AuditView<'_> {
    /// Live communities as `(id, k_C, e_C, cut list)`.
    pub fn alive_communities(&self) -> impl Iterator<Item = (u32, u64, u64, &[(u32, u64)])> {
        self.alive
            .iter()
            .enumerate()
            .filter(|&(_, &a)| a)
            .map(move |(id, _)| {
                (
                    id as u32,
                    self.k[id],
                    self.e_internal[id],
                    self.adj[id].as_slice(),
                )
            })
    }
}

struct Engine {
    m: u64,
    k: Vec<u64>,
    e_internal: Vec<u64>,
    adj: Vec<Vec<(u32, u64)>>,
    alive: Vec<bool>,
    frontier: MergeFrontier,
}

impl Engine {
    fn init(graph: &Graph) -> Result<Self> {
        let n = graph.node_count();
        let m = graph.edge_count() as u64;
        if n == 0 || m == 0 {
            return Err(Error::EmptyGraph);
        }
        assert!(m < 1 << 31, "graphs beyond 2^31 edges are unsupported");
        let capacity = 2 * n;
        let mut k = Vec::with_capacity(capacity);
        let mut adj = Vec::with_capacity(capacity);
        for i in 0..n as u32 {
            k.push(graph.degree(i) as u64);
            adj.push(
                graph
                    .neighbors(i)
                    .iter()
                    .map(|&j| (j, 2u64))
                    .collect::<Vec<_>>(),
            );
        }
        let mut frontier = MergeFrontier::new();
        for (i, j) in graph.edges() {
            frontier.insert(PairKey::new(2, k[i as usize], k[j as usize], i, j));
        }
        let mut e_internal = Vec::with_capacity(capacity);
        e_internal.resize(n, 0);
        let mut alive = Vec::with_capacity(capacity);
        alive.resize(n, true);
        Ok(Engine {
            m,
            k,
            e_internal,
            adj,
            alive,
            frontier,
        })
    }

    /// Merge the pair `h` (already popped from the frontier) into a fresh
    /// community, updating aggregates, adjacency and the frontier.
    fn merge(&mut self, h: PairKey, ordinal: u32) -> MergeEvent {
        let (a, b) = (h.a as usize, h.b as usize);
        let result = self.k.len() as u32;

        // Drop every frontier pair incident to a or b; (a,b) itself is
        // already popped. Keys must be rebuilt with pre-merge degrees.
        for &(c, e) in &self.adj[a] {
            if c != h.b {
                self.frontier
                    .remove(&PairKey::new(e, self.k[a], self.k[c as usize], h.a, c));
            }
        }
        for &(c, e) in &self.adj[b] {
            if c != h.a {
                self.frontier
                    .remove(&PairKey::new(e, self.k[b], self.k[c as usize], h.b, c));
            }
        }

        // Sorted-merge of the two neighbour lists, skipping the pair itself.
        let merged = {
            let la = &self.adj[a];
            let lb = &self.adj[b];
            let mut out = Vec::with_capacity(la.len() + lb.len() - 2);
            let (mut x, mut y) = (0, 0);
            while x < la.len() || y < lb.len() {
                let ca = la.get(x).map(|&(c, _)| c);
                let cb = lb.get(y).map(|&(c, _)| c);
                match (ca, cb) {
                    (Some(c), _) if c == h.b => x += 1,
                    (_, Some(c)) if c == h.a => y += 1,
                    (Some(c1), Some(c2)) if c1 == c2 => {
                        out.push((c1, la[x].1 + lb[y].1));
                        x += 1;
                        y += 1;
                    }
                    (Some(c1), Some(c2)) if c1 < c2 => {
                        out.push(la[x]);
                        x += 1;
                    }
                    (Some(_), Some(_)) => {
                        out.push(lb[y]);
                        y += 1;
                    }
                    (Some(_), None) => {
                        out.push(la[x]);
                        x += 1;
                    }
                    (None, Some(_)) => {
                        out.push(lb[y]);
                        y += 1;
                    }
                    (None, None) => unreachable!(),
                }
            }
            out
        };

        let k_result = self.k[a] + self.k[b];
        let e_result = self.e_internal[a] + self.e_internal[b] + h.num;

        // Rewire neighbours: replace their a/b entries with the result.
        // Result ids grow monotonically, so pushing keeps lists sorted.
        for &(c, e_rc) in &merged {
            let adj_c = &mut self.adj[c as usize];
            if let Ok(pos) = adj_c.binary_search_by_key(&h.a, |&(id, _)| id) {
                adj_c.remove(pos);
            }
            if let Ok(pos) = adj_c.binary_search_by_key(&h.b, |&(id, _)| id) {
                adj_c.remove(pos);
            }
            adj_c.push((result, e_rc));
            self.frontier
                .insert(PairKey::new(e_rc, k_result, self.k[c as usize], c, result));
        }

        self.alive[a] = false;
        self.alive[b] = false;
        self.adj[a] = Vec::new();
        self.adj[b] = Vec::new();
        self.k.push(k_result);
        self.e_internal.push(e_result);
        self.adj.push(merged);
        self.alive.push(true);

        MergeEvent {
            ordinal,
            t: Ratio::new(h.num as u128 * self.m as u128, h.den),
            a: h.a,
            b: h.b,
            result,
        }
    }
}

/// Run the multiresolution optimizer, producing the full dendrogram.
pub fn deltacom(graph: &Graph) -> Result<Dendrogram> {
    deltacom_with_audit(graph, |_| Ok(()))
}

/// [`deltacom`] with a callback invoked after every merge, for bookkeeping
/// audits. An error from the callback aborts the run.
pub fn deltacom_with_audit(
    graph: &Graph,
    mut audit: impl FnMut(&AuditView<'_>) -> Result<()>,
) -> Result<Dendrogram> {
    let mut engine = Engine::init(graph)?;
    let mut events: Vec<MergeEvent> = Vec::new();

    while let Some(head) = engine.frontier.head() {
        // All pairs with this exact ratio have ΔQ_t = 0 at the current t;
        // merge them (and any pair a merge pushes up to the same ratio)
        // before lowering the resolution.
        let (phase_num, phase_den) = (head.num, head.den);
        while let Some(h) = engine.frontier.head() {
            if h.num as u128 * phase_den != phase_num as u128 * h.den {
                break; // head ratio dropped: this resolution is exhausted
            }
            engine.frontier.pop();
            let ordinal = events.len() as u32;
            let event = engine.merge(h, ordinal);
            events.push(event);
            audit(&AuditView {
                n: graph.node_count(),
                m: engine.m,
                events: &events,
                alive: &engine.alive,
                k: &engine.k,
                e_internal: &engine.e_internal,
                adj: &engine.adj,
            })?;
        }
    }

    Dendrogram::from_events(graph.node_count() as u32, engine.m, events)
}

/// The full merge history of a run: every weakly optimal partition at every
/// resolution, encoded as ordered merge events.
///
/// Merge resolutions are non-increasing, so the events with equal stamps form
/// *phases*; the partition reached at the end of phase `p` is constant (and
/// weakly optimal) on the interval `(t_{p+1}, t_p]`. The initial singleton
/// partition covers `[t_max, ∞)` and the terminal partition — one community
/// per connected component — the degenerate point `{t_min}`.
#[derive(Debug, Clone)]
pub struct Dendrogram {
    n: u32,
    m: u64,
    events: Vec<MergeEvent>,
    /// id -> index of the event that consumed it (`u32::MAX` while alive).
    consuming_event: Vec<u32>,
    /// id -> number of leaves underneath.
    size: Vec<u32>,
    /// event index -> phase index (0-based).
    phase_of_event: Vec<u32>,
    /// phase p covers events[phase_starts[p]..phase_starts[p+1]].
    phase_starts: Vec<usize>,
}

impl Dendrogram {
    /// Validate a merge sequence and derive the query structures.
    pub fn from_events(n: u32, m: u64, events: Vec<MergeEvent>) -> Result<Self> {
        if events.is_empty() {
            return Err(Error::EmptyDendrogram);
        }
        let total = n as usize + events.len();
        let mut consuming_event = vec![u32::MAX; total];
        let mut size = vec![0u32; total];
        for i in 0..n {
            size[i as usize] = 1;
        }
        let mut phase_of_event = Vec::with_capacity(events.len());
        let mut phase_starts = vec![0usize];
        let mut prev_t: Option<Ratio> = None;
        for (idx, ev) in events.iter().enumerate() {
            if ev.ordinal as usize != idx || ev.result != n + idx as u32 {
                return Err(Error::InvalidParameter(format!(
                    "merge {idx}: bad ordinal or result id"
                )));
            }
            if ev.a >= ev.result || ev.b >= ev.result || ev.a == ev.b {
                return Err(Error::InvalidParameter(format!(
                    "merge {idx}: merges {} and {} into {}",
                    ev.a, ev.b, ev.result
                )));
            }
            for c in [ev.a, ev.b] {
                if consuming_event[c as usize] != u32::MAX {
                    return Err(Error::InvalidParameter(format!(
                        "merge {idx}: community {c} already consumed"
                    )));
                }
                if size[c as usize] == 0 {
                    return Err(Error::InvalidParameter(format!(
                        "merge {idx}: community {c} never created"
                    )));
                }
                consuming_event[c as usize] = idx as u32;
            }
            size[ev.result as usize] = size[ev.a as usize] + size[ev.b as usize];
            match prev_t {
                None => phase_of_event.push(0),
                Some(p) if ev.t == p => {
                    phase_of_event.push(*phase_of_event.last().unwrap())
                }
                Some(p) if ev.t < p => {
                    phase_of_event.push(phase_of_event.last().unwrap() + 1);
                    phase_starts.push(idx);
                }
                Some(_) => {
                    return Err(Error::InvalidParameter(format!(
                        "merge {idx}: resolution increased"
                    )));
                }
            }
            prev_t = Some(ev.t);
        }
        phase_starts.push(events.len());
        Ok(Dendrogram {
            n,
            m,
            events,
            consuming_event,
            size,
            phase_of_event,
            phase_starts,
        })
    }

    pub fn leaf_count(&self) -> u32 {
        self.n
    }

    pub fn edge_count(&self) -> u64 {
        self.m
    }

    pub fn events(&self) -> &[MergeEvent] {
        &self.events
    }

    /// Total community ids: leaves plus one per merge.
    pub fn node_total(&self) -> usize {
        self.n as usize + self.events.len()
    }

    pub fn t_max(&self) -> Ratio {
        self.events[0].t
    }

    pub fn t_min(&self) -> Ratio {
        self.events[self.events.len() - 1].t
    }

    /// Number of merge phases (distinct resolutions).
    pub fn phase_count(&self) -> usize {
        self.phase_starts.len() - 1
    }

    /// Resolution stamp shared by every merge of phase `p`.
    pub fn phase_stamp(&self, p: usize) -> Ratio {
        self.events[self.phase_starts[p]].t
    }

    /// Leaves underneath community `id`.
    pub fn community_size(&self, id: u32) -> u32 {
        self.size[id as usize]
    }

    /// The merge that consumed `id`, if any.
    pub fn consuming_event(&self, id: u32) -> Option<&MergeEvent> {
        match self.consuming_event[id as usize] {
            u32::MAX => None,
            idx => Some(&self.events[idx as usize]),
        }
    }

    /// Resolution at which `id` came into existence (`t_max` for leaves).
    pub fn creation_stamp(&self, id: u32) -> Ratio {
        if id < self.n {
            self.t_max()
        } else {
            self.events[(id - self.n) as usize].t
        }
    }

    /// 0 for leaves, otherwise 1 + creating phase index.
    fn created_rank(&self, id: u32) -> u32 {
        if id < self.n {
            0
        } else {
            self.phase_of_event[(id - self.n) as usize] + 1
        }
    }

    fn consumed_rank(&self, id: u32) -> u32 {
        match self.consuming_event[id as usize] {
            u32::MAX => self.phase_count() as u32 + 1,
            idx => self.phase_of_event[idx as usize] + 1,
        }
    }

    /// Whether `id` is part of some breakpoint partition, i.e. survives the
    /// phase that created it. Communities created and consumed within one
    /// phase are transient and never observable at any resolution.
    pub fn existed_at_breakpoint(&self, id: u32) -> bool {
        self.consumed_rank(id) > self.created_rank(id)
    }

    /// Per-node community labels after replaying the first `count` events.
    pub fn labels_after_events(&self, count: usize) -> Vec<u32> {
        let count = count.min(self.events.len());
        let mut parent: Vec<u32> = (0..self.n + count as u32).collect();
        for ev in &self.events[..count] {
            parent[ev.a as usize] = ev.result;
            parent[ev.b as usize] = ev.result;
        }
        let mut labels = vec![0u32; self.n as usize];
        for i in 0..self.n {
            let mut v = i;
            while parent[v as usize] != v {
                // path halving
                parent[v as usize] = parent[parent[v as usize] as usize];
                v = parent[v as usize];
            }
            labels[i as usize] = v;
        }
        labels
    }

    /// Labels of the breakpoint partition at the end of phase `p`.
    pub fn labels_after_phase(&self, p: usize) -> Vec<u32> {
        self.labels_after_events(self.phase_starts[p + 1])
    }

    /// Number of merge events replayed for a query at resolution `t` (the
    /// right-closed interval semantics of [`Self::labels_at`]).
    pub(crate) fn prefix_for(&self, t: f64) -> usize {
        if t <= self.t_min().to_f64() {
            return self.events.len();
        }
        if t >= self.t_max().to_f64() {
            return 0;
        }
        self.events.partition_point(|ev| ev.t.ge_f64(t))
    }

    /// Community labels of the weakly optimal partition at resolution `t`.
    ///
    /// Queries follow the right-closed interval semantics: `t` picks the
    /// partition of the interval `(t', t_phase]` containing it, by replaying
    /// every merge with stamp `≥ t`. Queries at or below `t_min` return the
    /// terminal partition, queries at or above `t_max` the singletons;
    /// values outside `[t_min, t_max]` are thereby clamped.
    pub fn labels_at(&self, t: f64) -> Vec<u32> {
        self.labels_after_events(self.prefix_for(t))
    }

    /// Full [`PartitionState`] at resolution `t` (see [`Self::labels_at`]).
    pub fn partition_at(&self, graph: &Graph, t: f64) -> Result<PartitionState> {
        if graph.node_count() as u32 != self.n || graph.edge_count() as u64 != self.m {
            return Err(Error::InvalidParameter(
                "graph does not match dendrogram dimensions".into(),
            ));
        }
        Ok(PartitionState::from_labels(graph, &self.labels_at(t)))
    }
}

/// A witness that some pair of connected communities could be merged without
/// lowering `Q_t` somewhere inside the checked interval.
#[derive(Debug, Clone, Copy)]
pub struct OptimalityViolation {
    pub a: u32,
    pub b: u32,
    /// The pair's zero-gain resolution `e(C,C')·m/(k_C·k_C')`.
    pub ratio: f64,
}

/// Check weak optimality of a partition over the resolution interval
/// `(t_lo, t_hi]`: joining any connected pair of communities must strictly
/// decrease `Q_t` for every `t` in the interval, which holds exactly when
/// every pair's ratio is at most `t_lo` (`ΔQ_t` falls as `t` grows, so the
/// binding resolution is the interval's lower end). Aggregates are recounted
/// from the graph, not trusted from the caller.
///
/// Returns `Ok(None)` on pass, `Ok(Some(witness))` on failure.
pub fn weak_optimality_check(
    graph: &Graph,
    labels: &[u32],
    t_lo: f64,
    t_hi: f64,
) -> Result<Option<OptimalityViolation>> {
    if t_lo > t_hi || t_lo.is_nan() || t_hi.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "empty interval ({t_lo}, {t_hi}]"
        )));
    }
    let state = PartitionState::from_labels(graph, labels);
    Ok(weak_optimality_violation(&state, |r| !r.gt_f64(t_lo)))
}

/// Exact-rational variant of [`weak_optimality_check`] for intervals whose
/// lower end is a dendrogram breakpoint.
pub fn weak_optimality_check_exact(
    graph: &Graph,
    labels: &[u32],
    t_lo: Ratio,
) -> Option<OptimalityViolation> {
    let state = PartitionState::from_labels(graph, labels);
    weak_optimality_violation(&state, |r| r <= t_lo)
}

fn weak_optimality_violation(
    state: &PartitionState,
    within_bound: impl Fn(Ratio) -> bool,
) -> Option<OptimalityViolation> {
    let m = state.m() as u128;
    for c in state.communities() {
        for &(other, e) in &c.cut {
            if other <= c.id {
                continue;
            }
            let k_other = state.community(other).expect("cut neighbor exists").k;
            let ratio = Ratio::new(e as u128 * m, c.k as u128 * k_other as u128);
            if !within_bound(ratio) {
                return Some(OptimalityViolation {
                    a: c.id,
                    b: other,
                    ratio: ratio.to_f64(),
                });
            }
        }
    }
    None
}

/// Serialize a dendrogram with its graph's node tokens:
///
/// ```text
/// # deltacom dendrogram v1
/// n m t_max t_min          (resolutions as exact fractions)
/// node <index> <token>     (n lines)
/// merge <ordinal> <num/den> <decimal> <a> <b> <result>
/// ```
pub fn write_dendrogram(d: &Dendrogram, graph: &Graph, out: &mut dyn Write) -> Result<()> {
    if graph.node_count() as u32 != d.n {
        return Err(Error::InvalidParameter(
            "graph does not match dendrogram dimensions".into(),
        ));
    }
    writeln!(out, "# deltacom dendrogram v1")?;
    writeln!(
        out,
        "{} {} {} {}",
        d.n,
        d.m,
        d.t_max().as_fraction(),
        d.t_min().as_fraction()
    )?;
    for i in 0..d.n {
        writeln!(out, "node {} {}", i, graph.token(i))?;
    }
    for ev in &d.events {
        writeln!(
            out,
            "merge {} {} {} {} {} {}",
            ev.ordinal,
            ev.t.as_fraction(),
            ev.t.to_f64(),
            ev.a,
            ev.b,
            ev.result
        )?;
    }
    Ok(())
}

/// Read a dendrogram back, returning it with the leaf token table.
pub fn read_dendrogram(reader: impl BufRead) -> Result<(Dendrogram, Vec<String>)> {
    let mut header: Option<(u32, u64, Ratio, Ratio)> = None;
    let mut tokens: Vec<String> = Vec::new();
    let mut events: Vec<MergeEvent> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if header.is_none() {
            if fields.len() != 4 {
                return Err(Error::parse(lineno, "expected header `n m t_max t_min`"));
            }
            let n: u32 = fields[0]
                .parse()
                .map_err(|_| Error::parse(lineno, "bad n"))?;
            let m: u64 = fields[1]
                .parse()
                .map_err(|_| Error::parse(lineno, "bad m"))?;
            let t_max = Ratio::parse(fields[2], lineno)?;
            let t_min = Ratio::parse(fields[3], lineno)?;
            header = Some((n, m, t_max, t_min));
            continue;
        }
        match fields[0] {
            "node" => {
                if fields.len() != 3 {
                    return Err(Error::parse(lineno, "expected `node index token`"));
                }
                let idx: usize = fields[1]
                    .parse()
                    .map_err(|_| Error::parse(lineno, "bad node index"))?;
                if idx != tokens.len() {
                    return Err(Error::parse(lineno, "node lines out of order"));
                }
                tokens.push(fields[2].to_string());
            }
            "merge" => {
                if fields.len() != 7 {
                    return Err(Error::parse(
                        lineno,
                        "expected `merge ordinal num/den decimal a b result`",
                    ));
                }
                let parse_u32 = |s: &str| -> Result<u32> {
                    s.parse().map_err(|_| Error::parse(lineno, "bad integer"))
                };
                events.push(MergeEvent {
                    ordinal: parse_u32(fields[1])?,
                    t: Ratio::parse(fields[2], lineno)?,
                    a: parse_u32(fields[4])?,
                    b: parse_u32(fields[5])?,
                    result: parse_u32(fields[6])?,
                });
            }
            other => {
                return Err(Error::parse(lineno, format!("unknown record `{other}`")));
            }
        }
    }
    let (n, m, t_max, t_min) = header.ok_or_else(|| Error::parse(0, "missing header"))?;
    if tokens.len() != n as usize {
        return Err(Error::parse(
            0,
            format!("expected {n} node lines, got {}", tokens.len()),
        ));
    }
    let d = Dendrogram::from_events(n, m, events)?;
    if d.t_max() != t_max || d.t_min() != t_min {
        return Err(Error::parse(0, "header resolutions disagree with merges"));
    }
    Ok((d, tokens))
}
