//! Multiresolution modularity community detection for large sparse graphs.
//!
//! The centrepiece is [`engine::deltacom`], an agglomerative optimizer of the
//! generalized modularity `Q_t` that produces, in a single run, a weakly
//! optimal partition for every resolution `t` between `t_max` (all
//! singletons) and `t_min` (one community per connected component). The
//! partitions are nested: lowering the resolution only ever merges
//! communities, so the whole family is encoded compactly as a
//! [`engine::Dendrogram`] of merge events stamped with the resolution at
//! which they fired.
//!
//! Around the engine, the crate provides everything needed to evaluate the
//! method against node-affiliation ground truth the way one would on an
//! Internet router-level map:
//!
//! * [`graph`] — compact undirected simple graphs, edge-list/affiliation I/O
//!   (plain or gzip), and descriptive statistics ([`stats`]);
//! * [`preprocess`] — 2-core extraction, degree-2 chain detection,
//!   classification and collapse;
//! * [`baselines`] — label propagation and a Louvain-style greedy optimizer
//!   for single-resolution comparisons;
//! * [`matching`] — Jaccard recall scores R1/R2/R3, size–resolution
//!   regression, sample-based group retrieval, and community-notion
//!   diagnostics;
//! * [`synth`] — seeded planted-partition generators with chain/tendril
//!   decorations for end-to-end validation.

pub mod baselines;
pub mod engine;
mod error;
pub mod graph;
pub mod matching;
pub mod partition;
pub mod preprocess;
mod ratio;
pub mod stats;
pub mod synth;

pub use engine::{deltacom, Dendrogram, MergeEvent};
pub use error::{Error, Result};
pub use graph::{AffiliationMap, Graph, GraphBuilder, LoadReport};
pub use partition::PartitionState;
pub use ratio::Ratio;
