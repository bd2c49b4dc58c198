//! Ranking toolkit for RDF instance graphs whose node importance is not
//! tied to node degree.
//!
//! The pipeline: [`rdf`] stream-parses N-Triples and classifies each
//! statement against the discovered instance set; [`graph`] builds an
//! immutable interned-id graph with deduplicated adjacency and per-node
//! datatype-property counts; [`centrality`] provides degree, PageRank,
//! Weighted PageRank and eigenvector baselines; [`inforank`] computes the
//! degree-decoupled importance measures; [`eval`] scores induced rankings
//! against gold-standard lists; [`synth`] generates test fixtures.

pub mod centrality;
pub mod eval;
pub mod graph;
pub mod inforank;
pub mod rdf;
pub mod snapshot;
pub mod synth;

pub use centrality::{IterationConfig, Measure, ScoreVector};
pub use graph::{BuildStats, InstanceGraph, NodeId};
pub use rdf::{Term, Triple};
