//! Baseline measures over the instance graph: in/out/total degree,
//! PageRank, Weighted PageRank and eigenvector centrality, sharing one
//! power-iteration convergence contract.
//!
//! All iterative measures are Jacobi-style: an iteration reads only the
//! previous vector, per-node contributions accumulate in ascending
//! neighbor-id order, and convergence tests the maximum absolute per-node
//! change. Results are bit-reproducible for a fixed graph regardless of
//! thread count.

use std::collections::HashMap;
use std::fmt;
use std::io;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{InstanceGraph, NodeId};

/// Tag identifying which measure produced a score vector. The display
/// form doubles as the CLI measure name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    InDegree,
    OutDegree,
    Degree,
    PageRank,
    WeightedPageRank,
    Eigenvector,
    InfoRank1,
    InfoRank2,
    InfoRank3,
}

impl Measure {
    pub const ALL: [Measure; 9] = [
        Measure::InDegree,
        Measure::OutDegree,
        Measure::Degree,
        Measure::PageRank,
        Measure::WeightedPageRank,
        Measure::Eigenvector,
        Measure::InfoRank1,
        Measure::InfoRank2,
        Measure::InfoRank3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::InDegree => "indegree",
            Measure::OutDegree => "outdegree",
            Measure::Degree => "degree",
            Measure::PageRank => "pagerank",
            Measure::WeightedPageRank => "wpagerank",
            Measure::Eigenvector => "eigenvector",
            Measure::InfoRank1 => "inforank1",
            Measure::InfoRank2 => "inforank2",
            Measure::InfoRank3 => "inforank3",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Measure::ALL.iter().map(|m| m.name()).collect();
                format!(
                    "unknown measure {s:?}; expected one of: {}",
                    names.join(", ")
                )
            })
    }
}

/// Power-iteration control: damping factor, L-infinity convergence
/// threshold and iteration cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationConfig {
    /// Damping factor in (0, 1). Unused by the normalized measures.
    pub alpha: f64,
    /// Convergence threshold on the max absolute per-node change.
    pub epsilon: f64,
    /// Iteration cap.
    pub max_iter: usize,
}

impl Default for IterationConfig {
    fn default() -> Self {
        IterationConfig {
            alpha: 0.85,
            epsilon: 1e-3,
            max_iter: 200,
        }
    }
}

impl IterationConfig {
    pub fn validate(&self) -> Result<(), RankError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(RankError::InvalidConfig(format!(
                "alpha must be in (0, 1), got {}",
                self.alpha
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(RankError::InvalidConfig(format!(
                "epsilon must be positive and finite, got {}",
                self.epsilon
            )));
        }
        if self.max_iter < 1 {
            return Err(RankError::InvalidConfig(
                "max_iter must be at least 1".to_owned(),
            ));
        }
        Ok(())
    }
}

/// One score per graph node plus convergence metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub measure: Measure,
    pub scores: Vec<f64>,
    /// Iterations actually run (0 for closed-form measures).
    pub iterations: usize,
    pub converged: bool,
    /// Max absolute per-node change of the last iteration.
    pub final_delta: f64,
}

impl ScoreVector {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    fn closed_form(measure: Measure, scores: Vec<f64>) -> ScoreVector {
        ScoreVector {
            measure,
            scores,
            iterations: 0,
            converged: true,
            final_delta: 0.0,
        }
    }
}

#[derive(Debug, Error)]
pub enum RankError {
    #[error("empty graph")]
    EmptyGraph,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Which degree to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeMode {
    In,
    Out,
    Total,
}

/// Degree over deduplicated instance-to-instance object edges;
/// `rdf:type` links and datatype statements never count.
pub fn degree_scores(graph: &InstanceGraph, mode: DegreeMode) -> ScoreVector {
    let (measure, scores): (Measure, Vec<f64>) = match mode {
        DegreeMode::In => (
            Measure::InDegree,
            graph
                .node_ids()
                .map(|v| graph.in_degree(v) as f64)
                .collect(),
        ),
        DegreeMode::Out => (
            Measure::OutDegree,
            graph
                .node_ids()
                .map(|v| graph.out_degree(v) as f64)
                .collect(),
        ),
        DegreeMode::Total => (
            Measure::Degree,
            graph.node_ids().map(|v| graph.degree(v) as f64).collect(),
        ),
    };
    ScoreVector::closed_form(measure, scores)
}

/// What to do with the rank mass of nodes that have no outgoing edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DanglingPolicy {
    /// Redistribute dangling mass uniformly, keeping the vector a
    /// probability distribution.
    #[default]
    Redistribute,
    /// Let dangling mass vanish; the vector then sums below one.
    Drop,
}

impl fmt::Display for DanglingPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DanglingPolicy::Redistribute => "redistribute",
            DanglingPolicy::Drop => "drop",
        })
    }
}

impl FromStr for DanglingPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "redistribute" => Ok(DanglingPolicy::Redistribute),
            "drop" => Ok(DanglingPolicy::Drop),
            other => Err(format!(
                "unknown dangling policy {other:?}; expected redistribute or drop"
            )),
        }
    }
}

/// Per-predicate link weights in `[0, 1]` with a default for predicates
/// not listed. The weight of a deduplicated edge is the maximum over the
/// predicates recorded on it.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    entries: HashMap<String, f64>,
    default_weight: f64,
}

impl Default for WeightTable {
    fn default() -> Self {
        WeightTable {
            entries: HashMap::new(),
            default_weight: 1.0,
        }
    }
}

#[derive(Debug, Error)]
pub enum WeightError {
    #[error("line {line}: weight {value} outside [0, 1]")]
    OutOfRange { line: usize, value: f64 },
    #[error("line {line}: expected `<predicate-iri>\\t<weight>`")]
    Malformed { line: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl WeightTable {
    pub fn new(default_weight: f64) -> Result<Self, WeightError> {
        check_weight(default_weight, 0)?;
        Ok(WeightTable {
            entries: HashMap::new(),
            default_weight,
        })
    }

    pub fn insert(&mut self, predicate: impl Into<String>, weight: f64) -> Result<(), WeightError> {
        check_weight(weight, 0)?;
        self.entries.insert(predicate.into(), weight);
        Ok(())
    }

    pub fn default_weight(&self) -> f64 {
        self.default_weight
    }

    pub fn weight(&self, predicate: &str) -> f64 {
        self.entries
            .get(predicate)
            .copied()
            .unwrap_or(self.default_weight)
    }

    /// Max predicate weight on the directed pair `(s, o)`; the default
    /// weight if the pair carries no edge.
    pub fn edge_weight(&self, graph: &InstanceGraph, s: NodeId, o: NodeId) -> f64 {
        if graph.edge_predicate_ids(s, o).is_empty() {
            return self.default_weight;
        }
        graph
            .edge_predicates(s, o)
            .map(|p| self.weight(p))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Parses the table format: one `<predicate-iri>\t<weight>` per line,
    /// plus an optional `default\t<weight>` line. Blank lines and `#`
    /// comments are ignored.
    pub fn parse(text: &str) -> Result<Self, WeightError> {
        let mut table = WeightTable::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed
                .split_once('\t')
                .ok_or(WeightError::Malformed { line })?;
            let weight: f64 = value
                .trim()
                .parse()
                .map_err(|_| WeightError::Malformed { line })?;
            check_weight(weight, line)?;
            if key == "default" {
                table.default_weight = weight;
            } else {
                table.entries.insert(key.to_owned(), weight);
            }
        }
        Ok(table)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, WeightError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

fn check_weight(value: f64, line: usize) -> Result<(), WeightError> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(WeightError::OutOfRange { line, value })
    }
}

/// PageRank by power iteration over the directed graph, starting from the
/// uniform vector, with uniform redistribution of dangling mass.
pub fn pagerank(graph: &InstanceGraph, cfg: &IterationConfig) -> Result<ScoreVector, RankError> {
    pagerank_with_dangling(graph, cfg, DanglingPolicy::Redistribute)
}

pub fn pagerank_with_dangling(
    graph: &InstanceGraph,
    cfg: &IterationConfig,
    policy: DanglingPolicy,
) -> Result<ScoreVector, RankError> {
    cfg.validate()?;
    if graph.is_empty() {
        return Err(RankError::EmptyGraph);
    }
    let n = graph.node_count();
    let init = vec![1.0 / n as f64; n];
    Ok(pagerank_from(graph, cfg, policy, None, init))
}

/// PageRank with each in-contribution scaled by the link weight of the
/// deduplicated edge it travels. Weights multiply the unweighted share;
/// no per-source normalization is applied, so mass is not conserved when
/// weights are below one.
pub fn weighted_pagerank(
    graph: &InstanceGraph,
    weights: &WeightTable,
    cfg: &IterationConfig,
) -> Result<ScoreVector, RankError> {
    weighted_pagerank_with_dangling(graph, weights, cfg, DanglingPolicy::Redistribute)
}

pub fn weighted_pagerank_with_dangling(
    graph: &InstanceGraph,
    weights: &WeightTable,
    cfg: &IterationConfig,
    policy: DanglingPolicy,
) -> Result<ScoreVector, RankError> {
    cfg.validate()?;
    if graph.is_empty() {
        return Err(RankError::EmptyGraph);
    }
    let n = graph.node_count();
    // Resolve the weight of every in-edge once, aligned with the in-CSR.
    let per_pred: Vec<f64> = (0..graph.predicate_count())
        .map(|p| weights.weight(graph.predicate_iri(crate::graph::PredId(p as u32))))
        .collect();
    let in_weights: Vec<Vec<f64>> = graph
        .node_ids()
        .map(|v| {
            graph
                .in_neighbors(v)
                .iter()
                .map(|&t| {
                    graph
                        .edge_predicate_ids(t, v)
                        .iter()
                        .map(|p| per_pred[p.0 as usize])
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect()
        })
        .collect();
    let init = vec![1.0 / n as f64; n];
    Ok(pagerank_from(graph, cfg, policy, Some(&in_weights), init))
}

/// One shared engine for the damped measures. `in_weights`, when given,
/// holds one factor per in-CSR slot.
pub(crate) fn pagerank_from(
    graph: &InstanceGraph,
    cfg: &IterationConfig,
    policy: DanglingPolicy,
    in_weights: Option<&[Vec<f64>]>,
    init: Vec<f64>,
) -> ScoreVector {
    let n = graph.node_count();
    let inv_n = 1.0 / n as f64;
    let base = (1.0 - cfg.alpha) * inv_n;
    let inv_outdeg: Vec<f64> = graph
        .node_ids()
        .map(|v| {
            let d = graph.out_degree(v);
            if d == 0 {
                0.0
            } else {
                1.0 / d as f64
            }
        })
        .collect();
    let dangling: Vec<usize> = (0..n).filter(|&v| inv_outdeg[v] == 0.0).collect();

    let measure = if in_weights.is_some() {
        Measure::WeightedPageRank
    } else {
        Measure::PageRank
    };
    let mut prev = init;
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;
    let mut final_delta = f64::INFINITY;

    while iterations < cfg.max_iter {
        // Dangling mass is summed sequentially in id order so the result
        // does not depend on the thread count.
        let dangling_share = match policy {
            DanglingPolicy::Redistribute => {
                cfg.alpha * dangling.iter().map(|&v| prev[v]).sum::<f64>() * inv_n
            }
            DanglingPolicy::Drop => 0.0,
        };
        let prev_ref = &prev;
        next.par_iter_mut().enumerate().for_each(|(v, slot)| {
            let mut acc = 0.0;
            match in_weights {
                Some(w) => {
                    let row_w = &w[v];
                    for (i, t) in graph.in_neighbors(NodeId(v as u32)).iter().enumerate() {
                        acc += prev_ref[t.index()] * inv_outdeg[t.index()] * row_w[i];
                    }
                }
                None => {
                    for t in graph.in_neighbors(NodeId(v as u32)) {
                        acc += prev_ref[t.index()] * inv_outdeg[t.index()];
                    }
                }
            }
            *slot = base + dangling_share + cfg.alpha * acc;
        });
        final_delta = max_abs_delta(&next, &prev);
        std::mem::swap(&mut prev, &mut next);
        iterations += 1;
        log::debug!("{measure} iteration {iterations}: delta {final_delta:e}");
        if final_delta < cfg.epsilon {
            converged = true;
            break;
        }
    }

    ScoreVector {
        measure,
        scores: prev,
        iterations,
        converged,
        final_delta,
    }
}

/// Eigenvector centrality over the undirected graph: each iteration adds
/// the neighbor sum to the node's own score, then the whole vector is
/// divided by its Euclidean norm. `alpha` is unused.
pub fn eigenvector_centrality(
    graph: &InstanceGraph,
    cfg: &IterationConfig,
) -> Result<ScoreVector, RankError> {
    cfg.validate()?;
    if graph.is_empty() {
        return Err(RankError::EmptyGraph);
    }
    let n = graph.node_count();
    Ok(eigenvector_from(graph, cfg, vec![1.0 / n as f64; n]))
}

pub(crate) fn eigenvector_from(
    graph: &InstanceGraph,
    cfg: &IterationConfig,
    init: Vec<f64>,
) -> ScoreVector {
    normalized_iteration(Measure::Eigenvector, cfg, init, |prev, raw| {
        raw.par_iter_mut().enumerate().for_each(|(v, slot)| {
            let mut acc = prev[v];
            for t in graph.neighbors(NodeId(v as u32)) {
                acc += prev[t.index()];
            }
            *slot = acc;
        });
    })
}

/// Shared driver for the self-reinforcing normalized measures: apply
/// `step` into a raw vector, normalize to unit Euclidean length, test the
/// L-infinity change against `epsilon`.
pub(crate) fn normalized_iteration<F>(
    measure: Measure,
    cfg: &IterationConfig,
    init: Vec<f64>,
    step: F,
) -> ScoreVector
where
    F: Fn(&[f64], &mut Vec<f64>),
{
    let n = init.len();
    let mut prev = init;
    let mut raw = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;
    let mut final_delta = f64::INFINITY;

    while iterations < cfg.max_iter {
        step(&prev, &mut raw);
        let norm = l2_norm(&raw);
        raw.iter_mut().for_each(|x| *x /= norm);
        final_delta = max_abs_delta(&raw, &prev);
        std::mem::swap(&mut prev, &mut raw);
        iterations += 1;
        log::debug!("{measure} iteration {iterations}: delta {final_delta:e}");
        if final_delta < cfg.epsilon {
            converged = true;
            break;
        }
    }

    ScoreVector {
        measure,
        scores: prev,
        iterations,
        converged,
        final_delta,
    }
}

/// Sequential sum of squares: deterministic regardless of thread count.
pub(crate) fn l2_norm(xs: &[f64]) -> f64 {
    xs.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn max_abs_delta(a: &[f64], b: &[f64]) -> f64 {
    a.par_iter()
        .zip(b.par_iter())
        .map(|(x, y)| (x - y).abs())
        .reduce(|| 0.0, f64::max)
}
