//! Degree-decoupled node importance. The information weight of a node is
//! its share of all deduplicated datatype statements; propagation extends
//! eigenvector centrality with those weights, optionally restricted to
//! each node's top-z neighbors from the previous iteration, so that a few
//! well-scored neighbors count for more than many poorly scored ones.

use rayon::prelude::*;
use thiserror::Error;

use crate::centrality::{normalized_iteration, IterationConfig, Measure, RankError, ScoreVector};
use crate::graph::{InstanceGraph, NodeId};

/// Normalized information weights `w(v) = dtp(v) / total dtp`.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoWeights {
    pub weights: Vec<f64>,
    pub total_dtp: u64,
    /// True when no node carries any datatype statement and the uniform
    /// fallback `1/n` was used instead.
    pub fallback_used: bool,
}

/// Number of top-scored neighbors whose importance propagates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TopZConfig {
    z: usize,
}

#[derive(Debug, Error)]
#[error("z must be at least 1")]
pub struct InvalidZ;

impl TopZConfig {
    pub fn new(z: usize) -> Result<Self, InvalidZ> {
        if z >= 1 {
            Ok(TopZConfig { z })
        } else {
            Err(InvalidZ)
        }
    }

    pub fn z(self) -> usize {
        self.z
    }
}

/// Computes the information weights. Falls back to the uniform vector
/// when the graph carries no datatype statements at all, so the
/// propagating measures stay defined on literal-free graphs.
pub fn info_weights(graph: &InstanceGraph) -> Result<InfoWeights, RankError> {
    if graph.is_empty() {
        return Err(RankError::EmptyGraph);
    }
    let total_dtp = graph.total_dtp();
    let n = graph.node_count();
    if total_dtp == 0 {
        return Ok(InfoWeights {
            weights: vec![1.0 / n as f64; n],
            total_dtp: 0,
            fallback_used: true,
        });
    }
    let total = total_dtp as f64;
    let weights = graph
        .node_ids()
        .map(|v| graph.dtp_count(v) as f64 / total)
        .collect();
    Ok(InfoWeights {
        weights,
        total_dtp,
        fallback_used: false,
    })
}

/// First measure: the information weights themselves, no traversal.
pub fn inforank1(graph: &InstanceGraph) -> Result<ScoreVector, RankError> {
    let iw = info_weights(graph)?;
    Ok(ScoreVector {
        measure: Measure::InfoRank1,
        scores: iw.weights,
        iterations: 0,
        converged: true,
        final_delta: 0.0,
    })
}

/// Second measure: eigenvector-style propagation seeded and weighted by
/// the information weights. Each iteration computes
/// `score'(v) = score(v) + sum over neighbors t of score(t) * (w(v) + w(t))`
/// and then normalizes the vector to unit Euclidean length.
pub fn inforank2(graph: &InstanceGraph, cfg: &IterationConfig) -> Result<ScoreVector, RankError> {
    cfg.validate()?;
    let iw = info_weights(graph)?;
    let w = iw.weights;
    Ok(normalized_iteration(
        Measure::InfoRank2,
        cfg,
        w.clone(),
        |prev, raw| {
            raw.par_iter_mut().enumerate().for_each(|(v, slot)| {
                let wv = w[v];
                let mut acc = prev[v];
                for t in graph.neighbors(NodeId(v as u32)) {
                    acc += prev[t.index()] * (wv + w[t.index()]);
                }
                *slot = acc;
            });
        },
    ))
}

/// Third measure: as [`inforank2`], but each node propagates only from
/// its `z` neighbors with the highest score in the previous iteration
/// (all neighbors when the degree is at most `z`). Boundary ties break
/// toward the lower node id. With `z` at or above the maximum degree the
/// result is bit-identical to [`inforank2`].
pub fn inforank3(
    graph: &InstanceGraph,
    zc: TopZConfig,
    cfg: &IterationConfig,
) -> Result<ScoreVector, RankError> {
    cfg.validate()?;
    let iw = info_weights(graph)?;
    let w = iw.weights;
    let z = zc.z;
    Ok(normalized_iteration(
        Measure::InfoRank3,
        cfg,
        w.clone(),
        |prev, raw| {
            raw.par_iter_mut().enumerate().for_each_init(
                Vec::new,
                |scratch: &mut Vec<NodeId>, (v, slot)| {
                    *slot = propagate_top_z(graph, &w, prev, NodeId(v as u32), z, scratch);
                },
            );
        },
    ))
}

/// One node update of the top-z recurrence. The selected neighbors are
/// accumulated in ascending id order, the same order the unrestricted
/// measure uses, so full selection reproduces it exactly.
fn propagate_top_z(
    graph: &InstanceGraph,
    w: &[f64],
    prev: &[f64],
    v: NodeId,
    z: usize,
    scratch: &mut Vec<NodeId>,
) -> f64 {
    let neighbors = graph.neighbors(v);
    let wv = w[v.index()];
    let mut acc = prev[v.index()];
    if neighbors.len() <= z {
        for t in neighbors {
            acc += prev[t.index()] * (wv + w[t.index()]);
        }
    } else {
        scratch.clear();
        scratch.extend_from_slice(neighbors);
        scratch.select_nth_unstable_by(z - 1, |a, b| rank_order(prev, *a, *b));
        let selected = &mut scratch[..z];
        selected.sort_unstable();
        for t in selected.iter() {
            acc += prev[t.index()] * (wv + w[t.index()]);
        }
    }
    acc
}

/// Orders neighbor candidates best-first: higher previous score first,
/// ties toward the lower id.
fn rank_order(prev: &[f64], a: NodeId, b: NodeId) -> std::cmp::Ordering {
    prev[b.index()]
        .total_cmp(&prev[a.index()])
        .then_with(|| a.cmp(&b))
}

/// The `min(z, degree)` neighbors of `v` with the highest previous-round
/// scores, ordered by (score descending, id ascending). Selection is by
/// partial ordering, so large neighbor lists are not fully sorted.
///
/// `prev` must hold one score per graph node.
pub fn top_z_neighbors(graph: &InstanceGraph, v: NodeId, prev: &[f64], z: usize) -> Vec<NodeId> {
    assert_eq!(
        prev.len(),
        graph.node_count(),
        "previous score vector must cover every node"
    );
    let neighbors = graph.neighbors(v);
    let mut picked: Vec<NodeId> = neighbors.to_vec();
    if z < picked.len() {
        picked.select_nth_unstable_by(z - 1, |a, b| rank_order(prev, *a, *b));
        picked.truncate(z);
    }
    picked.sort_unstable_by(|a, b| rank_order(prev, *a, *b));
    picked
}

/// Applies one raw (pre-normalization) top-z update to an arbitrary score
/// vector. Exposed for step-level inspection in tests.
pub fn top_z_step(graph: &InstanceGraph, w: &[f64], prev: &[f64], z: usize) -> Vec<f64> {
    let mut scratch = Vec::new();
    graph
        .node_ids()
        .map(|v| propagate_top_z(graph, w, prev, v, z, &mut scratch))
        .collect()
}
