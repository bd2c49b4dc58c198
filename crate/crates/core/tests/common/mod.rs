//! Dense reference implementations of the ranking recurrences, kept
//! deliberately naive: n x n matrices, full sorts, no code shared with
//! the sparse engine. Used as independent oracles.

// index-style loops mirror the matrix formulation on purpose
#![allow(clippy::needless_range_loop)]

use inforank_core::centrality::{IterationConfig, WeightTable};
use inforank_core::graph::{InstanceGraph, NodeId};
use inforank_core::rdf::RDF_TYPE;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub struct DenseOutcome {
    pub scores: Vec<f64>,
    #[allow(dead_code)]
    pub iterations: usize,
}

fn max_delta(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Directed adjacency as a dense boolean matrix, `adj[s][o]`.
pub fn directed_matrix(g: &InstanceGraph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut adj = vec![vec![false; n]; n];
    for v in 0..n {
        for t in g.out_neighbors(NodeId(v as u32)) {
            adj[v][t.index()] = true;
        }
    }
    adj
}

/// Undirected adjacency as a dense boolean matrix.
pub fn undirected_matrix(g: &InstanceGraph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut adj = vec![vec![false; n]; n];
    for v in 0..n {
        for t in g.neighbors(NodeId(v as u32)) {
            adj[v][t.index()] = true;
        }
    }
    adj
}

/// Dense damped power iteration with uniform start and uniform dangling
/// redistribution. `weights[t][v]`, when given, scales the `t -> v`
/// contribution.
pub fn dense_pagerank(
    g: &InstanceGraph,
    cfg: &IterationConfig,
    weights: Option<&[Vec<f64>]>,
) -> DenseOutcome {
    let n = g.node_count();
    let adj = directed_matrix(g);
    let outdeg: Vec<usize> = adj
        .iter()
        .map(|row| row.iter().filter(|&&b| b).count())
        .collect();
    let mut prev = vec![1.0 / n as f64; n];
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        let dangling: f64 = (0..n).filter(|&t| outdeg[t] == 0).map(|t| prev[t]).sum();
        let base = (1.0 - cfg.alpha) / n as f64 + cfg.alpha * dangling / n as f64;
        let mut next = vec![base; n];
        for v in 0..n {
            for t in 0..n {
                if adj[t][v] {
                    let w = weights.map_or(1.0, |m| m[t][v]);
                    next[v] += cfg.alpha * prev[t] / outdeg[t] as f64 * w;
                }
            }
        }
        let delta = max_delta(&next, &prev);
        prev = next;
        iterations += 1;
        if delta < cfg.epsilon {
            break;
        }
    }
    DenseOutcome {
        scores: prev,
        iterations,
    }
}

/// Max-over-predicates edge weight matrix for the weighted variant.
pub fn dense_weight_matrix(g: &InstanceGraph, table: &WeightTable) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let mut m = vec![vec![0.0; n]; n];
    for s in 0..n {
        for o in g.out_neighbors(NodeId(s as u32)) {
            let w = g
                .edge_predicates(NodeId(s as u32), *o)
                .map(|p| table.weight(p))
                .fold(f64::NEG_INFINITY, f64::max);
            m[s][o.index()] = w;
        }
    }
    m
}

/// Dense self-retaining neighbor-sum iteration with Euclidean
/// normalization. `node_w`, when given, scales each contribution by
/// `w(v) + w(t)` and seeds the vector with the weights; otherwise the
/// start is uniform and contributions are unscaled. `z` limits each
/// node's neighbor set to the top scorers of the previous round.
pub fn dense_normalized(
    g: &InstanceGraph,
    cfg: &IterationConfig,
    node_w: Option<&[f64]>,
    z: Option<usize>,
) -> DenseOutcome {
    let n = g.node_count();
    let adj = undirected_matrix(g);
    let mut prev: Vec<f64> = match node_w {
        Some(w) => w.to_vec(),
        None => vec![1.0 / n as f64; n],
    };
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        let mut raw = vec![0.0; n];
        for v in 0..n {
            let mut neighbors: Vec<usize> = (0..n).filter(|&t| adj[v][t]).collect();
            if let Some(z) = z {
                neighbors.sort_by(|&a, &b| prev[b].total_cmp(&prev[a]).then_with(|| a.cmp(&b)));
                neighbors.truncate(z);
            }
            let mut acc = prev[v];
            for t in neighbors {
                let factor = node_w.map_or(1.0, |w| w[v] + w[t]);
                acc += prev[t] * factor;
            }
            raw[v] = acc;
        }
        let norm: f64 = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let next: Vec<f64> = raw.iter().map(|x| x / norm).collect();
        let delta = max_delta(&next, &prev);
        prev = next;
        iterations += 1;
        if delta < cfg.epsilon {
            break;
        }
    }
    DenseOutcome {
        scores: prev,
        iterations,
    }
}

/// Normalized information weights, computed from scratch.
pub fn dense_info_weights(g: &InstanceGraph) -> Vec<f64> {
    let n = g.node_count();
    let total: u64 = (0..n).map(|v| g.dtp_count(NodeId(v as u32)) as u64).sum();
    if total == 0 {
        return vec![1.0 / n as f64; n];
    }
    (0..n)
        .map(|v| g.dtp_count(NodeId(v as u32)) as f64 / total as f64)
        .collect()
}

/// Random N-Triples text over `n` zero-padded nodes: every node typed,
/// random directed edges over a four-predicate pool, random dtp in 0..=10.
pub fn random_graph_text(rng: &mut ChaCha8Rng, max_nodes: usize) -> String {
    let n = rng.random_range(1..=max_nodes);
    let iri = |i: usize| format!("http://ex/n{i:03}");
    let mut text = String::new();
    for i in 0..n {
        text.push_str(&format!("<{}> <{RDF_TYPE}> <http://ex/T> .\n", iri(i)));
    }
    let edges = rng.random_range(0..=n * 4);
    for _ in 0..edges {
        let s = rng.random_range(0..n);
        let o = rng.random_range(0..n);
        let p = rng.random_range(0..4u32);
        text.push_str(&format!("<{}> <http://ex/p{p}> <{}> .\n", iri(s), iri(o)));
    }
    for i in 0..n {
        let dtp = rng.random_range(0..=10u32);
        for k in 0..dtp {
            text.push_str(&format!("<{}> <http://ex/d{k}> \"v{k}\" .\n", iri(i)));
        }
    }
    text
}

/// Random weight table over the p0..p3 predicate pool.
pub fn random_weight_table(rng: &mut ChaCha8Rng) -> WeightTable {
    let mut table = WeightTable::new(rng.random_range(0.0..=1.0)).unwrap();
    for p in 0..4 {
        table
            .insert(format!("http://ex/p{p}"), rng.random_range(0.0..=1.0))
            .unwrap();
    }
    table
}
