//! The immutable instance graph: interned node ids, CSR adjacency in
//! undirected and directed form, per-node datatype-property counts, and
//! per-directed-edge predicate sets.
//!
//! Node ids are assigned by sorting the instance IRIs lexicographically,
//! and predicate ids likewise, so a graph built from any permutation of
//! the same triple stream is identical field by field.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{self, BufRead};
use std::path::Path;

use crate::rdf::{
    classify_triple, InstanceSet, NtriplesParser, ParseError, SkippedLine, Strictness, Term,
    Triple, TripleKind,
};

/// Dense node index. Ids run contiguously over `0..n` and map
/// bijectively to instance IRIs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Dense index of an object-property predicate IRI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredId(pub u32);

/// Compressed sparse rows: `row(v)` is a sorted slice of distinct targets.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(crate) struct Csr {
    pub(crate) offsets: Vec<u64>,
    pub(crate) targets: Vec<NodeId>,
}

impl Csr {
    fn from_pairs<F>(n: usize, pair_count: impl Fn(&mut Vec<u32>), fill: F) -> Csr
    where
        F: Fn(&mut dyn FnMut(usize, NodeId)),
    {
        let mut counts = vec![0u32; n];
        pair_count(&mut counts);
        let mut offsets = Vec::with_capacity(n + 1);
        let mut acc = 0u64;
        offsets.push(0);
        for &c in &counts {
            acc += c as u64;
            offsets.push(acc);
        }
        let mut cursor: Vec<u64> = offsets[..n].to_vec();
        let mut targets = vec![NodeId(0); acc as usize];
        fill(&mut |src, dst| {
            targets[cursor[src] as usize] = dst;
            cursor[src] += 1;
        });
        for v in 0..n {
            let (s, e) = (offsets[v] as usize, offsets[v + 1] as usize);
            targets[s..e].sort_unstable();
        }
        Csr { offsets, targets }
    }

    #[inline]
    pub(crate) fn row(&self, v: usize) -> &[NodeId] {
        &self.targets[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }
}

/// Census of what the builder saw. `triples_total` equals the sum of the
/// four classification counters plus `malformed_skipped`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub triples_total: u64,
    pub type_links: u64,
    pub object_edges: u64,
    pub dangling_edges_dropped: u64,
    pub datatype_statements: u64,
    pub duplicate_edges_merged: u64,
    pub self_loops_dropped: u64,
    pub malformed_skipped: u64,
}

/// The instance graph `G = (V, E)`. Immutable once built; all accessors
/// are read-only and safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceGraph {
    /// Node IRIs in id order (lexicographically sorted).
    pub(crate) iris: Vec<String>,
    /// Object-property predicate IRIs in id order (lexicographically sorted).
    pub(crate) predicates: Vec<String>,
    pub(crate) undirected: Csr,
    pub(crate) outgoing: Csr,
    pub(crate) incoming: Csr,
    /// Deduplicated datatype-statement count per node.
    pub(crate) dtp: Vec<u32>,
    /// Predicates observed on each distinct directed instance pair.
    pub(crate) edge_predicates: HashMap<(NodeId, NodeId), Vec<PredId>>,
}

impl InstanceGraph {
    pub fn node_count(&self) -> usize {
        self.iris.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iris.is_empty()
    }

    /// Looks up the dense id of an IRI. `None` if the IRI is not an instance.
    pub fn node_id(&self, iri: &str) -> Option<NodeId> {
        self.iris
            .binary_search_by(|probe| probe.as_str().cmp(iri))
            .ok()
            .map(|i| NodeId(i as u32))
    }

    /// The IRI of a node. Panics on an out-of-range id (caller bug).
    pub fn iri(&self, v: NodeId) -> &str {
        &self.iris[v.index()]
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.iris.len() as u32).map(NodeId)
    }

    /// Distinct undirected neighbors of `v`, ascending by id.
    /// Panics on an out-of-range id (caller bug).
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        self.undirected.row(v.index())
    }

    /// Distinct successors of `v` over directed object edges, ascending.
    pub fn out_neighbors(&self, v: NodeId) -> &[NodeId] {
        self.outgoing.row(v.index())
    }

    /// Distinct predecessors of `v` over directed object edges, ascending.
    pub fn in_neighbors(&self, v: NodeId) -> &[NodeId] {
        self.incoming.row(v.index())
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.neighbors(v).len()
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.out_neighbors(v).len()
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_neighbors(v).len()
    }

    /// Deduplicated datatype-statement count of `v`.
    pub fn dtp_count(&self, v: NodeId) -> u32 {
        self.dtp[v.index()]
    }

    pub fn total_dtp(&self) -> u64 {
        self.dtp.iter().map(|&c| c as u64).sum()
    }

    /// Number of distinct directed instance pairs with at least one
    /// object-property triple.
    pub fn directed_edge_count(&self) -> usize {
        self.edge_predicates.len()
    }

    pub fn undirected_edge_count(&self) -> usize {
        self.undirected.targets.len() / 2
    }

    pub fn predicate_count(&self) -> usize {
        self.predicates.len()
    }

    pub fn predicate_iri(&self, p: PredId) -> &str {
        &self.predicates[p.0 as usize]
    }

    /// Predicate ids recorded on the directed pair `(s, o)`; empty if the
    /// pair is not an edge.
    pub fn edge_predicate_ids(&self, s: NodeId, o: NodeId) -> &[PredId] {
        self.edge_predicates
            .get(&(s, o))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn edge_predicates(&self, s: NodeId, o: NodeId) -> impl Iterator<Item = &str> {
        self.edge_predicate_ids(s, o)
            .iter()
            .map(|&p| self.predicate_iri(p))
    }
}

/// Incremental builder consuming classified triples.
pub struct GraphBuilder {
    iris: Vec<String>,
    stats: BuildStats,
    edge_preds: HashMap<(NodeId, NodeId), Vec<u32>>,
    pred_ids: HashMap<String, u32>,
    pred_list: Vec<String>,
    dtp: Vec<u32>,
    dtp_pred_ids: HashMap<String, u32>,
    dtp_lit_ids: HashMap<String, u32>,
    dtp_seen: HashSet<(u32, u32, u32)>,
}

impl GraphBuilder {
    pub fn new(instances: &InstanceSet) -> Self {
        let mut iris: Vec<String> = instances.iter().map(str::to_owned).collect();
        iris.sort_unstable();
        let n = iris.len();
        GraphBuilder {
            iris,
            stats: BuildStats::default(),
            edge_preds: HashMap::new(),
            pred_ids: HashMap::new(),
            pred_list: Vec::new(),
            dtp: vec![0; n],
            dtp_pred_ids: HashMap::new(),
            dtp_lit_ids: HashMap::new(),
            dtp_seen: HashSet::new(),
        }
    }

    fn node_id(&self, iri: &str) -> Option<NodeId> {
        self.iris
            .binary_search_by(|probe| probe.as_str().cmp(iri))
            .ok()
            .map(|i| NodeId(i as u32))
    }

    fn intern(map: &mut HashMap<String, u32>, list: Option<&mut Vec<String>>, key: &str) -> u32 {
        if let Some(&id) = map.get(key) {
            return id;
        }
        let id = map.len() as u32;
        map.insert(key.to_owned(), id);
        if let Some(list) = list {
            list.push(key.to_owned());
        }
        id
    }

    pub fn add(&mut self, triple: &Triple, kind: TripleKind) {
        self.stats.triples_total += 1;
        match kind {
            TripleKind::TypeLink => self.stats.type_links += 1,
            TripleKind::DanglingObjectEdge => self.stats.dangling_edges_dropped += 1,
            TripleKind::DatatypeStatement => {
                self.stats.datatype_statements += 1;
                let Some(v) = self.node_id(&triple.subject) else {
                    return; // non-instance subject: counted, not stored
                };
                let Term::Literal(lit) = &triple.object else {
                    return;
                };
                let p = Self::intern(&mut self.dtp_pred_ids, None, &triple.predicate);
                let l = Self::intern(&mut self.dtp_lit_ids, None, &lit.to_string());
                if self.dtp_seen.insert((v.0, p, l)) {
                    self.dtp[v.index()] += 1;
                }
            }
            TripleKind::ObjectEdge => {
                self.stats.object_edges += 1;
                let s = self
                    .node_id(&triple.subject)
                    .expect("ObjectEdge subject must be an instance");
                let o = triple
                    .object
                    .as_iri()
                    .and_then(|iri| self.node_id(iri))
                    .expect("ObjectEdge object must be an instance IRI");
                if s == o {
                    self.stats.self_loops_dropped += 1;
                    return;
                }
                let pid = Self::intern(
                    &mut self.pred_ids,
                    Some(&mut self.pred_list),
                    &triple.predicate,
                );
                match self.edge_preds.entry((s, o)) {
                    std::collections::hash_map::Entry::Occupied(mut e) => {
                        self.stats.duplicate_edges_merged += 1;
                        let preds = e.get_mut();
                        if let Err(pos) = preds.binary_search(&pid) {
                            preds.insert(pos, pid);
                        }
                    }
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(vec![pid]);
                    }
                }
            }
        }
    }

    pub fn finish(self) -> (InstanceGraph, BuildStats) {
        let n = self.iris.len();

        // Canonicalize predicate ids by sorting the IRIs, so the built
        // graph does not depend on first-encounter order.
        let mut order: Vec<u32> = (0..self.pred_list.len() as u32).collect();
        order
            .sort_unstable_by(|&a, &b| self.pred_list[a as usize].cmp(&self.pred_list[b as usize]));
        let mut remap = vec![0u32; self.pred_list.len()];
        let mut predicates = Vec::with_capacity(self.pred_list.len());
        for (new_id, &old_id) in order.iter().enumerate() {
            remap[old_id as usize] = new_id as u32;
            predicates.push(self.pred_list[old_id as usize].clone());
        }
        let edge_predicates: HashMap<(NodeId, NodeId), Vec<PredId>> = self
            .edge_preds
            .iter()
            .map(|(&pair, preds)| {
                let mut mapped: Vec<PredId> =
                    preds.iter().map(|&p| PredId(remap[p as usize])).collect();
                mapped.sort_unstable();
                (pair, mapped)
            })
            .collect();

        let pairs = &self.edge_preds;
        let outgoing = Csr::from_pairs(
            n,
            |counts| {
                for &(s, _) in pairs.keys() {
                    counts[s.index()] += 1;
                }
            },
            |push| {
                for &(s, o) in pairs.keys() {
                    push(s.index(), o);
                }
            },
        );
        let incoming = Csr::from_pairs(
            n,
            |counts| {
                for &(_, o) in pairs.keys() {
                    counts[o.index()] += 1;
                }
            },
            |push| {
                for &(s, o) in pairs.keys() {
                    push(o.index(), s);
                }
            },
        );
        // An undirected edge {s, o} is counted once even when both
        // directions are present.
        let is_primary = |s: NodeId, o: NodeId| s < o || !pairs.contains_key(&(o, s));
        let undirected = Csr::from_pairs(
            n,
            |counts| {
                for &(s, o) in pairs.keys() {
                    if is_primary(s, o) {
                        counts[s.index()] += 1;
                        counts[o.index()] += 1;
                    }
                }
            },
            |push| {
                for &(s, o) in pairs.keys() {
                    if is_primary(s, o) {
                        push(s.index(), o);
                        push(o.index(), s);
                    }
                }
            },
        );

        let graph = InstanceGraph {
            iris: self.iris,
            predicates,
            undirected,
            outgoing,
            incoming,
            dtp: self.dtp,
            edge_predicates,
        };
        (graph, self.stats)
    }
}

/// Builds the instance graph from a classified triple stream. Every
/// instance becomes a node, including isolated ones; only `ObjectEdge`
/// triples contribute adjacency and only instance-subject
/// `DatatypeStatement` triples contribute `dtp` counts.
pub fn build_graph<I>(classified: I, instances: &InstanceSet) -> (InstanceGraph, BuildStats)
where
    I: IntoIterator<Item = (Triple, TripleKind)>,
{
    let mut builder = GraphBuilder::new(instances);
    for (triple, kind) in classified {
        builder.add(&triple, kind);
    }
    builder.finish()
}

/// Result of the two-pass load pipeline.
#[derive(Debug)]
pub struct LoadOutcome {
    pub graph: InstanceGraph,
    pub stats: BuildStats,
    /// Malformed lines recorded during pass two (skip mode only).
    pub skipped: Vec<SkippedLine>,
}

fn load_two_pass<R: BufRead, F: FnMut() -> Result<R, ParseError>>(
    mut open: F,
    strictness: Strictness,
) -> Result<LoadOutcome, ParseError> {
    let mut instances = InstanceSet::new();
    let mut pass1 = NtriplesParser::new(open()?, strictness);
    for item in &mut pass1 {
        let (_, triple) = item?;
        instances.observe(&triple);
    }

    let mut builder = GraphBuilder::new(&instances);
    let mut pass2 = NtriplesParser::new(open()?, strictness);
    for item in &mut pass2 {
        let (_, triple) = item?;
        let kind = classify_triple(&triple, &instances);
        builder.add(&triple, kind);
    }
    let skipped = pass2.skipped().to_vec();
    let (graph, mut stats) = builder.finish();
    stats.malformed_skipped = skipped.len() as u64;
    stats.triples_total += stats.malformed_skipped;
    Ok(LoadOutcome {
        graph,
        stats,
        skipped,
    })
}

/// Two-pass load from an N-Triples file.
pub fn load_ntriples_path(
    path: impl AsRef<Path>,
    strictness: Strictness,
) -> Result<LoadOutcome, ParseError> {
    let path = path.as_ref();
    load_two_pass(
        || {
            std::fs::File::open(path)
                .map(io::BufReader::new)
                .map_err(ParseError::Io)
        },
        strictness,
    )
}

/// Two-pass load from in-memory N-Triples text.
pub fn load_ntriples_str(text: &str, strictness: Strictness) -> Result<LoadOutcome, ParseError> {
    load_two_pass(|| Ok(text.as_bytes()), strictness)
}
