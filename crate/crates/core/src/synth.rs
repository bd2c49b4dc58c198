//! Synthetic degree-decoupled fixtures. The canonical shape is a bridge
//! node connected to two information-rich nodes and to a hub, with the
//! hub carrying a fan of information-poor satellites: the highest-degree
//! node is never the information-richest one, by construction.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::rdf::RDF_TYPE;

const NS: &str = "http://example.org/";

pub fn bridge_iri() -> String {
    format!("{NS}bridge")
}

pub fn hub_iri() -> String {
    format!("{NS}hub")
}

pub fn info_rich_iris() -> [String; 2] {
    [format!("{NS}rich1"), format!("{NS}rich2")]
}

pub fn satellite_iri(i: u32) -> String {
    format!("{NS}sat{i}")
}

pub fn class_iri() -> String {
    format!("{NS}Entity")
}

/// Shape parameters of a generated graph.
///
/// `seed` permutes the emitted statement order only; the described graph
/// is identical for every seed, and seed 0 keeps the canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecoupledSpec {
    /// Number of satellites attached to the hub.
    pub hub_fanout: u32,
    /// Datatype statements on each information-rich node.
    pub clique_info: u32,
    /// Datatype statements on the bridge node.
    pub bridge_info: u32,
    /// Datatype statements on the hub and on each satellite.
    pub satellite_info: u32,
    pub seed: u64,
}

impl DecoupledSpec {
    /// The worked-example shape: 33 satellites, info counts 6/2/1.
    pub fn canonical() -> Self {
        DecoupledSpec {
            hub_fanout: 33,
            clique_info: 6,
            bridge_info: 2,
            satellite_info: 1,
            seed: 0,
        }
    }
}

/// Emits the canonical fixture as N-Triples text: 37 instances, edges
/// bridge-rich1, bridge-rich2, bridge-hub and hub-satellite fan, with
/// 48 datatype statements in total.
pub fn canonical_fixture() -> String {
    gen_decoupled(&DecoupledSpec::canonical())
}

/// Generates a fixture graph for the given shape. All counts must be at
/// least 1 (satellite edges point into the hub, so directed measures see
/// the hub as the high-in-degree node).
pub fn gen_decoupled(spec: &DecoupledSpec) -> String {
    assert!(spec.hub_fanout >= 1, "hub_fanout must be at least 1");
    assert!(spec.clique_info >= 1, "clique_info must be at least 1");
    assert!(spec.bridge_info >= 1, "bridge_info must be at least 1");
    assert!(
        spec.satellite_info >= 1,
        "satellite_info must be at least 1"
    );

    let class = class_iri();
    let bridge = bridge_iri();
    let hub = hub_iri();
    let rich = info_rich_iris();

    let mut lines: Vec<String> = Vec::new();
    let type_line = |iri: &str, lines: &mut Vec<String>| {
        lines.push(format!("<{iri}> <{RDF_TYPE}> <{class}> ."));
    };
    let info_lines = |iri: &str, count: u32, lines: &mut Vec<String>| {
        for j in 1..=count {
            lines.push(format!("<{iri}> <{NS}info/{j}> \"lit-{j}\" ."));
        }
    };

    type_line(&bridge, &mut lines);
    type_line(&hub, &mut lines);
    for r in &rich {
        type_line(r, &mut lines);
    }
    for i in 1..=spec.hub_fanout {
        type_line(&satellite_iri(i), &mut lines);
    }

    for r in &rich {
        lines.push(format!("<{bridge}> <{NS}linked> <{r}> ."));
    }
    lines.push(format!("<{bridge}> <{NS}linked> <{hub}> ."));
    for i in 1..=spec.hub_fanout {
        lines.push(format!("<{}> <{NS}member_of> <{hub}> .", satellite_iri(i)));
    }

    info_lines(&bridge, spec.bridge_info, &mut lines);
    info_lines(&hub, spec.satellite_info, &mut lines);
    for r in &rich {
        info_lines(r, spec.clique_info, &mut lines);
    }
    for i in 1..=spec.hub_fanout {
        info_lines(&satellite_iri(i), spec.satellite_info, &mut lines);
    }

    if spec.seed != 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        lines.shuffle(&mut rng);
    }
    let mut out = String::with_capacity(lines.iter().map(|l| l.len() + 1).sum());
    for line in lines {
        out.push_str(&line);
        out.push('\n');
    }
    out
}
