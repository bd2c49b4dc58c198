//! Versioned binary snapshot of a built graph, so repeated ranking runs
//! skip re-parsing. Little-endian, length-prefixed; the header carries a
//! magic tag and a format version.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::graph::{BuildStats, Csr, InstanceGraph, NodeId, PredId};

const MAGIC: [u8; 4] = *b"IGRS";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("not a graph snapshot (bad magic)")]
    BadMagic,
    #[error("unsupported snapshot version {0}")]
    UnsupportedVersion(u32),
    #[error("corrupt snapshot: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn save(graph: &InstanceGraph, stats: &BuildStats, w: &mut impl Write) -> io::Result<()> {
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for v in [
        stats.triples_total,
        stats.type_links,
        stats.object_edges,
        stats.dangling_edges_dropped,
        stats.datatype_statements,
        stats.duplicate_edges_merged,
        stats.self_loops_dropped,
        stats.malformed_skipped,
    ] {
        w.write_all(&v.to_le_bytes())?;
    }
    write_strings(w, &graph.iris)?;
    write_strings(w, &graph.predicates)?;
    w.write_all(&(graph.dtp.len() as u64).to_le_bytes())?;
    for &c in &graph.dtp {
        w.write_all(&c.to_le_bytes())?;
    }
    write_csr(w, &graph.outgoing)?;
    write_csr(w, &graph.incoming)?;
    write_csr(w, &graph.undirected)?;
    // deterministic entry order keeps snapshots byte-stable
    let mut pairs: Vec<(&(NodeId, NodeId), &Vec<PredId>)> = graph.edge_predicates.iter().collect();
    pairs.sort_unstable_by_key(|(pair, _)| **pair);
    w.write_all(&(pairs.len() as u64).to_le_bytes())?;
    for (&(s, o), preds) in pairs {
        w.write_all(&s.0.to_le_bytes())?;
        w.write_all(&o.0.to_le_bytes())?;
        w.write_all(&(preds.len() as u32).to_le_bytes())?;
        for p in preds {
            w.write_all(&p.0.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn save_path(
    graph: &InstanceGraph,
    stats: &BuildStats,
    path: impl AsRef<Path>,
) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    save(graph, stats, &mut w)?;
    w.flush()
}

pub fn load(r: &mut impl Read) -> Result<(InstanceGraph, BuildStats), SnapshotError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(SnapshotError::UnsupportedVersion(version));
    }
    let stats = BuildStats {
        triples_total: read_u64(r)?,
        type_links: read_u64(r)?,
        object_edges: read_u64(r)?,
        dangling_edges_dropped: read_u64(r)?,
        datatype_statements: read_u64(r)?,
        duplicate_edges_merged: read_u64(r)?,
        self_loops_dropped: read_u64(r)?,
        malformed_skipped: read_u64(r)?,
    };
    let iris = read_strings(r)?;
    let n = iris.len();
    let predicates = read_strings(r)?;
    let dtp_len = read_len(r, "dtp length")?;
    if dtp_len != n {
        return Err(SnapshotError::Corrupt(format!(
            "dtp length {dtp_len} does not match node count {n}"
        )));
    }
    let mut dtp = Vec::with_capacity(n);
    for _ in 0..n {
        dtp.push(read_u32(r)?);
    }
    let outgoing = read_csr(r, n)?;
    let incoming = read_csr(r, n)?;
    let undirected = read_csr(r, n)?;
    let pair_count = read_len(r, "edge pair count")?;
    let mut edge_predicates = HashMap::with_capacity(pair_count);
    for _ in 0..pair_count {
        let s = read_u32(r)?;
        let o = read_u32(r)?;
        if s as usize >= n || o as usize >= n {
            return Err(SnapshotError::Corrupt(format!(
                "edge pair ({s}, {o}) out of node range {n}"
            )));
        }
        let len = read_u32(r)? as usize;
        let mut preds = Vec::with_capacity(len);
        for _ in 0..len {
            let p = read_u32(r)?;
            if p as usize >= predicates.len() {
                return Err(SnapshotError::Corrupt(format!(
                    "predicate id {p} out of range {}",
                    predicates.len()
                )));
            }
            preds.push(PredId(p));
        }
        edge_predicates.insert((NodeId(s), NodeId(o)), preds);
    }
    Ok((
        InstanceGraph {
            iris,
            predicates,
            undirected,
            outgoing,
            incoming,
            dtp,
            edge_predicates,
        },
        stats,
    ))
}

pub fn load_path(path: impl AsRef<Path>) -> Result<(InstanceGraph, BuildStats), SnapshotError> {
    load(&mut BufReader::new(File::open(path)?))
}

fn write_strings(w: &mut impl Write, strings: &[String]) -> io::Result<()> {
    w.write_all(&(strings.len() as u64).to_le_bytes())?;
    for s in strings {
        w.write_all(&(s.len() as u32).to_le_bytes())?;
        w.write_all(s.as_bytes())?;
    }
    Ok(())
}

fn read_strings(r: &mut impl Read) -> Result<Vec<String>, SnapshotError> {
    let count = read_len(r, "string table length")?;
    let mut out = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        let len = read_u32(r)? as usize;
        let mut buf = vec![0u8; len];
        r.read_exact(&mut buf)?;
        out.push(
            String::from_utf8(buf)
                .map_err(|_| SnapshotError::Corrupt("non-UTF-8 string entry".to_owned()))?,
        );
    }
    Ok(out)
}

fn write_csr(w: &mut impl Write, csr: &Csr) -> io::Result<()> {
    w.write_all(&(csr.offsets.len() as u64).to_le_bytes())?;
    for &o in &csr.offsets {
        w.write_all(&o.to_le_bytes())?;
    }
    w.write_all(&(csr.targets.len() as u64).to_le_bytes())?;
    for t in &csr.targets {
        w.write_all(&t.0.to_le_bytes())?;
    }
    Ok(())
}

fn read_csr(r: &mut impl Read, n: usize) -> Result<Csr, SnapshotError> {
    let offsets_len = read_len(r, "csr offsets length")?;
    if offsets_len != n + 1 {
        return Err(SnapshotError::Corrupt(format!(
            "csr offsets length {offsets_len}, expected {}",
            n + 1
        )));
    }
    let mut offsets = Vec::with_capacity(offsets_len);
    for _ in 0..offsets_len {
        offsets.push(read_u64(r)?);
    }
    let targets_len = read_len(r, "csr targets length")?;
    if offsets.first() != Some(&0)
        || offsets.windows(2).any(|w| w[0] > w[1])
        || offsets.last() != Some(&(targets_len as u64))
    {
        return Err(SnapshotError::Corrupt(
            "inconsistent csr offsets".to_owned(),
        ));
    }
    let mut targets = Vec::with_capacity(targets_len);
    for _ in 0..targets_len {
        let t = read_u32(r)?;
        if t as usize >= n {
            return Err(SnapshotError::Corrupt(format!(
                "csr target {t} out of node range {n}"
            )));
        }
        targets.push(NodeId(t));
    }
    Ok(Csr { offsets, targets })
}

fn read_u32(r: &mut impl Read) -> Result<u32, SnapshotError> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64(r: &mut impl Read) -> Result<u64, SnapshotError> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_len(r: &mut impl Read, what: &str) -> Result<usize, SnapshotError> {
    let v = read_u64(r)?;
    usize::try_from(v).map_err(|_| SnapshotError::Corrupt(format!("{what} overflows usize")))
}
