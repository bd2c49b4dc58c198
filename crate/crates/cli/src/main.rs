//! `inforank` command line: build an instance graph from N-Triples,
//! rank its nodes under one of the shipped measures, evaluate rankings
//! against gold-standard lists, and generate test fixtures.
//!
//! Identical inputs and flags produce byte-identical outputs. Exit codes:
//! 0 success, 1 usage error, 2 data error.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use inforank_core::centrality::{
    degree_scores, eigenvector_centrality, pagerank_with_dangling, weighted_pagerank_with_dangling,
    DanglingPolicy, DegreeMode, IterationConfig, Measure, RankError, ScoreVector, WeightTable,
};
use inforank_core::eval::{
    average_precision, boundary_tie_count, cmap, precision_at_k, sum_votes, EvalError,
    GoldStandard, RankedList,
};
use inforank_core::graph::{load_ntriples_path, load_ntriples_str, BuildStats, InstanceGraph};
use inforank_core::inforank::{inforank1, inforank2, inforank3, TopZConfig};
use inforank_core::rdf::{SkippedLine, Strictness};
use inforank_core::snapshot;
use inforank_core::synth::{gen_decoupled, DecoupledSpec};

#[derive(Parser)]
#[command(
    name = "inforank",
    version,
    about = "Rank nodes of an RDF instance graph and evaluate the induced orderings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the build census of an instance graph
    Stats(StatsArgs),
    /// Rank every node under a measure, highest score first
    Rank(RankArgs),
    /// Rank and keep only the top K rows, optionally restricted to a node set
    Top(TopArgs),
    /// Score a ranking against one or more gold-standard lists
    Eval(EvalArgs),
    /// Generate a synthetic degree-decoupled fixture graph
    Gen(GenArgs),
}

#[derive(Args)]
struct InputArgs {
    /// N-Triples input file ("-" or omitted: stdin)
    #[arg(long)]
    input: Option<PathBuf>,
    /// Load a saved graph snapshot instead of parsing N-Triples
    #[arg(long, conflicts_with = "input")]
    load_graph: Option<PathBuf>,
    /// Save the built graph as a binary snapshot
    #[arg(long)]
    save_graph: Option<PathBuf>,
    /// Count and skip malformed lines instead of aborting
    #[arg(long)]
    skip_malformed: bool,
    /// Abort on the first malformed line (the default)
    #[arg(long, conflicts_with = "skip_malformed")]
    strict: bool,
}

#[derive(Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    #[default]
    Tsv,
    JsonLines,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value_t)]
    format: OutputFormat,
    /// Output file (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RankArgs {
    #[command(flatten)]
    input: InputArgs,
    /// indegree | outdegree | degree | pagerank | wpagerank | eigenvector |
    /// inforank1 | inforank2 | inforank3
    #[arg(long, value_parser = parse_measure)]
    measure: Measure,
    /// Top-neighbor budget for inforank3
    #[arg(long, default_value_t = 10)]
    z: usize,
    /// Damping factor for the pagerank measures
    #[arg(long, default_value_t = 0.85)]
    alpha: f64,
    /// Convergence threshold on the max per-node change
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    /// Iteration cap
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    /// Predicate weight table for wpagerank
    #[arg(long)]
    weights: Option<PathBuf>,
    /// What happens to rank mass of nodes without outgoing edges
    #[arg(long, value_parser = parse_dangling, default_value = "redistribute")]
    dangling: DanglingPolicy,
    /// Worker threads (default: available parallelism)
    #[arg(long)]
    threads: Option<usize>,
    /// Print scores at full precision instead of 6 significant digits
    #[arg(long)]
    raw: bool,
    #[arg(long, value_enum, default_value_t)]
    format: OutputFormat,
    /// Output file (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TopArgs {
    #[command(flatten)]
    rank: RankArgs,
    /// Number of rows to keep
    #[arg(long)]
    k: usize,
    /// Keep only nodes listed in this file (one IRI per line)
    #[arg(long)]
    restrict: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Ranking TSV as written by `rank`/`top` (or two columns iri<TAB>score)
    #[arg(long)]
    scores: PathBuf,
    /// Gold-standard files, comma separated; one IRI per line in rank order
    #[arg(long, value_delimiter = ',', required = true)]
    gold: Vec<PathBuf>,
    /// Evaluate only nodes listed in this file
    #[arg(long)]
    restrict: Option<PathBuf>,
    /// Also report precision at this cutoff
    #[arg(long)]
    k: Option<usize>,
    /// Per-IRI vote counts (iri<TAB>count); reports their sum over the
    /// top K rows. Requires --k.
    #[arg(long, requires = "k")]
    votes: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: OutputFormat,
    /// Output file (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// Named shape (fig1: 33 satellites, info counts 6/2/1)
    #[arg(long)]
    preset: Option<String>,
    /// Number of satellites on the hub
    #[arg(long)]
    hub: Option<u32>,
    /// Datatype statements per information-rich node
    #[arg(long)]
    clique_info: Option<u32>,
    /// Datatype statements on the bridge node
    #[arg(long)]
    bridge_info: Option<u32>,
    /// Datatype statements on the hub and each satellite
    #[arg(long)]
    satellite_info: Option<u32>,
    /// Permutes the emitted statement order (0 keeps canonical order)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_measure(s: &str) -> Result<Measure, String> {
    s.parse()
}

fn parse_dangling(s: &str) -> Result<DanglingPolicy, String> {
    s.parse()
}

enum CliError {
    Usage(String),
    Data(String),
}

type CliResult<T> = Result<T, CliError>;

impl From<RankError> for CliError {
    fn from(e: RankError) -> Self {
        match e {
            RankError::EmptyGraph => CliError::Data(e.to_string()),
            RankError::InvalidConfig(_) => CliError::Usage(e.to_string()),
        }
    }
}

fn data_err(path: &Path, err: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {err}", path.display()))
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Stats(args) => cmd_stats(args),
        Command::Rank(args) => cmd_rank(args, None, None),
        Command::Top(args) => {
            if args.k < 1 {
                Err(CliError::Usage("--k must be at least 1".to_owned()))
            } else {
                cmd_rank(args.rank, Some(args.k), args.restrict)
            }
        }
        Command::Eval(args) => cmd_eval(args),
        Command::Gen(args) => cmd_gen(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn strictness(input: &InputArgs) -> Strictness {
    if input.skip_malformed {
        Strictness::SkipMalformed
    } else {
        Strictness::Strict
    }
}

fn load_graph(input: &InputArgs) -> CliResult<(InstanceGraph, BuildStats, Vec<SkippedLine>)> {
    if let Some(snap) = &input.load_graph {
        let (graph, stats) = snapshot::load_path(snap).map_err(|e| data_err(snap, e))?;
        return Ok((graph, stats, Vec::new()));
    }
    let mode = strictness(input);
    let outcome = match &input.input {
        Some(path) if path.as_os_str() != "-" => {
            load_ntriples_path(path, mode).map_err(|e| data_err(path, e))?
        }
        _ => {
            let mut text = String::new();
            io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| CliError::Data(format!("<stdin>: {e}")))?;
            load_ntriples_str(&text, mode).map_err(|e| CliError::Data(format!("<stdin>: {e}")))?
        }
    };
    if let Some(path) = &input.save_graph {
        snapshot::save_path(&outcome.graph, &outcome.stats, path).map_err(|e| data_err(path, e))?;
    }
    Ok((outcome.graph, outcome.stats, outcome.skipped))
}

fn open_output(path: Option<&PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| data_err(path, e))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn write_failure(e: io::Error) -> CliError {
    CliError::Data(format!("write failed: {e}"))
}

// ---------------------------------------------------------------- stats

fn cmd_stats(args: StatsArgs) -> CliResult<()> {
    let (graph, stats, _) = load_graph(&args.input)?;
    let mut out = open_output(args.output.as_ref())?;
    let record = json!({
        "triples_total": stats.triples_total,
        "type_links": stats.type_links,
        "object_edges": stats.object_edges,
        "dangling_edges_dropped": stats.dangling_edges_dropped,
        "datatype_statements": stats.datatype_statements,
        "duplicate_edges_merged": stats.duplicate_edges_merged,
        "self_loops_dropped": stats.self_loops_dropped,
        "malformed_skipped": stats.malformed_skipped,
        "nodes": graph.node_count(),
        "directed_edges": graph.directed_edge_count(),
        "undirected_edges": graph.undirected_edge_count(),
        "total_dtp": graph.total_dtp(),
    });
    if args.format == OutputFormat::Tsv {
        let rows: [(&str, u64); 12] = [
            ("triples total", stats.triples_total),
            ("type links", stats.type_links),
            ("object edges", stats.object_edges),
            ("dangling edges dropped", stats.dangling_edges_dropped),
            ("datatype statements", stats.datatype_statements),
            ("duplicate edges merged", stats.duplicate_edges_merged),
            ("self loops dropped", stats.self_loops_dropped),
            ("malformed skipped", stats.malformed_skipped),
            ("nodes", graph.node_count() as u64),
            ("directed edges", graph.directed_edge_count() as u64),
            ("undirected edges", graph.undirected_edge_count() as u64),
            ("datatype statements kept", graph.total_dtp()),
        ];
        let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
        for (name, value) in rows {
            writeln!(out, "{name:<width$}  {value}").map_err(write_failure)?;
        }
    }
    writeln!(out, "{record}").map_err(write_failure)?;
    out.flush().map_err(write_failure)
}

// ---------------------------------------------------------------- rank / top

fn cmd_rank(args: RankArgs, top_k: Option<usize>, restrict: Option<PathBuf>) -> CliResult<()> {
    let cfg = IterationConfig {
        alpha: args.alpha,
        epsilon: args.epsilon,
        max_iter: args.max_iter,
    };
    cfg.validate()?;
    let z = TopZConfig::new(args.z).map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(threads) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    let restrict_set = restrict.as_ref().map(|p| load_iri_set(p)).transpose()?;

    let (graph, _, _) = load_graph(&args.input)?;
    let table = match &args.weights {
        Some(path) => WeightTable::from_path(path).map_err(|e| data_err(path, e))?,
        None => WeightTable::default(),
    };
    let sv = compute_measure(&graph, &args, &cfg, z, &table)?;

    let header = header_line(&args, &sv);
    let ranked = RankedList::from_graph_scores(&graph, &sv, restrict_set.as_ref());
    let cut = top_k.unwrap_or(ranked.len());

    let mut out = open_output(args.output.as_ref())?;
    match args.format {
        OutputFormat::Tsv => {
            writeln!(out, "{header}").map_err(write_failure)?;
            for (i, (iri, score)) in ranked.entries().iter().take(cut).enumerate() {
                writeln!(out, "{}\t{}\t{}", i + 1, iri, fmt_score(*score, args.raw))
                    .map_err(write_failure)?;
            }
        }
        OutputFormat::JsonLines => {
            for (i, (iri, score)) in ranked.entries().iter().take(cut).enumerate() {
                let row = json!({"rank": i + 1, "iri": iri, "score": score});
                writeln!(out, "{row}").map_err(write_failure)?;
            }
        }
    }
    out.flush().map_err(write_failure)
}

fn compute_measure(
    graph: &InstanceGraph,
    args: &RankArgs,
    cfg: &IterationConfig,
    z: TopZConfig,
    table: &WeightTable,
) -> CliResult<ScoreVector> {
    Ok(match args.measure {
        Measure::InDegree => degree_scores(graph, DegreeMode::In),
        Measure::OutDegree => degree_scores(graph, DegreeMode::Out),
        Measure::Degree => degree_scores(graph, DegreeMode::Total),
        Measure::PageRank => pagerank_with_dangling(graph, cfg, args.dangling)?,
        Measure::WeightedPageRank => {
            weighted_pagerank_with_dangling(graph, table, cfg, args.dangling)?
        }
        Measure::Eigenvector => eigenvector_centrality(graph, cfg)?,
        Measure::InfoRank1 => inforank1(graph)?,
        Measure::InfoRank2 => inforank2(graph, cfg)?,
        Measure::InfoRank3 => inforank3(graph, z, cfg)?,
    })
}

fn header_line(args: &RankArgs, sv: &ScoreVector) -> String {
    let mut header = format!("# measure={}", sv.measure);
    match args.measure {
        Measure::PageRank | Measure::WeightedPageRank => {
            header.push_str(&format!(
                " alpha={} epsilon={} max_iter={} dangling={}",
                args.alpha, args.epsilon, args.max_iter, args.dangling
            ));
            if args.measure == Measure::WeightedPageRank {
                match &args.weights {
                    Some(p) => header.push_str(&format!(" weights={}", p.display())),
                    None => header.push_str(" weights=default"),
                }
            }
        }
        Measure::Eigenvector | Measure::InfoRank2 => {
            header.push_str(&format!(
                " epsilon={} max_iter={}",
                args.epsilon, args.max_iter
            ));
        }
        Measure::InfoRank3 => {
            header.push_str(&format!(
                " z={} epsilon={} max_iter={}",
                args.z, args.epsilon, args.max_iter
            ));
        }
        _ => {}
    }
    header.push_str(&format!(
        " iterations={} converged={} final_delta={}",
        sv.iterations, sv.converged, sv.final_delta
    ));
    header
}

fn fmt_score(score: f64, raw: bool) -> String {
    if raw {
        format!("{score}")
    } else {
        format!("{score:.5e}")
    }
}

fn load_iri_set(path: &Path) -> CliResult<HashSet<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| data_err(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect())
}

// ---------------------------------------------------------------- eval

fn cmd_eval(args: EvalArgs) -> CliResult<()> {
    if let Some(k) = args.k {
        if k < 1 {
            return Err(CliError::Usage("--k must be at least 1".to_owned()));
        }
    }
    let pairs = load_scores_tsv(&args.scores)?;
    let restrict_set = args
        .restrict
        .as_ref()
        .map(|p| load_iri_set(p))
        .transpose()?;
    let ranked = RankedList::from_scores(pairs, restrict_set.as_ref());

    let mut out = open_output(args.output.as_ref())?;
    let mut ap_values = Vec::with_capacity(args.gold.len());
    let mut rows = Vec::with_capacity(args.gold.len());
    for path in &args.gold {
        let gold = GoldStandard::from_path(path).map_err(|e| data_err(path, e))?;
        let ap = average_precision(&ranked, &gold);
        let p_at_k = match args.k {
            Some(k) => Some(precision_at_k(&ranked, &gold, k).map_err(|e| match e {
                EvalError::KOutOfRange { .. } => CliError::Data(format!(
                    "{}: {e} (ranking has {} rows)",
                    path.display(),
                    ranked.len()
                )),
                other => data_err(path, other),
            })?),
            None => None,
        };
        let ties = boundary_tie_count(&ranked, &gold);
        ap_values.push(ap);
        rows.push((path, gold.len(), ap, p_at_k, ties));
    }
    let combined = cmap(&ap_values).map_err(|e| CliError::Data(e.to_string()))?;

    let vote_report = match (&args.votes, args.k) {
        (Some(path), Some(k)) => {
            let votes = load_votes_tsv(path)?;
            Some(sum_votes(&ranked, &votes, k).map_err(|e| data_err(path, e))?)
        }
        _ => None,
    };

    match args.format {
        OutputFormat::Tsv => {
            let mut header = "gold\trelevant\tap".to_owned();
            if let Some(k) = args.k {
                header.push_str(&format!("\tp@{k}"));
            }
            header.push_str("\tgold_score_ties");
            writeln!(out, "{header}").map_err(write_failure)?;
            for (path, relevant, ap, p_at_k, ties) in &rows {
                let mut line = format!("{}\t{relevant}\t{ap:.4}", path.display());
                if let Some(p) = p_at_k {
                    line.push_str(&format!("\t{p:.4}"));
                }
                line.push_str(&format!("\t{ties}"));
                writeln!(out, "{line}").map_err(write_failure)?;
            }
            writeln!(out, "cmap\t\t{combined:.4}").map_err(write_failure)?;
            if let (Some(v), Some(k)) = (vote_report, args.k) {
                writeln!(out, "votes@{k}\t\t{}\tmissing={}", v.total, v.missing)
                    .map_err(write_failure)?;
            }
        }
        OutputFormat::JsonLines => {
            for (path, relevant, ap, p_at_k, ties) in &rows {
                let row = json!({
                    "gold": path.display().to_string(),
                    "relevant": relevant,
                    "ap": ap,
                    "p_at_k": p_at_k,
                    "gold_score_ties": ties,
                });
                writeln!(out, "{row}").map_err(write_failure)?;
            }
            writeln!(out, "{}", json!({ "cmap": combined })).map_err(write_failure)?;
            if let Some(v) = vote_report {
                writeln!(
                    out,
                    "{}",
                    json!({ "votes_total": v.total, "votes_missing": v.missing })
                )
                .map_err(write_failure)?;
            }
        }
    }
    out.flush().map_err(write_failure)
}

/// Reads a vote-count file: `iri<TAB>count` per line, `#` comments and
/// blank lines ignored.
fn load_votes_tsv(path: &Path) -> CliResult<std::collections::HashMap<String, u64>> {
    let text = std::fs::read_to_string(path).map_err(|e| data_err(path, e))?;
    let mut votes = std::collections::HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (iri, count_text) = line.split_once('\t').ok_or_else(|| {
            CliError::Data(format!(
                "{}: line {line_no}: expected `iri<TAB>count`",
                path.display()
            ))
        })?;
        let count: u64 = count_text.trim().parse().map_err(|_| {
            CliError::Data(format!(
                "{}: line {line_no}: invalid vote count {count_text:?}",
                path.display()
            ))
        })?;
        if votes.insert(iri.to_owned(), count).is_some() {
            return Err(CliError::Data(format!(
                "{}: line {line_no}: duplicate iri {iri:?}",
                path.display()
            )));
        }
    }
    Ok(votes)
}

/// Reads a ranking file: `rank<TAB>iri<TAB>score` rows as written by
/// `rank`, or bare `iri<TAB>score`. `#` comments and blank lines are
/// ignored; duplicate IRIs are rejected.
fn load_scores_tsv(path: &Path) -> CliResult<Vec<(String, f64)>> {
    let text = std::fs::read_to_string(path).map_err(|e| data_err(path, e))?;
    let mut pairs = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let (iri, score_text) = match fields.as_slice() {
            [iri, score] => (*iri, *score),
            [_, iri, score] => (*iri, *score),
            _ => {
                return Err(CliError::Data(format!(
                    "{}: line {line_no}: expected 2 or 3 tab-separated columns",
                    path.display()
                )))
            }
        };
        let score: f64 = score_text.trim().parse().map_err(|_| {
            CliError::Data(format!(
                "{}: line {line_no}: invalid score {score_text:?}",
                path.display()
            ))
        })?;
        if !seen.insert(iri.to_owned()) {
            return Err(CliError::Data(format!(
                "{}: line {line_no}: duplicate iri {iri:?}",
                path.display()
            )));
        }
        pairs.push((iri.to_owned(), score));
    }
    Ok(pairs)
}

// ---------------------------------------------------------------- gen

fn cmd_gen(args: GenArgs) -> CliResult<()> {
    let spec = match args.preset.as_deref() {
        Some("fig1") => {
            if args.hub.is_some()
                || args.clique_info.is_some()
                || args.bridge_info.is_some()
                || args.satellite_info.is_some()
            {
                return Err(CliError::Usage(
                    "--preset cannot be combined with explicit shape flags".to_owned(),
                ));
            }
            DecoupledSpec {
                seed: args.seed,
                ..DecoupledSpec::canonical()
            }
        }
        Some(other) => {
            return Err(CliError::Usage(format!(
                "unknown preset {other:?}; available: fig1"
            )))
        }
        None => {
            let require = |value: Option<u32>, flag: &str| {
                value.ok_or_else(|| {
                    CliError::Usage(format!("--{flag} is required unless --preset is given"))
                })
            };
            let spec = DecoupledSpec {
                hub_fanout: require(args.hub, "hub")?,
                clique_info: require(args.clique_info, "clique-info")?,
                bridge_info: require(args.bridge_info, "bridge-info")?,
                satellite_info: require(args.satellite_info, "satellite-info")?,
                seed: args.seed,
            };
            for (value, flag) in [
                (spec.hub_fanout, "hub"),
                (spec.clique_info, "clique-info"),
                (spec.bridge_info, "bridge-info"),
                (spec.satellite_info, "satellite-info"),
            ] {
                if value < 1 {
                    return Err(CliError::Usage(format!("--{flag} must be at least 1")));
                }
            }
            spec
        }
    };
    let text = gen_decoupled(&spec);
    let mut out = open_output(args.output.as_ref())?;
    out.write_all(text.as_bytes()).map_err(write_failure)?;
    out.flush().map_err(write_failure)
}
