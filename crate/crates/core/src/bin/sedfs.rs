use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use sedfs::driver::{RunError, StallRule, TRACE_HEADER};
use sedfs::graph::format::{write_edge_list, GraphHeader};
use sedfs::graph::{
    convert_to_adjacency_order, generate_er, generate_sf, ingest_text, FileSummary,
};
use sedfs::io::DEFAULT_BLOCK_BYTES;
use sedfs::verify::{fixture, read_artifact, verify_artifact, write_artifact, Artifact};
use sedfs::{run_algorithm, Algorithm, GraphFile, IoContext, RunConfig, RunStats};

#[derive(Parser)]
#[command(name = "sedfs", version, about = "Semi-external depth-first search")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic graph file.
    Gen(GenArgs),
    /// Convert a text edge list ("tail head" per line) to a graph file.
    Import(ImportArgs),
    /// Build a DFS-tree of a graph file.
    Run(RunArgs),
    /// Check an order/parents artifact against a graph.
    Verify(VerifyArgs),
    /// Run a matrix of generated graphs and algorithms, one CSV row per cell.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Er,
    Sf,
    /// The ten-node worked example, rooted at node 0.
    Fixture,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Order {
    Random,
    Adjacency,
}

#[derive(Args)]
struct GenArgs {
    kind: Kind,
    #[arg(long, default_value_t = 1000)]
    n: u64,
    /// Edge count (er only).
    #[arg(long)]
    m: Option<u64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Order::Random)]
    order: Order,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ImportArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Upper bound on distinct node ids, if known.
    #[arg(long)]
    n: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, short, value_parser = parse_algorithm, default_value = "ep")]
    algorithm: Algorithm,
    #[arg(long, short)]
    graph: PathBuf,
    /// Root node; defaults to the header root, else a virtual root is added.
    #[arg(long)]
    root: Option<u32>,
    #[arg(long, default_value_t = 0.10)]
    gamma: f64,
    /// Edges per batch; defaults to the node count.
    #[arg(long)]
    budget: Option<u32>,
    /// Force the stall rule to a fixed threshold.
    #[arg(long)]
    stall: Option<u32>,
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Writes the order here and the parent array next to it (".parents").
    #[arg(long)]
    order_out: Option<PathBuf>,
    #[arg(long)]
    verify: bool,
    /// Seconds; 0 disables the limit.
    #[arg(long, default_value_t = 600.0)]
    time_limit: f64,
    #[arg(long, default_value_t = DEFAULT_BLOCK_BYTES)]
    block_bytes: usize,
    #[arg(long)]
    stats_json: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, short)]
    graph: PathBuf,
    #[arg(long)]
    root: Option<u32>,
    #[arg(long)]
    order: PathBuf,
    /// Defaults to the order path with ".parents" appended.
    #[arg(long)]
    parents: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// TOML matrix file.
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: sedfs::Error| e.to_string())
}

fn io_ctx(block_bytes: usize) -> IoContext {
    IoContext::from_env().with_block_bytes(block_bytes)
}

fn summary_line(s: &FileSummary) -> String {
    let h = &s.header;
    let ratio = if h.node_count == 0 {
        0.0
    } else {
        h.edge_count as f64 / h.node_count as f64
    };
    format!(
        "{}: n={} m={} m/n={ratio:.2} order={:?} root={} bytes={}",
        s.path.display(),
        h.node_count,
        h.edge_count,
        h.order,
        h.root.map_or("-".into(), |r| r.to_string()),
        s.bytes
    )
}

/// Writes the graph to `out`, going through a temp file when a conversion
/// to adjacency order follows.
fn generate(
    kind: Kind,
    n: u64,
    m: Option<u64>,
    seed: u64,
    order: Order,
    out: &Path,
    ctx: &IoContext,
) -> anyhow::Result<FileSummary> {
    let raw_tmp;
    let raw = if order == Order::Adjacency {
        raw_tmp = ctx.temp_file("gen-")?.into_temp_path();
        raw_tmp.to_path_buf()
    } else {
        out.to_path_buf()
    };
    let summary = match kind {
        Kind::Er => {
            let m = m.context("er needs --m")?;
            generate_er(&raw, n, m, seed, ctx)?
        }
        Kind::Sf => generate_sf(&raw, n, seed, ctx)?,
        Kind::Fixture => {
            let edges = fixture::edges();
            let mut h = GraphHeader::new(fixture::NAMES.len() as u64, edges.len() as u64);
            h.root = Some(fixture::R);
            write_edge_list(&raw, h, edges, ctx)?
        }
    };
    if order == Order::Adjacency {
        let budget = summary.header.node_count.max(1) as usize * 2;
        return Ok(convert_to_adjacency_order(&raw, out, budget, ctx)?.summary);
    }
    Ok(summary)
}

fn cmd_gen(a: GenArgs) -> anyhow::Result<ExitCode> {
    let ctx = io_ctx(DEFAULT_BLOCK_BYTES);
    let s = generate(a.kind, a.n, a.m, a.seed, a.order, &a.out, &ctx)?;
    println!("{}", summary_line(&s));
    Ok(ExitCode::SUCCESS)
}

fn cmd_import(a: ImportArgs) -> anyhow::Result<ExitCode> {
    let ctx = io_ctx(DEFAULT_BLOCK_BYTES);
    let r = ingest_text(&a.input, &a.out, a.n, &ctx)?;
    println!(
        "{} self_loops_dropped={} duplicates_dropped={}",
        summary_line(&r.summary),
        r.self_loops,
        r.duplicates
    );
    Ok(ExitCode::SUCCESS)
}

fn write_trace(path: &Path, stats: &RunStats) -> anyhow::Result<()> {
    let mut w =
        BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    writeln!(w, "{TRACE_HEADER}")?;
    for r in &stats.trace {
        writeln!(w, "{}", r.csv_row())?;
    }
    w.flush()?;
    Ok(())
}

fn write_json(path: &Path, stats: &RunStats) -> anyhow::Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(BufWriter::new(f), stats)?;
    Ok(())
}

fn stats_line(s: &RunStats) -> String {
    let opt = |x: Option<u64>| x.map_or("-".to_string(), |v| v.to_string());
    format!(
        "{} n={} m={} virtual_root={} iterations={} initial_fnn={} round_i={} reductions={} index_edges={} \
         graph_scans={} bytes_read={} bytes_written={} peak_slots={}/{} wall_ms={} digest={} verified={}",
        s.algorithm,
        s.nodes,
        s.edges,
        s.virtual_root.map_or("no".into(), |r| r.to_string()),
        s.iterations,
        opt(s.initial_fnn.map(u64::from)),
        s.round_i,
        s.reductions,
        opt(s.index_edges),
        s.graph_scans,
        s.io.totals.bytes_read,
        s.io.totals.bytes_written,
        s.peak_slots,
        s.slot_budget,
        s.wall_millis,
        s.digest.as_deref().unwrap_or("-"),
        s.verified.map_or("-".into(), |v| v.to_string()),
    )
}

fn limit(secs: f64) -> anyhow::Result<Option<Duration>> {
    if secs == 0.0 {
        return Ok(None);
    }
    Duration::try_from_secs_f64(secs)
        .map(Some)
        .with_context(|| format!("bad time limit {secs}"))
}

fn run_config(a: &RunArgs) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::with_algorithm(a.algorithm);
    cfg.gamma = a.gamma;
    cfg.budget_edges = a.budget;
    if let Some(k) = a.stall {
        cfg.stall = StallRule::Fixed(k);
    }
    cfg.time_limit = limit(a.time_limit)?;
    Ok(cfg)
}

fn cmd_run(a: RunArgs) -> anyhow::Result<ExitCode> {
    let ctx = io_ctx(a.block_bytes);
    let g = GraphFile::open(&a.graph, a.root, &ctx)?;
    let cfg = run_config(&a)?;
    let out = match run_algorithm(&g, &cfg, &ctx, &mut (), g.virtual_root()) {
        Ok(out) => out,
        Err(RunError { error, stats }) => {
            if let Some(p) = &a.trace {
                write_trace(p, &stats)?;
            }
            if let Some(p) = &a.stats_json {
                write_json(p, &stats)?;
            }
            println!("{}", stats_line(&stats));
            bail!("{} run aborted: {error}", a.algorithm);
        }
    };
    let mut stats = out.stats;
    let art = Artifact {
        order: out.order,
        parents: out.parents,
    };
    if let Some(p) = &a.order_out {
        write_artifact(p, &art, &ctx)?;
    }
    let mut code = ExitCode::SUCCESS;
    if a.verify {
        let vctx = IoContext::from_env();
        let cert = verify_artifact(&g, &art, &vctx)?;
        stats.verified = Some(cert.is_valid());
        if let Some((i, e)) = cert.offender {
            eprintln!("forward cross edge #{i}: ({}, {})", e.tail, e.head);
            code = ExitCode::from(1);
        }
    }
    if let Some(p) = &a.trace {
        write_trace(p, &stats)?;
    }
    if let Some(p) = &a.stats_json {
        write_json(p, &stats)?;
    }
    println!("{}", stats_line(&stats));
    Ok(code)
}

fn cmd_verify(a: VerifyArgs) -> anyhow::Result<ExitCode> {
    let ctx = io_ctx(DEFAULT_BLOCK_BYTES);
    let g = GraphFile::open(&a.graph, a.root, &ctx)?;
    let art = read_artifact(&a.order, a.parents.as_deref(), &ctx)?;
    let cert = verify_artifact(&g, &art, &ctx)?;
    match cert.offender {
        None => {
            println!(
                "valid: {} edges checked, no forward cross edge",
                cert.edges_checked
            );
            Ok(ExitCode::SUCCESS)
        }
        Some((i, e)) => {
            println!(
                "invalid: edge #{i} ({}, {}) is a forward cross edge",
                e.tail, e.head
            );
            Ok(ExitCode::from(1))
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Matrix {
    #[serde(default = "default_limit")]
    time_limit_secs: f64,
    #[serde(default = "default_seeds")]
    seeds: Vec<u64>,
    #[serde(rename = "cell")]
    cells: Vec<CellSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CellSpec {
    kind: String,
    n: Vec<u64>,
    /// Edges per node (er only).
    #[serde(default)]
    ratio: Vec<u64>,
    #[serde(default = "default_orders")]
    order: Vec<Order>,
    algorithms: Vec<String>,
}

fn default_limit() -> f64 {
    600.0
}

fn default_seeds() -> Vec<u64> {
    vec![1]
}

fn default_orders() -> Vec<Order> {
    vec![Order::Random]
}

const BENCH_HEADER: &str = "kind,n,m,order,seed,algorithm,status,wall_millis,bytes_read,bytes_written,iterations,round_i,reductions,index_edges,peak_slots,digest";

fn bench_row(
    prefix: &str,
    algorithm: Algorithm,
    result: Result<&RunStats, (&str, &RunStats)>,
) -> String {
    match result {
        Ok(s) => format!(
            "{prefix},{algorithm},ok,{},{},{},{},{},{},{},{},{}",
            s.wall_millis,
            s.io.totals.bytes_read,
            s.io.totals.bytes_written,
            s.iterations,
            s.round_i,
            s.reductions,
            s.index_edges.map_or("-".into(), |x| x.to_string()),
            s.peak_slots,
            s.digest.as_deref().unwrap_or("-"),
        ),
        Err((status, _)) => format!("{prefix},{algorithm},{status},-,-,-,-,-,-,-,-,-"),
    }
}

fn cmd_bench(a: BenchArgs) -> anyhow::Result<ExitCode> {
    let text = std::fs::read_to_string(&a.matrix)
        .with_context(|| format!("reading {}", a.matrix.display()))?;
    let m: Matrix =
        toml::from_str(&text).with_context(|| format!("parsing {}", a.matrix.display()))?;
    let mut w = BufWriter::new(
        File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?,
    );
    writeln!(w, "{BENCH_HEADER}")?;
    let time_limit = limit(m.time_limit_secs)?;
    let mut rows = 0;
    for cell in &m.cells {
        let kind = match cell.kind.as_str() {
            "er" => Kind::Er,
            "sf" => Kind::Sf,
            other => bail!("unknown graph kind {other:?}"),
        };
        let algorithms: Vec<Algorithm> = cell
            .algorithms
            .iter()
            .map(|s| s.parse())
            .collect::<Result<_, _>>()?;
        let ratios: Vec<Option<u64>> = if kind == Kind::Er {
            cell.ratio.iter().map(|&r| Some(r)).collect()
        } else {
            vec![None]
        };
        if ratios.is_empty() {
            bail!("er cells need at least one ratio");
        }
        for &n in &cell.n {
            for &ratio in &ratios {
                for &order in &cell.order {
                    for &seed in &m.seeds {
                        let ctx = io_ctx(DEFAULT_BLOCK_BYTES);
                        let file = ctx.temp_file("bench-")?.into_temp_path();
                        let s = generate(kind, n, ratio.map(|r| r * n), seed, order, &file, &ctx)?;
                        let prefix = format!(
                            "{},{n},{},{},{seed}",
                            cell.kind,
                            s.header.edge_count,
                            if order == Order::Random {
                                "random"
                            } else {
                                "adjacency"
                            },
                        );
                        for &alg in &algorithms {
                            let rctx = io_ctx(DEFAULT_BLOCK_BYTES);
                            let g = GraphFile::open(&file, None, &rctx)?;
                            let cfg = RunConfig {
                                time_limit,
                                ..RunConfig::with_algorithm(alg)
                            };
                            let row =
                                match run_algorithm(&g, &cfg, &rctx, &mut (), g.virtual_root()) {
                                    Ok(out) => bench_row(&prefix, alg, Ok(&out.stats)),
                                    Err(e) => {
                                        let status = match e.error {
                                            sedfs::Error::TimeLimit { .. } => "timeout",
                                            sedfs::Error::BatchOverflow { .. } => "overflow",
                                            _ => "error",
                                        };
                                        log::warn!("{prefix} {alg}: {}", e.error);
                                        bench_row(&prefix, alg, Err((status, &e.stats)))
                                    }
                                };
                            writeln!(w, "{row}")?;
                            rows += 1;
                        }
                    }
                }
            }
        }
    }
    w.flush()?;
    println!("{rows} rows written to {}", a.out.display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Gen(a) => cmd_gen(a),
        Cmd::Import(a) => cmd_import(a),
        Cmd::Run(a) => cmd_run(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
