//! Run orchestration: configuration, statistics, and the four algorithms
//! behind one entry point.

mod eb;
mod ep;
mod naive;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{EdgeRecord, EdgeSource};
use crate::io::{labels, IoContext, IoReport};
use crate::rearrange::REARRANGE_CHUNK;
use crate::tree::TreeStore;
use crate::verify::{inmem_dfs_oracle, BatchOrder, OrderedTree};

pub use eb::eb_dfs;
pub use ep::{ep_dfs, initial_round, round_i, round_i_and_reduction};
pub use naive::naive_ep_dfs;

/// Largest graph the naive and in-memory modes accept.
pub const SMALL_MODE_MAX_NODES: u32 = 100_000;
/// Merges between rearrangements inside a full index round.
pub const ROUND_REARRANGE_EVERY: u32 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Ep,
    Naive,
    Eb,
    InMem,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Ep,
        Algorithm::Naive,
        Algorithm::Eb,
        Algorithm::InMem,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Ep => "ep",
            Algorithm::Naive => "naive",
            Algorithm::Eb => "eb",
            Algorithm::InMem => "inmem",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown algorithm {s:?}")))
    }
}

/// When an iteration counts as stalled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StallRule {
    /// FNN advanced by less than min(100, n / 1000).
    Paper,
    /// FNN advanced by less than the given amount.
    Fixed(u32),
}

impl StallRule {
    pub fn threshold(self, n: u32) -> u32 {
        match self {
            StallRule::Paper => (n / 1000).min(100),
            StallRule::Fixed(k) => k,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    /// Fraction of n the FNN must gain since the last index rebuild before
    /// a stalled iteration rebuilds again.
    pub gamma: f64,
    pub stall: StallRule,
    /// Edges per batch; `None` means n.
    pub budget_edges: Option<u32>,
    pub rearrange_chunk: usize,
    pub time_limit: Option<Duration>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            algorithm: Algorithm::Ep,
            gamma: 0.10,
            stall: StallRule::Paper,
            budget_edges: None,
            rearrange_chunk: REARRANGE_CHUNK,
            time_limit: None,
        }
    }
}

impl RunConfig {
    pub fn with_algorithm(algorithm: Algorithm) -> Self {
        RunConfig {
            algorithm,
            ..Self::default()
        }
    }

    /// The batch budget for an `n`-node graph.
    pub fn budget(&self, n: u32) -> Result<u32> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "gamma {} outside (0, 1]",
                self.gamma
            )));
        }
        let b = self.budget_edges.unwrap_or(n);
        // n - 1 tree slots leave n + 1 of the 2n free.
        if b == 0 || u64::from(b) > u64::from(n) + 1 {
            return Err(Error::InvalidArgument(format!(
                "budget {b} outside [1, n + 1] for n = {n}"
            )));
        }
        Ok(b)
    }
}

/// Which full index round followed an iteration, if any.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundKind {
    None,
    RoundI,
    Reduction,
}

/// One main-loop iteration. Byte counts are cumulative over the run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IterationRecord {
    pub iteration: u32,
    pub fnn: u32,
    pub max_order: u32,
    pub batch_edges: u64,
    pub index_edges: u64,
    pub bytes_read: u64,
    pub bytes_written: u64,
    pub millis: u64,
    pub round: RoundKind,
}

pub const TRACE_HEADER: &str =
    "iteration,fnn,max_order,batch_edges,index_edges,bytes_read,bytes_written,millis";

impl IterationRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.iteration,
            self.fnn,
            self.max_order,
            self.batch_edges,
            self.index_edges,
            self.bytes_read,
            self.bytes_written,
            self.millis
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunStats {
    pub algorithm: Algorithm,
    /// Nodes processed, a virtual root included.
    pub nodes: u32,
    pub edges: u64,
    pub virtual_root: Option<u32>,
    pub completed: bool,
    pub wall_millis: u64,
    /// FNN after the initial round (ep only).
    pub initial_fnn: Option<u32>,
    /// Main-loop iterations (ep, naive) or rounds over the graph (eb).
    pub iterations: u32,
    pub round_i: u32,
    pub reductions: u32,
    pub index_edges: Option<u64>,
    pub index_bytes: Option<u64>,
    pub graph_scans: u64,
    /// Raw-graph bytes read after the index was built.
    pub graph_bytes_after_index: u64,
    pub peak_slots: u64,
    pub slot_budget: u64,
    pub io: IoReport,
    /// One row per main-loop iteration; ep adds row 0 for the initial round.
    pub trace: Vec<IterationRecord>,
    /// SHA-256 over the order, then the parent array, as little-endian words.
    pub digest: Option<String>,
    pub verified: Option<bool>,
}

/// Things a run reports as it goes; tests hook in here.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Event {
    InitialRound {
        fnn: u32,
    },
    IndexBuilt {
        fnn: u32,
        edges: u64,
    },
    /// After a batch merge and the FNN update.
    Merged {
        before: u32,
        fnn: u32,
        max_order: u32,
    },
    /// After a full index round.
    Round {
        before: u32,
        fnn: u32,
        reduced: bool,
    },
    /// End of a main-loop iteration, after the rearrangement.
    IterationEnd {
        fnn: u32,
    },
    EbRound {
        round: u32,
        changed: bool,
    },
}

pub trait Observer {
    fn on_event(&mut self, _tree: &TreeStore, _event: &Event) {}
}

impl Observer for () {}

pub struct RunOutput {
    pub order: Vec<u32>,
    pub parents: Vec<u32>,
    pub stats: RunStats,
}

/// A failed run with whatever statistics were gathered before it stopped.
#[derive(Debug)]
pub struct RunError {
    pub error: Error,
    pub stats: Box<RunStats>,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.error.fmt(f)
    }
}

impl std::error::Error for RunError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

pub(crate) struct Session<'a> {
    pub graph: &'a dyn EdgeSource,
    pub cfg: &'a RunConfig,
    pub ctx: &'a IoContext,
    pub obs: &'a mut dyn Observer,
    pub stats: RunStats,
    pub budget: u32,
    start: Instant,
    graph_bytes_at_index: Option<u64>,
}

impl<'a> Session<'a> {
    pub fn new(
        graph: &'a dyn EdgeSource,
        cfg: &'a RunConfig,
        ctx: &'a IoContext,
        obs: &'a mut dyn Observer,
        virtual_root: Option<u32>,
    ) -> Self {
        let n = graph.node_count();
        Session {
            graph,
            cfg,
            ctx,
            obs,
            stats: RunStats {
                algorithm: cfg.algorithm,
                nodes: n,
                edges: graph.edge_count(),
                virtual_root,
                completed: false,
                wall_millis: 0,
                initial_fnn: None,
                iterations: 0,
                round_i: 0,
                reductions: 0,
                index_edges: None,
                index_bytes: None,
                graph_scans: 0,
                graph_bytes_after_index: 0,
                peak_slots: 0,
                slot_budget: 2 * u64::from(n),
                io: IoReport::default(),
                trace: Vec::new(),
                digest: None,
                verified: None,
            },
            budget: 0,
            start: Instant::now(),
            graph_bytes_at_index: None,
        }
    }

    pub fn n(&self) -> u32 {
        self.graph.node_count()
    }

    pub fn emit(&mut self, tree: &TreeStore, event: Event) {
        self.obs.on_event(tree, &event);
    }

    pub fn check_time(&self) -> Result<()> {
        match self.cfg.time_limit {
            Some(limit) if self.start.elapsed() > limit => Err(Error::TimeLimit {
                limit_secs: limit.as_secs_f64(),
            }),
            _ => Ok(()),
        }
    }

    pub fn elapsed_millis(&self) -> u64 {
        self.start.elapsed().as_millis() as u64
    }

    pub fn mark_index_built(&mut self) {
        self.graph_bytes_at_index = Some(self.ctx.counters.file(labels::GRAPH).bytes_read);
    }

    pub fn record(
        &mut self,
        iteration: u32,
        fnn: u32,
        max_order: u32,
        batch_edges: u64,
        index_edges: u64,
        round: RoundKind,
    ) {
        let t = self.ctx.counters.totals();
        let rec = IterationRecord {
            iteration,
            fnn,
            max_order,
            batch_edges,
            index_edges,
            bytes_read: t.bytes_read,
            bytes_written: t.bytes_written,
            millis: self.elapsed_millis(),
            round,
        };
        log::debug!("{}", rec.csv_row());
        self.stats.trace.push(rec);
    }

    fn finish_stats(&mut self, peak_slots: u64) {
        self.stats.wall_millis = self.elapsed_millis();
        self.stats.peak_slots = self.stats.peak_slots.max(peak_slots);
        let graph = self.ctx.counters.file(labels::GRAPH);
        self.stats.graph_scans = graph.full_scans;
        if let Some(at) = self.graph_bytes_at_index {
            self.stats.graph_bytes_after_index = graph.bytes_read - at;
        }
        self.stats.io = self.ctx.counters.report();
    }
}

pub fn order_digest(order: &[u32], parents: &[u32]) -> String {
    let mut h = Sha256::new();
    for x in order.iter().chain(parents) {
        h.update(x.to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs `cfg.algorithm` over `graph`. `virtual_root` is only reported.
pub fn run_algorithm(
    graph: &dyn EdgeSource,
    cfg: &RunConfig,
    ctx: &IoContext,
    obs: &mut dyn Observer,
    virtual_root: Option<u32>,
) -> std::result::Result<RunOutput, RunError> {
    let mut s = Session::new(graph, cfg, ctx, obs, virtual_root);
    let mut peak = 0;
    let result = run_in(&mut s, &mut peak);
    s.finish_stats(peak);
    match result {
        Ok((order, parents)) => {
            s.stats.completed = true;
            s.stats.digest = Some(order_digest(&order, &parents));
            Ok(RunOutput {
                order,
                parents,
                stats: s.stats,
            })
        }
        Err(error) => Err(RunError {
            error,
            stats: Box::new(s.stats),
        }),
    }
}

fn run_in(s: &mut Session<'_>, peak: &mut u64) -> Result<(Vec<u32>, Vec<u32>)> {
    let n = s.n();
    s.budget = s.cfg.budget(n)?;
    if matches!(s.cfg.algorithm, Algorithm::Naive | Algorithm::InMem) && n > SMALL_MODE_MAX_NODES {
        return Err(Error::InvalidArgument(format!(
            "{} mode is limited to {SMALL_MODE_MAX_NODES} nodes",
            s.cfg.algorithm
        )));
    }
    if s.cfg.algorithm == Algorithm::InMem {
        let (tree, order, held) = inmem(s.graph, s.ctx)?;
        *peak = held;
        return Ok((order, tree.parents()));
    }
    let mut tree = TreeStore::star(n, s.graph.root())?;
    let r = match s.cfg.algorithm {
        Algorithm::Ep => ep::run(s, &mut tree),
        Algorithm::Naive => naive::run(s, &mut tree),
        Algorithm::Eb => eb::run(s, &mut tree),
        Algorithm::InMem => unreachable!(),
    };
    *peak = tree.peak_in_use();
    r?;
    Ok((tree.order().to_vec(), tree.parents()))
}

/// The whole graph as one batch on the star, in memory.
fn inmem(graph: &dyn EdgeSource, ctx: &IoContext) -> Result<(OrderedTree, Vec<u32>, u64)> {
    let edges: Vec<EdgeRecord> = graph.scan(ctx)?.collect::<Result<_>>()?;
    let star = OrderedTree::star(graph.node_count(), graph.root());
    let (tree, order) = inmem_dfs_oracle(&star, &edges, BatchOrder::LoadOrder);
    let held = edges.len() as u64 + u64::from(graph.node_count()) - 1;
    Ok((tree, order, held))
}
