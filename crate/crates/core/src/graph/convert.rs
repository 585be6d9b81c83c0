//! Storage-order conversion and text ingestion.

use std::collections::{HashMap, HashSet, VecDeque};
use std::io::BufRead;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extsort::ExternalSorter;
use crate::graph::format::{
    open_edge_stream, EdgeListWriter, EdgeRecord, FileSummary, StorageOrder, MAX_NODES,
};
use crate::io::{labels, IoContext};

#[derive(Clone, Debug, Serialize)]
pub struct ConvertReport {
    pub summary: FileSummary,
    pub runs: usize,
}

/// Rewrites `input` grouped by tail, heads ascending, holding at most
/// `budget_edges` edges in memory.
pub fn convert_to_adjacency_order(
    input: &Path,
    output: &Path,
    budget_edges: usize,
    ctx: &IoContext,
) -> Result<ConvertReport> {
    if budget_edges == 0 {
        return Err(Error::InvalidArgument(
            "budget must be at least one edge".into(),
        ));
    }
    let stream = open_edge_stream(input, ctx, labels::GRAPH)?;
    let header = *stream.header();
    let mut sorter = ExternalSorter::<EdgeRecord>::new(budget_edges, ctx, labels::RUNS);
    for e in stream {
        sorter.push(e?)?;
    }
    let runs = sorter.runs_written();
    let mut out = EdgeListWriter::create(
        output,
        header.node_count,
        StorageOrder::AdjacencyList,
        header.root,
        ctx,
    )?;
    for e in sorter.finish()? {
        out.push(e?)?;
    }
    Ok(ConvertReport {
        summary: out.finish()?,
        runs,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct IngestReport {
    pub summary: FileSummary,
    pub self_loops: u64,
    pub duplicates: u64,
}

/// Reads whitespace-separated `tail head` lines. Blank lines and lines
/// starting with `#` or `%` are skipped. Without `n_hint`, ids are remapped
/// densely in order of first appearance; with it they are kept and must be
/// below the hint. Repeats are dropped only within a window of the last
/// `2n` kept edges.
pub fn ingest_text(
    input: &Path,
    output: &Path,
    n_hint: Option<u64>,
    ctx: &IoContext,
) -> Result<IngestReport> {
    let file = std::fs::File::open(input)?;
    ctx.counters
        .record_read_bytes(labels::GRAPH, file.metadata()?.len());
    let reader = std::io::BufReader::new(file);
    let bound = n_hint.unwrap_or(MAX_NODES - 1);
    let mut out = EdgeListWriter::create(output, bound, StorageOrder::RandomList, None, ctx)?;

    let mut ids: HashMap<u64, u32> = HashMap::new();
    let mut window: VecDeque<EdgeRecord> = VecDeque::new();
    let mut recent: HashSet<EdgeRecord> = HashSet::new();
    let (mut self_loops, mut duplicates) = (0, 0);

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with('%') {
            continue;
        }
        let bad = || Error::format(input, format!("malformed line {}: {line:?}", lineno + 1));
        let mut it = t.split_whitespace();
        let (a, b) = match (it.next(), it.next(), it.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => return Err(bad()),
        };
        let a: u64 = a.parse().map_err(|_| bad())?;
        let b: u64 = b.parse().map_err(|_| bad())?;
        let mut map = |x: u64| -> Result<u32> {
            match n_hint {
                Some(n) if x >= n => Err(Error::format(
                    input,
                    format!("line {}: id {x} not below n={n}", lineno + 1),
                )),
                Some(_) => Ok(x as u32),
                None => {
                    let next = ids.len() as u32;
                    Ok(*ids.entry(x).or_insert(next))
                }
            }
        };
        let e = EdgeRecord::new(map(a)?, map(b)?);
        if e.tail == e.head {
            self_loops += 1;
            continue;
        }
        if recent.contains(&e) {
            duplicates += 1;
            continue;
        }
        let nodes = n_hint.unwrap_or(ids.len() as u64).max(1) as usize;
        while window.len() >= 2 * nodes {
            let old = window.pop_front().unwrap();
            recent.remove(&old);
        }
        window.push_back(e);
        recent.insert(e);
        out.push(e)?;
    }
    let n = n_hint.unwrap_or(ids.len() as u64).max(1);
    let summary = out.finish_with_node_count(n)?;
    Ok(IngestReport {
        summary,
        self_loops,
        duplicates,
    })
}
