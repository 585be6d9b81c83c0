//! The index-driven algorithm: initial round, index build, and the main
//! loop with its full index rounds.

use super::{Event, RoundKind, RunConfig, Session, ROUND_REARRANGE_EVERY};
use crate::batch::obtain_edges;
use crate::error::{Error, Result};
use crate::extsort::RunReader;
use crate::graph::EdgeSource;
use crate::graph::{EdgeIter, EdgeRecord};
use crate::index::{build_index, keeps, rebuild_from, scan_index, NPlusIndex};
use crate::io::{labels, BlockWriter, IoContext};
use crate::tree::TreeStore;

/// Two passes over the graph in `budget`-edge chunks, rearranging after
/// every merge of the first pass only. Returns the order prefix that every
/// tree of the second pass shared with the tree the first pass left.
pub fn initial_round(
    graph: &dyn EdgeSource,
    tree: &mut TreeStore,
    budget: u32,
    ctx: &IoContext,
) -> Result<u32> {
    merge_chunks(graph, tree, budget, ctx, |t| t.rearrange(0))?;
    let snap = tree.snapshot_orders(0, tree.n() - 1, ctx)?;
    let mut c = tree.n();
    merge_chunks(graph, tree, budget, ctx, |t| {
        c = t.compute_c_below(&snap, c, ctx)?;
        Ok(())
    })?;
    Ok(c)
}

/// One scan of `graph`, merging every `budget` edges and calling `after`
/// once each merge is done.
pub(crate) fn merge_chunks(
    graph: &dyn EdgeSource,
    tree: &mut TreeStore,
    budget: u32,
    ctx: &IoContext,
    mut after: impl FnMut(&mut TreeStore) -> Result<()>,
) -> Result<u64> {
    let mut loaded = 0;
    let mut merges = 0;
    for e in graph.scan(ctx)? {
        tree.load_edge(e?)?;
        loaded += 1;
        if loaded == budget {
            tree.merge_batch();
            merges += 1;
            loaded = 0;
            after(tree)?;
        }
    }
    if loaded > 0 {
        tree.merge_batch();
        merges += 1;
        after(tree)?;
    }
    Ok(merges)
}

/// Merges every index edge that still passes the filter, in `budget`-edge
/// batches, rearranging after every fifth merge. Returns the order prefix that
/// every intermediate tree shared with the one the round started from.
pub fn round_i(
    index: &NPlusIndex,
    tree: &mut TreeStore,
    fnn: u32,
    budget: u32,
    chunk: usize,
    ctx: &IoContext,
) -> Result<u32> {
    full_round(index, tree, fnn, budget, chunk, ctx, None)
}

/// As [`round_i`], and also rebuilds the index from the edges that passed
/// the filter, dropping those the new FNN rules out.
pub fn round_i_and_reduction(
    index: NPlusIndex,
    tree: &mut TreeStore,
    fnn: u32,
    budget: u32,
    chunk: usize,
    ctx: &IoContext,
) -> Result<(u32, NPlusIndex)> {
    let survivors = ctx.temp_file("survivors-")?.into_temp_path();
    let mut w = ctx.create_writer(&survivors, labels::SURVIVORS)?;
    let fnn = full_round(&index, tree, fnn, budget, chunk, ctx, Some(&mut w))?;
    w.finish()?;
    let input: EdgeIter<'_> = Box::new(RunReader::<EdgeRecord>::open(
        &survivors,
        ctx,
        labels::SURVIVORS,
    )?);
    let index = rebuild_from(index, input, tree, fnn, ctx)?;
    Ok((fnn, index))
}

fn full_round(
    index: &NPlusIndex,
    tree: &mut TreeStore,
    fnn: u32,
    budget: u32,
    chunk: usize,
    ctx: &IoContext,
    mut survivors: Option<&mut BlockWriter>,
) -> Result<u32> {
    let n = tree.n();
    if fnn >= n {
        return Ok(n);
    }
    let snap = tree.snapshot_orders(fnn, n - 1, ctx)?;
    let mut c = n;
    let mut loaded = 0;
    let mut merges = 0;
    let mut merge = |tree: &mut TreeStore| -> Result<()> {
        tree.merge_batch();
        merges += 1;
        c = tree.compute_c_below(&snap, c, ctx)?;
        if merges % ROUND_REARRANGE_EVERY == 0 {
            tree.rearrange_with_chunk(fnn, chunk)?;
            c = tree.compute_c_below(&snap, c, ctx)?;
        }
        Ok(())
    };
    for e in scan_index(index, ctx)? {
        let e = e?;
        if !keeps(tree.dfo(e.tail), tree.dfo(e.head), fnn) {
            continue;
        }
        if let Some(w) = survivors.as_mut() {
            w.write_all(&e.to_bytes())?;
        }
        tree.load_edge(e)?;
        loaded += 1;
        if loaded == budget {
            merge(tree)?;
            loaded = 0;
        }
    }
    if loaded > 0 {
        merge(tree)?;
    }
    if c < fnn {
        return Err(Error::Internal(format!(
            "full index round moved the fixed prefix: {c} < {fnn}"
        )));
    }
    Ok(c)
}

/// Builds a DFS-tree of `graph` with the default observer.
pub fn ep_dfs(graph: &dyn EdgeSource, cfg: &RunConfig, ctx: &IoContext) -> Result<TreeStore> {
    let mut obs = ();
    let mut s = Session::new(graph, cfg, ctx, &mut obs, None);
    s.budget = cfg.budget(graph.node_count())?;
    let mut tree = TreeStore::star(graph.node_count(), graph.root())?;
    run(&mut s, &mut tree)?;
    Ok(tree)
}

pub(super) fn run(s: &mut Session<'_>, tree: &mut TreeStore) -> Result<()> {
    let n = s.n();
    let (budget, chunk) = (s.budget, s.cfg.rearrange_chunk);
    let mut fnn = initial_round(s.graph, tree, budget, s.ctx)?;
    s.stats.initial_fnn = Some(fnn);
    s.emit(tree, Event::InitialRound { fnn });
    s.record(0, fnn, n - 1, s.graph.edge_count(), 0, RoundKind::None);
    if fnn >= n {
        return Ok(());
    }
    s.check_time()?;
    let mut index = build_index(s.graph, tree, fnn, s.ctx)?;
    s.mark_index_built();
    s.stats.index_edges = Some(index.edge_count());
    s.stats.index_bytes = Some(index.bytes());
    s.emit(
        tree,
        Event::IndexBuilt {
            fnn,
            edges: index.edge_count(),
        },
    );
    let mut f1 = fnn;
    let mut iteration = 0;
    while fnn < n {
        s.check_time()?;
        iteration += 1;
        s.stats.iterations = iteration;
        let batch = obtain_edges(&index, tree, fnn, budget, s.ctx)?;
        let snap = tree.snapshot_orders(fnn, batch.max_order, s.ctx)?;
        tree.merge_batch();
        let f2 = fnn;
        fnn = tree.compute_c_plus(&snap, s.ctx)?.min(batch.max_order + 1);
        drop(snap);
        if fnn <= f2 {
            return Err(Error::Internal(format!("FNN did not advance past {f2}")));
        }
        s.emit(
            tree,
            Event::Merged {
                before: f2,
                fnn,
                max_order: batch.max_order,
            },
        );
        let mut round = RoundKind::None;
        if fnn < n && fnn - f2 < s.cfg.stall.threshold(n) {
            let before = fnn;
            if f64::from(fnn - f1) > s.cfg.gamma * f64::from(n) {
                let (f, rebuilt) = round_i_and_reduction(index, tree, fnn, budget, chunk, s.ctx)?;
                index = rebuilt;
                fnn = f;
                f1 = fnn;
                s.stats.reductions += 1;
                round = RoundKind::Reduction;
            } else {
                fnn = round_i(&index, tree, fnn, budget, chunk, s.ctx)?;
                s.stats.round_i += 1;
                round = RoundKind::RoundI;
            }
            s.emit(
                tree,
                Event::Round {
                    before,
                    fnn,
                    reduced: round == RoundKind::Reduction,
                },
            );
        }
        if fnn < n {
            tree.rearrange_with_chunk(fnn, chunk)?;
        }
        s.emit(tree, Event::IterationEnd { fnn });
        s.record(
            iteration,
            fnn,
            batch.max_order,
            batch.edges,
            index.edge_count(),
            round,
        );
    }
    Ok(())
}
