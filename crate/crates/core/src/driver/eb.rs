//! The edge-batch baseline: whole-graph rounds until one changes nothing.

use std::collections::hash_map::DefaultHasher;
use std::hash::Hasher;

use super::ep::merge_chunks;
use super::{Event, RunConfig, Session};
use crate::error::Result;
use crate::graph::EdgeSource;
use crate::io::IoContext;
use crate::tree::TreeStore;

pub fn eb_dfs(
    graph: &dyn EdgeSource,
    cfg: &RunConfig,
    ctx: &IoContext,
) -> Result<(TreeStore, u32)> {
    let mut obs = ();
    let mut s = Session::new(graph, cfg, ctx, &mut obs, None);
    s.budget = cfg.budget(graph.node_count())?;
    let mut tree = TreeStore::star(graph.node_count(), graph.root())?;
    run(&mut s, &mut tree)?;
    Ok((tree, s.stats.iterations))
}

/// Hash of every child list, in node id order.
fn shape_hash(tree: &TreeStore) -> u64 {
    let mut h = DefaultHasher::new();
    for v in 0..tree.n() {
        h.write_u32(v);
        let mut s = tree.rightmost_slot(v);
        while let Some(slot) = s {
            let (link, head) = tree.slot(slot);
            h.write_u32(head.unwrap_or(u32::MAX));
            s = link;
        }
    }
    h.finish()
}

pub(super) fn run(s: &mut Session<'_>, tree: &mut TreeStore) -> Result<()> {
    let mut round = 0;
    loop {
        s.check_time()?;
        round += 1;
        s.stats.iterations = round;
        let before = shape_hash(tree);
        merge_chunks(s.graph, tree, s.budget, s.ctx, |_| Ok(()))?;
        tree.rearrange_with_chunk(0, s.cfg.rearrange_chunk)?;
        let changed = shape_hash(tree) != before;
        s.emit(tree, Event::EbRound { round, changed });
        if !changed {
            return Ok(());
        }
    }
}
