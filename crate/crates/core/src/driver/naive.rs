//! The naive variant: every iteration rescans the graph for the batch.

use super::{Event, RoundKind, RunConfig, Session};
use crate::batch::scan_batch_b;
use crate::error::{Error, Result};
use crate::graph::EdgeSource;
use crate::io::IoContext;
use crate::tree::TreeStore;

pub fn naive_ep_dfs(graph: &dyn EdgeSource, cfg: &RunConfig, ctx: &IoContext) -> Result<TreeStore> {
    let mut obs = ();
    let mut s = Session::new(graph, cfg, ctx, &mut obs, None);
    s.budget = cfg.budget(graph.node_count())?;
    let mut tree = TreeStore::star(graph.node_count(), graph.root())?;
    run(&mut s, &mut tree)?;
    Ok(tree)
}

pub(super) fn run(s: &mut Session<'_>, tree: &mut TreeStore) -> Result<()> {
    let n = s.n();
    let mut fnn = 1;
    let mut iteration = 0;
    while fnn < n {
        s.check_time()?;
        iteration += 1;
        s.stats.iterations = iteration;
        let batch = scan_batch_b(s.graph, tree, fnn, s.budget, s.ctx)?;
        // A window ending at Max folds the clamp to Max + 1 into C.
        let snap = tree.snapshot_orders(fnn, batch.max_order, s.ctx)?;
        tree.merge_batch();
        let next = tree.compute_c(&snap, s.ctx)?;
        if next <= fnn {
            return Err(Error::Internal(format!("FNN did not advance past {fnn}")));
        }
        s.emit(
            tree,
            Event::Merged {
                before: fnn,
                fnn: next,
                max_order: batch.max_order,
            },
        );
        fnn = next;
        s.record(
            iteration,
            fnn,
            batch.max_order,
            batch.edges,
            0,
            RoundKind::None,
        );
    }
    Ok(())
}
