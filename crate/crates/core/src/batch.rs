//! Assembling edge batches: from the index for EP-DFS, and from the raw
//! graph for the naive variant.

use crate::error::{Error, Result};
use crate::graph::EdgeSource;
use crate::index::{load_sequentially, NPlusIndex};
use crate::io::IoContext;
use crate::tree::TreeStore;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LoadedBatch {
    /// Largest dfo whose out-edges were taken.
    pub max_order: u32,
    pub edges: u64,
}

/// Walks tails in dfo order from `fnn`, queueing block offsets and loading
/// them whenever the next tail would push the tally over `budget`. Stops
/// at the first tail that still does not fit after a load.
pub fn obtain_edges(
    index: &NPlusIndex,
    tree: &mut TreeStore,
    fnn: u32,
    budget: u32,
    ctx: &IoContext,
) -> Result<LoadedBatch> {
    let n = tree.n();
    let budget = u64::from(budget);
    let mut pending: Vec<u32> = Vec::new();
    let mut kappa = 0u64;
    let mut loaded = 0u64;
    let mut k = fnn;
    while k < n {
        let u = tree.node_at(k);
        let od = u64::from(tree.degree(u));
        if kappa + od > budget {
            loaded += load_sequentially(index, &mut pending, ctx, |e| tree.load_edge(e))?;
            pending.clear();
            kappa = loaded;
        }
        if kappa + od > budget {
            break;
        }
        if od != 0 {
            pending.push(tree.offset(u));
            kappa += od;
        }
        k += 1;
    }
    loaded += load_sequentially(index, &mut pending, ctx, |e| tree.load_edge(e))?;
    if k == fnn {
        let u = tree.node_at(fnn);
        return Err(Error::IrreducibleBatch {
            node: u,
            degree: tree.degree(u),
            budget: budget as u32,
        });
    }
    Ok(LoadedBatch {
        max_order: k - 1,
        edges: loaded,
    })
}

/// The naive batch: every edge with an endpoint of dfo >= `fnn` and the
/// other of dfo <= Max, for the largest Max that keeps the batch within
/// `budget`. Scans the graph twice: once to count, once to collect.
pub fn scan_batch_b(
    graph: &dyn EdgeSource,
    tree: &mut TreeStore,
    fnn: u32,
    budget: u32,
    ctx: &IoContext,
) -> Result<LoadedBatch> {
    let n = tree.n();
    // hist[k]: edges in the batch whose smaller endpoint dfo is k.
    let mut hist = vec![0u64; n as usize];
    for e in graph.scan(ctx)? {
        let e = e?;
        let (a, b) = (tree.dfo(e.tail), tree.dfo(e.head));
        if a.max(b) >= fnn {
            hist[a.min(b) as usize] += 1;
        }
    }
    let below: u64 = hist[..fnn as usize].iter().sum();
    let mut total = below + hist[fnn as usize];
    if total > u64::from(budget) {
        return Err(Error::BatchOverflow {
            fnn,
            edges: total,
            budget: budget.into(),
        });
    }
    let mut max = fnn;
    while max + 1 < n && total + hist[max as usize + 1] <= u64::from(budget) {
        max += 1;
        total += hist[max as usize];
    }
    drop(hist);
    let mut loaded = 0;
    for e in graph.scan(ctx)? {
        let e = e?;
        let (a, b) = (tree.dfo(e.tail), tree.dfo(e.head));
        if a.max(b) >= fnn && a.min(b) <= max {
            tree.load_edge(e)?;
            loaded += 1;
        }
    }
    Ok(LoadedBatch {
        max_order: max,
        edges: loaded,
    })
}
