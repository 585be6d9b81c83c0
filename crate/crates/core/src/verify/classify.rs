//! Edge types under a tree and the checks built on them.

use serde::Serialize;

use super::oracle::TreeView;
use crate::error::Result;
use crate::graph::EdgeRecord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum EdgeClass {
    Tree,
    /// Tail is a proper ancestor of the head, not its parent.
    Forward,
    /// Head is an ancestor of the tail (a self-loop counts).
    Backward,
    ForwardCross,
    BackwardCross,
}

pub fn classify_edge(view: &TreeView, e: EdgeRecord) -> EdgeClass {
    let (u, v) = (e.tail, e.head);
    if u != v && view.parent[v as usize] == u {
        EdgeClass::Tree
    } else if u != v && view.is_ancestor(u, v) {
        EdgeClass::Forward
    } else if view.is_ancestor(v, u) {
        EdgeClass::Backward
    } else if view.dfo[u as usize] < view.dfo[v as usize] {
        EdgeClass::ForwardCross
    } else {
        EdgeClass::BackwardCross
    }
}

/// Outcome of a validity check: the first forward cross edge, if any, with
/// its position in the stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub edges_checked: u64,
    pub offender: Option<(u64, EdgeRecord)>,
}

impl Certificate {
    pub fn is_valid(&self) -> bool {
        self.offender.is_none()
    }
}

/// Streams `edges` once; the tree is a DFS-tree iff none is forward cross.
pub fn is_dfs_tree(
    edges: impl IntoIterator<Item = Result<EdgeRecord>>,
    view: &TreeView,
) -> Result<Certificate> {
    let mut i = 0u64;
    for e in edges {
        let e = e?;
        if classify_edge(view, e) == EdgeClass::ForwardCross {
            return Ok(Certificate {
                edges_checked: i + 1,
                offender: Some((i, e)),
            });
        }
        i += 1;
    }
    Ok(Certificate {
        edges_checked: i,
        offender: None,
    })
}

/// Smallest tail dfo over forward cross edges; `None` stands for infinity.
pub fn compute_upsilon(
    edges: impl IntoIterator<Item = Result<EdgeRecord>>,
    view: &TreeView,
) -> Result<Option<u32>> {
    let mut best: Option<u32> = None;
    for e in edges {
        let e = e?;
        if classify_edge(view, e) == EdgeClass::ForwardCross {
            let d = view.dfo[e.tail as usize];
            best = Some(best.map_or(d, |b| b.min(d)));
        }
    }
    Ok(best)
}

/// Number of edges in each class, in [`EdgeClass`] declaration order.
pub fn class_counts(edges: &[EdgeRecord], view: &TreeView) -> [u64; 5] {
    let mut c = [0u64; 5];
    for &e in edges {
        c[classify_edge(view, e) as usize] += 1;
    }
    c
}

/// Does Υ meet `fnn`? Infinity passes every bound.
pub fn upsilon_at_least(upsilon: Option<u32>, fnn: u32) -> bool {
    upsilon.is_none_or(|u| u >= fnn)
}
