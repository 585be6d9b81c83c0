//! What promoting a single forward cross edge does to every other edge.

use serde::Serialize;

use super::classify::{classify_edge, EdgeClass};
use super::oracle::{inmem_dfs_oracle, BatchOrder, OrderedTree, TreeView};
use crate::graph::{EdgeRecord, NONE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Transition {
    pub edge: EdgeRecord,
    pub before: EdgeClass,
    pub after: EdgeClass,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AuditRecord {
    /// Edges whose class changed.
    pub changed: Vec<Transition>,
    pub forbidden: Vec<Transition>,
    /// Ancestors `u` of the head for which the positional dichotomy with
    /// the tail failed.
    pub lemma_failures: Vec<u32>,
}

impl AuditRecord {
    pub fn is_clean(&self) -> bool {
        self.forbidden.is_empty() && self.lemma_failures.is_empty()
    }
}

/// Classes an edge may move to when one forward cross edge is promoted.
/// Staying put is always allowed; forward cross edges may become anything.
pub fn allowed(before: EdgeClass, after: EdgeClass) -> bool {
    use EdgeClass::*;
    before == after
        || match before {
            Tree => matches!(after, Forward | BackwardCross),
            Forward => after == BackwardCross,
            Backward => after == ForwardCross,
            BackwardCross => matches!(after, Backward | ForwardCross),
            ForwardCross => true,
        }
}

/// Merges `{e}` into `tree` and re-classifies every other edge of `edges`.
/// Returns `None` if `e` is not forward cross under `tree`.
pub fn chain_reaction_audit(
    tree: &OrderedTree,
    edges: &[EdgeRecord],
    e: EdgeRecord,
) -> Option<AuditRecord> {
    let old = TreeView::new(tree);
    if classify_edge(&old, e) != EdgeClass::ForwardCross {
        return None;
    }
    let (merged, _) = inmem_dfs_oracle(tree, &[e], BatchOrder::LoadOrder);
    let new = TreeView::new(&merged);
    let mut rec = AuditRecord::default();
    for &f in edges.iter().filter(|&&f| f != e) {
        let t = Transition {
            edge: f,
            before: classify_edge(&old, f),
            after: classify_edge(&new, f),
        };
        if t.before != t.after {
            rec.changed.push(t);
        }
        if !allowed(t.before, t.after) {
            rec.forbidden.push(t);
        }
    }
    let (x, mut u) = (e.tail, e.head);
    while u != NONE {
        let (dx, du) = (old.dfo[x as usize], old.dfo[u as usize]);
        let ok = if dx > du {
            old.is_ancestor(u, x)
        } else {
            !old.is_ancestor(u, x) && !old.is_ancestor(x, u)
        };
        if !ok {
            rec.lemma_failures.push(u);
        }
        u = old.parent[u as usize];
    }
    Some(rec)
}
