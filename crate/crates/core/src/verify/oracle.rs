//! A plain in-memory DFS over tree plus batch, written without reference to
//! the slot arrays so the two can be checked against each other.

use crate::graph::{EdgeRecord, NONE};
use crate::tree::TreeStore;

/// A rooted tree with ordered child lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedTree {
    pub root: u32,
    pub children: Vec<Vec<u32>>,
}

/// How batch edges of one tail are consumed once its tree children are done.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BatchOrder {
    LoadOrder,
    AscendingHead,
}

impl OrderedTree {
    pub fn star(n: u32, root: u32) -> Self {
        let mut children = vec![Vec::new(); n as usize];
        children[root as usize] = (0..n).filter(|&v| v != root).collect();
        OrderedTree { root, children }
    }

    pub fn from_store(t: &TreeStore) -> Self {
        OrderedTree {
            root: t.root(),
            children: (0..t.n()).map(|v| t.children(v)).collect(),
        }
    }

    /// Parent lists indexed by node, root has none. Panics if `parents`
    /// does not describe a tree ordered by `order`.
    pub fn from_order_and_parents(order: &[u32], parents: &[u32]) -> Self {
        let mut children = vec![Vec::new(); order.len()];
        for &v in &order[1..] {
            children[parents[v as usize] as usize].push(v);
        }
        OrderedTree {
            root: order[0],
            children,
        }
    }

    pub fn n(&self) -> u32 {
        self.children.len() as u32
    }

    pub fn preorder(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.children.len());
        let mut stack = vec![self.root];
        while let Some(u) = stack.pop() {
            out.push(u);
            stack.extend(self.children[u as usize].iter().rev());
        }
        out
    }

    pub fn parents(&self) -> Vec<u32> {
        let mut p = vec![NONE; self.children.len()];
        for (u, kids) in self.children.iter().enumerate() {
            for &c in kids {
                p[c as usize] = u as u32;
            }
        }
        p
    }

    pub fn to_store(&self) -> crate::Result<TreeStore> {
        TreeStore::from_children(self.root, &self.children)
    }
}

/// The tree a depth-first search of `tree` plus `batch` produces when it
/// always prefers the leftmost unvisited tree child, then batch heads in
/// `rule` order.
pub fn inmem_dfs_oracle(
    tree: &OrderedTree,
    batch: &[EdgeRecord],
    rule: BatchOrder,
) -> (OrderedTree, Vec<u32>) {
    let n = tree.children.len();
    let mut extra: Vec<Vec<u32>> = vec![Vec::new(); n];
    for e in batch {
        extra[e.tail as usize].push(e.head);
    }
    if rule == BatchOrder::AscendingHead {
        for x in &mut extra {
            x.sort_unstable();
        }
    }
    let mut visited = vec![false; n];
    let mut out = OrderedTree {
        root: tree.root,
        children: vec![Vec::new(); n],
    };
    let mut order = Vec::with_capacity(n);
    // Frames of (node, cursor over tree children then extra heads).
    let mut frames: Vec<(u32, usize)> = vec![(tree.root, 0)];
    visited[tree.root as usize] = true;
    order.push(tree.root);
    while let Some(&(u, mut cursor)) = frames.last() {
        let kids = &tree.children[u as usize];
        let more = &extra[u as usize];
        let mut next = None;
        while cursor < kids.len() + more.len() {
            let v = if cursor < kids.len() {
                kids[cursor]
            } else {
                more[cursor - kids.len()]
            };
            cursor += 1;
            if !visited[v as usize] {
                next = Some(v);
                break;
            }
        }
        if let Some(top) = frames.last_mut() {
            top.1 = cursor;
        }
        match next {
            Some(v) => {
                visited[v as usize] = true;
                order.push(v);
                out.children[u as usize].push(v);
                frames.push((v, 0));
            }
            None => {
                frames.pop();
            }
        }
    }
    (out, order)
}

/// Depth-first view of a tree: dfo, parent and subtree size per node.
#[derive(Clone, Debug)]
pub struct TreeView {
    pub dfo: Vec<u32>,
    pub parent: Vec<u32>,
    pub size: Vec<u32>,
}

impl TreeView {
    pub fn new(tree: &OrderedTree) -> Self {
        Self::from_order_and_parents(&tree.preorder(), &tree.parents())
    }

    pub fn from_store(t: &TreeStore) -> Self {
        Self::from_order_and_parents(t.order(), &t.parents())
    }

    /// `order` must be the preorder of the tree `parents` describes.
    pub fn from_order_and_parents(order: &[u32], parents: &[u32]) -> Self {
        let n = order.len();
        let mut dfo = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            dfo[v as usize] = i as u32;
        }
        let mut size = vec![1u32; n];
        for &v in order.iter().rev() {
            let p = parents[v as usize];
            if p != NONE {
                size[p as usize] += size[v as usize];
            }
        }
        TreeView {
            dfo,
            parent: parents.to_vec(),
            size,
        }
    }

    /// `a` is `b` or one of its ancestors.
    pub fn is_ancestor(&self, a: u32, b: u32) -> bool {
        let (da, db) = (self.dfo[a as usize], self.dfo[b as usize]);
        da <= db && db < da + self.size[a as usize]
    }
}
