#![allow(dead_code)]

pub mod audit;
pub mod fixture;
pub mod index;
pub mod merge;
pub mod theorems;

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sedfs::graph::EdgeRecord;
use sedfs::verify::{compute_upsilon, OrderedTree, TreeView};
use sedfs::{IoContext, MemoryGraph, TreeStore};

pub fn ctx() -> (tempfile::TempDir, IoContext) {
    let d = tempfile::tempdir().unwrap();
    let c = IoContext::new(d.path());
    (d, c)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random rooted tree on 0..n with root 0 and shuffled child order.
pub fn random_tree(n: u32, rng: &mut ChaCha8Rng) -> OrderedTree {
    let mut perm: Vec<u32> = (1..n).collect();
    perm.shuffle(rng);
    let mut children = vec![Vec::new(); n as usize];
    for i in 0..perm.len() {
        let p = if i == 0 {
            0
        } else {
            let k = rng.random_range(0..=i);
            if k == i {
                0
            } else {
                perm[k]
            }
        };
        children[p as usize].push(perm[i]);
    }
    OrderedTree { root: 0, children }
}

/// `m` distinct random non-loop edges on 0..n.
pub fn random_edges(n: u32, m: usize, rng: &mut ChaCha8Rng) -> Vec<EdgeRecord> {
    let cap = (n as usize) * (n as usize - 1);
    let m = m.min(cap);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(m);
    while out.len() < m {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v && seen.insert((u, v)) {
            out.push(EdgeRecord::new(u, v));
        }
    }
    out
}

/// Root 0 with an edge to every other node, plus `extra` random edges,
/// all shuffled together.
pub fn rooted_graph(n: u32, extra: usize, rng: &mut ChaCha8Rng) -> MemoryGraph {
    let mut edges: Vec<EdgeRecord> = (1..n).map(|v| EdgeRecord::new(0, v)).collect();
    let have: HashSet<EdgeRecord> = edges.iter().copied().collect();
    edges.extend(
        random_edges(n, extra, rng)
            .into_iter()
            .filter(|e| !have.contains(e)),
    );
    edges.shuffle(rng);
    MemoryGraph { n, root: 0, edges }
}

/// Tree edges of `t` plus `extra` random edges, shuffled.
pub fn graph_over_tree(t: &OrderedTree, extra: usize, rng: &mut ChaCha8Rng) -> Vec<EdgeRecord> {
    let mut set: HashSet<EdgeRecord> = HashSet::new();
    let mut edges = Vec::new();
    for (u, cs) in t.children.iter().enumerate() {
        for &c in cs {
            let e = EdgeRecord::new(u as u32, c);
            set.insert(e);
            edges.push(e);
        }
    }
    for e in random_edges(t.n(), extra, rng) {
        if set.insert(e) {
            edges.push(e);
        }
    }
    edges.shuffle(rng);
    edges
}

pub fn upsilon(edges: &[EdgeRecord], view: &TreeView) -> Option<u32> {
    compute_upsilon(edges.iter().map(|&e| Ok(e)), view).unwrap()
}

pub fn upsilon_store(edges: &[EdgeRecord], t: &TreeStore) -> Option<u32> {
    upsilon(edges, &TreeView::from_store(t))
}

pub fn common_prefix(a: &[u32], b: &[u32]) -> u32 {
    a.iter().zip(b).take_while(|(x, y)| x == y).count() as u32
}

/// Largest out-degree over nodes other than 0.
pub fn max_degree_off_root(g: &MemoryGraph) -> u32 {
    let mut d = vec![0u32; g.n as usize];
    for e in &g.edges {
        d[e.tail as usize] += 1;
    }
    d[1..].iter().copied().max().unwrap_or(0)
}
