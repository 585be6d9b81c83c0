//! The ten-node running example: nodes r,a,b,c,d,f,g,h,p,q as ids 0..9,
//! the spanning tree T0 and the three non-tree edges e1, e2, e3.

use super::oracle::OrderedTree;
use crate::graph::{EdgeRecord, MemoryGraph};
use crate::tree::TreeStore;

pub const NAMES: [&str; 10] = ["r", "a", "b", "c", "d", "f", "g", "h", "p", "q"];

pub const R: u32 = 0;
pub const A: u32 = 1;
pub const B: u32 = 2;
pub const C: u32 = 3;
pub const D: u32 = 4;
pub const F: u32 = 5;
pub const G: u32 = 6;
pub const H: u32 = 7;
pub const P: u32 = 8;
pub const Q: u32 = 9;

pub const E1: EdgeRecord = EdgeRecord::new(P, F);
pub const E2: EdgeRecord = EdgeRecord::new(B, C);
pub const E3: EdgeRecord = EdgeRecord::new(G, Q);

pub fn node(name: &str) -> u32 {
    NAMES
        .iter()
        .position(|&x| x == name)
        .unwrap_or_else(|| panic!("no node {name}")) as u32
}

pub fn name(v: u32) -> &'static str {
    NAMES[v as usize]
}

/// Parses "r,a,d" into ids.
pub fn nodes(names: &str) -> Vec<u32> {
    names.split(',').map(|s| node(s.trim())).collect()
}

pub fn t0_children() -> Vec<Vec<u32>> {
    let mut c = vec![Vec::new(); 10];
    c[R as usize] = vec![A, B, C];
    c[A as usize] = vec![D];
    c[B as usize] = vec![F, G];
    c[C as usize] = vec![H];
    c[D as usize] = vec![P];
    c[H as usize] = vec![Q];
    c
}

pub fn t0() -> OrderedTree {
    OrderedTree {
        root: R,
        children: t0_children(),
    }
}

pub fn t0_store() -> TreeStore {
    TreeStore::from_children(R, &t0_children()).expect("fixture tree")
}

/// T0's edges, then e1, e2, e3.
pub fn edges() -> Vec<EdgeRecord> {
    [
        (R, A),
        (R, B),
        (R, C),
        (A, D),
        (D, P),
        (B, F),
        (B, G),
        (C, H),
        (H, Q),
    ]
    .into_iter()
    .map(EdgeRecord::from)
    .chain([E1, E2, E3])
    .collect()
}

pub fn graph() -> MemoryGraph {
    MemoryGraph {
        n: 10,
        root: R,
        edges: edges(),
    }
}
