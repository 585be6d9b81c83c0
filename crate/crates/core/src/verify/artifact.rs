//! Run artifacts: the depth-first order and the parent array, each a flat
//! little-endian `u32` file. The root's parent is [`NONE`].

use std::path::{Path, PathBuf};

use super::classify::{is_dfs_tree, Certificate};
use super::oracle::{OrderedTree, TreeView};
use crate::error::{Error, Result};
use crate::graph::{EdgeSource, NONE};
use crate::io::{labels, IoContext};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub order: Vec<u32>,
    pub parents: Vec<u32>,
}

/// Where the parent array lives next to an order file.
pub fn parents_path(order: &Path) -> PathBuf {
    let mut s = order.as_os_str().to_owned();
    s.push(".parents");
    PathBuf::from(s)
}

fn write_words(path: &Path, words: &[u32], ctx: &IoContext) -> Result<()> {
    let mut w = ctx.create_writer(path, labels::OUTPUT)?;
    for x in words {
        w.write_all(&x.to_le_bytes())?;
    }
    w.finish()?;
    Ok(())
}

fn read_words(path: &Path, ctx: &IoContext) -> Result<Vec<u32>> {
    let len = std::fs::metadata(path)?.len();
    if len % 4 != 0 {
        return Err(Error::format(
            path,
            format!("{len} bytes is not a whole number of ids"),
        ));
    }
    let mut r = ctx.open_reader(path, labels::OUTPUT, 0)?;
    let mut out = Vec::with_capacity((len / 4) as usize);
    let mut b = [0u8; 4];
    while r.read_exact_or_eof(&mut b)? {
        out.push(u32::from_le_bytes(b));
    }
    Ok(out)
}

pub fn write_artifact(order_path: &Path, art: &Artifact, ctx: &IoContext) -> Result<()> {
    write_words(order_path, &art.order, ctx)?;
    write_words(&parents_path(order_path), &art.parents, ctx)
}

/// Reads both files and checks that the order is the preorder of the tree
/// the parents describe.
pub fn read_artifact(
    order_path: &Path,
    parents: Option<&Path>,
    ctx: &IoContext,
) -> Result<Artifact> {
    let pp = parents.map_or_else(|| parents_path(order_path), Path::to_path_buf);
    let order = read_words(order_path, ctx)?;
    let parents = read_words(&pp, ctx)?;
    let n = order.len();
    if n == 0 {
        return Err(Error::format(order_path, "empty order"));
    }
    if parents.len() != n {
        return Err(Error::format(
            &pp,
            format!("{} parents for {n} nodes", parents.len()),
        ));
    }
    let mut seen = vec![false; n];
    for &v in &order {
        if v as usize >= n || std::mem::replace(&mut seen[v as usize], true) {
            return Err(Error::format(
                order_path,
                format!("order is not a permutation (at id {v})"),
            ));
        }
    }
    for (v, &p) in parents.iter().enumerate() {
        let is_root = v as u32 == order[0];
        if is_root != (p == NONE) || (!is_root && p as usize >= n) {
            return Err(Error::format(&pp, format!("bad parent {p} for node {v}")));
        }
    }
    let tree = OrderedTree::from_order_and_parents(&order, &parents);
    if tree.preorder() != order {
        return Err(Error::format(
            order_path,
            "order is not the preorder of the parent tree",
        ));
    }
    Ok(Artifact { order, parents })
}

/// Certifies the artifact against the graph in one scan.
pub fn verify_artifact(
    graph: &dyn EdgeSource,
    art: &Artifact,
    ctx: &IoContext,
) -> Result<Certificate> {
    if art.order.len() != graph.node_count() as usize {
        return Err(Error::InvalidArgument(format!(
            "artifact has {} nodes, graph has {}",
            art.order.len(),
            graph.node_count()
        )));
    }
    if art.order[0] != graph.root() {
        return Err(Error::InvalidArgument(format!(
            "artifact root {} is not the graph root {}",
            art.order[0],
            graph.root()
        )));
    }
    let view = TreeView::from_order_and_parents(&art.order, &art.parents);
    is_dfs_tree(graph.scan(ctx)?, &view)
}
