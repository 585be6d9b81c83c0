//! The ordered spanning tree in three flat arrays.
//!
//! * `a1[v]`: slot of v's rightmost child entry, or [`NIL`]. The top bit is
//!   the visited flag during a merge.
//! * `a2`: 2n slots `{link, head}`. A node's children form a chain that runs
//!   right to left from `a1[v]`. Unused slots form the free list; during a
//!   merge the DFS stack is threaded through the same links.
//! * `a3`: per node `{dfo, OF, OD}`. During a merge the dfo word of an
//!   unvisited node holds its candidate parent.
//!
//! `order` maps a depth-first order back to its node.

use std::path::Path;

use serde::Serialize;
use tempfile::TempPath;

use crate::error::{Error, Result};
use crate::graph::EdgeRecord;
use crate::io::{labels, IoContext};

/// Absent slot or node in A1 and slot links.
pub const NIL: u32 = 0x7FFF_FFFF;
const VISITED: u32 = 0x8000_0000;
/// Marks a slot holding a not-yet-merged batch edge.
const BATCH: u32 = 0x8000_0000;
/// Directory offset of a node without an index block.
pub const NO_OFFSET: u32 = u32::MAX;
/// 2n slots and the flag bits must fit 31 bits.
pub const MAX_TREE_NODES: u32 = 1 << 30;

const DFO: usize = 0;
const OF: usize = 1;
const OD: usize = 2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Slot {
    pub link: u32,
    pub head: u32,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SlotCounts {
    pub tree: u32,
    pub batch: u32,
    pub free: u32,
    /// Transient entries: the DFS stack, or weight entries in a rearrange.
    pub stack: u32,
}

impl SlotCounts {
    pub fn total(&self) -> u64 {
        u64::from(self.tree) + u64::from(self.batch) + u64::from(self.free) + u64::from(self.stack)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MergeOutcome {
    /// Batch edges that became tree edges.
    pub promoted: u32,
    /// Slots returned to the free list.
    pub freed: u32,
}

pub struct TreeStore {
    pub(crate) n: u32,
    pub(crate) root: u32,
    pub(crate) a1: Vec<u32>,
    pub(crate) a2: Vec<Slot>,
    pub(crate) a3: Vec<u32>,
    pub(crate) order: Vec<u32>,
    pub(crate) free_head: u32,
    pub(crate) counts: SlotCounts,
    peak_in_use: u64,
}

impl std::fmt::Debug for TreeStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TreeStore")
            .field("n", &self.n)
            .field("root", &self.root)
            .field("order", &self.order)
            .finish()
    }
}

impl TreeStore {
    fn empty(n: u32, root: u32) -> Result<Self> {
        if n == 0 || n >= MAX_TREE_NODES {
            return Err(Error::InvalidArgument(format!(
                "tree size {n} outside [1, 2^30)"
            )));
        }
        if root >= n {
            return Err(Error::InvalidArgument(format!("root {root} is not a node")));
        }
        let slots = 2 * n as usize;
        let mut a2 = vec![
            Slot {
                link: NIL,
                head: NIL
            };
            slots
        ];
        for (s, slot) in a2.iter_mut().enumerate().skip(1) {
            slot.link = s as u32 - 1;
        }
        let mut a3 = vec![0; 3 * n as usize];
        for v in 0..n as usize {
            a3[3 * v + OF] = NO_OFFSET;
        }
        Ok(TreeStore {
            n,
            root,
            a1: vec![NIL; n as usize],
            a2,
            a3,
            order: vec![0; n as usize],
            free_head: slots as u32 - 1,
            counts: SlotCounts {
                free: slots as u32,
                ..SlotCounts::default()
            },
            peak_in_use: 0,
        })
    }

    /// Star rooted at `root` with the other nodes as children in id order.
    pub fn star(n: u32, root: u32) -> Result<Self> {
        let mut t = Self::empty(n, root)?;
        for v in (0..n).filter(|&v| v != root) {
            t.attach(root, v)?;
        }
        t.counts.tree = n - 1;
        t.renumber();
        Ok(t)
    }

    /// Builds the tree from ordered child lists, allocating slots in
    /// breadth-first order.
    pub fn from_children(root: u32, children: &[Vec<u32>]) -> Result<Self> {
        let n = children.len() as u32;
        let mut t = Self::empty(n, root)?;
        let mut seen = vec![false; n as usize];
        seen[root as usize] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        let mut edges = 0;
        while let Some(u) = queue.pop_front() {
            for &c in &children[u as usize] {
                if c >= n || seen[c as usize] {
                    return Err(Error::InvalidArgument(format!(
                        "child {c} of {u} is not a new node"
                    )));
                }
                seen[c as usize] = true;
                t.attach(u, c)?;
                edges += 1;
                queue.push_back(c);
            }
        }
        if edges != n - 1 {
            return Err(Error::InvalidArgument(
                "child lists do not span the nodes".into(),
            ));
        }
        t.counts.tree = edges;
        t.renumber();
        Ok(t)
    }

    pub(crate) fn alloc(&mut self) -> Result<u32> {
        let s = self.free_head;
        if s == NIL {
            return Err(Error::Budget(format!(
                "all {} edge slots in use",
                self.a2.len()
            )));
        }
        self.free_head = self.a2[s as usize].link;
        self.counts.free -= 1;
        let in_use = (self.a2.len() as u32 - self.counts.free) as u64;
        self.peak_in_use = self.peak_in_use.max(in_use);
        Ok(s)
    }

    pub(crate) fn release(&mut self, s: u32) {
        self.a2[s as usize] = Slot {
            link: self.free_head,
            head: NIL,
        };
        self.free_head = s;
        self.counts.free += 1;
    }

    /// Appends `head` as the new rightmost entry of `tail`'s chain.
    fn attach(&mut self, tail: u32, head: u32) -> Result<u32> {
        let s = self.alloc()?;
        self.a2[s as usize] = Slot {
            link: self.a1[tail as usize] & !VISITED,
            head,
        };
        self.a1[tail as usize] = s | (self.a1[tail as usize] & VISITED);
        Ok(s)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    pub fn dfo(&self, v: u32) -> u32 {
        self.a3[3 * v as usize + DFO]
    }

    pub fn node_at(&self, order: u32) -> u32 {
        self.order[order as usize]
    }

    /// Nodes in depth-first order.
    pub fn order(&self) -> &[u32] {
        &self.order
    }

    pub fn offset(&self, v: u32) -> u32 {
        self.a3[3 * v as usize + OF]
    }

    pub fn degree(&self, v: u32) -> u32 {
        self.a3[3 * v as usize + OD]
    }

    pub fn slot_counts(&self) -> SlotCounts {
        self.counts
    }

    /// Highest number of occupied edge slots (or sort-buffer entries while
    /// the slots are lent out) observed so far.
    pub fn peak_in_use(&self) -> u64 {
        self.peak_in_use
    }

    pub(crate) fn note_in_use(&mut self, k: u64) {
        self.peak_in_use = self.peak_in_use.max(k);
    }

    pub fn free_head(&self) -> Option<u32> {
        (self.free_head != NIL).then_some(self.free_head)
    }

    /// A1 entry of `v` without the flag bit.
    pub fn rightmost_slot(&self, v: u32) -> Option<u32> {
        let s = self.a1[v as usize] & !VISITED;
        (s != NIL).then_some(s)
    }

    /// Raw slot `(link, head)`; batch edges report their plain head.
    pub fn slot(&self, s: u32) -> (Option<u32>, Option<u32>) {
        let Slot { link, head } = self.a2[s as usize];
        let head = if head == NIL {
            None
        } else {
            Some(head & !BATCH)
        };
        ((link != NIL).then_some(link), head)
    }

    /// Chain heads of `v` from leftmost to rightmost, batch edges included.
    pub fn chain(&self, v: u32) -> Vec<u32> {
        let mut out = Vec::new();
        let mut s = self.a1[v as usize] & !VISITED;
        while s != NIL {
            out.push(self.a2[s as usize].head & !BATCH);
            s = self.a2[s as usize].link;
        }
        out.reverse();
        out
    }

    /// Tree children of `v`, left to right (only meaningful between merges).
    pub fn children(&self, v: u32) -> Vec<u32> {
        self.chain(v)
    }

    /// Parent of every node; the root maps to [`crate::graph::NONE`].
    pub fn parents(&self) -> Vec<u32> {
        let mut p = vec![crate::graph::NONE; self.n as usize];
        for u in 0..self.n {
            let mut s = self.a1[u as usize] & !VISITED;
            while s != NIL {
                p[(self.a2[s as usize].head & !BATCH) as usize] = u;
                s = self.a2[s as usize].link;
            }
        }
        p
    }

    /// Puts one batch edge into a free slot as the rightmost entry of its
    /// tail's chain.
    pub fn load_edge(&mut self, e: EdgeRecord) -> Result<()> {
        if e.tail >= self.n || e.head >= self.n {
            return Err(Error::InvalidArgument(format!(
                "edge {e:?} outside the tree"
            )));
        }
        self.attach(e.tail, e.head | BATCH)?;
        self.counts.batch += 1;
        Ok(())
    }

    pub fn load_batch(&mut self, edges: &[EdgeRecord]) -> Result<()> {
        if (edges.len() as u64) > u64::from(self.counts.free) {
            return Err(Error::Budget(format!(
                "batch of {} edges, {} free slots",
                edges.len(),
                self.counts.free
            )));
        }
        edges.iter().try_for_each(|&e| self.load_edge(e))
    }

    pub(crate) fn visited(&self, v: u32) -> bool {
        self.a1[v as usize] & VISITED != 0
    }

    /// Moves `u`'s whole chain onto the stack, leftmost entry on top, and
    /// marks `u` visited with an empty chain. Entries pointing at visited
    /// nodes are freed right away.
    fn push_children(&mut self, u: u32, top: &mut u32, freed: &mut u32) {
        let mut s = self.a1[u as usize] & !VISITED;
        self.a1[u as usize] = NIL | VISITED;
        while s != NIL {
            let next = self.a2[s as usize].link;
            let v = self.a2[s as usize].head & !BATCH;
            if self.visited(v) {
                self.release(s);
                *freed += 1;
            } else {
                self.a3[3 * v as usize + DFO] = u;
                self.a2[s as usize].link = *top;
                *top = s;
                self.counts.stack += 1;
            }
            s = next;
        }
    }

    /// Replaces T by the DFS-tree of T plus the loaded batch: tree children
    /// leftmost first, then batch edges in load order. Renumbers dfo.
    pub fn merge_batch(&mut self) -> MergeOutcome {
        let mut out = MergeOutcome::default();
        // Chain slots move to the stack; count them there from now on.
        self.counts.tree = 0;
        self.counts.batch = 0;
        let mut top = NIL;
        let root = self.root;
        self.a3[3 * root as usize + DFO] = 0;
        self.order[0] = root;
        let mut next_order = 1;
        self.push_children(root, &mut top, &mut out.freed);
        while top != NIL {
            let s = top;
            top = self.a2[s as usize].link;
            self.counts.stack -= 1;
            let raw = self.a2[s as usize].head;
            let v = raw & !BATCH;
            if self.visited(v) {
                self.release(s);
                out.freed += 1;
                continue;
            }
            let p = self.a3[3 * v as usize + DFO];
            self.a2[s as usize] = Slot {
                link: self.a1[p as usize] & !VISITED,
                head: v,
            };
            self.a1[p as usize] = s | VISITED;
            self.counts.tree += 1;
            if raw & BATCH != 0 {
                out.promoted += 1;
            }
            self.a3[3 * v as usize + DFO] = next_order;
            self.order[next_order as usize] = v;
            next_order += 1;
            self.push_children(v, &mut top, &mut out.freed);
        }
        debug_assert_eq!(next_order, self.n, "tree does not span");
        for x in self.a1.iter_mut() {
            *x &= !VISITED;
        }
        out
    }

    /// Recomputes dfo from the current shape (a merge with no batch).
    pub fn renumber(&mut self) {
        debug_assert_eq!(self.counts.batch, 0);
        self.merge_batch();
    }

    /// Checks slot conservation, chain sanity and that dfo is the preorder.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let c = self.counts;
        if c.total() != self.a2.len() as u64 {
            return Err(format!("slot counts {c:?} do not sum to {}", self.a2.len()));
        }
        let mut free = 0;
        let mut s = self.free_head;
        while s != NIL {
            free += 1;
            if free > self.a2.len() {
                return Err("free list cycles".into());
            }
            s = self.a2[s as usize].link;
        }
        if free != c.free as usize {
            return Err(format!("free list holds {free}, counter says {}", c.free));
        }
        let mut pos = 0usize;
        let mut stack = vec![self.root];
        let mut seen = vec![false; self.n as usize];
        while let Some(u) = stack.pop() {
            if seen[u as usize] {
                return Err(format!("node {u} reached twice"));
            }
            seen[u as usize] = true;
            if self.order[pos] != u || self.dfo(u) as usize != pos {
                return Err(format!("dfo of {u} is not its preorder position {pos}"));
            }
            pos += 1;
            let kids = self.chain(u);
            stack.extend(kids.into_iter().rev());
        }
        if pos != self.n as usize {
            return Err(format!("preorder reached {pos} of {} nodes", self.n));
        }
        Ok(())
    }

    /// Writes A1 and A2 to a temp file so A2 can serve as a sort buffer.
    pub(crate) fn spill_links(&mut self, ctx: &IoContext) -> Result<LinkSpill> {
        let path = ctx.temp_file("tree-")?.into_temp_path();
        let mut w = ctx.create_writer(&path, labels::TREE_SPILL)?;
        for &x in &self.a1 {
            w.write_all(&x.to_le_bytes())?;
        }
        for s in &self.a2 {
            w.write_all(&s.link.to_le_bytes())?;
            w.write_all(&s.head.to_le_bytes())?;
        }
        w.finish()?;
        Ok(LinkSpill {
            path,
            free_head: self.free_head,
        })
    }

    /// The slot array as scratch space plus the attribute words. Only valid
    /// between [`Self::spill_links`] and [`Self::restore_links`].
    pub(crate) fn lend_buffers(&mut self) -> (&mut [Slot], Attrs<'_>) {
        (&mut self.a2, Attrs { a3: &mut self.a3 })
    }

    pub(crate) fn restore_links(&mut self, spill: LinkSpill, ctx: &IoContext) -> Result<()> {
        let mut r = ctx.open_reader(&spill.path, labels::TREE_SPILL, 0)?;
        let mut b = [0u8; 4];
        let mut word = |r: &mut crate::io::BlockReader| -> Result<u32> {
            if !r.read_exact_or_eof(&mut b)? {
                return Err(Error::format(&*spill.path, "tree spill truncated"));
            }
            Ok(u32::from_le_bytes(b))
        };
        for i in 0..self.a1.len() {
            self.a1[i] = word(&mut r)?;
        }
        for i in 0..self.a2.len() {
            let link = word(&mut r)?;
            let head = word(&mut r)?;
            self.a2[i] = Slot { link, head };
        }
        self.free_head = spill.free_head;
        Ok(())
    }

    /// Records node-at-order for `[lo, hi]`. The OF/OD words of the `lo`
    /// nodes ahead of the window hold it when the window is shorter than
    /// `2 * lo`; otherwise it goes to a temp file. Reading a reused snapshot
    /// back relies on the prefix `[0, lo)` staying in place.
    pub fn snapshot_orders(&mut self, lo: u32, hi: u32, ctx: &IoContext) -> Result<OrderSnapshot> {
        if lo > hi || hi >= self.n {
            return Err(Error::InvalidArgument(format!("bad window [{lo}, {hi}]")));
        }
        let len = u64::from(hi - lo) + 1;
        if len < 2 * u64::from(lo) {
            for i in 0..len as usize {
                let x = self.order[lo as usize + i];
                let w = self.reuse_word(i);
                self.a3[w] = x;
            }
            return Ok(OrderSnapshot {
                lo,
                hi,
                spill: None,
            });
        }
        let path = ctx.temp_file("snap-")?.into_temp_path();
        let mut w = ctx.create_writer(&path, labels::SNAPSHOT)?;
        for &x in &self.order[lo as usize..=hi as usize] {
            w.write_all(&x.to_le_bytes())?;
        }
        w.finish()?;
        Ok(OrderSnapshot {
            lo,
            hi,
            spill: Some(path),
        })
    }

    fn reuse_word(&self, i: usize) -> usize {
        let owner = self.order[i / 2] as usize;
        3 * owner + OF + (i % 2)
    }

    /// Calls `f(order, node)` for every entry of the snapshot.
    pub fn read_snapshot(
        &self,
        snap: &OrderSnapshot,
        ctx: &IoContext,
        mut f: impl FnMut(u32, u32) -> bool,
    ) -> Result<()> {
        match &snap.spill {
            None => {
                for i in 0..snap.len() as usize {
                    if !f(snap.lo + i as u32, self.a3[self.reuse_word(i)]) {
                        break;
                    }
                }
            }
            Some(path) => {
                let mut r = ctx.open_reader(path, labels::SNAPSHOT, 0)?;
                let mut b = [0u8; 4];
                for i in 0..snap.len() {
                    if !r.read_exact_or_eof(&mut b)? {
                        return Err(Error::format(&**path, "snapshot truncated"));
                    }
                    if !f(snap.lo + i as u32, u32::from_le_bytes(b)) {
                        break;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn snapshot_nodes(&self, snap: &OrderSnapshot, ctx: &IoContext) -> Result<Vec<u32>> {
        let mut v = Vec::with_capacity(snap.len() as usize);
        self.read_snapshot(snap, ctx, |_, x| {
            v.push(x);
            true
        })?;
        Ok(v)
    }

    /// First order in the snapshot window whose node moved, or `hi + 1`.
    /// With a full window this is the common prefix length of the two
    /// depth-first sequences.
    pub fn compute_c(&self, snap: &OrderSnapshot, ctx: &IoContext) -> Result<u32> {
        self.compute_c_below(snap, snap.hi + 1, ctx)
    }

    /// [`compute_c`](Self::compute_c) looking only at orders below `bound`.
    /// Feeding the result back after every step of a multi-merge pass gives
    /// the prefix that every intermediate tree shared with the snapshot.
    pub fn compute_c_below(
        &self,
        snap: &OrderSnapshot,
        bound: u32,
        ctx: &IoContext,
    ) -> Result<u32> {
        let mut c = bound.min(snap.hi + 1);
        if c <= snap.lo {
            return Ok(c);
        }
        self.read_snapshot(snap, ctx, |i, x| {
            if i >= c {
                return false;
            }
            if self.dfo(x) != i {
                c = i;
                return false;
            }
            true
        })?;
        Ok(c)
    }

    /// Smallest current dfo among nodes whose old dfo was past the snapshot
    /// window, or n if there are none. Window nodes are flagged in A1 while
    /// the orders from `lo` upward are scanned.
    pub fn compute_c_plus(&mut self, snap: &OrderSnapshot, ctx: &IoContext) -> Result<u32> {
        self.mark_window(snap, ctx, true)?;
        let mut k = snap.lo;
        while k < self.n && self.visited(self.order[k as usize]) {
            k += 1;
        }
        self.mark_window(snap, ctx, false)?;
        Ok(k)
    }

    fn mark_window(&mut self, snap: &OrderSnapshot, ctx: &IoContext, on: bool) -> Result<()> {
        let set = |a1: &mut [u32], x: u32| {
            if on {
                a1[x as usize] |= VISITED;
            } else {
                a1[x as usize] &= !VISITED;
            }
        };
        match &snap.spill {
            None => {
                for i in 0..snap.len() as usize {
                    let x = self.a3[self.reuse_word(i)];
                    set(&mut self.a1, x);
                }
            }
            Some(path) => {
                let mut r = ctx.open_reader(path, labels::SNAPSHOT, 0)?;
                let mut b = [0u8; 4];
                for _ in 0..snap.len() {
                    if !r.read_exact_or_eof(&mut b)? {
                        return Err(Error::format(&**path, "snapshot truncated"));
                    }
                    set(&mut self.a1, u32::from_le_bytes(b));
                }
            }
        }
        Ok(())
    }
}

/// The attribute words, lent out while A2 serves as a sort buffer.
pub struct Attrs<'a> {
    a3: &'a mut [u32],
}

impl Attrs<'_> {
    pub fn dfo(&self, v: u32) -> u32 {
        self.a3[3 * v as usize + DFO]
    }

    pub fn set_directory(&mut self, v: u32, of: u32, od: u32) {
        self.a3[3 * v as usize + OF] = of;
        self.a3[3 * v as usize + OD] = od;
    }

    pub fn clear_directory(&mut self) {
        for v in 0..self.a3.len() / 3 {
            self.a3[3 * v + OF] = NO_OFFSET;
            self.a3[3 * v + OD] = 0;
        }
    }
}

pub(crate) struct LinkSpill {
    path: TempPath,
    free_head: u32,
}

/// Node-at-order for a window of depth-first orders.
#[derive(Debug)]
pub struct OrderSnapshot {
    pub lo: u32,
    pub hi: u32,
    spill: Option<TempPath>,
}

impl OrderSnapshot {
    pub fn len(&self) -> u64 {
        u64::from(self.hi - self.lo) + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spill_path(&self) -> Option<&Path> {
        self.spill.as_deref()
    }
}
