//! Heavier subtrees first: reorders children by subtree weight.
//!
//! Weights live in A2 as a synthetic rightmost entry per node whose head
//! field holds the weight, so the sweep needs no side array.

use std::cmp::Reverse;

use crate::error::{Error, Result};
use crate::tree::{Slot, TreeStore, NIL};

/// Weight, position and chain slot of one child.
type ChildKey = (u32, u32, u32);

/// Children sorted together at most.
pub const REARRANGE_CHUNK: usize = 10_000;

impl TreeStore {
    /// Reorders the children of every node with dfo >= `fnn` so that subtree
    /// weights do not increase from left to right within each chunk of
    /// [`REARRANGE_CHUNK`] children, then renumbers.
    pub fn rearrange(&mut self, fnn: u32) -> Result<()> {
        self.rearrange_with_chunk(fnn, REARRANGE_CHUNK)
    }

    pub fn rearrange_with_chunk(&mut self, fnn: u32, chunk: usize) -> Result<()> {
        if fnn >= self.n || self.n == 1 {
            return Ok(());
        }
        let mut scratch = Vec::new();
        self.sweep_weights(fnn, Some((chunk.max(1), &mut scratch)))?;
        self.drop_weights(fnn);
        self.renumber();
        Ok(())
    }

    /// Subtree size of every node, indexed by node id.
    pub fn subtree_weights(&mut self) -> Result<Vec<u32>> {
        self.sweep_weights(0, None)?;
        let w = (0..self.n)
            .map(|v| self.a2[(self.a1[v as usize]) as usize].head)
            .collect();
        self.drop_weights(0);
        Ok(w)
    }

    /// Visits orders `n-1` down to `fnn`, reordering children when asked,
    /// and leaves a weight entry on top of each visited node's chain.
    fn sweep_weights(
        &mut self,
        fnn: u32,
        mut sort: Option<(usize, &mut Vec<ChildKey>)>,
    ) -> Result<()> {
        debug_assert_eq!(self.counts.batch, 0, "rearrange with a batch resident");
        let needed = self.n - fnn;
        if self.counts.free < needed {
            return Err(Error::Budget(format!(
                "{needed} weight entries, {} free slots",
                self.counts.free
            )));
        }
        for i in (fnn..self.n).rev() {
            let u = self.order[i as usize];
            let mut w = 1u32;
            let mut s = self.a1[u as usize];
            while s != NIL {
                let c = self.a2[s as usize].head;
                w += self.a2[self.a1[c as usize] as usize].head;
                s = self.a2[s as usize].link;
            }
            if let Some((chunk, scratch)) = sort.as_mut() {
                self.sort_children(u, *chunk, scratch);
            }
            let top = self.alloc()?;
            self.a2[top as usize] = Slot {
                link: self.a1[u as usize],
                head: w,
            };
            self.a1[u as usize] = top;
            self.counts.stack += 1;
        }
        Ok(())
    }

    fn drop_weights(&mut self, fnn: u32) {
        for i in fnn..self.n {
            let u = self.order[i as usize];
            let s = self.a1[u as usize];
            self.a1[u as usize] = self.a2[s as usize].link;
            self.release(s);
            self.counts.stack -= 1;
        }
    }

    fn weight(&self, child: u32) -> u32 {
        self.a2[self.a1[child as usize] as usize].head
    }

    /// Chunked descending-weight sort of `u`'s chain, leftmost chunk first.
    /// Ties keep their previous relative order.
    fn sort_children(&mut self, u: u32, chunk: usize, scratch: &mut Vec<ChildKey>) {
        let first = self.a1[u as usize];
        if first == NIL || self.a2[first as usize].link == NIL {
            return;
        }
        // Flip the chain so it runs left to right.
        let leftmost = self.reverse_chain(first);
        let mut s = leftmost;
        let mut head = NIL;
        let mut last = NIL;
        while s != NIL {
            scratch.clear();
            while s != NIL && scratch.len() < chunk {
                let c = self.a2[s as usize].head;
                scratch.push((self.weight(c), scratch.len() as u32, s));
                s = self.a2[s as usize].link;
            }
            scratch.sort_unstable_by_key(|&(w, pos, _)| (Reverse(w), pos));
            for &(_, _, slot) in scratch.iter() {
                if last == NIL {
                    head = slot;
                } else {
                    self.a2[last as usize].link = slot;
                }
                last = slot;
            }
            self.a2[last as usize].link = s;
        }
        self.a1[u as usize] = self.reverse_chain(head);
    }

    /// Reverses a linked list of slots, returning the new first slot.
    fn reverse_chain(&mut self, mut s: u32) -> u32 {
        let mut prev = NIL;
        while s != NIL {
            let next = self.a2[s as usize].link;
            self.a2[s as usize].link = prev;
            prev = s;
            s = next;
        }
        prev
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(k: u32) -> TreeStore {
        let children: Vec<Vec<u32>> = (0..k)
            .map(|v| if v + 1 < k { vec![v + 1] } else { vec![] })
            .collect();
        TreeStore::from_children(0, &children).unwrap()
    }

    #[test]
    fn single_node_noop() {
        let mut t = TreeStore::star(1, 0).unwrap();
        t.rearrange(0).unwrap();
        assert_eq!(t.order(), &[0]);
    }

    #[test]
    fn star_weights() {
        let mut t = TreeStore::star(10, 0).unwrap();
        let w = t.subtree_weights().unwrap();
        assert_eq!(w[0], 10);
        assert!(w[1..].iter().all(|&x| x == 1));
        t.check_invariants().unwrap();
    }

    #[test]
    fn path_weights() {
        let mut t = path(6);
        assert_eq!(t.subtree_weights().unwrap(), vec![6, 5, 4, 3, 2, 1]);
    }

    #[test]
    fn heavy_child_moves_left_and_prefix_kept() {
        // 0 -> [1, 2, 3], 3 -> [4, 5]; 1 -> [6], 6 -> [7, 8]
        let children = vec![
            vec![1, 2, 3],
            vec![6],
            vec![],
            vec![4, 5],
            vec![],
            vec![],
            vec![7, 8],
            vec![],
            vec![],
        ];
        let mut t = TreeStore::from_children(0, &children).unwrap();
        t.rearrange(1).unwrap();
        assert_eq!(t.children(0), vec![1, 2, 3]);
        t.rearrange(0).unwrap();
        assert_eq!(t.children(0), vec![1, 3, 2]);
        t.check_invariants().unwrap();
        assert_eq!(t.slot_counts().free, 10);
    }

    #[test]
    fn chunks_sort_independently() {
        // root 0 with children 1..=7; child k gets k-1 leaf children of its own
        // in reverse so weights ascend left to right.
        let mut children = vec![Vec::new(); 8];
        let mut next = 8u32;
        let mut extra = Vec::new();
        for c in 1..=7u32 {
            children[0].push(c);
            for _ in 0..(c - 1) {
                children[c as usize].push(next);
                extra.push(next);
                next += 1;
            }
        }
        children.resize(next as usize, Vec::new());
        let mut t = TreeStore::from_children(0, &children).unwrap();
        t.rearrange_with_chunk(0, 3).unwrap();
        assert_eq!(t.children(0), vec![3, 2, 1, 6, 5, 4, 7]);
        t.check_invariants().unwrap();
    }
}
