use super::*;
use rand::seq::SliceRandom;
use rand::RngExt;
use sedfs::graph::EdgeRecord;
use sedfs::index::{build_index, decode_all, keeps, load_sequentially, rewrite_index, scan_index};
use sedfs::{MemoryGraph, TreeStore};

fn filtered(edges: &[EdgeRecord], t: &TreeStore, fnn: u32) -> Vec<EdgeRecord> {
    let mut v: Vec<EdgeRecord> = edges
        .iter()
        .copied()
        .filter(|e| keeps(t.dfo(e.tail), t.dfo(e.head), fnn))
        .collect();
    v.sort();
    v
}

fn sorted(mut v: Vec<EdgeRecord>) -> Vec<EdgeRecord> {
    v.sort();
    v
}

pub fn decode_equals_filtered_edges_under_advancing_fnn() {
    for seed in 0..100u64 {
        let mut r = rng(seed);
        let n = r.random_range(2..=10_000u32);
        let m = r.random_range(0..=8 * n as usize);
        let edges = random_edges(n, m, &mut r);
        let g = MemoryGraph {
            n,
            root: 0,
            edges: edges.clone(),
        };
        let mut t = random_tree(n, &mut r).to_store().unwrap();
        let (_d, ctx) = ctx();
        let mut fnn = r.random_range(0..n);
        let mut index = build_index(&g, &mut t, fnn, &ctx).unwrap();
        let mut want = filtered(&edges, &t, fnn);
        assert_eq!(
            sorted(decode_all(&index, &ctx).unwrap()),
            want,
            "seed {seed}"
        );
        assert_eq!(index.edge_count(), want.len() as u64);
        assert!(index.bytes() <= 8 * index.edge_count() + 64);

        for _ in 0..3 {
            if fnn + 1 >= n {
                break;
            }
            // Reshape the part of the tree past fnn, then move fnn up.
            let batch: Vec<EdgeRecord> = random_edges(n, n as usize / 2, &mut r)
                .into_iter()
                .filter(|e| t.dfo(e.tail) >= fnn && t.dfo(e.head) > fnn)
                .collect();
            t.load_batch(&batch).unwrap();
            t.merge_batch();
            fnn = r.random_range(fnn + 1..n);
            index = rewrite_index(index, &mut t, fnn, &ctx).unwrap();
            want = sorted(
                want.into_iter()
                    .filter(|e| keeps(t.dfo(e.tail), t.dfo(e.head), fnn))
                    .collect(),
            );
            assert_eq!(
                sorted(decode_all(&index, &ctx).unwrap()),
                want,
                "seed {seed} fnn {fnn}"
            );
        }
    }
}

pub fn directory_loads_match_scan_without_backward_seeks() {
    for seed in 0..40u64 {
        let mut r = rng(1000 + seed);
        let n = r.random_range(2..=3000u32);
        let edges = random_edges(n, 6 * n as usize, &mut r);
        let g = MemoryGraph {
            n,
            root: 0,
            edges: edges.clone(),
        };
        let mut t = random_tree(n, &mut r).to_store().unwrap();
        let (_d, ctx) = ctx();
        let fnn = r.random_range(0..n);
        let index = build_index(&g, &mut t, fnn, &ctx).unwrap();
        let scanned: Vec<EdgeRecord> = scan_index(&index, &ctx)
            .unwrap()
            .map(|e| e.unwrap())
            .collect();

        let mut offsets: Vec<u32> = (0..n)
            .filter(|&v| t.degree(v) > 0)
            .map(|v| t.offset(v))
            .collect();
        offsets.retain(|_| r.random_range(0..3) > 0);
        offsets.shuffle(&mut r);
        let mut got = Vec::new();
        let before = ctx.counters.file(sedfs::io::labels::INDEX).backward_seeks;
        load_sequentially(&index, &mut offsets, &ctx, |e| {
            got.push(e);
            Ok(())
        })
        .unwrap();
        assert_eq!(
            ctx.counters.file(sedfs::io::labels::INDEX).backward_seeks,
            before
        );
        let picked: std::collections::HashSet<u32> = got.iter().map(|e| e.tail).collect();
        let want: Vec<EdgeRecord> = scanned
            .iter()
            .copied()
            .filter(|e| picked.contains(&e.tail))
            .collect();
        assert_eq!(sorted(got), sorted(want));
    }
}
