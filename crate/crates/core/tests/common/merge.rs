use super::*;
use rand::RngExt;
use sedfs::verify::{inmem_dfs_oracle, BatchOrder, OrderedTree};

/// Random (tree, batch) pairs merged by the store and by the oracle.
/// Returns how many were compared; panics on the first mismatch.
pub fn store_matches_oracle(instances: u64, max_n: u32) -> u64 {
    for seed in 0..instances {
        let mut r = rng(0x6d65_7267_0000_0000 ^ seed);
        let n = r.random_range(1..=max_n);
        let tree = random_tree(n, &mut r);
        let k = r.random_range(0..=n as usize + 1);
        let batch = if n > 1 {
            random_edges(n, k, &mut r)
        } else {
            Vec::new()
        };
        let (want, order) = inmem_dfs_oracle(&tree, &batch, BatchOrder::LoadOrder);
        let mut store = tree.to_store().unwrap();
        store.load_batch(&batch).unwrap();
        store.merge_batch();
        assert_eq!(
            store.slot_counts().total(),
            2 * u64::from(n),
            "seed {seed}: slots"
        );
        assert_eq!(OrderedTree::from_store(&store), want, "seed {seed}: shape");
        assert_eq!(store.order(), &order[..], "seed {seed}: order");
    }
    instances
}
