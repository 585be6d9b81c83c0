use super::*;
use rand::RngExt;
use sedfs::verify::{chain_reaction_audit, classify_edge, EdgeClass, TreeView};

pub fn single_forward_cross_merges_follow_the_transition_rules() {
    let mut audited = 0u64;
    let mut cascades = 0u64;
    for seed in 0..500u64 {
        let mut r = rng(seed);
        let n = r.random_range(2..=64u32);
        let tree = random_tree(n, &mut r);
        let extra = r.random_range(0..=3 * n as usize);
        let edges = graph_over_tree(&tree, extra, &mut r);
        let view = TreeView::new(&tree);
        for &e in &edges {
            if classify_edge(&view, e) != EdgeClass::ForwardCross {
                assert!(chain_reaction_audit(&tree, &edges, e).is_none());
                continue;
            }
            let rec = chain_reaction_audit(&tree, &edges, e).unwrap();
            assert!(
                rec.is_clean(),
                "seed {seed}, edge {e:?}: {:?} {:?}",
                rec.forbidden,
                rec.lemma_failures
            );
            audited += 1;
            cascades += u64::from(rec.changed.len() > 1);
        }
    }
    assert!(audited >= 500, "only {audited} merges audited");
    assert!(cascades > 0);
}
