use sedfs::batch::{obtain_edges, scan_batch_b};
use sedfs::driver::initial_round;
use sedfs::graph::EdgeRecord;
use sedfs::index::{build_index, decode_all};
use sedfs::verify::fixture::{self, *};
use sedfs::verify::{
    classify_edge, compute_upsilon, inmem_dfs_oracle, is_dfs_tree, BatchOrder, EdgeClass,
    OrderedTree, TreeView,
};
use sedfs::{run_algorithm, Algorithm, IoContext, RunConfig, TreeStore};

fn ctx() -> (tempfile::TempDir, IoContext) {
    let d = tempfile::tempdir().unwrap();
    let c = IoContext::new(d.path());
    (d, c)
}

fn merged(batch: &[EdgeRecord]) -> OrderedTree {
    inmem_dfs_oracle(&fixture::t0(), batch, BatchOrder::LoadOrder).0
}

fn store_merged(batch: &[EdgeRecord]) -> TreeStore {
    let mut t = fixture::t0_store();
    t.load_batch(batch).unwrap();
    t.merge_batch();
    t
}

fn t1() -> OrderedTree {
    merged(&[E2])
}

/// The batch of the naive first iteration from FNN 1.
fn example_batch() -> Vec<EdgeRecord> {
    [
        (R, A),
        (R, B),
        (R, C),
        (A, D),
        (D, P),
        (P, F),
        (B, F),
        (B, G),
        (B, C),
    ]
    .into_iter()
    .map(EdgeRecord::from)
    .collect()
}

fn t2() -> OrderedTree {
    merged(&example_batch())
}

fn t3() -> OrderedTree {
    merged(&[E1, E2, E3])
}

fn upsilon(t: &OrderedTree) -> Option<u32> {
    compute_upsilon(fixture::edges().into_iter().map(Ok), &TreeView::new(t)).unwrap()
}

fn common_prefix(a: &[u32], b: &[u32]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

pub fn merging_e2_puts_c_at_seven() {
    let (_, order) = inmem_dfs_oracle(&fixture::t0(), &[E2], BatchOrder::LoadOrder);
    assert_eq!(order, fixture::nodes("r,a,d,p,b,f,g,c,h,q"));
    assert_eq!(TreeView::new(&t1()).dfo[C as usize], 7);
    assert_eq!(store_merged(&[E2]).dfo(C), 7);
}

pub fn common_prefixes() {
    let t0 = fixture::t0().preorder();
    assert_eq!(common_prefix(&t0, &t1().preorder()), 10);
    assert_eq!(common_prefix(&t0, &t2().preorder()), 4);
}

pub fn upsilon_values() {
    assert_eq!(upsilon(&fixture::t0()), Some(3));
    assert_eq!(upsilon(&t1()), Some(3));
    assert_eq!(upsilon(&t2()), Some(6));
    assert_eq!(upsilon(&t3()), None);
}

pub fn t3_order_and_validity() {
    assert_eq!(t3().preorder(), fixture::nodes("r,a,d,p,f,b,g,q,c,h"));
    let edges = || fixture::edges().into_iter().map(Ok);
    assert!(is_dfs_tree(edges(), &TreeView::new(&t3()))
        .unwrap()
        .is_valid());
    let bad = is_dfs_tree(edges(), &TreeView::new(&fixture::t0())).unwrap();
    let (_, e) = bad.offender.unwrap();
    assert_eq!(TreeView::new(&fixture::t0()).dfo[e.tail as usize], 3);
}

pub fn classification_examples() {
    let v0 = TreeView::new(&fixture::t0());
    assert_eq!(classify_edge(&v0, EdgeRecord::new(A, D)), EdgeClass::Tree);
    assert_eq!(classify_edge(&v0, E1), EdgeClass::ForwardCross);
    let v2 = TreeView::new(&t2());
    assert_eq!(classify_edge(&v2, E3), EdgeClass::ForwardCross);
    assert_eq!(v2.dfo[G as usize], 6);
}

pub fn naive_first_iteration() {
    let (_d, ctx) = ctx();
    let mut t = fixture::t0_store();
    let b = scan_batch_b(&fixture::graph(), &mut t, 1, 9, &ctx).unwrap();
    assert_eq!(b.max_order, 5);
    assert_eq!(b.edges, 9);
    let mut loaded: Vec<EdgeRecord> = (0..10)
        .flat_map(|u| t.chain(u).into_iter().map(move |v| (u, v)))
        .map(EdgeRecord::from)
        .collect();
    let mut want: Vec<EdgeRecord> = fixture::t0_children()
        .iter()
        .enumerate()
        .flat_map(|(u, k)| k.iter().map(move |&v| EdgeRecord::new(u as u32, v)))
        .chain(example_batch())
        .collect();
    loaded.sort();
    want.sort();
    assert_eq!(loaded, want);
    let snap = t.snapshot_orders(1, 5, &ctx).unwrap();
    t.merge_batch();
    assert_eq!(t.order(), &t2().preorder()[..]);
    assert_eq!(t.compute_c(&snap, &ctx).unwrap(), 4);
}

pub fn c_plus_with_fnn_zero() {
    let (_d, ctx) = ctx();
    let mut t = fixture::t0_store();
    t.load_batch(&example_batch()).unwrap();
    let snap = t.snapshot_orders(0, 5, &ctx).unwrap();
    t.merge_batch();
    assert_eq!(t.compute_c_plus(&snap, &ctx).unwrap(), 6);
}

pub fn batch_from_index_at_six() {
    let (_d, ctx) = ctx();
    let mut t = t2().to_store().unwrap();
    let index = build_index(&fixture::graph(), &mut t, 6, &ctx).unwrap();
    let b = obtain_edges(&index, &mut t, 6, 2, &ctx).unwrap();
    assert_eq!(b.max_order, 7);
    let mut got: Vec<EdgeRecord> = Vec::new();
    for u in 0..10 {
        let kids = t.children(u);
        let tree_kids = t2().children[u as usize].clone();
        got.extend(
            kids[tree_kids.len()..]
                .iter()
                .map(|&v| EdgeRecord::new(u, v)),
        );
    }
    got.sort();
    assert_eq!(got, vec![EdgeRecord::new(C, H), E3]);
    assert!(decode_all(&index, &ctx)
        .unwrap()
        .contains(&EdgeRecord::new(H, Q)));
}

pub fn initial_round_resolves_fixture() {
    let (_d, ctx) = ctx();
    let mut t = TreeStore::star(10, R).unwrap();
    assert_eq!(
        initial_round(&fixture::graph(), &mut t, 10, &ctx).unwrap(),
        10
    );
}

pub fn ep_run_reaches_t3() {
    let (_d, ctx) = ctx();
    let out = run_algorithm(
        &fixture::graph(),
        &RunConfig::default(),
        &ctx,
        &mut (),
        None,
    )
    .unwrap();
    let view = TreeView::from_order_and_parents(&out.order, &out.parents);
    assert!(is_dfs_tree(fixture::edges().into_iter().map(Ok), &view)
        .unwrap()
        .is_valid());
    assert_eq!(out.stats.algorithm, Algorithm::Ep);
}

type Chain = Vec<(u32, Option<u32>, Option<u32>)>;

fn slots(t: &TreeStore, ids: &[u32]) -> Chain {
    ids.iter().map(|&s| (s, t.slot(s).0, t.slot(s).1)).collect()
}

fn free_list(t: &TreeStore) -> Vec<u32> {
    let mut out = Vec::new();
    let mut s = t.free_head();
    while let Some(x) = s {
        out.push(x);
        s = t.slot(x).0;
    }
    out
}

fn a1(t: &TreeStore) -> Vec<Option<u32>> {
    (0..10).map(|v| t.rightmost_slot(v)).collect()
}

pub fn table_forms_two_to_four() {
    let mut t = fixture::t0_store();
    // (2): T0 alone.
    assert_eq!(
        a1(&t),
        vec![
            Some(17),
            Some(16),
            Some(14),
            Some(13),
            Some(12),
            None,
            None,
            Some(11),
            None,
            None
        ]
    );
    assert_eq!(free_list(&t), (0..=10).rev().collect::<Vec<_>>());
    assert_eq!(
        slots(&t, &[11, 12, 13, 14, 15, 16, 17, 18, 19]),
        vec![
            (11, None, Some(Q)),
            (12, None, Some(P)),
            (13, None, Some(H)),
            (14, Some(15), Some(G)),
            (15, None, Some(F)),
            (16, None, Some(D)),
            (17, Some(18), Some(C)),
            (18, Some(19), Some(B)),
            (19, None, Some(A)),
        ]
    );
    // (3): e1, e2, e3 loaded.
    t.load_batch(&[E1, E2, E3]).unwrap();
    assert_eq!(t.rightmost_slot(B), Some(9));
    assert_eq!(t.rightmost_slot(G), Some(8));
    assert_eq!(t.rightmost_slot(P), Some(10));
    assert_eq!(t.free_head(), Some(7));
    assert_eq!(
        slots(&t, &[8, 9, 10]),
        vec![
            (8, None, Some(Q)),
            (9, Some(14), Some(C)),
            (10, None, Some(F))
        ]
    );
    // (4): merged into T3.
    t.merge_batch();
    assert_eq!(
        a1(&t),
        vec![
            Some(18),
            Some(16),
            Some(9),
            Some(13),
            Some(12),
            None,
            Some(8),
            None,
            Some(10),
            None
        ]
    );
    assert_eq!(free_list(&t)[..4], [17, 11, 15, 7]);
    assert_eq!(free_list(&t)[4..], (0..=6).rev().collect::<Vec<_>>()[..]);
    assert_eq!(
        slots(&t, &[8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19]),
        vec![
            (8, None, Some(Q)),
            (9, Some(14), Some(C)),
            (10, None, Some(F)),
            (11, Some(15), None),
            (12, None, Some(P)),
            (13, None, Some(H)),
            (14, None, Some(G)),
            (15, Some(7), None),
            (16, None, Some(D)),
            (17, Some(11), None),
            (18, Some(19), Some(B)),
            (19, None, Some(A)),
        ]
    );
    assert_eq!(t.order(), &t3().preorder()[..]);
    t.check_invariants().unwrap();
}

pub fn all() {
    merging_e2_puts_c_at_seven();
    common_prefixes();
    upsilon_values();
    t3_order_and_validity();
    classification_examples();
    naive_first_iteration();
    c_plus_with_fnn_zero();
    batch_from_index_at_six();
    initial_round_resolves_fixture();
    ep_run_reaches_t3();
    table_forms_two_to_four();
}
