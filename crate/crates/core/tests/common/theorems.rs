//! FNN bounds checked against brute-force Υ on small graphs.

use super::*;
use rand::RngExt;
use sedfs::driver::{Event, Observer, StallRule};
use sedfs::graph::EdgeRecord;
use sedfs::verify::{inmem_dfs_oracle, upsilon_at_least, BatchOrder, OrderedTree, TreeView};
use sedfs::{run_algorithm, Algorithm, Error, MemoryGraph, RunConfig, TreeStore};

const INSTANCES: u64 = 1000;

/// Checks Υ(T) >= FNN on the events it is told to watch.
struct Shadow<'a> {
    edges: &'a [EdgeRecord],
    initial: u64,
    merged: u64,
    rounds: u64,
    ends: u64,
    last_fnn: u32,
    violations: Vec<String>,
}

impl<'a> Shadow<'a> {
    fn new(edges: &'a [EdgeRecord]) -> Self {
        Shadow {
            edges,
            initial: 0,
            merged: 0,
            rounds: 0,
            ends: 0,
            last_fnn: 0,
            violations: Vec::new(),
        }
    }

    fn check(&mut self, tree: &TreeStore, fnn: u32, what: &str) {
        let u = upsilon_store(self.edges, tree);
        if !upsilon_at_least(u, fnn) {
            self.violations
                .push(format!("{what}: upsilon {u:?} < fnn {fnn}"));
        }
    }
}

impl Observer for Shadow<'_> {
    fn on_event(&mut self, tree: &TreeStore, event: &Event) {
        match *event {
            Event::InitialRound { fnn } => {
                self.initial += 1;
                self.last_fnn = fnn;
                self.check(tree, fnn, "initial round");
            }
            Event::Merged { before, fnn, .. } => {
                self.merged += 1;
                if fnn <= before {
                    self.violations
                        .push(format!("fnn did not grow: {before} -> {fnn}"));
                }
                self.check(tree, fnn, "merge");
            }
            Event::Round { before, fnn, .. } => {
                self.rounds += 1;
                if fnn < before {
                    self.violations
                        .push(format!("round lowered fnn: {before} -> {fnn}"));
                }
                self.check(tree, fnn, "round");
            }
            Event::IterationEnd { fnn } => {
                self.ends += 1;
                if fnn <= self.last_fnn {
                    self.violations.push(format!(
                        "iteration did not advance: {} -> {fnn}",
                        self.last_fnn
                    ));
                }
                self.last_fnn = fnn;
                self.check(tree, fnn, "iteration end");
            }
            _ => {}
        }
    }
}

/// Naive batches over random windows, chained from the star.
pub fn naive_batch_update_is_sound() {
    let mut checked = 0u64;
    let mut seed = 0u64;
    while checked < INSTANCES {
        seed += 1;
        let mut r = rng(seed);
        let n = r.random_range(2..=200u32);
        let extra = r.random_range(0..=4 * n as usize);
        let g = rooted_graph(n, extra, &mut r);
        let mut tree = OrderedTree::star(n, 0);
        let mut fnn = 1u32;
        let mut steps = 0;
        while fnn < n {
            let view = TreeView::new(&tree);
            let before_u = upsilon(&g.edges, &view);
            assert!(upsilon_at_least(before_u, fnn), "seed {seed}: precondition");
            let max = if steps > 2 * n {
                n - 1
            } else {
                r.random_range(fnn..n)
            };
            let batch: Vec<EdgeRecord> = g
                .edges
                .iter()
                .copied()
                .filter(|e| {
                    let (a, b) = (view.dfo[e.tail as usize], view.dfo[e.head as usize]);
                    a.max(b) >= fnn && a.min(b) <= max
                })
                .collect();
            let (next, order) = inmem_dfs_oracle(&tree, &batch, BatchOrder::LoadOrder);
            let c = common_prefix(&tree.preorder(), &order);
            assert!(
                before_u.is_none_or(|u| c >= u.min(n)),
                "seed {seed}: prefix {c} below upsilon {before_u:?}"
            );
            let bound = c.min(max + 1);
            let after_u = upsilon(&g.edges, &TreeView::new(&next));
            assert!(
                upsilon_at_least(after_u, bound),
                "seed {seed}: upsilon {after_u:?} < {bound}"
            );
            checked += 1;
            fnn = fnn.max(bound);
            tree = next;
            steps += 1;
        }
        assert!(
            upsilon(&g.edges, &TreeView::new(&tree)).is_none(),
            "seed {seed}: not a DFS tree"
        );
    }
}

/// The library's naive driver, on sparse graphs where its batches fit.
pub fn naive_driver_bounds_hold() {
    let mut merged = 0u64;
    let mut finished = 0u64;
    for seed in 0..4000u64 {
        if merged >= INSTANCES && finished >= 50 {
            break;
        }
        let mut r = rng(seed);
        let n = r.random_range(8..=200u32);
        let g = sparse_real_root(n, &mut r);
        let (_d, ctx) = ctx();
        let mut obs = Shadow::new(&g.edges);
        let cfg = RunConfig::with_algorithm(Algorithm::Naive);
        match run_algorithm(&g, &cfg, &ctx, &mut obs, None) {
            Ok(out) => {
                finished += 1;
                assert!(upsilon(
                    &g.edges,
                    &TreeView::from_order_and_parents(&out.order, &out.parents)
                )
                .is_none());
            }
            Err(e) => assert!(
                matches!(e.error, Error::BatchOverflow { .. }),
                "seed {seed}: {}",
                e.error
            ),
        }
        assert!(
            obs.violations.is_empty(),
            "seed {seed}: {:?}",
            obs.violations
        );
        merged += obs.merged;
    }
    assert!(merged >= INSTANCES, "only {merged} merges checked");
    assert!(finished >= 50, "only {finished} naive runs finished");
}

/// Root 0 reaches everything through a random tree; few extra edges.
fn sparse_real_root(n: u32, r: &mut rand_chacha::ChaCha8Rng) -> MemoryGraph {
    let t = random_tree(n, r);
    let extra = r.random_range(0..=n as usize / 2);
    MemoryGraph {
        n,
        root: 0,
        edges: graph_over_tree(&t, extra, r),
    }
}

fn ep_config(
    n: u32,
    g: &MemoryGraph,
    r: &mut rand_chacha::ChaCha8Rng,
    force_rounds: bool,
) -> RunConfig {
    let mut cfg = RunConfig::with_algorithm(Algorithm::Ep);
    let lo = max_degree_off_root(g).max(1);
    if lo <= n + 1 {
        cfg.budget_edges = Some(r.random_range(lo..=n + 1));
    }
    if force_rounds {
        cfg.stall = StallRule::Fixed(n);
        cfg.gamma = r.random_range(0.01..=1.0);
    }
    cfg.rearrange_chunk = r.random_range(1..=8);
    cfg
}

fn ep_suite(force_rounds: bool, need: impl Fn(&Shadow) -> u64) -> (u64, u64) {
    let mut count = 0u64;
    let mut runs = 0u64;
    let mut seed = if force_rounds { 1 << 32 } else { 0 };
    while count < INSTANCES {
        seed += 1;
        let mut r = rng(seed);
        let n = r.random_range(4..=200u32);
        let extra = r.random_range(n as usize..=6 * n as usize);
        let g = rooted_graph(n, extra, &mut r);
        let cfg = ep_config(n, &g, &mut r, force_rounds);
        let (_d, ctx) = ctx();
        let mut obs = Shadow::new(&g.edges);
        let out = run_algorithm(&g, &cfg, &ctx, &mut obs, None)
            .unwrap_or_else(|e| panic!("seed {seed}: {}", e.error));
        assert!(
            obs.violations.is_empty(),
            "seed {seed}: {:?}",
            obs.violations
        );
        assert_eq!(obs.initial, 1);
        assert!(u64::from(out.stats.iterations) <= u64::from(n));
        assert!(upsilon(
            &g.edges,
            &TreeView::from_order_and_parents(&out.order, &out.parents)
        )
        .is_none());
        count += need(&obs);
        runs += 1;
    }
    (count, runs)
}

pub fn initial_round_bound_holds() {
    let (count, _) = ep_suite(false, |o| o.initial);
    assert!(count >= INSTANCES);
}

pub fn every_merge_respects_the_bound() {
    let (count, _) = ep_suite(false, |o| o.merged);
    assert!(count >= INSTANCES);
}

pub fn every_round_respects_the_bound() {
    let (count, _) = ep_suite(true, |o| o.rounds);
    assert!(count >= INSTANCES);
}

/// Across iterations the frozen prefix never moves.
pub fn frozen_prefix_is_stable() {
    struct Prefix {
        prev: Option<(Vec<u32>, u32)>,
        checked: u64,
    }
    impl Observer for Prefix {
        fn on_event(&mut self, tree: &TreeStore, event: &Event) {
            let fnn = match *event {
                Event::InitialRound { fnn } | Event::IterationEnd { fnn } => fnn,
                _ => return,
            };
            let order = tree.order().to_vec();
            if let Some((old, old_fnn)) = &self.prev {
                let k = (*old_fnn).min(tree.n()) as usize;
                assert_eq!(&old[..k], &order[..k]);
                self.checked += 1;
            }
            self.prev = Some((order, fnn));
        }
    }
    let mut checked = 0;
    for seed in 0..300u64 {
        let mut r = rng(seed);
        let n = r.random_range(50..=2000u32);
        let g = rooted_graph(n, 5 * n as usize, &mut r);
        let cfg = ep_config(n, &g, &mut r, seed % 2 == 0);
        let (_d, ctx) = ctx();
        let mut obs = Prefix {
            prev: None,
            checked: 0,
        };
        run_algorithm(&g, &cfg, &ctx, &mut obs, None).unwrap();
        checked += obs.checked;
    }
    assert!(checked > 300);
}
