//! Synthetic graphs: uniform random (ER) and scale-free (SF) edge lists,
//! written in generation order.

use std::collections::HashSet;
use std::path::Path;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempPath;

use crate::error::{Error, Result};
use crate::extsort::{merge_runs, write_run, ExternalSorter, Keyed, RecordIter};
use crate::graph::format::{EdgeListWriter, EdgeRecord, FileSummary, StorageOrder};
use crate::io::{labels, IoContext};

/// Memory limits for the generators, in records.
#[derive(Clone, Copy, Debug)]
pub struct GenLimits {
    /// Largest `m` sampled through an in-memory hash set.
    pub hash_budget: u64,
    /// Records per sorted run on the external paths.
    pub sort_budget: usize,
}

impl Default for GenLimits {
    fn default() -> Self {
        GenLimits {
            hash_budget: 1 << 24,
            sort_budget: 1 << 22,
        }
    }
}

fn key(e: EdgeRecord) -> u64 {
    (u64::from(e.tail) << 32) | u64::from(e.head)
}

fn unkey(k: u64) -> EdgeRecord {
    EdgeRecord::new((k >> 32) as u32, k as u32)
}

fn draw(rng: &mut ChaCha8Rng, n: u32) -> Option<EdgeRecord> {
    let u = rng.random_range(0..n);
    let v = rng.random_range(0..n);
    (u != v).then_some(EdgeRecord::new(u, v))
}

pub fn generate_er(path: &Path, n: u64, m: u64, seed: u64, ctx: &IoContext) -> Result<FileSummary> {
    generate_er_with(path, n, m, seed, GenLimits::default(), ctx)
}

/// `m` distinct directed non-loop edges sampled uniformly. The in-memory and
/// external paths consume the same random stream and emit identical files.
pub fn generate_er_with(
    path: &Path,
    n: u64,
    m: u64,
    seed: u64,
    limits: GenLimits,
    ctx: &IoContext,
) -> Result<FileSummary> {
    if n < 2 {
        return Err(Error::InvalidArgument("ER generation needs n >= 2".into()));
    }
    let pairs = n
        .checked_mul(n - 1)
        .ok_or_else(|| Error::InvalidArgument("n too large".into()))?;
    if m > pairs {
        return Err(Error::InvalidArgument(format!(
            "infeasible: m={m} exceeds n(n-1)={pairs}"
        )));
    }
    let mut out = EdgeListWriter::create(path, n, StorageOrder::RandomList, None, ctx)?;
    let n32 = n as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    if 2 * m > pairs && pairs <= limits.hash_budget {
        // Dense: shuffle the full pair list.
        let mut all: Vec<EdgeRecord> = (0..n32)
            .flat_map(|u| {
                (0..n32)
                    .filter(move |&v| v != u)
                    .map(move |v| EdgeRecord::new(u, v))
            })
            .collect();
        for i in 0..m as usize {
            let j = rng.random_range(i..all.len());
            all.swap(i, j);
            out.push(all[i])?;
        }
    } else if m <= limits.hash_budget {
        let mut seen = HashSet::with_capacity(m as usize);
        while out.count() < m {
            if let Some(e) = draw(&mut rng, n32) {
                if seen.insert(key(e)) {
                    out.push(e)?;
                }
            }
        }
    } else {
        let kept = sample_external(&mut rng, n32, m, limits, ctx)?;
        for e in kept {
            out.push(e?)?;
        }
    }
    out.finish()
}

/// Draws in rounds until `m` distinct pairs exist, deduplicating on disk,
/// then yields the first `m` distinct pairs in draw order.
fn sample_external(
    rng: &mut ChaCha8Rng,
    n: u32,
    m: u64,
    limits: GenLimits,
    ctx: &IoContext,
) -> Result<impl Iterator<Item = Result<EdgeRecord>>> {
    let mut seq = 0u64;
    let mut unique: Option<TempPath> = None;
    let mut distinct = 0u64;
    while distinct < m {
        let want = m - distinct;
        let batch = want + want / 8 + 16;
        let mut sorter = ExternalSorter::<Keyed>::new(limits.sort_budget, ctx, labels::POOL);
        let mut drawn = 0;
        while drawn < batch {
            if let Some(e) = draw(rng, n) {
                sorter.push(Keyed { key: key(e), seq })?;
                seq += 1;
                drawn += 1;
            }
        }
        let fresh: RecordIter<'static, Keyed> = Box::new(sorter.finish()?);
        let merged = merge_runs(
            unique.take().into_iter().collect(),
            Some(fresh),
            ctx,
            labels::POOL,
        )?;
        let (p, count) = first_occurrences(merged, ctx)?;
        unique = Some(p);
        distinct = count;
    }
    reorder_by_seq(unique.unwrap(), Some(m), limits, ctx)
}

/// Takes a key-sorted file of first occurrences and yields edges in sequence
/// order, keeping at most `limit` of them.
fn reorder_by_seq(
    unique: TempPath,
    limit: Option<u64>,
    limits: GenLimits,
    ctx: &IoContext,
) -> Result<impl Iterator<Item = Result<EdgeRecord>>> {
    let mut sorter = ExternalSorter::<Keyed>::new(limits.sort_budget, ctx, labels::POOL);
    for k in crate::extsort::RunReader::<Keyed>::open(&unique, ctx, labels::POOL)? {
        let k = k?;
        sorter.push(Keyed {
            key: k.seq,
            seq: k.key,
        })?;
    }
    drop(unique);
    let limit = limit.unwrap_or(u64::MAX) as usize;
    Ok(sorter
        .finish()?
        .take(limit)
        .map(|r| r.map(|k| unkey(k.seq))))
}

/// Drops repeated edges from a stream, keeping first occurrences in their
/// original order, using bounded memory.
pub fn dedup_preserving_order(
    edges: impl Iterator<Item = EdgeRecord>,
    limits: GenLimits,
    ctx: &IoContext,
) -> Result<impl Iterator<Item = Result<EdgeRecord>>> {
    let mut sorter = ExternalSorter::<Keyed>::new(limits.sort_budget, ctx, labels::POOL);
    for (seq, e) in edges.enumerate() {
        sorter.push(Keyed {
            key: key(e),
            seq: seq as u64,
        })?;
    }
    let (p, _) = first_occurrences(sorter.finish()?, ctx)?;
    reorder_by_seq(p, None, limits, ctx)
}

/// Writes the earliest record of every key, still sorted by key.
fn first_occurrences(
    sorted: impl Iterator<Item = Result<Keyed>>,
    ctx: &IoContext,
) -> Result<(TempPath, u64)> {
    let mut err = None;
    let mut last = None;
    let firsts = sorted
        .map_while(|r| r.map_err(|e| err = Some(e)).ok())
        .filter(|k| {
            let new = last != Some(k.key);
            last = Some(k.key);
            new
        });
    let written = write_run(firsts, ctx, labels::POOL)?;
    match err {
        Some(e) => Err(e),
        None => Ok(written),
    }
}

/// Fenwick tree over non-negative integer weights.
struct Fenwick {
    tree: Vec<u64>,
    total: u64,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick {
            tree: vec![0; n + 1],
            total: 0,
        }
    }

    fn add(&mut self, i: usize, w: u64) {
        self.total += w;
        let mut i = i + 1;
        while i < self.tree.len() {
            self.tree[i] += w;
            i += i & i.wrapping_neg();
        }
    }

    /// Smallest index whose prefix sum exceeds `r`.
    fn find(&self, mut r: u64) -> usize {
        let mut pos = 0;
        let mut step = (self.tree.len() - 1).next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= r {
                pos = next;
                r -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }
}

pub const SF_P: f64 = 0.9;

pub fn generate_sf(path: &Path, n: u64, seed: u64, ctx: &IoContext) -> Result<FileSummary> {
    generate_sf_with(path, n, seed, GenLimits::default(), ctx)
}

/// Extended preferential-attachment model with link probability p = 0.9,
/// no rewiring and one link per step. Each step either links a uniformly
/// chosen node to a preferentially chosen one (weight degree + 1) or adds a
/// new node linked to a preferentially chosen one; it stops once `n` nodes
/// exist. Self-loops are dropped and repeats removed keeping first
/// occurrences.
pub fn generate_sf_with(
    path: &Path,
    n: u64,
    seed: u64,
    limits: GenLimits,
    ctx: &IoContext,
) -> Result<FileSummary> {
    if n < 2 {
        return Err(Error::InvalidArgument("SF generation needs n >= 2".into()));
    }
    if n >= crate::graph::format::MAX_NODES {
        return Err(Error::InvalidArgument("n too large".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fw = Fenwick::new(n as usize);
    fw.add(0, 1);
    let mut nodes = 1usize;
    let mut sorter = ExternalSorter::<Keyed>::new(limits.sort_budget, ctx, labels::POOL);
    let mut seq = 0u64;
    while (nodes as u64) < n {
        let (src, dst) = if rng.random::<f64>() < SF_P {
            let src = rng.random_range(0..nodes);
            (src, fw.find(rng.random_range(0..fw.total)))
        } else {
            let dst = fw.find(rng.random_range(0..fw.total));
            fw.add(nodes, 1);
            nodes += 1;
            (nodes - 1, dst)
        };
        if src != dst {
            fw.add(src, 1);
            fw.add(dst, 1);
            sorter.push(Keyed {
                key: key(EdgeRecord::new(src as u32, dst as u32)),
                seq,
            })?;
            seq += 1;
        }
    }
    let (p, _) = first_occurrences(sorter.finish()?, ctx)?;
    let mut out = EdgeListWriter::create(path, n, StorageOrder::RandomList, None, ctx)?;
    for e in reorder_by_seq(p, None, limits, ctx)? {
        out.push(e?)?;
    }
    out.finish()
}
