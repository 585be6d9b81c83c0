//! External run sort and k-way merge over fixed-width records.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use tempfile::TempPath;

use crate::error::Result;
use crate::graph::EdgeRecord;
use crate::io::{BlockReader, IoContext};

/// Runs merged at once; larger run sets are merged in rounds.
pub const FAN_IN: usize = 64;

pub trait Record: Copy + Ord {
    const BYTES: usize;
    fn encode(&self, out: &mut [u8]);
    fn decode(b: &[u8]) -> Self;
}

impl Record for EdgeRecord {
    const BYTES: usize = 8;

    fn encode(&self, out: &mut [u8]) {
        out[..8].copy_from_slice(&self.to_bytes());
    }

    fn decode(b: &[u8]) -> Self {
        EdgeRecord::from_bytes(b[..8].try_into().unwrap())
    }
}

/// Record carrying a generation sequence number; sorts by key first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Keyed {
    pub key: u64,
    pub seq: u64,
}

impl Record for Keyed {
    const BYTES: usize = 16;

    fn encode(&self, out: &mut [u8]) {
        out[..8].copy_from_slice(&self.key.to_le_bytes());
        out[8..16].copy_from_slice(&self.seq.to_le_bytes());
    }

    fn decode(b: &[u8]) -> Self {
        Keyed {
            key: u64::from_le_bytes(b[..8].try_into().unwrap()),
            seq: u64::from_le_bytes(b[8..16].try_into().unwrap()),
        }
    }
}

pub type RecordIter<'a, R> = Box<dyn Iterator<Item = Result<R>> + 'a>;

/// Writes already-sorted records as one run file.
pub fn write_run<R: Record>(
    records: impl IntoIterator<Item = R>,
    ctx: &IoContext,
    label: &str,
) -> Result<(TempPath, u64)> {
    let path = ctx.temp_file("run-")?.into_temp_path();
    let mut w = ctx.create_writer(&path, label)?;
    let mut b = vec![0u8; R::BYTES];
    let mut count = 0;
    for r in records {
        r.encode(&mut b);
        w.write_all(&b)?;
        count += 1;
    }
    w.finish()?;
    Ok((path, count))
}

pub struct RunReader<R> {
    reader: BlockReader,
    buf: Vec<u8>,
    _marker: std::marker::PhantomData<R>,
}

impl<R: Record> RunReader<R> {
    pub fn open(path: &std::path::Path, ctx: &IoContext, label: &str) -> Result<Self> {
        Ok(RunReader {
            reader: ctx.open_reader(path, label, 0)?,
            buf: vec![0; R::BYTES],
            _marker: std::marker::PhantomData,
        })
    }
}

impl<R: Record> Iterator for RunReader<R> {
    type Item = Result<R>;

    fn next(&mut self) -> Option<Result<R>> {
        match self.reader.read_exact_or_eof(&mut self.buf) {
            Ok(true) => Some(Ok(R::decode(&self.buf))),
            Ok(false) => None,
            Err(e) => Some(Err(e.into())),
        }
    }
}

/// k-way merge of sorted sources. Equal records come out in source order.
pub struct Merge<'a, R: Record> {
    sources: Vec<RecordIter<'a, R>>,
    heap: BinaryHeap<Reverse<(R, usize)>>,
    _runs: Vec<TempPath>,
    primed: bool,
}

impl<'a, R: Record> Merge<'a, R> {
    pub fn new(sources: Vec<RecordIter<'a, R>>, runs: Vec<TempPath>) -> Self {
        Merge {
            heap: BinaryHeap::with_capacity(sources.len()),
            sources,
            _runs: runs,
            primed: false,
        }
    }

    fn pull(&mut self, i: usize) -> Result<()> {
        if let Some(r) = self.sources[i].next() {
            self.heap.push(Reverse((r?, i)));
        }
        Ok(())
    }

    fn step(&mut self) -> Result<Option<R>> {
        if !self.primed {
            self.primed = true;
            for i in 0..self.sources.len() {
                self.pull(i)?;
            }
        }
        let Some(Reverse((r, i))) = self.heap.pop() else {
            return Ok(None);
        };
        self.pull(i)?;
        Ok(Some(r))
    }
}

impl<R: Record> Iterator for Merge<'_, R> {
    type Item = Result<R>;

    fn next(&mut self) -> Option<Result<R>> {
        self.step().transpose()
    }
}

/// Merges run files plus an optional in-memory tail into one sorted stream,
/// pre-merging in rounds of [`FAN_IN`] when there are too many runs.
pub fn merge_runs<'a, R: Record + 'a>(
    mut runs: Vec<TempPath>,
    tail: Option<RecordIter<'a, R>>,
    ctx: &IoContext,
    label: &str,
) -> Result<Merge<'a, R>> {
    let budget = FAN_IN - usize::from(tail.is_some());
    while runs.len() > budget {
        let mut next = Vec::new();
        let mut rest = runs.into_iter().peekable();
        while rest.peek().is_some() {
            let group: Vec<TempPath> = rest.by_ref().take(FAN_IN).collect();
            if group.len() == 1 {
                next.extend(group);
                continue;
            }
            let merged = merge_runs::<R>(group, None, ctx, label)?;
            let mut err = None;
            let (path, _) = write_run(
                merged.map_while(|r| r.map_err(|e| err = Some(e)).ok()),
                ctx,
                label,
            )?;
            if let Some(e) = err {
                return Err(e);
            }
            next.push(path);
        }
        runs = next;
    }
    let mut sources: Vec<RecordIter<'a, R>> = Vec::with_capacity(runs.len() + 1);
    for p in &runs {
        sources.push(Box::new(RunReader::<R>::open(p, ctx, label)?));
    }
    if let Some(t) = tail {
        sources.push(t);
    }
    Ok(Merge::new(sources, runs))
}

/// Sorts an unbounded stream holding at most `capacity` records in memory.
pub struct ExternalSorter<R: Record> {
    buf: Vec<R>,
    capacity: usize,
    runs: Vec<TempPath>,
    ctx: IoContext,
    label: String,
    runs_written: usize,
}

impl<R: Record + Send + 'static> ExternalSorter<R> {
    pub fn new(capacity: usize, ctx: &IoContext, label: &str) -> Self {
        let capacity = capacity.max(1);
        ExternalSorter {
            buf: Vec::with_capacity(capacity.min(1 << 20)),
            capacity,
            runs: Vec::new(),
            ctx: ctx.clone(),
            label: label.to_string(),
            runs_written: 0,
        }
    }

    pub fn push(&mut self, r: R) -> Result<()> {
        self.buf.push(r);
        if self.buf.len() == self.capacity {
            self.spill()?;
        }
        Ok(())
    }

    fn spill(&mut self) -> Result<()> {
        self.buf.sort_unstable();
        let (p, _) = write_run(self.buf.drain(..), &self.ctx, &self.label)?;
        self.runs.push(p);
        self.runs_written += 1;
        Ok(())
    }

    /// Sorted runs written to disk so far.
    pub fn runs_written(&self) -> usize {
        self.runs_written
    }

    pub fn finish(mut self) -> Result<Merge<'static, R>> {
        self.buf.sort_unstable();
        let tail: RecordIter<'static, R> =
            Box::new(std::mem::take(&mut self.buf).into_iter().map(Ok));
        merge_runs(
            std::mem::take(&mut self.runs),
            Some(tail),
            &self.ctx,
            &self.label,
        )
    }
}
