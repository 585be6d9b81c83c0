//! The compressed out-neighbor index: every edge that can still turn into a
//! forward cross edge, grouped by tail.
//!
//! File layout: `"SEDX"`, version (u16), edge count (u64), then one block per
//! tail in ascending tail order:
//! `[tail][degree][first head][head gap - 1]...`, all LEB128 varints.
//! Blocks carry their tail so any block can be decoded from its offset
//! alone. The directory (offset and degree per tail) lives in the tree's
//! attribute array and is rebuilt on every build.

use std::path::{Path, PathBuf};

use tempfile::TempPath;

use crate::error::{Error, Result};
use crate::extsort::{merge_runs, write_run, RecordIter};
use crate::graph::{EdgeIter, EdgeRecord, EdgeSource};
use crate::io::{labels, BlockReader, IoContext};
use crate::tree::{Slot, TreeStore, NO_OFFSET};

pub const INDEX_MAGIC: [u8; 4] = *b"SEDX";
pub const INDEX_VERSION: u16 = 1;
pub const INDEX_HEADER_BYTES: u64 = 14;

pub mod varint {
    use std::io;

    use crate::io::BlockReader;

    pub fn encode(mut x: u32, out: &mut Vec<u8>) {
        while x >= 0x80 {
            out.push((x as u8) | 0x80);
            x >>= 7;
        }
        out.push(x as u8);
    }

    /// `Ok(None)` at a clean end of input.
    pub fn decode(r: &mut BlockReader) -> io::Result<Option<u32>> {
        let mut x: u64 = 0;
        for shift in (0..35).step_by(7) {
            let Some(b) = r.read_byte()? else {
                if shift == 0 {
                    return Ok(None);
                }
                return Err(io::ErrorKind::UnexpectedEof.into());
            };
            x |= u64::from(b & 0x7F) << shift;
            if b & 0x80 == 0 {
                return u32::try_from(x)
                    .map(Some)
                    .map_err(|_| io::Error::new(io::ErrorKind::InvalidData, "varint overflow"));
            }
        }
        Err(io::Error::new(
            io::ErrorKind::InvalidData,
            "varint too long",
        ))
    }

    pub fn decode_slice(b: &[u8]) -> Option<(u32, usize)> {
        let mut x: u64 = 0;
        for (i, &byte) in b.iter().enumerate().take(5) {
            x |= u64::from(byte & 0x7F) << (7 * i);
            if byte & 0x80 == 0 {
                return u32::try_from(x).ok().map(|v| (v, i + 1));
            }
        }
        None
    }
}

/// Encodes one tail's block. `heads` must be strictly ascending.
pub fn encode_block(tail: u32, heads: &[u32], out: &mut Vec<u8>) {
    varint::encode(tail, out);
    varint::encode(heads.len() as u32, out);
    let mut prev = None;
    for &h in heads {
        match prev {
            None => varint::encode(h, out),
            Some(p) => varint::encode(h - p - 1, out),
        }
        prev = Some(h);
    }
}

#[derive(Debug)]
pub struct NPlusIndex {
    path: TempPath,
    edge_count: u64,
    bytes: u64,
}

impl NPlusIndex {
    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn edge_count(&self) -> u64 {
        self.edge_count
    }

    /// File size including the header.
    pub fn bytes(&self) -> u64 {
        self.bytes
    }
}

/// Which edges survive: tail at or past `fnn`, head strictly past it.
pub fn keeps(dfo_tail: u32, dfo_head: u32, fnn: u32) -> bool {
    dfo_tail >= fnn && dfo_head > fnn
}

/// One scan of `graph`, keeping the edges that pass [`keeps`] under the
/// current dfo.
pub fn build_index(
    graph: &dyn EdgeSource,
    tree: &mut TreeStore,
    fnn: u32,
    ctx: &IoContext,
) -> Result<NPlusIndex> {
    let path = ctx.temp_file("index-")?.into_temp_path();
    let input = graph.scan(ctx)?;
    let (edge_count, bytes) = build_into(input, tree, fnn, &path, ctx)?;
    Ok(NPlusIndex {
        path,
        edge_count,
        bytes,
    })
}

/// Rebuilds `index` from its own scan under the current tree and `fnn`,
/// replacing the file only once the new one is complete.
pub fn rewrite_index(
    index: NPlusIndex,
    tree: &mut TreeStore,
    fnn: u32,
    ctx: &IoContext,
) -> Result<NPlusIndex> {
    let input: EdgeIter<'_> = Box::new(scan_index(&index, ctx)?);
    rebuild_from(index, input, tree, fnn, ctx)
}

/// Builds a replacement for `index` from `input`, then renames it over the
/// old file.
pub(crate) fn rebuild_from(
    index: NPlusIndex,
    input: EdgeIter<'_>,
    tree: &mut TreeStore,
    fnn: u32,
    ctx: &IoContext,
) -> Result<NPlusIndex> {
    let fresh = ctx.temp_file("index-")?.into_temp_path();
    let (edge_count, bytes) = build_into(input, tree, fnn, &fresh, ctx)?;
    let fresh: PathBuf = fresh.keep().map_err(|e| Error::Io(e.error))?;
    std::fs::rename(&fresh, &index.path).map_err(|source| {
        let _ = std::fs::remove_file(&fresh);
        Error::Replace {
            path: index.path.to_path_buf(),
            source,
        }
    })?;
    Ok(NPlusIndex {
        path: index.path,
        edge_count,
        bytes,
    })
}

/// Filter, run-sort in the lent slot array, merge, encode, restore.
fn build_into(
    input: EdgeIter<'_>,
    tree: &mut TreeStore,
    fnn: u32,
    out: &Path,
    ctx: &IoContext,
) -> Result<(u64, u64)> {
    let spill = tree.spill_links(ctx)?;
    let mut peak = 0u64;
    let built = fill_and_encode(input, tree, fnn, out, ctx, &mut peak);
    tree.note_in_use(peak);
    let restored = tree.restore_links(spill, ctx);
    let built = built?;
    restored?;
    Ok(built)
}

fn fill_and_encode(
    input: EdgeIter<'_>,
    tree: &mut TreeStore,
    fnn: u32,
    out: &Path,
    ctx: &IoContext,
    peak: &mut u64,
) -> Result<(u64, u64)> {
    let (buf, mut attrs) = tree.lend_buffers();
    let cap = buf.len();
    let mut fill = 0usize;
    let mut runs: Vec<TempPath> = Vec::new();
    let by_edge = |s: &Slot| (s.link, s.head);
    for e in input {
        let e = e?;
        if !keeps(attrs.dfo(e.tail), attrs.dfo(e.head), fnn) {
            continue;
        }
        buf[fill] = Slot {
            link: e.tail,
            head: e.head,
        };
        fill += 1;
        *peak = (*peak).max(fill as u64);
        if fill == cap {
            buf.sort_unstable_by_key(by_edge);
            let (p, _) = write_run(
                buf.iter().map(|s| EdgeRecord::new(s.link, s.head)),
                ctx,
                labels::RUNS,
            )?;
            runs.push(p);
            fill = 0;
        }
    }
    let tail = &mut buf[..fill];
    tail.sort_unstable_by_key(by_edge);
    let tail: RecordIter<'_, EdgeRecord> =
        Box::new(tail.iter().map(|s| Ok(EdgeRecord::new(s.link, s.head))));
    let merged = merge_runs(runs, Some(tail), ctx, labels::RUNS)?;

    attrs.clear_directory();
    let mut w = ctx.create_writer(out, labels::INDEX)?;
    w.write_all(&header_bytes(0))?;
    let mut block = Vec::new();
    let mut heads: Vec<u32> = Vec::new();
    let mut cur: Option<u32> = None;
    let mut edges = 0u64;
    let mut flush = |tail: u32,
                     heads: &mut Vec<u32>,
                     w: &mut crate::io::BlockWriter,
                     attrs: &mut crate::tree::Attrs<'_>|
     -> Result<()> {
        let at = w.position();
        if at >= u64::from(NO_OFFSET) {
            return Err(Error::IndexTooLarge(at));
        }
        block.clear();
        encode_block(tail, heads, &mut block);
        w.write_all(&block)?;
        attrs.set_directory(tail, at as u32, heads.len() as u32);
        heads.clear();
        Ok(())
    };
    for e in merged {
        let e = e?;
        if cur != Some(e.tail) {
            if let Some(t) = cur {
                flush(t, &mut heads, &mut w, &mut attrs)?;
            }
            cur = Some(e.tail);
        } else if heads.last() == Some(&e.head) {
            continue;
        }
        heads.push(e.head);
        edges += 1;
    }
    if let Some(t) = cur {
        flush(t, &mut heads, &mut w, &mut attrs)?;
    }
    w.patch(0, &header_bytes(edges))?;
    let bytes = w.finish()?;
    Ok((edges, bytes))
}

fn header_bytes(edges: u64) -> [u8; INDEX_HEADER_BYTES as usize] {
    let mut b = [0u8; INDEX_HEADER_BYTES as usize];
    b[..4].copy_from_slice(&INDEX_MAGIC);
    b[4..6].copy_from_slice(&INDEX_VERSION.to_le_bytes());
    b[6..14].copy_from_slice(&edges.to_le_bytes());
    b
}

fn read_index_header(path: &Path, ctx: &IoContext) -> Result<u64> {
    let mut r = ctx.open_reader(path, labels::INDEX, 0)?;
    let mut b = [0u8; INDEX_HEADER_BYTES as usize];
    if !r.read_exact_or_eof(&mut b)? || b[..4] != INDEX_MAGIC {
        return Err(Error::format(path, "not an index file"));
    }
    let version = u16::from_le_bytes([b[4], b[5]]);
    if version != INDEX_VERSION {
        return Err(Error::format(
            path,
            format!("unsupported index version {version}"),
        ));
    }
    Ok(u64::from_le_bytes(b[6..14].try_into().unwrap()))
}

/// Decodes one block at the reader's position. `Ok(None)` at end of file.
fn read_block(r: &mut BlockReader, path: &Path, heads: &mut Vec<u32>) -> Result<Option<u32>> {
    let corrupt = |what: &str| Error::format(path, format!("corrupt block: {what}"));
    let Some(tail) = varint::decode(r)? else {
        return Ok(None);
    };
    let deg = varint::decode(r)?.ok_or_else(|| corrupt("missing degree"))?;
    if deg == 0 {
        return Err(corrupt("empty block"));
    }
    heads.clear();
    let mut prev: Option<u32> = None;
    for _ in 0..deg {
        let x = varint::decode(r)?.ok_or_else(|| corrupt("missing head"))?;
        let h = match prev {
            None => x,
            Some(p) => p
                .checked_add(x)
                .and_then(|v| v.checked_add(1))
                .ok_or_else(|| corrupt("head overflow"))?,
        };
        heads.push(h);
        prev = Some(h);
    }
    Ok(Some(tail))
}

/// Sequential pass over every indexed edge in (tail, head) order.
pub struct IndexScan {
    reader: BlockReader,
    path: PathBuf,
    heads: Vec<u32>,
    tail: u32,
    next: usize,
    prev_tail: Option<u32>,
    ctx: IoContext,
    done: bool,
}

pub fn scan_index(index: &NPlusIndex, ctx: &IoContext) -> Result<IndexScan> {
    read_index_header(index.path(), ctx)?;
    Ok(IndexScan {
        reader: ctx.open_reader(index.path(), labels::INDEX, INDEX_HEADER_BYTES)?,
        path: index.path().to_path_buf(),
        heads: Vec::new(),
        tail: 0,
        next: 0,
        prev_tail: None,
        ctx: ctx.clone(),
        done: false,
    })
}

impl IndexScan {
    fn advance(&mut self) -> Result<Option<EdgeRecord>> {
        while self.next == self.heads.len() {
            if self.done {
                return Ok(None);
            }
            match read_block(&mut self.reader, &self.path, &mut self.heads)? {
                None => {
                    self.done = true;
                    self.ctx.counters.record_full_scan(labels::INDEX);
                    return Ok(None);
                }
                Some(t) => {
                    if self.prev_tail.is_some_and(|p| p >= t) {
                        return Err(Error::format(&self.path, "blocks out of tail order"));
                    }
                    self.prev_tail = Some(t);
                    self.tail = t;
                    self.next = 0;
                }
            }
        }
        let h = self.heads[self.next];
        self.next += 1;
        Ok(Some(EdgeRecord::new(self.tail, h)))
    }
}

impl Iterator for IndexScan {
    type Item = Result<EdgeRecord>;

    fn next(&mut self) -> Option<Result<EdgeRecord>> {
        let r = self.advance().transpose();
        if matches!(r, Some(Err(_))) {
            self.done = true;
            self.next = self.heads.len();
        }
        r
    }
}

/// Decodes the blocks at `offsets` in one forward pass, visiting offsets in
/// ascending order. Returns the number of edges handed to `sink`.
pub fn load_sequentially(
    index: &NPlusIndex,
    offsets: &mut [u32],
    ctx: &IoContext,
    mut sink: impl FnMut(EdgeRecord) -> Result<()>,
) -> Result<u64> {
    if offsets.is_empty() {
        return Ok(0);
    }
    offsets.sort_unstable();
    let path = index.path();
    let mut r = ctx.open_reader(path, labels::INDEX, u64::from(offsets[0]))?;
    let mut heads = Vec::new();
    let mut loaded = 0;
    for &off in offsets.iter() {
        if u64::from(off) < INDEX_HEADER_BYTES || u64::from(off) >= index.bytes {
            return Err(Error::format(
                path,
                format!("offset {off} is not a block start"),
            ));
        }
        r.seek_to(u64::from(off))?;
        let tail = read_block(&mut r, path, &mut heads)?
            .ok_or_else(|| Error::format(path, format!("offset {off} past the last block")))?;
        for &h in &heads {
            sink(EdgeRecord::new(tail, h))?;
            loaded += 1;
        }
    }
    Ok(loaded)
}

/// Everything in the index, in scan order.
pub fn decode_all(index: &NPlusIndex, ctx: &IoContext) -> Result<Vec<EdgeRecord>> {
    scan_index(index, ctx)?.collect()
}
