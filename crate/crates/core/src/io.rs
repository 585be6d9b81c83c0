//! Block-buffered file access with per-file I/O accounting.
//!
//! Every byte the engine moves to or from disk goes through [`BlockReader`] or
//! [`BlockWriter`], which charge a shared [`IoCounters`] under a file label.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::Result;

pub const DEFAULT_BLOCK_BYTES: usize = 64 * 1024;

/// Counter labels used by the engine.
pub mod labels {
    pub const GRAPH: &str = "graph";
    pub const INDEX: &str = "index";
    pub const RUNS: &str = "runs";
    pub const SNAPSHOT: &str = "snapshot";
    pub const TREE_SPILL: &str = "tree-spill";
    pub const SURVIVORS: &str = "survivors";
    pub const POOL: &str = "gen-pool";
    pub const OUTPUT: &str = "output";
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FileStats {
    pub bytes_read: u64,
    pub bytes_written: u64,
    /// Block reads issued while streaming.
    pub sequential_reads: u64,
    pub writes: u64,
    pub seeks: u64,
    pub backward_seeks: u64,
    /// Completed front-to-back passes.
    pub full_scans: u64,
}

impl FileStats {
    fn accumulate(&mut self, o: &FileStats) {
        self.bytes_read += o.bytes_read;
        self.bytes_written += o.bytes_written;
        self.sequential_reads += o.sequential_reads;
        self.writes += o.writes;
        self.seeks += o.seeks;
        self.backward_seeks += o.backward_seeks;
        self.full_scans += o.full_scans;
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IoReport {
    pub files: BTreeMap<String, FileStats>,
    pub totals: FileStats,
}

#[derive(Debug, Default)]
pub struct IoCounters {
    files: Mutex<BTreeMap<String, FileStats>>,
}

impl IoCounters {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    fn update(&self, label: &str, f: impl FnOnce(&mut FileStats)) {
        let mut files = self.files.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(s) = files.get_mut(label) {
            f(s);
        } else {
            let mut s = FileStats::default();
            f(&mut s);
            files.insert(label.to_string(), s);
        }
    }

    pub(crate) fn record_read_bytes(&self, label: &str, bytes: u64) {
        self.update(label, |s| s.bytes_read += bytes);
    }

    pub fn record_full_scan(&self, label: &str) {
        self.update(label, |s| s.full_scans += 1);
    }

    pub fn file(&self, label: &str) -> FileStats {
        let files = self.files.lock().unwrap_or_else(|e| e.into_inner());
        files.get(label).copied().unwrap_or_default()
    }

    pub fn totals(&self) -> FileStats {
        self.report().totals
    }

    pub fn report(&self) -> IoReport {
        let files = self.files.lock().unwrap_or_else(|e| e.into_inner()).clone();
        let mut totals = FileStats::default();
        for s in files.values() {
            totals.accumulate(s);
        }
        IoReport { files, totals }
    }
}

/// Shared settings for one run: counters, temp directory, block size.
#[derive(Clone, Debug)]
pub struct IoContext {
    pub counters: Arc<IoCounters>,
    pub tmp_dir: PathBuf,
    pub block_bytes: usize,
}

impl IoContext {
    pub fn new(tmp_dir: impl Into<PathBuf>) -> Self {
        IoContext {
            counters: IoCounters::new(),
            tmp_dir: tmp_dir.into(),
            block_bytes: DEFAULT_BLOCK_BYTES,
        }
    }

    /// Temp directory from `SEDFS_TMPDIR`, falling back to the system one.
    pub fn from_env() -> Self {
        let dir = std::env::var_os("SEDFS_TMPDIR")
            .map(PathBuf::from)
            .unwrap_or_else(std::env::temp_dir);
        Self::new(dir)
    }

    pub fn with_block_bytes(mut self, block_bytes: usize) -> Self {
        self.block_bytes = block_bytes.max(8);
        self
    }

    pub fn temp_file(&self, prefix: &str) -> Result<NamedTempFile> {
        Ok(tempfile::Builder::new()
            .prefix(prefix)
            .tempfile_in(&self.tmp_dir)?)
    }

    pub fn open_reader(&self, path: &Path, label: &str, start: u64) -> Result<BlockReader> {
        let file = File::open(path)?;
        BlockReader::new(file, start, self.block_bytes, label, self.counters.clone())
    }

    pub fn create_writer(&self, path: &Path, label: &str) -> Result<BlockWriter> {
        let file = File::create(path)?;
        Ok(BlockWriter::new(
            file,
            self.block_bytes,
            label,
            self.counters.clone(),
        ))
    }
}

/// Forward-streaming reader that fetches whole blocks.
pub struct BlockReader {
    file: File,
    buf: Vec<u8>,
    pos: usize,
    len: usize,
    /// File offset of `buf[0]`.
    buf_start: u64,
    block: usize,
    label: String,
    counters: Arc<IoCounters>,
}

impl BlockReader {
    pub fn new(
        mut file: File,
        start: u64,
        block: usize,
        label: &str,
        counters: Arc<IoCounters>,
    ) -> Result<Self> {
        if start != 0 {
            file.seek(SeekFrom::Start(start))?;
        }
        Ok(BlockReader {
            file,
            buf: vec![0; block.max(8)],
            pos: 0,
            len: 0,
            buf_start: start,
            block: block.max(8),
            label: label.to_string(),
            counters,
        })
    }

    /// Logical read position.
    pub fn position(&self) -> u64 {
        self.buf_start + self.pos as u64
    }

    fn fill(&mut self) -> io::Result<bool> {
        self.buf_start += self.len as u64;
        self.pos = 0;
        self.len = 0;
        while self.len < self.block {
            match self.file.read(&mut self.buf[self.len..self.block]) {
                Ok(0) => break,
                Ok(k) => self.len += k,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
                Err(e) => return Err(e),
            }
        }
        if self.len > 0 {
            let k = self.len as u64;
            self.counters.update(&self.label, |s| {
                s.sequential_reads += 1;
                s.bytes_read += k;
            });
        }
        Ok(self.len > 0)
    }

    /// Fills `out` completely. Returns `Ok(false)` on a clean end of file
    /// before the first byte, and an `UnexpectedEof` error on a partial read.
    pub fn read_exact_or_eof(&mut self, out: &mut [u8]) -> io::Result<bool> {
        let mut done = 0;
        while done < out.len() {
            if self.pos == self.len && !self.fill()? {
                if done == 0 {
                    return Ok(false);
                }
                return Err(io::ErrorKind::UnexpectedEof.into());
            }
            let k = (self.len - self.pos).min(out.len() - done);
            out[done..done + k].copy_from_slice(&self.buf[self.pos..self.pos + k]);
            self.pos += k;
            done += k;
        }
        Ok(true)
    }

    pub fn read_byte(&mut self) -> io::Result<Option<u8>> {
        if self.pos == self.len && !self.fill()? {
            return Ok(None);
        }
        let b = self.buf[self.pos];
        self.pos += 1;
        Ok(Some(b))
    }

    /// Moves to `target`. Targets inside the buffered block cost nothing;
    /// anything else is a physical seek, charged as backward when it moves
    /// before the current position.
    pub fn seek_to(&mut self, target: u64) -> io::Result<()> {
        let end = self.buf_start + self.len as u64;
        if target >= self.buf_start && target <= end {
            self.pos = (target - self.buf_start) as usize;
            return Ok(());
        }
        let backward = target < self.position();
        self.file.seek(SeekFrom::Start(target))?;
        self.buf_start = target;
        self.pos = 0;
        self.len = 0;
        self.counters.update(&self.label, |s| {
            s.seeks += 1;
            if backward {
                s.backward_seeks += 1;
            }
        });
        Ok(())
    }
}

/// Buffered writer that flushes whole blocks.
pub struct BlockWriter {
    file: File,
    buf: Vec<u8>,
    block: usize,
    written: u64,
    label: String,
    counters: Arc<IoCounters>,
}

impl BlockWriter {
    pub fn new(file: File, block: usize, label: &str, counters: Arc<IoCounters>) -> Self {
        let block = block.max(8);
        BlockWriter {
            file,
            buf: Vec::with_capacity(block),
            block,
            written: 0,
            label: label.to_string(),
            counters,
        }
    }

    /// Bytes accepted so far, flushed or not.
    pub fn position(&self) -> u64 {
        self.written + self.buf.len() as u64
    }

    pub fn write_all(&mut self, mut data: &[u8]) -> io::Result<()> {
        while !data.is_empty() {
            let k = (self.block - self.buf.len()).min(data.len());
            self.buf.extend_from_slice(&data[..k]);
            data = &data[k..];
            if self.buf.len() == self.block {
                self.flush_block()?;
            }
        }
        Ok(())
    }

    fn flush_block(&mut self) -> io::Result<()> {
        if self.buf.is_empty() {
            return Ok(());
        }
        self.file.write_all(&self.buf)?;
        let k = self.buf.len() as u64;
        self.written += k;
        self.buf.clear();
        self.counters.update(&self.label, |s| {
            s.writes += 1;
            s.bytes_written += k;
        });
        Ok(())
    }

    /// Overwrites bytes at an absolute offset after flushing (header patching).
    pub fn patch(&mut self, offset: u64, data: &[u8]) -> io::Result<()> {
        self.flush_block()?;
        self.file.seek(SeekFrom::Start(offset))?;
        self.file.write_all(data)?;
        self.file.seek(SeekFrom::End(0))?;
        let k = data.len() as u64;
        self.counters.update(&self.label, |s| {
            s.seeks += 1;
            s.writes += 1;
            s.bytes_written += k;
        });
        Ok(())
    }

    pub fn finish(mut self) -> io::Result<u64> {
        self.flush_block()?;
        self.file.flush()?;
        Ok(self.written)
    }
}
