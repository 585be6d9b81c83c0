//! The binary edge-list file: a 32-byte header followed by `m` fixed-width
//! little-endian `(tail, head)` records.

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::{labels, BlockReader, BlockWriter, IoContext};

pub const MAGIC: [u8; 4] = *b"SEDF";
pub const VERSION: u16 = 1;
pub const HEADER_BYTES: u64 = 32;
pub const RECORD_BYTES: u64 = 8;
/// Node ids are 32-bit and the sign bit stays free.
pub const MAX_NODES: u64 = 1 << 31;
pub const NONE: u32 = u32::MAX;

const FLAG_ADJACENCY: u16 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EdgeRecord {
    pub tail: u32,
    pub head: u32,
}

impl EdgeRecord {
    pub const fn new(tail: u32, head: u32) -> Self {
        EdgeRecord { tail, head }
    }

    pub fn to_bytes(self) -> [u8; 8] {
        let mut b = [0; 8];
        b[..4].copy_from_slice(&self.tail.to_le_bytes());
        b[4..].copy_from_slice(&self.head.to_le_bytes());
        b
    }

    pub fn from_bytes(b: [u8; 8]) -> Self {
        EdgeRecord {
            tail: u32::from_le_bytes([b[0], b[1], b[2], b[3]]),
            head: u32::from_le_bytes([b[4], b[5], b[6], b[7]]),
        }
    }
}

impl From<(u32, u32)> for EdgeRecord {
    fn from((tail, head): (u32, u32)) -> Self {
        EdgeRecord { tail, head }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum StorageOrder {
    #[default]
    RandomList,
    AdjacencyList,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GraphHeader {
    pub node_count: u64,
    pub edge_count: u64,
    pub order: StorageOrder,
    pub root: Option<u32>,
}

impl GraphHeader {
    pub fn new(node_count: u64, edge_count: u64) -> Self {
        GraphHeader {
            node_count,
            edge_count,
            order: StorageOrder::RandomList,
            root: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_count == 0 || self.node_count >= MAX_NODES {
            return Err(Error::InvalidArgument(format!(
                "node count {} outside [1, 2^31)",
                self.node_count
            )));
        }
        if let Some(r) = self.root {
            if u64::from(r) >= self.node_count {
                return Err(Error::InvalidArgument(format!("root {r} is not a node")));
            }
        }
        Ok(())
    }

    pub fn encode(&self) -> [u8; HEADER_BYTES as usize] {
        let mut b = [0u8; HEADER_BYTES as usize];
        b[..4].copy_from_slice(&MAGIC);
        b[4..6].copy_from_slice(&VERSION.to_le_bytes());
        let flags = match self.order {
            StorageOrder::RandomList => 0,
            StorageOrder::AdjacencyList => FLAG_ADJACENCY,
        };
        b[6..8].copy_from_slice(&flags.to_le_bytes());
        b[8..16].copy_from_slice(&self.node_count.to_le_bytes());
        b[16..24].copy_from_slice(&self.edge_count.to_le_bytes());
        b[24..28].copy_from_slice(&self.root.unwrap_or(NONE).to_le_bytes());
        b
    }

    pub fn decode(b: &[u8; HEADER_BYTES as usize], path: &Path) -> Result<Self> {
        if b[..4] != MAGIC {
            return Err(Error::format(path, "bad magic"));
        }
        let version = u16::from_le_bytes([b[4], b[5]]);
        if version != VERSION {
            return Err(Error::format(
                path,
                format!("unsupported version {version}"),
            ));
        }
        let flags = u16::from_le_bytes([b[6], b[7]]);
        let root = u32::from_le_bytes(b[24..28].try_into().unwrap());
        let h = GraphHeader {
            node_count: u64::from_le_bytes(b[8..16].try_into().unwrap()),
            edge_count: u64::from_le_bytes(b[16..24].try_into().unwrap()),
            order: if flags & FLAG_ADJACENCY != 0 {
                StorageOrder::AdjacencyList
            } else {
                StorageOrder::RandomList
            },
            root: (root != NONE).then_some(root),
        };
        h.validate()
            .map_err(|e| Error::format(path, e.to_string()))?;
        Ok(h)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FileSummary {
    pub path: PathBuf,
    pub header: GraphHeader,
    pub bytes: u64,
}

/// Reads and checks the header; the bytes are charged to `label` but do not
/// count as a block read.
pub fn read_header(path: &Path, ctx: &IoContext, label: &str) -> Result<GraphHeader> {
    let mut f = File::open(path)?;
    let mut b = [0u8; HEADER_BYTES as usize];
    f.read_exact(&mut b)
        .map_err(|_| Error::format(path, "file shorter than header"))?;
    ctx.counters.record_read_bytes(label, HEADER_BYTES);
    let h = GraphHeader::decode(&b, path)?;
    let len = f.metadata()?.len();
    let want = HEADER_BYTES + RECORD_BYTES * h.edge_count;
    if len != want {
        return Err(Error::format(
            path,
            format!(
                "body is {} bytes, header promises {}",
                len - HEADER_BYTES,
                want - HEADER_BYTES
            ),
        ));
    }
    Ok(h)
}

/// Streaming writer; the edge count is patched into the header on finish.
pub struct EdgeListWriter {
    out: BlockWriter,
    path: PathBuf,
    header: GraphHeader,
    count: u64,
}

impl EdgeListWriter {
    pub fn create(
        path: &Path,
        node_count: u64,
        order: StorageOrder,
        root: Option<u32>,
        ctx: &IoContext,
    ) -> Result<Self> {
        let header = GraphHeader {
            node_count,
            edge_count: 0,
            order,
            root,
        };
        header.validate()?;
        let mut out = ctx.create_writer(path, labels::OUTPUT)?;
        out.write_all(&header.encode())?;
        Ok(EdgeListWriter {
            out,
            path: path.to_path_buf(),
            header,
            count: 0,
        })
    }

    pub fn push(&mut self, e: EdgeRecord) -> Result<()> {
        let n = self.header.node_count;
        let reason = if u64::from(e.tail) >= n || u64::from(e.head) >= n {
            Some("node id out of range")
        } else if e.tail == e.head {
            Some("self-loop")
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(Error::InvalidEdge {
                index: self.count,
                tail: e.tail.into(),
                head: e.head.into(),
                reason,
            });
        }
        self.out.write_all(&e.to_bytes())?;
        self.count += 1;
        Ok(())
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Finishes with a smaller node count than the one the writer was
    /// created with; every pushed id must be below it.
    pub fn finish_with_node_count(mut self, n: u64) -> Result<FileSummary> {
        if n > self.header.node_count {
            return Err(Error::InvalidArgument("node count can only shrink".into()));
        }
        self.header.node_count = n;
        self.header.validate()?;
        self.finish()
    }

    pub fn finish(mut self) -> Result<FileSummary> {
        self.header.edge_count = self.count;
        self.out.patch(0, &self.header.encode())?;
        let bytes = self.out.finish()?;
        Ok(FileSummary {
            path: self.path,
            header: self.header,
            bytes,
        })
    }
}

/// Writes a complete file; the stream must hold exactly `header.edge_count`
/// records.
pub fn write_edge_list(
    path: &Path,
    header: GraphHeader,
    edges: impl IntoIterator<Item = EdgeRecord>,
    ctx: &IoContext,
) -> Result<FileSummary> {
    let mut w = EdgeListWriter::create(path, header.node_count, header.order, header.root, ctx)?;
    for e in edges {
        w.push(e)?;
    }
    if w.count() != header.edge_count {
        return Err(Error::InvalidArgument(format!(
            "header promises {} edges, stream held {}",
            header.edge_count,
            w.count()
        )));
    }
    w.finish()
}

/// Sequential cursor over the records of an edge-list file.
pub struct EdgeStream {
    reader: BlockReader,
    header: GraphHeader,
    remaining: u64,
    index: u64,
    path: PathBuf,
    label: String,
    ctx: IoContext,
}

pub fn open_edge_stream(path: &Path, ctx: &IoContext, label: &str) -> Result<EdgeStream> {
    let header = read_header(path, ctx, label)?;
    let reader = ctx.open_reader(path, label, HEADER_BYTES)?;
    Ok(EdgeStream {
        reader,
        header,
        remaining: header.edge_count,
        index: 0,
        path: path.to_path_buf(),
        label: label.to_string(),
        ctx: ctx.clone(),
    })
}

impl EdgeStream {
    pub fn header(&self) -> &GraphHeader {
        &self.header
    }

    fn next_record(&mut self) -> Result<EdgeRecord> {
        let mut b = [0u8; 8];
        if !self.reader.read_exact_or_eof(&mut b)? {
            return Err(Error::format(&self.path, "truncated body"));
        }
        let e = EdgeRecord::from_bytes(b);
        let n = self.header.node_count;
        if u64::from(e.tail) >= n || u64::from(e.head) >= n {
            return Err(Error::format(
                &self.path,
                format!("record {} has id out of range", self.index),
            ));
        }
        self.remaining -= 1;
        self.index += 1;
        if self.remaining == 0 {
            self.ctx.counters.record_full_scan(&self.label);
        }
        Ok(e)
    }
}

impl Iterator for EdgeStream {
    type Item = Result<EdgeRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        Some(self.next_record().inspect_err(|_| self.remaining = 0))
    }
}

pub type EdgeIter<'a> = Box<dyn Iterator<Item = Result<EdgeRecord>> + 'a>;

/// A graph the drivers can scan repeatedly.
pub trait EdgeSource {
    /// Nodes of the processed graph, including a virtual root.
    fn node_count(&self) -> u32;
    fn root(&self) -> u32;
    fn edge_count(&self) -> u64;
    fn scan(&self, ctx: &IoContext) -> Result<EdgeIter<'_>>;
}

/// An edge-list file, optionally extended by a virtual root with id `n`
/// whose edges form an uncounted prefix of every scan.
#[derive(Clone, Debug)]
pub struct GraphFile {
    pub path: PathBuf,
    pub header: GraphHeader,
    root: u32,
    virtual_root: bool,
}

impl GraphFile {
    /// Uses `root` if given, else the header root, else a virtual root.
    pub fn open(path: &Path, root: Option<u32>, ctx: &IoContext) -> Result<Self> {
        let header = read_header(path, ctx, labels::GRAPH)?;
        let n = header.node_count;
        match root.or(header.root) {
            Some(r) if u64::from(r) >= n => Err(Error::InvalidArgument(format!(
                "root {r} is not a node of an n={n} graph"
            ))),
            Some(r) => Ok(GraphFile {
                path: path.to_path_buf(),
                header,
                root: r,
                virtual_root: false,
            }),
            None => {
                if n + 1 >= MAX_NODES {
                    return Err(Error::InvalidArgument("no room for a virtual root".into()));
                }
                Ok(GraphFile {
                    path: path.to_path_buf(),
                    header,
                    root: n as u32,
                    virtual_root: true,
                })
            }
        }
    }

    pub fn virtual_root(&self) -> Option<u32> {
        self.virtual_root.then_some(self.root)
    }
}

impl EdgeSource for GraphFile {
    fn node_count(&self) -> u32 {
        (self.header.node_count + u64::from(self.virtual_root)) as u32
    }

    fn root(&self) -> u32 {
        self.root
    }

    fn edge_count(&self) -> u64 {
        self.header.edge_count
            + if self.virtual_root {
                self.header.node_count
            } else {
                0
            }
    }

    fn scan(&self, ctx: &IoContext) -> Result<EdgeIter<'_>> {
        let stream = open_edge_stream(&self.path, ctx, labels::GRAPH)?;
        if self.virtual_root {
            let r = self.root;
            let prefix = (0..r).map(move |u| Ok(EdgeRecord::new(r, u)));
            Ok(Box::new(prefix.chain(stream)))
        } else {
            Ok(Box::new(stream))
        }
    }
}

/// In-memory edge source for tests and small inputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemoryGraph {
    pub n: u32,
    pub root: u32,
    pub edges: Vec<EdgeRecord>,
}

impl EdgeSource for MemoryGraph {
    fn node_count(&self) -> u32 {
        self.n
    }

    fn root(&self) -> u32 {
        self.root
    }

    fn edge_count(&self) -> u64 {
        self.edges.len() as u64
    }

    fn scan(&self, _ctx: &IoContext) -> Result<EdgeIter<'_>> {
        Ok(Box::new(self.edges.iter().copied().map(Ok)))
    }
}

/// Reads the whole body into memory.
pub fn read_all_edges(path: &Path, ctx: &IoContext) -> Result<(GraphHeader, Vec<EdgeRecord>)> {
    let s = open_edge_stream(path, ctx, labels::OUTPUT)?;
    let h = *s.header();
    let edges = s.collect::<Result<Vec<_>>>()?;
    Ok((h, edges))
}
