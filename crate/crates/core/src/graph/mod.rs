//! On-disk graphs: format, generators, conversion.

pub mod convert;
pub mod format;
pub mod generate;

pub use convert::{convert_to_adjacency_order, ingest_text, ConvertReport, IngestReport};
pub use format::{
    open_edge_stream, read_all_edges, read_header, write_edge_list, EdgeIter, EdgeListWriter,
    EdgeRecord, EdgeSource, EdgeStream, FileSummary, GraphFile, GraphHeader, MemoryGraph,
    StorageOrder, NONE,
};
pub use generate::{generate_er, generate_er_with, generate_sf, generate_sf_with, GenLimits};
