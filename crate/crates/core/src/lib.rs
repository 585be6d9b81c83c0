//! Semi-external depth-first search over graphs stored as binary edge
//! lists: only the spanning tree lives in memory, edges stream from disk.

pub mod batch;
pub mod driver;
pub mod error;
pub mod extsort;
pub mod graph;
pub mod index;
pub mod io;
pub mod rearrange;
pub mod tree;
pub mod verify;

pub use driver::{run_algorithm, Algorithm, RunConfig, RunOutput, RunStats};
pub use error::{Error, Result};
pub use graph::{EdgeRecord, EdgeSource, GraphFile, MemoryGraph};
pub use io::IoContext;
pub use tree::TreeStore;
