//! Reference machinery: an independent DFS oracle, edge classification,
//! validity certificates and the chain-reaction audit.

pub mod artifact;
pub mod audit;
pub mod classify;
pub mod fixture;
pub mod oracle;

pub use artifact::{read_artifact, verify_artifact, write_artifact, Artifact};
pub use audit::{chain_reaction_audit, AuditRecord};
pub use classify::{
    class_counts, classify_edge, compute_upsilon, is_dfs_tree, upsilon_at_least, Certificate,
    EdgeClass,
};
pub use oracle::{inmem_dfs_oracle, BatchOrder, OrderedTree, TreeView};
