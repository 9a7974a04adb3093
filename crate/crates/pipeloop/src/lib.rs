//! Network documents, reports and the `pipeloop` command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod document;
pub mod report;

pub use cli::{run, run_with};
pub use document::{parse_network, serialize, DocumentError, NetworkDocument};
