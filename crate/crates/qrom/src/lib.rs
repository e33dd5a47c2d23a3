//! Std companion to `qrom-core`: PGM/CSV ingestion, JSON persistence of
//! states and memories, the benchmark runner and the `qrom` command line.

pub mod benchmark;
pub mod commands;
mod error;
pub mod formats;
pub mod persist;

pub use error::{Error, Result};
