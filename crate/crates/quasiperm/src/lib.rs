//! File formats, the command line and parallel scans on top of `quasiperm-core`.

pub use quasiperm_core as core;

pub mod cli;
pub mod fixtures;
pub mod format;
pub mod mutation;
pub mod scan;
