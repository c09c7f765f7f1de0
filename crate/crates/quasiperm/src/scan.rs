//! Parallel version of the full classification scan.

use quasiperm_core::classify::{
    assemble_scan, classify_class, scan_chunk, Budget, ChunkSummary, CoverTables, HessianTable, ScanReport,
};
use quasiperm_core::perm::{SymmetryTables, FULL_MASK};
use rayon::prelude::*;

use crate::fixtures::WitnessStore;

const CHUNKS: u32 = 256;

/// Same result as `classify::full_scan`, with both phases spread over the rayon pool.
pub fn parallel_scan(
    budget: &Budget,
    store: Option<&WitnessStore>,
    progress: &(dyn Fn(&str) + Sync),
) -> ScanReport {
    let symmetry = SymmetryTables::new();
    let covers = CoverTables::new();
    let width = (FULL_MASK + 1) / CHUNKS;
    progress("scanning 2^24 subsets by canonical class");
    let summary = (0..CHUNKS)
        .into_par_iter()
        .map(|i| scan_chunk(i * width, (i + 1) * width, &symmetry, &covers))
        .reduce(ChunkSummary::default, ChunkSummary::merge);
    progress(&format!(
        "{} classes, {} with constant cover; classifying those",
        summary.classes,
        summary.constant_cover.len()
    ));
    let table = HessianTable::new();
    let mut classes = summary.constant_cover.clone();
    classes.sort();
    let entries = classes
        .par_iter()
        .map(|c| {
            let supplied = store.and_then(|s| s.lookup(c.representative));
            classify_class(*c, supplied, budget, &table)
        })
        .collect();
    assemble_scan(&summary, entries)
}
