//! The fixtures directory: the printed 6×6 matrix and stored search witnesses.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use quasiperm_core::classify::transport_witness;
use quasiperm_core::perm::canonical_with_op;
use quasiperm_core::{PermSet, RationalMatrix};

use crate::format::{load_witness, FormatError, WitnessFile};

pub const FIXTURES_ENV: &str = "QUASIPERM_FIXTURES";

/// `$QUASIPERM_FIXTURES`, or the `fixtures` directory of this crate.
pub fn fixtures_dir() -> PathBuf {
    std::env::var_os(FIXTURES_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures")))
}

pub fn six_by_six_path(dir: &Path) -> PathBuf {
    dir.join("six_by_six.json")
}

pub fn witness_path(dir: &Path, s: PermSet) -> PathBuf {
    let rep = canonical_with_op(s, true).0;
    dir.join("witnesses").join(format!("{:06x}.json", rep.mask()))
}

/// Witnesses keyed by canonical class (symmetry and complement).
#[derive(Debug, Clone, Default)]
pub struct WitnessStore {
    by_class: BTreeMap<u32, WitnessFile>,
}

impl WitnessStore {
    /// Reads `dir/witnesses/*.json`; a missing directory gives an empty store.
    pub fn load(dir: &Path) -> Result<Self, FormatError> {
        let mut store = Self::default();
        let sub = dir.join("witnesses");
        let Ok(listing) = fs::read_dir(&sub) else {
            return Ok(store);
        };
        let mut paths: Vec<PathBuf> = listing
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        for path in paths {
            let w = load_witness(&path)?;
            store.insert(w);
        }
        Ok(store)
    }

    pub fn insert(&mut self, w: WitnessFile) {
        let rep = canonical_with_op(w.set, true).0;
        self.by_class.insert(rep.mask(), w);
    }

    pub fn len(&self) -> usize {
        self.by_class.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_class.is_empty()
    }

    pub fn files(&self) -> impl Iterator<Item = &WitnessFile> {
        self.by_class.values()
    }

    /// Low/high matrices for `s`, carried over from the stored member of its class.
    /// The caller still has to verify them.
    pub fn lookup(&self, s: PermSet) -> Option<(RationalMatrix, RationalMatrix)> {
        let (rep, op_s, comp_s) = canonical_with_op(s, true);
        let w = self.by_class.get(&rep.mask())?;
        let (_, op_w, comp_w) = canonical_with_op(w.set, true);
        // s = comp?(op_s⁻¹(op_w(w.set))).
        let op = op_s.group_inverse().then_after(op_w);
        let complemented = comp_s != comp_w;
        let image = w.set.apply_symmetry(op);
        let image = if complemented { image.complement() } else { image };
        if image != s {
            return None;
        }
        Some(transport_witness(&w.low, &w.high, op, complemented))
    }
}
