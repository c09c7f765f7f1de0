//! Exact verification machinery for sets of 4-point permutation patterns whose
//! density sum forces quasirandomness.
//!
//! The crate is `no_std` (it needs `alloc`): every routine is a pure function on
//! exact rationals. File formats, the command line and parallel scans live in the
//! `quasiperm` companion crate.
#![no_std]

extern crate alloc;

pub mod classify;
pub mod flag;
pub mod perm;
pub mod perturbation;
pub mod rational;
pub mod step;

pub use perm::{PermSet, Permutation, SymmetryOp};
pub use rational::Rational;
pub use step::RationalMatrix;
