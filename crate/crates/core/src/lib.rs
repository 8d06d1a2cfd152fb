//! Projection-based runtime assertions for quantum while-programs.
//!
//! The crate is `no_std` (it needs `alloc`) and holds every algorithmic piece:
//! dense complex numerics, state representations, the projection lattice, the
//! while-language with its trajectory and exact interpreters, the assertion
//! compiler for measurement-restricted machines, the debugging statistics and
//! the Shor/HHL case-study builders. File IO, the CLI and report formats live in
//! the `proq` companion crate.

#![no_std]

extern crate alloc;

pub mod cases;
pub mod fmt;
pub mod lang;
pub mod lower;
pub mod numerics;
pub mod projections;
pub mod rng;
pub mod states;
pub mod stats;


pub use numerics::{ComplexMatrix, C64};


