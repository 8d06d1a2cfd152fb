//! Case-study programs (Shor order finding and HHL) and bug injection.

mod bugs;
mod hhl;
mod shor;

pub use bugs::{bug_examples, inject_bug, BugExample, BugKind, BugSpec};
pub use hhl::{build_hhl, build_hhl_from, hhl_data, hhl_source, HhlData, HHL_A, HHL_B, HHL_C, HHL_T0};
pub use shor::{build_shor, shor_source, SHOR_ACCEPT};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CaseError {
    #[error("eigenvalues {found:?} are not within {tolerance} of {{1, 1, 3, 3}}")]
    EigenvalueMismatch { found: alloc::vec::Vec<f64>, tolerance: f64 },
    #[error("bug target {path:?}: {reason}")]
    BadTarget { path: alloc::vec::Vec<usize>, reason: &'static str },
}
