//! Dense complex linear algebra for operators on up to eight qubits.

mod eig;
mod matrix;
mod ops;
mod ortho;

pub use eig::{hermitian_eig, Eigen, HERMITIAN_TOL};
pub use matrix::{inner, kron, norm, ComplexMatrix, C64};
pub(crate) use matrix::ZERO;
pub use ops::{
    apply_local, bit_of, conjugate_local, embed_operator, exact_log2, local_offsets, partial_trace, psd_sqrt, PSD_TOL,
};
pub(crate) use ops::psd_sqrt_clamped;
pub use ortho::{orthonormal_columns, orthonormal_complement, ORTHONORMAL_TOL};

/// Relative threshold for every numerical rank decision.
pub const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericsError {
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not positive semidefinite (eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("columns are not orthonormal (max deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("qubit set has duplicates or out-of-range entries")]
    BadQubitSet,
    #[error("non-finite matrix entry")]
    NonFinite,
}
