//! Dense complex linear algebra for the small (2 to 16 dimensional) operators
//! used throughout the crate.

mod bipartite;
mod eigen;
mod matrix;

use thiserror::Error;

pub use bipartite::{
    bell_state, partial_trace, partial_transpose, product_state, tensor_product, trace_norm,
    BipartiteDims, Subsystem,
};
pub use eigen::{eig_hermitian, SpectralDecomposition, JACOBI_MAX_SWEEPS, JACOBI_TOL};
pub use matrix::{
    ComplexMatrix, DensityOperator, HermitianOperator, HERMITIAN_TOL, PSD_TOL, TRACE_TOL,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error("matrix must have at least one row and column")]
    EmptyMatrix,
    #[error("expected {expected} entries, found {found}")]
    EntryCount { expected: usize, found: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not Hermitian (max |M - M^dagger| = {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("trace is {trace}, expected 1")]
    TraceNotOne { trace: f64 },
    #[error("eigenvalue {eigenvalue:e} below positivity tolerance")]
    NotPositive { eigenvalue: f64 },
    #[error("Jacobi did not converge after {sweeps} sweeps (off-diagonal norm {off_diagonal:e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },
}
