//! Tensor products, partial traces and partial transposes on `A (x) B`.
//!
//! Joint basis index for `|a, b>` is `a * d_B + b`, so for two qubits the
//! order is `|0,0>, |0,1>, |1,0>, |1,1>`.

use num_complex::Complex64;

use super::eigen::eig_hermitian;
use super::matrix::{ComplexMatrix, DensityOperator, HermitianOperator};
use super::SpectraError;

/// Which factor of a bipartite space an operation refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Local dimensions `(d_A, d_B)` of a bipartite space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BipartiteDims {
    pub a: usize,
    pub b: usize,
}

impl BipartiteDims {
    pub const QUBITS: Self = Self { a: 2, b: 2 };

    pub fn new(a: usize, b: usize) -> Self {
        Self { a, b }
    }

    pub fn total(&self) -> usize {
        self.a * self.b
    }

    fn check(&self, dim: usize) -> Result<(), SpectraError> {
        if self.total() != dim {
            return Err(SpectraError::DimensionMismatch {
                expected: self.total(),
                found: dim,
            });
        }
        Ok(())
    }
}

/// Kronecker product `A (x) B`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (p, q) = (b.rows(), b.cols());
    let mut out = ComplexMatrix::zeros(a.rows() * p, a.cols() * q);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let aij = a[(i, j)];
            for k in 0..p {
                for l in 0..q {
                    out[(i * p + k, j * q + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Product state `rho_A (x) rho_B`.
pub fn product_state(
    a: &DensityOperator,
    b: &DensityOperator,
) -> Result<DensityOperator, SpectraError> {
    DensityOperator::from_matrix(tensor_product(a.matrix(), b.matrix()))
}

/// Traces out the factor not named by `keep`.
pub fn partial_trace(
    joint: &DensityOperator,
    keep: Subsystem,
    dims: BipartiteDims,
) -> Result<DensityOperator, SpectraError> {
    dims.check(joint.dim())?;
    let m = joint.matrix();
    let (da, db) = (dims.a, dims.b);
    let out = match keep {
        Subsystem::A => {
            let mut r = ComplexMatrix::zeros(da, da);
            for i in 0..da {
                for j in 0..da {
                    r[(i, j)] = (0..db).map(|k| m[(i * db + k, j * db + k)]).sum();
                }
            }
            r
        }
        Subsystem::B => {
            let mut r = ComplexMatrix::zeros(db, db);
            for k in 0..db {
                for l in 0..db {
                    r[(k, l)] = (0..da).map(|i| m[(i * db + k, i * db + l)]).sum();
                }
            }
            r
        }
    };
    DensityOperator::from_matrix(out)
}

/// Transposes the indices of one factor: `<a b| X^{T_A} |a' b'> = <a' b| X |a b'>`.
pub fn partial_transpose(
    joint: &HermitianOperator,
    subsystem: Subsystem,
    dims: BipartiteDims,
) -> Result<HermitianOperator, SpectraError> {
    dims.check(joint.dim())?;
    let m = joint.matrix();
    let (da, db) = (dims.a, dims.b);
    let mut out = ComplexMatrix::zeros(m.rows(), m.cols());
    for a in 0..da {
        for b in 0..db {
            for a2 in 0..da {
                for b2 in 0..db {
                    let src = match subsystem {
                        Subsystem::A => m[(a2 * db + b, a * db + b2)],
                        Subsystem::B => m[(a * db + b2, a2 * db + b)],
                    };
                    out[(a * db + b, a2 * db + b2)] = src;
                }
            }
        }
    }
    HermitianOperator::new(out)
}

/// Trace norm `sum_i |lambda_i|` of a Hermitian operator.
pub fn trace_norm(op: &HermitianOperator) -> Result<f64, SpectraError> {
    Ok(eig_hermitian(op)?
        .eigenvalues()
        .iter()
        .map(|l| l.abs())
        .sum())
}

/// `(|00> + |11>) / sqrt(2)` on two qubits.
pub fn bell_state() -> DensityOperator {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = Complex64::new(0.0, 0.0);
    let psi = [Complex64::new(h, 0.0), z, z, Complex64::new(h, 0.0)];
    DensityOperator::pure(&psi).expect("normalized")
}
