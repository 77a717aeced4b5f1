use num_complex::Complex64;

use crate::spectra::{ComplexMatrix, DensityOperator};

use super::ChannelError;

/// Maximum `|sum_k K_k^dagger K_k - I|` entry for a trace-preserving family.
pub const COMPLETENESS_TOL: f64 = 1e-10;

/// A CPTP map `rho -> sum_k K_k rho K_k^dagger`.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    operators: Vec<ComplexMatrix>,
    label: String,
}

impl KrausChannel {
    pub fn new(
        operators: Vec<ComplexMatrix>,
        label: impl Into<String>,
    ) -> Result<Self, ChannelError> {
        let label = label.into();
        let first = operators.first().ok_or(ChannelError::EmptyChannel)?;
        let (rows, cols) = (first.rows(), first.cols());
        if operators
            .iter()
            .any(|k| k.rows() != rows || k.cols() != cols)
        {
            return Err(ChannelError::RaggedOperators);
        }
        let residual = completeness_residual(&operators);
        if residual > COMPLETENESS_TOL {
            return Err(ChannelError::NotTracePreserving { label, residual });
        }
        Ok(Self { operators, label })
    }

    /// Wraps a Kraus family without the completeness check. Use for maps that
    /// are trace preserving only on part of the state space; [`apply_channel`]
    /// still rejects any output whose trace drifts from one.
    pub fn from_operators(
        operators: Vec<ComplexMatrix>,
        label: impl Into<String>,
    ) -> Result<Self, ChannelError> {
        let first = operators.first().ok_or(ChannelError::EmptyChannel)?;
        let (rows, cols) = (first.rows(), first.cols());
        if operators
            .iter()
            .any(|k| k.rows() != rows || k.cols() != cols)
        {
            return Err(ChannelError::RaggedOperators);
        }
        Ok(Self {
            operators,
            label: label.into(),
        })
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.completeness_residual() <= COMPLETENESS_TOL
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn input_dim(&self) -> usize {
        self.operators[0].cols()
    }

    pub fn output_dim(&self) -> usize {
        self.operators[0].rows()
    }

    /// `max |sum_k K_k^dagger K_k - I|`.
    pub fn completeness_residual(&self) -> f64 {
        completeness_residual(&self.operators)
    }
}

fn completeness_residual(ops: &[ComplexMatrix]) -> f64 {
    let n = ops[0].cols();
    let mut sum = ComplexMatrix::zeros(n, n);
    for k in ops {
        sum = &sum + &(&k.adjoint() * k);
    }
    sum.max_abs_diff(&ComplexMatrix::identity(n))
}

pub fn apply_channel(
    ch: &KrausChannel,
    rho: &DensityOperator,
) -> Result<DensityOperator, ChannelError> {
    if rho.dim() != ch.input_dim() {
        return Err(ChannelError::DimensionMismatch {
            expected: ch.input_dim(),
            found: rho.dim(),
        });
    }
    let n = ch.output_dim();
    let mut out = ComplexMatrix::zeros(n, n);
    for k in ch.operators() {
        out = &out + &k.conjugate(rho.matrix())?;
    }
    let trace = out.trace().re;
    if (trace - 1.0).abs() > crate::spectra::TRACE_TOL {
        return Err(ChannelError::NotTracePreserving {
            label: ch.label().to_string(),
            residual: (trace - 1.0).abs(),
        });
    }
    Ok(DensityOperator::from_matrix(out)?)
}

/// Kraus operators of `rho_A -> tr_B[U (rho_A (x) sum_i w_i |i><i|) U^dagger]`:
/// `K_ij = sqrt(w_i) <j|_B U |i>_B`, ordered `(i, j)` lexicographically.
pub fn kraus_from_unitary_with_diagonal_ancilla(
    unitary: &ComplexMatrix,
    dim_a: usize,
    ancilla_weights: &[f64],
) -> Vec<ComplexMatrix> {
    let db = ancilla_weights.len();
    assert_eq!(unitary.rows(), dim_a * db, "unitary dimension");
    let mut ops = Vec::with_capacity(db * db);
    for (i, &wi) in ancilla_weights.iter().enumerate() {
        for j in 0..db {
            let mut k = ComplexMatrix::zeros(dim_a, dim_a);
            for a in 0..dim_a {
                for a2 in 0..dim_a {
                    k[(a, a2)] = unitary[(a * db + j, a2 * db + i)] * wi.sqrt();
                }
            }
            ops.push(k);
        }
    }
    ops
}

/// Kraus operators of `rho_B -> tr_A[U (|psi><psi| (x) rho_B) U^dagger]`:
/// `L_k = <k|_A U |psi>_A`.
pub fn kraus_from_unitary_with_pure_partner(
    unitary: &ComplexMatrix,
    psi: &[Complex64],
    dim_b: usize,
) -> Vec<ComplexMatrix> {
    let da = psi.len();
    assert_eq!(unitary.rows(), da * dim_b, "unitary dimension");
    (0..da)
        .map(|k| {
            let mut l = ComplexMatrix::zeros(dim_b, dim_b);
            for b in 0..dim_b {
                for b2 in 0..dim_b {
                    l[(b, b2)] = (0..da)
                        .map(|a| unitary[(k * dim_b + b, a * dim_b + b2)] * psi[a])
                        .sum();
                }
            }
            l
        })
        .collect()
}
