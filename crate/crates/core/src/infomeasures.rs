//! Entropy, coherence, negativity and mutual information of qubit states.

use serde::Serialize;
use thiserror::Error;

use crate::spectra::{
    eig_hermitian, partial_trace, partial_transpose, trace_norm, BipartiteDims, DensityOperator,
    SpectraError, Subsystem,
};

/// Eigenvalues inside `[ENTROPY_FLOOR_LOW, ENTROPY_FLOOR_HIGH]` count as zero in `lambda log lambda`.
pub const ENTROPY_FLOOR_LOW: f64 = -1e-10;
pub const ENTROPY_FLOOR_HIGH: f64 = 1e-12;
/// Largest accepted disagreement between the two negativity formulas.
pub const NEGATIVITY_ROUTE_TOL: f64 = 1e-10;
pub const DEFAULT_MASK_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InfoError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("no points pass the mask threshold {threshold:e}")]
    EmptyMask { threshold: f64 },
    #[error("negativity routes disagree: trace norm gives {trace_norm_route:e}, eigenvalue sum gives {eigen_route:e}")]
    RouteDisagreement {
        trace_norm_route: f64,
        eigen_route: f64,
    },
    #[error("eigenvalue {eigenvalue:e} below the entropy floor")]
    NegativeEigenvalue { eigenvalue: f64 },
    #[error(transparent)]
    Spectra(#[from] SpectraError),
}

/// `-tr(rho log2 rho)` in bits.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64, InfoError> {
    let dec = eig_hermitian(rho.operator())?;
    let mut s = 0.0;
    for &l in dec.eigenvalues() {
        if l < ENTROPY_FLOOR_LOW {
            return Err(InfoError::NegativeEigenvalue { eigenvalue: l });
        }
        if l > ENTROPY_FLOOR_HIGH {
            s -= l * l.log2();
        }
    }
    Ok(s.clamp(0.0, (rho.dim() as f64).log2()))
}

/// Sum of absolute off-diagonal entries in the computational (energy) basis.
pub fn l1_coherence(rho: &DensityOperator) -> f64 {
    let m = rho.matrix();
    let mut c = 0.0;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if i != j {
                c += m[(i, j)].norm();
            }
        }
    }
    c
}

/// Negativity of `joint` with respect to subsystem `A`, computed as
/// `(||rho^T_A||_1 - 1) / 2` and as the sum of `|negative eigenvalues|`.
pub fn negativity_routes(
    joint: &DensityOperator,
    dims: BipartiteDims,
) -> Result<(f64, f64), InfoError> {
    if joint.dim() != dims.total() {
        return Err(SpectraError::DimensionMismatch {
            expected: dims.total(),
            found: joint.dim(),
        }
        .into());
    }
    let pt = partial_transpose(joint.operator(), Subsystem::A, dims)?;
    let norm = trace_norm(&pt)?;
    let via_norm = ((norm - 1.0) / 2.0).max(0.0);
    let via_eigen: f64 = eig_hermitian(&pt)?
        .eigenvalues()
        .iter()
        .filter(|&&l| l < 0.0)
        .map(|l| -l)
        .sum();
    Ok((via_norm, via_eigen))
}

/// Entanglement negativity; errors if the two routes disagree.
pub fn negativity(joint: &DensityOperator, dims: BipartiteDims) -> Result<f64, InfoError> {
    let (a, b) = negativity_routes(joint, dims)?;
    if (a - b).abs() > NEGATIVITY_ROUTE_TOL {
        return Err(InfoError::RouteDisagreement {
            trace_norm_route: a,
            eigen_route: b,
        });
    }
    Ok(b)
}

/// `S(A) + S(B) - S(AB)` in bits.
pub fn mutual_information(joint: &DensityOperator, dims: BipartiteDims) -> Result<f64, InfoError> {
    let a = partial_trace(joint, Subsystem::A, dims)?;
    let b = partial_trace(joint, Subsystem::B, dims)?;
    let i = von_neumann_entropy(&a)? + von_neumann_entropy(&b)? - von_neumann_entropy(joint)?;
    Ok(i.max(0.0))
}

/// Pointwise `|q_s + q_e|`.
pub fn heat_asymmetry(q_s: &[f64], q_e: &[f64]) -> Result<Vec<f64>, InfoError> {
    if q_s.len() != q_e.len() {
        return Err(InfoError::LengthMismatch {
            left: q_s.len(),
            right: q_e.len(),
        });
    }
    Ok(q_s.iter().zip(q_e).map(|(a, b)| (a + b).abs()).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProportionalityReport {
    pub ratio_mean: f64,
    /// `max_i |r_i - mean| / |mean|`.
    pub ratio_relative_spread: f64,
    pub points_used: usize,
}

/// Statistics of `a_i / b_i` over the points where both `|a_i|` and `|b_i|`
/// exceed `mask_threshold`.
pub fn proportionality_report(
    a: &[f64],
    b: &[f64],
    mask_threshold: f64,
) -> Result<ProportionalityReport, InfoError> {
    if a.len() != b.len() {
        return Err(InfoError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let ratios: Vec<f64> = a
        .iter()
        .zip(b)
        .filter(|(x, y)| x.abs() > mask_threshold && y.abs() > mask_threshold)
        .map(|(x, y)| x / y)
        .collect();
    if ratios.is_empty() {
        return Err(InfoError::EmptyMask {
            threshold: mask_threshold,
        });
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let spread = ratios.iter().map(|r| (r - mean).abs()).fold(0.0, f64::max) / mean.abs();
    Ok(ProportionalityReport {
        ratio_mean: mean,
        ratio_relative_spread: spread,
        points_used: ratios.len(),
    })
}

/// Information measures along one time grid. Entropies in bits.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct InfoSeries {
    pub times: Vec<f64>,
    pub entropy_s: Vec<f64>,
    pub entropy_e: Vec<f64>,
    pub entropy_se: Vec<f64>,
    pub coherence_s: Vec<f64>,
    pub coherence_e: Vec<f64>,
    pub negativity: Vec<f64>,
    pub mutual_information: Vec<f64>,
    pub heat_asymmetry: Vec<f64>,
}
