//! Generalized amplitude-damping channel between a qubit system `S`
//! (`|g>`, `|e>`) and an effective environment qubit `E` (`|E0>`, `|E1>`).
//!
//! Joint basis order is `|g,E0>, |g,E1>, |e,E0>, |e,E1>`.

use num_complex::Complex64;

use crate::spectra::{
    product_state, BipartiteDims, ComplexMatrix, DensityOperator, HermitianOperator,
};

use super::kraus::{apply_channel, KrausChannel};
use super::{p_of_t, ChannelError, GadcParams};

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn check_probability(p: f64) -> Result<(), ChannelError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ChannelError::ProbabilityOutOfRange { p });
    }
    Ok(())
}

/// Joint evolution matrix for transition probability `p`:
/// `|g,E1>` and `|e,E0>` mix with amplitudes `sqrt(1-p)`, `sqrt(p)` (both
/// off-diagonal amplitudes positive); the other two basis states are left
/// alone. `p = 0` is the identity and `p = 1` the SWAP gate.
///
/// For `0 < p < 1` the matrix is not unitary: `U U^dagger - I` carries
/// `2 sqrt(p (1 - p))` in the mixed block (see [`unitarity_defect_of_gadc`]).
/// Cross terms between `|g,E1>` and `|e,E0>` vanish for a product input with a
/// diagonal environment, so traces and both reduced states stay valid.
pub fn gadc_unitary(p: f64) -> Result<ComplexMatrix, ChannelError> {
    check_probability(p)?;
    let (c, s) = ((1.0 - p).sqrt(), p.sqrt());
    Ok(ComplexMatrix::from_real_rows(&[
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, c, s, 0.0],
        &[0.0, s, c, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
    ])?)
}

/// `max |U U^dagger - I|` of [`gadc_unitary`], which is `2 sqrt(p (1 - p))`.
pub fn unitarity_defect_of_gadc(p: f64) -> Result<f64, ChannelError> {
    Ok(gadc_unitary(p)?.unitarity_defect())
}

/// The four system-side operators `K_00, K_01, K_10, K_11`.
pub fn system_kraus(params: &GadcParams) -> Result<KrausChannel, ChannelError> {
    params.validate()?;
    let p = params.p;
    let (r0, r1) = (params.w0.sqrt(), params.w1.sqrt());
    let (c, s) = ((1.0 - p).sqrt(), p.sqrt());
    let k00 = ComplexMatrix::from_real_rows(&[&[r0, 0.0], &[0.0, r0 * c]])?;
    let k01 = ComplexMatrix::from_real_rows(&[&[0.0, r0 * s], &[0.0, 0.0]])?;
    let k10 = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[r1 * s, 0.0]])?;
    let k11 = ComplexMatrix::from_real_rows(&[&[r1 * c, 0.0], &[0.0, r1]])?;
    KrausChannel::new(vec![k00, k01, k10, k11], "gadc-system")
}

/// The two environment-side operators `L_0 = <g|U|psi(0)>`, `L_1 = <e|U|psi(0)>`
/// for the pure system preparation `alpha|g> + sqrt(1 - alpha^2)|e>`.
///
/// `sum_k L_k^dagger L_k` equals the identity only on its diagonal; the
/// off-diagonal is `2 sqrt(p (1 - p)) alpha sqrt(1 - alpha^2)`. The map is
/// trace preserving on incoherent inputs such as the thermal state.
pub fn environment_kraus(params: &GadcParams) -> Result<KrausChannel, ChannelError> {
    params.validate()?;
    let p = params.p;
    let a = params.alpha;
    let b = (1.0 - a * a).sqrt();
    let (c, s) = ((1.0 - p).sqrt(), p.sqrt());
    // rows index the output level (E0, E1), columns the input level
    let l0 = ComplexMatrix::from_real_rows(&[&[a, 0.0], &[s * b, c * a]])?;
    let l1 = ComplexMatrix::from_real_rows(&[&[c * b, s * a], &[0.0, b]])?;
    KrausChannel::from_operators(vec![l0, l1], "gadc-environment")
}

/// `alpha|g> + sqrt(1 - alpha^2)|e>` as a density operator.
pub fn initial_system_state(alpha: f64) -> Result<DensityOperator, ChannelError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(ChannelError::InvalidParameter {
            name: "alpha",
            value: alpha,
        });
    }
    Ok(DensityOperator::pure(&[
        re(alpha),
        re((1.0 - alpha * alpha).sqrt()),
    ])?)
}

/// Thermal environment qubit `w0|E0><E0| + w1|E1><E1|`.
pub fn initial_environment_state(params: &GadcParams) -> Result<DensityOperator, ChannelError> {
    Ok(DensityOperator::diagonal(&[params.w0, params.w1])?)
}

pub fn initial_joint_state(params: &GadcParams) -> Result<DensityOperator, ChannelError> {
    Ok(product_state(
        &initial_system_state(params.alpha)?,
        &initial_environment_state(params)?,
    )?)
}

pub fn system_hamiltonian(params: &GadcParams) -> HermitianOperator {
    HermitianOperator::from_real_diagonal(&[params.e_g, params.e_e])
}

pub fn environment_hamiltonian(params: &GadcParams) -> HermitianOperator {
    HermitianOperator::from_real_diagonal(&[params.e_0, params.e_1])
}

/// Closed-form system state after one application of the channel at `params.p`.
pub fn system_output(params: &GadcParams) -> Result<DensityOperator, ChannelError> {
    params.validate()?;
    system_closed_form(params, 1.0 - params.p, params.p)
}

/// Closed-form environment state after one application of the channel at `params.p`.
pub fn environment_output(params: &GadcParams) -> Result<DensityOperator, ChannelError> {
    params.validate()?;
    environment_closed_form(params, 1.0 - params.p, params.p)
}

/// `rho_S(t)` under Markovian repetition: `(1 - p)` becomes `exp(-Gamma t)`.
pub fn system_state(params: &GadcParams, t: f64) -> Result<DensityOperator, ChannelError> {
    params.validate()?;
    let p = p_of_t(params.gamma_rate, t)?;
    system_closed_form(params, (-params.gamma_rate * t).exp(), p)
}

/// `rho_E(t)` under Markovian repetition.
pub fn environment_state(params: &GadcParams, t: f64) -> Result<DensityOperator, ChannelError> {
    params.validate()?;
    let p = p_of_t(params.gamma_rate, t)?;
    environment_closed_form(params, (-params.gamma_rate * t).exp(), p)
}

// `decay` is the surviving factor (1 - p or exp(-Gamma t)) and `flip` = 1 - decay,
// passed separately so neither is formed by cancellation.
fn system_closed_form(
    params: &GadcParams,
    decay: f64,
    flip: f64,
) -> Result<DensityOperator, ChannelError> {
    let a2 = params.alpha * params.alpha;
    let b2 = 1.0 - a2;
    let (w0, w1) = (params.w0, params.w1);
    let a11 = (a2 + b2 * flip) * w0 + a2 * decay * w1;
    let a22 = b2 * decay * w0 + (b2 + a2 * flip) * w1;
    let a12 = params.alpha * b2.sqrt() * decay.sqrt();
    Ok(DensityOperator::from_matrix(
        ComplexMatrix::from_real_rows(&[&[a11, a12], &[a12, a22]])?,
    )?)
}

fn environment_closed_form(
    params: &GadcParams,
    decay: f64,
    flip: f64,
) -> Result<DensityOperator, ChannelError> {
    let a2 = params.alpha * params.alpha;
    let b2 = 1.0 - a2;
    let (w0, w1) = (params.w0, params.w1);
    let b11 = (a2 + b2 * decay) * w0 + a2 * flip * w1;
    let b22 = b2 * flip * w0 + (b2 + a2 * decay) * w1;
    let b12 = params.alpha * b2.sqrt() * flip.sqrt();
    Ok(DensityOperator::from_matrix(
        ComplexMatrix::from_real_rows(&[&[b11, b12], &[b12, b22]])?,
    )?)
}

/// `U (rho_S(0) (x) rho_E(0)) U^dagger` at `params.p`.
pub fn joint_output(params: &GadcParams) -> Result<DensityOperator, ChannelError> {
    joint_output_with(params, &gadc_unitary(params.p)?)
}

/// Same as [`joint_output`] but with a caller-supplied 4x4 unitary.
pub fn joint_output_with(
    params: &GadcParams,
    unitary: &ComplexMatrix,
) -> Result<DensityOperator, ChannelError> {
    params.validate()?;
    let rho0 = initial_joint_state(params)?;
    if unitary.rows() != BipartiteDims::QUBITS.total() || !unitary.is_square() {
        return Err(ChannelError::DimensionMismatch {
            expected: 4,
            found: unitary.rows(),
        });
    }
    Ok(DensityOperator::from_matrix(
        unitary.conjugate(rho0.matrix())?,
    )?)
}

/// Joint state at time `t`, using `p = 1 - exp(-Gamma t)` in the unitary.
pub fn joint_state(params: &GadcParams, t: f64) -> Result<DensityOperator, ChannelError> {
    let p = p_of_t(params.gamma_rate, t)?;
    joint_output(&params.with_p(p)?)
}

/// Applies the system channel `n_steps` times with per-step probability
/// `Gamma t / n_steps`, starting from the pure preparation.
pub fn iterate_map_check(
    params: &GadcParams,
    t: f64,
    n_steps: usize,
) -> Result<DensityOperator, ChannelError> {
    if n_steps == 0 {
        return Err(ChannelError::InvalidStepCount { n_steps });
    }
    if t < 0.0 || !t.is_finite() {
        return Err(ChannelError::NegativeTime { t });
    }
    let step_p = params.gamma_rate * t / n_steps as f64;
    if step_p > 1.0 {
        return Err(ChannelError::StepProbabilityTooLarge { p: step_p, n_steps });
    }
    let channel = system_kraus(&params.with_p(step_p)?)?;
    let mut rho = initial_system_state(params.alpha)?;
    for _ in 0..n_steps {
        rho = apply_channel(&channel, &rho)?;
    }
    Ok(rho)
}
