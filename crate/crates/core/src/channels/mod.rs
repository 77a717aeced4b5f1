//! Generalized amplitude-damping channel: joint unitary, system and
//! environment Kraus maps, Markovian time parameterization and the
//! closed-form evolved states.

mod gadc;
mod kraus;

use thiserror::Error;

use crate::spectra::SpectraError;

pub use gadc::{
    environment_hamiltonian, environment_kraus, environment_output, environment_state,
    gadc_unitary, initial_environment_state, initial_joint_state, initial_system_state,
    iterate_map_check, joint_output, joint_output_with, joint_state, system_hamiltonian,
    system_kraus, system_output, system_state, unitarity_defect_of_gadc,
};
pub use kraus::{
    apply_channel, kraus_from_unitary_with_diagonal_ancilla, kraus_from_unitary_with_pure_partner,
    KrausChannel, COMPLETENESS_TOL,
};

/// Ground and excited energies of the system. The environment levels share
/// the same gap, so every energy is reported in units of `E_e - E_g`.
pub const GROUND_ENERGY: f64 = 0.0;
pub const EXCITED_ENERGY: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("transition probability {p} outside [0, 1]")]
    ProbabilityOutOfRange { p: f64 },
    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("environment gap {environment} differs from system gap {system}")]
    GapMismatch { system: f64, environment: f64 },
    #[error("time must be non-negative and finite, got {t}")]
    NegativeTime { t: f64 },
    #[error("step count must be at least 1, got {n_steps}")]
    InvalidStepCount { n_steps: usize },
    #[error("per-step probability {p} exceeds 1 with {n_steps} steps")]
    StepProbabilityTooLarge { p: f64, n_steps: usize },
    #[error("channel has no Kraus operators")]
    EmptyChannel,
    #[error("Kraus operators have different shapes")]
    RaggedOperators,
    #[error("channel `{label}` is not trace preserving (residual {residual:e})")]
    NotTracePreserving { label: String, residual: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Spectra(#[from] SpectraError),
}

/// Thermal weights `(w0, w1)` of the environment qubit for inverse
/// temperature `beta_gap = beta (E1 - E0)`.
pub fn thermal_weights(beta_gap: f64) -> (f64, f64) {
    let w0 = 1.0 / (1.0 + (-beta_gap).exp());
    (w0, 1.0 - w0)
}

/// Cumulative transition probability `1 - exp(-Gamma t)`.
pub fn p_of_t(gamma_rate: f64, t: f64) -> Result<f64, ChannelError> {
    if !(gamma_rate > 0.0 && gamma_rate.is_finite()) {
        return Err(ChannelError::InvalidParameter {
            name: "gamma_rate",
            value: gamma_rate,
        });
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(ChannelError::NegativeTime { t });
    }
    Ok(-(-gamma_rate * t).exp_m1())
}

/// Parameters of one GADC scenario.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GadcParams {
    /// Transition probability of a single channel application.
    pub p: f64,
    pub w0: f64,
    pub w1: f64,
    /// Amplitude of `|g>` in the pure system preparation.
    pub alpha: f64,
    /// Transition rate per unit time.
    pub gamma_rate: f64,
    pub e_g: f64,
    pub e_e: f64,
    pub e_0: f64,
    pub e_1: f64,
}

impl GadcParams {
    /// Builds parameters from the environment's inverse temperature in gap
    /// units; `p` starts at zero.
    pub fn from_beta(alpha: f64, beta_gap: f64, gamma_rate: f64) -> Result<Self, ChannelError> {
        if !(beta_gap > 0.0) || beta_gap.is_nan() {
            return Err(ChannelError::InvalidParameter {
                name: "beta",
                value: beta_gap,
            });
        }
        let (w0, _) = thermal_weights(beta_gap);
        Self::from_weights(alpha, w0, gamma_rate)
    }

    /// Builds parameters from the ground-level weight directly.
    pub fn from_weights(alpha: f64, w0: f64, gamma_rate: f64) -> Result<Self, ChannelError> {
        let params = Self {
            p: 0.0,
            w0,
            w1: 1.0 - w0,
            alpha,
            gamma_rate,
            e_g: GROUND_ENERGY,
            e_e: EXCITED_ENERGY,
            e_0: GROUND_ENERGY,
            e_1: EXCITED_ENERGY,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_p(&self, p: f64) -> Result<Self, ChannelError> {
        let out = Self { p, ..*self };
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(ChannelError::ProbabilityOutOfRange { p: self.p });
        }
        for (name, value) in [("alpha", self.alpha), ("w0", self.w0), ("w1", self.w1)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ChannelError::InvalidParameter { name, value });
            }
        }
        if (self.w0 + self.w1 - 1.0).abs() > 1e-12 {
            return Err(ChannelError::InvalidParameter {
                name: "w0 + w1",
                value: self.w0 + self.w1,
            });
        }
        if !(self.gamma_rate > 0.0 && self.gamma_rate.is_finite()) {
            return Err(ChannelError::InvalidParameter {
                name: "gamma_rate",
                value: self.gamma_rate,
            });
        }
        let system = self.e_e - self.e_g;
        let environment = self.e_1 - self.e_0;
        if (system - environment).abs() > 1e-12 {
            return Err(ChannelError::GapMismatch {
                system,
                environment,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::DensityOperator;
    use num_complex::Complex64;
    use proptest::prelude::*;

    #[test]
    fn thermal_weights_at_unit_beta() {
        let (w0, w1) = thermal_weights(1.0);
        assert!((0.7305..=0.7315).contains(&w0));
        assert_eq!(w0 + w1, 1.0);
        // detailed balance
        assert!((w1 - w0 * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn p_of_t_values() {
        assert_eq!(p_of_t(1.0, 0.0).unwrap(), 0.0);
        assert!((p_of_t(1.0, 1.0).unwrap() - (1.0 - (-1.0f64).exp())).abs() < 1e-16);
        assert!((p_of_t(1.0, 1.0).unwrap() - 0.6321).abs() < 1e-4);
        assert!((p_of_t(1.0, 800.0).unwrap() - 1.0).abs() < 1e-16);
        assert!(matches!(
            p_of_t(1.0, -0.5),
            Err(ChannelError::NegativeTime { .. })
        ));
        assert!(p_of_t(0.0, 1.0).is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(GadcParams::from_beta(1.2, 1.0, 1.0).is_err());
        assert!(GadcParams::from_beta(0.5, -1.0, 1.0).is_err());
        assert!(GadcParams::from_beta(0.5, 1.0, 0.0).is_err());
        assert!(GadcParams::from_weights(0.5, 1.1, 1.0).is_err());
        let p = GadcParams::from_beta(0.5, 1.0, 1.0).unwrap();
        assert!(p.with_p(1.01).is_err());
        let skewed = GadcParams { e_1: 2.0, ..p };
        assert!(matches!(
            skewed.validate(),
            Err(ChannelError::GapMismatch { .. })
        ));
    }

    fn random_qubit_state(entries: &[(f64, f64)]) -> Option<DensityOperator> {
        let g = crate::spectra::ComplexMatrix::new(
            2,
            2,
            entries
                .iter()
                .map(|&(re, im)| Complex64::new(re, im))
                .collect(),
        )
        .unwrap();
        let m = &g * &g.adjoint();
        let tr = m.trace().re;
        (tr > 1e-6).then(|| DensityOperator::from_matrix(m.scale(1.0 / tr)).unwrap())
    }

    proptest! {
        #[test]
        fn channels_are_trace_preserving_and_positive(
            alpha in 0.0f64..=1.0,
            w0 in 0.0f64..=1.0,
            p in 0.0f64..=1.0,
            entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4),
        ) {
            let params = GadcParams::from_weights(alpha, w0, 1.0).unwrap().with_p(p).unwrap();
            let rho = match random_qubit_state(&entries) {
                Some(r) => r,
                None => return Ok(()),
            };
            let sys = system_kraus(&params).unwrap();
            prop_assert!(sys.completeness_residual() <= COMPLETENESS_TOL);
            let out = apply_channel(&sys, &rho).unwrap();
            prop_assert!((out.operator().trace() - 1.0).abs() <= 1e-10);

            // environment map: complete on diagonal inputs only
            let env = environment_kraus(&params).unwrap();
            let m = rho.matrix();
            let diag = DensityOperator::diagonal(&[m[(0, 0)].re, m[(1, 1)].re]).unwrap();
            let out = apply_channel(&env, &diag).unwrap();
            prop_assert!((out.operator().trace() - 1.0).abs() <= 1e-10);
        }
    }
}
