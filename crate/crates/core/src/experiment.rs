//! End-to-end GADC scenario: trajectories, first-law terms, information
//! measures and diagnostics on one uniform time grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channels::{
    self, environment_hamiltonian, environment_state, iterate_map_check, joint_state,
    system_hamiltonian, system_state, ChannelError, GadcParams,
};
use crate::firstlaw::{integrate_trajectory, FirstLawError, IntegratorSettings, ThermoTrajectory};
use crate::infomeasures::{
    self, heat_asymmetry, l1_coherence, mutual_information, negativity, proportionality_report,
    von_neumann_entropy, InfoError, InfoSeries, ProportionalityReport,
};
use crate::quadrature::{self, QuadratureError};
use crate::spectra::{partial_trace, BipartiteDims, Subsystem};

pub const WORK_TOL: f64 = 1e-12;
pub const ENERGY_CONSERVATION_TOL: f64 = 1e-10;
/// Step counts of the Markov-limit table written with every run.
pub const MARKOV_STEPS: [usize; 3] = [10, 100, 1000];
/// Relative tolerance when comparing runs that differ only in `Gamma`.
pub const COLLAPSE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("invalid config: {field} = {value}: {reason}")]
    InvalidConfig {
        field: &'static str,
        value: String,
        reason: &'static str,
    },
    #[error("work is nonzero: max |W| = {max_abs:e} exceeds {WORK_TOL:e}")]
    NonZeroWork { max_abs: f64 },
    #[error("energy not conserved: max |dU_S + dU_E| = {residual:e} exceeds {ENERGY_CONSERVATION_TOL:e}")]
    EnergyNotConserved { residual: f64 },
    #[error("{subsystem} first-law closure residual {residual:e} exceeds tolerance {tolerance:e} (worst at t = {t})")]
    ClosureViolation {
        subsystem: &'static str,
        residual: f64,
        tolerance: f64,
        t: f64,
    },
    #[error("Markov deviations are not strictly decreasing: {table:?}")]
    NotConverging { table: Vec<(usize, f64)> },
    #[error(transparent)]
    FirstLaw(#[from] FirstLawError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Info(#[from] InfoError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

impl ExperimentError {
    /// True for violations of a numerical invariant, false for bad input.
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Self::InvalidConfig { .. })
    }
}

/// Which artifacts a run should materialize.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSelection {
    pub thermo: bool,
    pub info: bool,
    pub diagnostics: bool,
    pub plots: bool,
}

impl Default for OutputSelection {
    fn default() -> Self {
        Self {
            thermo: true,
            info: true,
            diagnostics: true,
            plots: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub alpha: f64,
    /// Inverse temperature in units of the gap, `beta (E_e - E_g)`.
    pub beta: f64,
    pub gamma: f64,
    pub t_max: f64,
    pub n_samples: usize,
    pub integrator: IntegratorSettings,
    pub outputs: OutputSelection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            alpha: std::f64::consts::FRAC_1_SQRT_2,
            beta: 1.0,
            gamma: 1.0,
            t_max: 10.0,
            n_samples: 2001,
            integrator: IntegratorSettings::default(),
            outputs: OutputSelection::default(),
        }
    }
}

fn invalid(field: &'static str, value: impl ToString, reason: &'static str) -> ExperimentError {
    ExperimentError::InvalidConfig {
        field,
        value: value.to_string(),
        reason,
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(invalid("alpha", self.alpha, "must lie in [0, 1]"));
        }
        if !(self.beta > 0.0) {
            return Err(invalid("beta", self.beta, "must be positive"));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(invalid("gamma", self.gamma, "must be positive and finite"));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(invalid("t_max", self.t_max, "must be positive and finite"));
        }
        if self.n_samples < 3 {
            return Err(invalid("n_samples", self.n_samples, "must be at least 3"));
        }
        if self.integrator.endpoint_subdivision == 0 {
            return Err(invalid(
                "integrator.endpoint_subdivision",
                0,
                "must be at least 1",
            ));
        }
        if !(self.integrator.closure_tolerance > 0.0) {
            return Err(invalid(
                "integrator.closure_tolerance",
                self.integrator.closure_tolerance,
                "must be positive",
            ));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<GadcParams, ExperimentError> {
        self.validate()?;
        Ok(GadcParams::from_beta(self.alpha, self.beta, self.gamma)?)
    }

    pub fn times(&self) -> Vec<f64> {
        quadrature::uniform_grid(0.0, self.t_max, self.n_samples)
    }
}

/// Max entrywise deviation between routes to the same reduced state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct RouteDeviations {
    /// `tr_E[rho_SE(t)]` vs the closed-form `rho_S(t)`.
    pub system_partial_trace: f64,
    /// `tr_S[rho_SE(t)]` vs the closed-form `rho_E(t)`.
    pub environment_partial_trace: f64,
    /// Negativity: trace-norm formula vs negative-eigenvalue sum.
    pub negativity_routes: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    pub closure_residual_s: f64,
    pub closure_residual_e: f64,
    pub max_abs_work: f64,
    pub energy_conservation: f64,
    pub routes: RouteDeviations,
    /// `(n, max-entry deviation)` at `Gamma t = 1`.
    pub markov: Vec<(usize, f64)>,
    /// `max_t |dS_S/dt + dS_E/dt|`.
    pub entropy_rate_mismatch: f64,
    /// `max_t |S_SE(t) - S_E(0)|`.
    pub joint_entropy_drift: f64,
    /// `Q_SE / N` over the points where both exceed the default threshold.
    pub proportionality: Option<ProportionalityReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub w0: f64,
    pub w1: f64,
    pub thermo_s: ThermoTrajectory,
    pub thermo_e: ThermoTrajectory,
    pub info: InfoSeries,
    pub diagnostics: Diagnostics,
}

/// Runs the trajectories without asserting any invariant.
pub fn run_unchecked(config: &ExperimentConfig) -> Result<ExperimentResult, ExperimentError> {
    let params = config.params()?;
    let times = config.times();
    let settings = config.integrator;

    let h_s = system_hamiltonian(&params);
    let h_e = environment_hamiltonian(&params);
    let thermo_s = integrate_trajectory(
        &times,
        |_| Ok(h_s.clone()),
        |t| Ok(system_state(&params, t)?),
        &settings,
    )?;
    let thermo_e = integrate_trajectory(
        &times,
        |_| Ok(h_e.clone()),
        |t| Ok(environment_state(&params, t)?),
        &settings,
    )?;

    let dims = BipartiteDims::QUBITS;
    let mut info = InfoSeries {
        times: times.clone(),
        ..Default::default()
    };
    let mut routes = RouteDeviations::default();
    for &t in &times {
        let rho_s = system_state(&params, t)?;
        let rho_e = environment_state(&params, t)?;
        let joint = joint_state(&params, t)?;
        info.entropy_s.push(von_neumann_entropy(&rho_s)?);
        info.entropy_e.push(von_neumann_entropy(&rho_e)?);
        info.entropy_se.push(von_neumann_entropy(&joint)?);
        info.coherence_s.push(l1_coherence(&rho_s));
        info.coherence_e.push(l1_coherence(&rho_e));
        let (n_norm, n_eig) = infomeasures::negativity_routes(&joint, dims)?;
        routes.negativity_routes = routes.negativity_routes.max((n_norm - n_eig).abs());
        info.negativity.push(negativity(&joint, dims)?);
        info.mutual_information
            .push(mutual_information(&joint, dims)?);
        let red_s = partial_trace(&joint, Subsystem::A, dims).map_err(ChannelError::from)?;
        let red_e = partial_trace(&joint, Subsystem::B, dims).map_err(ChannelError::from)?;
        routes.system_partial_trace = routes
            .system_partial_trace
            .max(red_s.matrix().max_abs_diff(rho_s.matrix()));
        routes.environment_partial_trace = routes
            .environment_partial_trace
            .max(red_e.matrix().max_abs_diff(rho_e.matrix()));
    }
    info.heat_asymmetry = heat_asymmetry(&thermo_s.heat, &thermo_e.heat)?;

    let ds = quadrature::derivative(&times, &info.entropy_s)?;
    let de = quadrature::derivative(&times, &info.entropy_e)?;
    let entropy_rate_mismatch = ds
        .iter()
        .zip(&de)
        .map(|(a, b)| (a + b).abs())
        .fold(0.0, f64::max);
    let s_e0 = info.entropy_e[0];
    let joint_entropy_drift = info
        .entropy_se
        .iter()
        .map(|s| (s - s_e0).abs())
        .fold(0.0, f64::max);

    let markov = markov_table(config, 1.0 / config.gamma, &MARKOV_STEPS)?;
    let proportionality = proportionality_report(
        &info.heat_asymmetry,
        &info.negativity,
        infomeasures::DEFAULT_MASK_THRESHOLD,
    )
    .ok();

    let max_abs_work = thermo_s
        .work
        .iter()
        .chain(&thermo_e.work)
        .map(|w| w.abs())
        .fold(0.0, f64::max);
    let energy_conservation = thermo_s
        .internal_energy_change
        .iter()
        .zip(&thermo_e.internal_energy_change)
        .map(|(a, b)| (a + b).abs())
        .fold(0.0, f64::max);

    let diagnostics = Diagnostics {
        closure_residual_s: crate::firstlaw::first_law_closure(&thermo_s),
        closure_residual_e: crate::firstlaw::first_law_closure(&thermo_e),
        max_abs_work,
        energy_conservation,
        routes,
        markov,
        entropy_rate_mismatch,
        joint_entropy_drift,
        proportionality,
    };
    Ok(ExperimentResult {
        config: *config,
        w0: params.w0,
        w1: params.w1,
        thermo_s,
        thermo_e,
        info,
        diagnostics,
    })
}

fn worst_time(traj: &ThermoTrajectory) -> f64 {
    let (i, _) = traj
        .closure_residual
        .iter()
        .enumerate()
        .fold(
            (0, -1.0),
            |acc, (i, &r)| if r > acc.1 { (i, r) } else { acc },
        );
    traj.times[i]
}

/// Runs the scenario and asserts zero work, composite energy conservation and
/// first-law closure within the configured tolerance.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentResult, ExperimentError> {
    let result = run_unchecked(config)?;
    let d = &result.diagnostics;
    if d.max_abs_work > WORK_TOL {
        return Err(ExperimentError::NonZeroWork {
            max_abs: d.max_abs_work,
        });
    }
    if d.energy_conservation > ENERGY_CONSERVATION_TOL {
        return Err(ExperimentError::EnergyNotConserved {
            residual: d.energy_conservation,
        });
    }
    let tol = config.integrator.closure_tolerance;
    for (name, residual, traj) in [
        ("system", d.closure_residual_s, &result.thermo_s),
        ("environment", d.closure_residual_e, &result.thermo_e),
    ] {
        if residual > tol {
            return Err(ExperimentError::ClosureViolation {
                subsystem: name,
                residual,
                tolerance: tol,
                t: worst_time(traj),
            });
        }
    }
    Ok(result)
}

/// Max-entry deviation between `n` applications of the system channel with
/// step probability `Gamma t / n` and the closed-form `rho_S(t)`, without
/// requiring the deviations to decrease.
pub fn markov_table(
    config: &ExperimentConfig,
    t: f64,
    step_counts: &[usize],
) -> Result<Vec<(usize, f64)>, ExperimentError> {
    let params = config.params()?;
    let Some(&n_min) = step_counts.iter().min() else {
        return Err(invalid("step_counts", "[]", "need at least one step count"));
    };
    if n_min == 0 {
        return Err(ChannelError::InvalidStepCount { n_steps: 0 }.into());
    }
    if params.gamma_rate * t / n_min as f64 > 1.0 {
        return Err(ChannelError::StepProbabilityTooLarge {
            p: params.gamma_rate * t / n_min as f64,
            n_steps: n_min,
        }
        .into());
    }
    let exact = system_state(&params, t)?;
    step_counts
        .iter()
        .map(|&n| {
            let iterate = iterate_map_check(&params, t, n)?;
            Ok((n, iterate.matrix().max_abs_diff(exact.matrix())))
        })
        .collect::<Result<Vec<_>, ExperimentError>>()
}

/// [`markov_table`], failing unless the deviations strictly decrease with `n`.
pub fn markov_convergence(
    config: &ExperimentConfig,
    t: f64,
    step_counts: &[usize],
) -> Result<Vec<(usize, f64)>, ExperimentError> {
    let table = markov_table(config, t, step_counts)?;
    let mut sorted = table.clone();
    sorted.sort_by_key(|&(n, _)| n);
    if sorted.windows(2).any(|w| !(w[1].1 < w[0].1)) {
        return Err(ExperimentError::NotConverging { table });
    }
    Ok(table)
}

/// One row of a parameter sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSummary {
    pub config: ExperimentConfig,
    pub peak_negativity: f64,
    pub peak_heat_asymmetry: f64,
    pub asymptotic_q_s: f64,
    pub ratio_mean: Option<f64>,
    pub ratio_spread: Option<f64>,
    pub max_abs_coherent_energy_s: f64,
    pub max_abs_coherent_energy_e: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepOutcome {
    /// One entry per input config, in input order.
    pub rows: Vec<Result<SweepSummary, String>>,
    /// Whether runs that differ only in `Gamma` (same `Gamma t_max`, `alpha`,
    /// `beta` and sample count) give the same curves against `Gamma t`.
    /// `None` when no such pair exists.
    pub gamma_collapse: Option<bool>,
}

fn summarize(r: &ExperimentResult) -> SweepSummary {
    let peak = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let max_abs = |v: &[f64]| v.iter().map(|x| x.abs()).fold(0.0, f64::max);
    SweepSummary {
        config: r.config,
        peak_negativity: peak(&r.info.negativity),
        peak_heat_asymmetry: peak(&r.info.heat_asymmetry),
        asymptotic_q_s: *r.thermo_s.heat.last().expect("non-empty grid"),
        ratio_mean: r.diagnostics.proportionality.map(|p| p.ratio_mean),
        ratio_spread: r
            .diagnostics
            .proportionality
            .map(|p| p.ratio_relative_spread),
        max_abs_coherent_energy_s: max_abs(&r.thermo_s.coherent_energy),
        max_abs_coherent_energy_e: max_abs(&r.thermo_e.coherent_energy),
    }
}

/// Same scenario up to a rescaling of time by `Gamma`.
fn rescaled_pair(a: &ExperimentConfig, b: &ExperimentConfig) -> bool {
    let (ta, tb) = (a.gamma * a.t_max, b.gamma * b.t_max);
    a.alpha == b.alpha
        && a.beta == b.beta
        && a.n_samples == b.n_samples
        && a.gamma != b.gamma
        && (ta - tb).abs() <= 1e-12 * ta.abs().max(tb.abs())
}

fn curves_match(a: &ExperimentResult, b: &ExperimentResult) -> bool {
    let close = |x: &[f64], y: &[f64]| {
        x.iter()
            .zip(y)
            .all(|(p, q)| (p - q).abs() <= COLLAPSE_TOL * (1.0 + p.abs().max(q.abs())))
    };
    close(&a.thermo_s.heat, &b.thermo_s.heat)
        && close(&a.thermo_e.heat, &b.thermo_e.heat)
        && close(&a.thermo_s.coherent_energy, &b.thermo_s.coherent_energy)
        && close(&a.info.negativity, &b.info.negativity)
}

/// Runs every config (in parallel), collecting per-config failures.
pub fn sweep(configs: &[ExperimentConfig]) -> SweepOutcome {
    let results: Vec<Result<ExperimentResult, ExperimentError>> =
        configs.par_iter().map(run).collect();

    let mut gamma_collapse = None;
    for i in 0..results.len() {
        for j in i + 1..results.len() {
            if let (Ok(a), Ok(b)) = (&results[i], &results[j]) {
                if rescaled_pair(&a.config, &b.config) {
                    let ok = curves_match(a, b);
                    gamma_collapse = Some(gamma_collapse.unwrap_or(true) && ok);
                }
            }
        }
    }
    SweepOutcome {
        rows: results
            .iter()
            .map(|r| r.as_ref().map(summarize).map_err(|e| e.to_string()))
            .collect(),
        gamma_collapse,
    }
}

/// Default thermal weights at `beta (E_e - E_g) = 1`.
pub fn default_weights() -> (f64, f64) {
    channels::thermal_weights(1.0)
}
