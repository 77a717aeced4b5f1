//! Invariant suite behind `strongcouple validate`.
//!
//! Three properties of the model as written are reported as known defects
//! rather than failures: the joint evolution matrix is not unitary for
//! `0 < p < 1`, the environment Kraus pair is complete only on its diagonal,
//! and the joint entropy is not constant along the trajectory. They count as
//! failures only in strict mode.

use std::fmt;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::channels::{
    apply_channel, environment_kraus, environment_output, gadc_unitary, initial_environment_state,
    initial_system_state, joint_output_with, kraus_from_unitary_with_diagonal_ancilla,
    system_output, thermal_weights, ChannelError, GadcParams, KrausChannel, COMPLETENESS_TOL,
};
use crate::experiment::{self, ExperimentConfig};
use crate::firstlaw::IntegratorSettings;
use crate::spectra::{
    bell_state, eig_hermitian, partial_trace, BipartiteDims, ComplexMatrix, DensityOperator,
    Subsystem, PSD_TOL,
};

pub const DEFAULT_SEED: u64 = 0x5eed;
pub const CHANNEL_INPUTS: usize = 1000;
pub const TRIANGLE_TRIPLES: usize = 20;
pub const TRIANGLE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// A property the model as written does not have; fails only in strict mode.
    KnownDefect,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub suite: &'static str,
    pub name: &'static str,
    pub status: CheckStatus,
    pub observed: String,
    pub expected: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::KnownDefect => "KNOWN",
        };
        write!(
            f,
            "[{tag}] {}/{}: observed {}, expected {}",
            self.suite, self.name, self.observed, self.expected
        )
    }
}

pub type UnitaryFn = fn(f64) -> Result<ComplexMatrix, ChannelError>;

#[derive(Clone, Copy, Debug)]
pub struct ValidationOptions {
    pub samples: usize,
    pub closure_tolerance: f64,
    pub seed: u64,
    /// Joint evolution matrix used by the channel and consistency suites.
    pub unitary: UnitaryFn,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            samples: 2001,
            closure_tolerance: IntegratorSettings::default().closure_tolerance,
            seed: DEFAULT_SEED,
            unitary: gadc_unitary,
        }
    }
}

/// [`gadc_unitary`] with the sign of the `<g,E1|U|e,E0>` entry flipped.
pub fn sign_flipped_unitary(p: f64) -> Result<ComplexMatrix, ChannelError> {
    let mut u = gadc_unitary(p)?;
    u[(1, 2)] = -u[(1, 2)];
    Ok(u)
}

/// True when no check failed; known defects fail only in strict mode.
pub fn passed(outcomes: &[CheckOutcome], strict: bool) -> bool {
    outcomes.iter().all(|o| match o.status {
        CheckStatus::Pass => true,
        CheckStatus::Fail => false,
        CheckStatus::KnownDefect => !strict,
    })
}

struct Suite {
    name: &'static str,
    out: Vec<CheckOutcome>,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            out: Vec::new(),
        }
    }

    fn check(&mut self, name: &'static str, ok: bool, observed: String, expected: String) {
        self.push(
            name,
            if ok {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            observed,
            expected,
        );
    }

    fn known(&mut self, name: &'static str, ok: bool, observed: String, expected: String) {
        self.push(
            name,
            if ok {
                CheckStatus::Pass
            } else {
                CheckStatus::KnownDefect
            },
            observed,
            expected,
        );
    }

    fn error(&mut self, name: &'static str, err: impl fmt::Display) {
        self.push(
            name,
            CheckStatus::Fail,
            format!("error: {err}"),
            "no error".into(),
        );
    }

    fn push(
        &mut self,
        name: &'static str,
        status: CheckStatus,
        observed: String,
        expected: String,
    ) {
        self.out.push(CheckOutcome {
            suite: self.name,
            name,
            status,
            observed,
            expected,
        });
    }
}

fn random_state(rng: &mut StdRng, dim: usize) -> DensityOperator {
    loop {
        let entries = (0..dim * dim)
            .map(|_| {
                num_complex::Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            })
            .collect();
        let g = ComplexMatrix::new(dim, dim, entries).expect("square");
        let m = &g * &g.adjoint();
        let tr = m.trace().re;
        if tr > 1e-6 {
            return DensityOperator::from_matrix(m.scale(1.0 / tr)).expect("valid state");
        }
    }
}

fn random_params(rng: &mut StdRng) -> GadcParams {
    GadcParams::from_weights(rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0), 1.0)
        .and_then(|p| p.with_p(rng.gen_range(0.0..=1.0)))
        .expect("parameters in range")
}

fn spectra_suite(rng: &mut StdRng) -> Suite {
    let mut s = Suite::new("spectra");
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let dim = rng.gen_range(1..=6);
        let rho = random_state(rng, dim);
        match eig_hermitian(rho.operator()) {
            Ok(dec) => {
                worst = worst
                    .max(dec.reconstruct().max_abs_diff(rho.matrix()))
                    .max(dec.orthonormality_defect());
            }
            Err(e) => {
                s.error("eigendecomposition", e);
                return s;
            }
        }
    }
    s.check(
        "eigendecomposition",
        worst <= 1e-10,
        format!("{worst:.3e}"),
        "<= 1e-10".into(),
    );
    match crate::infomeasures::negativity(&bell_state(), BipartiteDims::QUBITS) {
        Ok(n) => s.check(
            "bell_negativity",
            (n - 0.5).abs() <= 1e-12,
            format!("{n:.12}"),
            "0.5".into(),
        ),
        Err(e) => s.error("bell_negativity", e),
    }
    s
}

fn channel_suite(rng: &mut StdRng, unitary: UnitaryFn) -> Result<Suite, ChannelError> {
    let mut s = Suite::new("channels");
    let mut completeness = 0.0f64;
    let mut trace_dev = 0.0f64;
    let mut min_eig = f64::INFINITY;
    let mut env_completeness = 0.0f64;
    let mut env_failures = 0usize;
    for _ in 0..CHANNEL_INPUTS {
        let params = random_params(rng);
        let u = unitary(params.p)?;
        let ops = kraus_from_unitary_with_diagonal_ancilla(&u, 2, &[params.w0, params.w1]);
        let ch = KrausChannel::from_operators(ops, "system")?;
        completeness = completeness.max(ch.completeness_residual());
        let rho = random_state(rng, 2);
        match apply_channel(&ch, &rho) {
            Ok(out) => {
                trace_dev = trace_dev.max((out.operator().trace() - 1.0).abs());
                min_eig = min_eig.min(eig_hermitian(out.operator())?.eigenvalues()[0]);
            }
            Err(_) => trace_dev = f64::INFINITY,
        }

        let env = environment_kraus(&params)?;
        env_completeness = env_completeness.max(env.completeness_residual());
        if apply_channel(&env, &random_state(rng, 2)).is_err() {
            env_failures += 1;
        }
    }
    s.check(
        "system_completeness",
        completeness <= COMPLETENESS_TOL,
        format!("{completeness:.3e}"),
        format!("<= {COMPLETENESS_TOL:e}"),
    );
    s.check(
        "system_trace",
        trace_dev <= 1e-10,
        format!("{trace_dev:.3e}"),
        "<= 1e-10".into(),
    );
    s.check(
        "system_positivity",
        min_eig >= PSD_TOL,
        format!("{min_eig:.3e}"),
        format!(">= {PSD_TOL:e}"),
    );
    s.known(
        "environment_completeness",
        env_completeness <= COMPLETENESS_TOL,
        format!("{env_completeness:.3e}"),
        format!("<= {COMPLETENESS_TOL:e}"),
    );
    s.known(
        "environment_trace_on_coherent_inputs",
        env_failures == 0,
        format!("{env_failures}/{CHANNEL_INPUTS} inputs drift"),
        "0 drift".into(),
    );
    let defect = (0..=20)
        .map(|i| unitary(i as f64 / 20.0).map(|u| u.unitarity_defect()))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    s.known(
        "joint_unitarity",
        defect <= 1e-12,
        format!("{defect:.3e}"),
        "<= 1e-12".into(),
    );
    Ok(s)
}

fn triangle_suite(rng: &mut StdRng, unitary: UnitaryFn) -> Result<Suite, ChannelError> {
    let mut s = Suite::new("consistency");
    let dims = BipartiteDims::QUBITS;
    let (mut sys, mut env) = (0.0f64, 0.0f64);
    for _ in 0..TRIANGLE_TRIPLES {
        let params = random_params(rng);
        let u = unitary(params.p)?;
        let joint = match joint_output_with(&params, &u) {
            Ok(j) => j,
            Err(_) => {
                sys = f64::INFINITY;
                env = f64::INFINITY;
                continue;
            }
        };
        let closed_s = system_output(&params)?;
        let closed_e = environment_output(&params)?;
        let kraus = KrausChannel::from_operators(
            kraus_from_unitary_with_diagonal_ancilla(&u, 2, &[params.w0, params.w1]),
            "system",
        )?;
        let via_kraus_s = apply_channel(&kraus, &initial_system_state(params.alpha)?)?;
        let env_kraus = environment_kraus(&params)?;
        let via_kraus_e = apply_channel(&env_kraus, &initial_environment_state(&params)?)?;
        let via_trace_s = partial_trace(&joint, Subsystem::A, dims)?;
        let via_trace_e = partial_trace(&joint, Subsystem::B, dims)?;
        sys = sys
            .max(via_kraus_s.matrix().max_abs_diff(closed_s.matrix()))
            .max(via_trace_s.matrix().max_abs_diff(closed_s.matrix()))
            .max(via_kraus_s.matrix().max_abs_diff(via_trace_s.matrix()));
        env = env
            .max(via_kraus_e.matrix().max_abs_diff(closed_e.matrix()))
            .max(via_trace_e.matrix().max_abs_diff(closed_e.matrix()))
            .max(via_kraus_e.matrix().max_abs_diff(via_trace_e.matrix()));
    }
    s.check(
        "system_routes",
        sys <= TRIANGLE_TOL,
        format!("{sys:.3e}"),
        format!("<= {TRIANGLE_TOL:e}"),
    );
    s.check(
        "environment_routes",
        env <= TRIANGLE_TOL,
        format!("{env:.3e}"),
        format!("<= {TRIANGLE_TOL:e}"),
    );
    Ok(s)
}

fn count_interior_maxima(v: &[f64]) -> usize {
    v.windows(3).filter(|w| w[1] > w[0] && w[1] >= w[2]).count()
}

fn scenario_suites(opts: &ValidationOptions) -> Vec<Suite> {
    let mut fl = Suite::new("firstlaw");
    let mut info = Suite::new("infomeasures");
    let mut reference = Suite::new("reference_numbers");

    let (w0, _) = thermal_weights(1.0);
    reference.check(
        "w0",
        (0.7305..=0.7315).contains(&w0),
        format!("{w0:.6}"),
        "[0.7305, 0.7315]".into(),
    );

    let config = ExperimentConfig {
        n_samples: opts.samples,
        integrator: IntegratorSettings {
            closure_tolerance: opts.closure_tolerance,
            ..Default::default()
        },
        ..Default::default()
    };
    let r = match experiment::run_unchecked(&config) {
        Ok(r) => r,
        Err(e) => {
            fl.error("scenario_run", e);
            return vec![fl, info, reference];
        }
    };
    let d = &r.diagnostics;
    let tol = opts.closure_tolerance;
    let closure = d.closure_residual_s.max(d.closure_residual_e);
    fl.check(
        "closure",
        closure <= tol,
        format!("{closure:.3e} on {} points", opts.samples),
        format!("<= {tol:e}"),
    );
    fl.check(
        "zero_work",
        d.max_abs_work <= experiment::WORK_TOL,
        format!("{:.3e}", d.max_abs_work),
        "<= 1e-12".into(),
    );
    fl.check(
        "energy_conservation",
        d.energy_conservation <= experiment::ENERGY_CONSERVATION_TOL,
        format!("{:.3e}", d.energy_conservation),
        "<= 1e-10".into(),
    );
    let markov_ok = d.markov.windows(2).all(|w| w[1].1 < w[0].1)
        && d.markov.last().is_some_and(|m| m.1 <= 1e-3);
    fl.check(
        "markov_limit",
        markov_ok,
        format!("{:?}", d.markov),
        "decreasing, final <= 1e-3".into(),
    );

    let mut coh = 0.0f64;
    for (i, &t) in r.info.times.iter().enumerate() {
        let gamma = config.gamma;
        coh = coh
            .max((r.info.coherence_s[i] - (-gamma * t / 2.0).exp()).abs())
            .max((r.info.coherence_e[i] - (-(-gamma * t).exp_m1()).sqrt()).abs());
    }
    info.check(
        "coherence_closed_forms",
        coh <= 1e-10,
        format!("{coh:.3e}"),
        "<= 1e-10".into(),
    );
    let n = &r.info.negativity;
    let peaks = count_interior_maxima(n);
    info.check(
        "negativity_shape",
        n[0] <= 1e-12 && *n.last().unwrap() <= 1e-3 && peaks == 1,
        format!(
            "N(0) = {:.3e}, N(end) = {:.3e}, {peaks} interior maxima",
            n[0],
            n.last().unwrap()
        ),
        "N(0) <= 1e-12, N(end) <= 1e-3, 1 maximum".into(),
    );
    info.check(
        "negativity_routes",
        d.routes.negativity_routes <= 1e-10,
        format!("{:.3e}", d.routes.negativity_routes),
        "<= 1e-10".into(),
    );
    info.known(
        "joint_entropy_constant",
        d.joint_entropy_drift <= 1e-10,
        format!("{:.3e}", d.joint_entropy_drift),
        "<= 1e-10".into(),
    );
    let qse_end = *r.info.heat_asymmetry.last().unwrap();
    info.check(
        "heat_asymmetry_decays",
        qse_end < 1e-3,
        format!("{qse_end:.3e}"),
        "< 1e-3".into(),
    );
    match d.proportionality {
        Some(p) => info.check(
            "proportionality",
            p.ratio_relative_spread <= 0.05,
            format!(
                "ratio {:.4}, spread {:.2}%",
                p.ratio_mean,
                100.0 * p.ratio_relative_spread
            ),
            "spread <= 5%".into(),
        ),
        None => info.check(
            "proportionality",
            false,
            "empty mask".into(),
            "non-empty mask".into(),
        ),
    }

    let q_s = *r.thermo_s.heat.last().unwrap();
    let q_e = *r.thermo_e.heat.last().unwrap();
    reference.check(
        "asymptotic_heat",
        (q_s - 0.104).abs() <= 2e-3 && (q_e + 0.104).abs() <= 2e-3,
        format!("Q_S = {q_s:.5}, Q_E = {q_e:.5}"),
        "+/-0.104 +/- 0.002".into(),
    );
    let s_e0 = r.info.entropy_e[0];
    reference.check(
        "environment_entropy",
        (s_e0 - 0.84).abs() <= 5e-3,
        format!("{s_e0:.5} bits"),
        "0.84 +/- 0.005".into(),
    );
    vec![fl, info, reference]
}

/// Runs every suite and returns the outcomes in a fixed order.
pub fn run_validation(opts: &ValidationOptions) -> Vec<CheckOutcome> {
    let mut rng = StdRng::seed_from_u64(opts.seed);
    let mut suites = vec![spectra_suite(&mut rng)];
    for (name, result) in [
        ("channels", channel_suite(&mut rng, opts.unitary)),
        ("consistency", triangle_suite(&mut rng, opts.unitary)),
    ] {
        suites.push(result.unwrap_or_else(|e| {
            let mut s = Suite::new(name);
            s.error("setup", e);
            s
        }));
    }
    suites.extend(scenario_suites(opts));
    suites.into_iter().flat_map(|s| s.out).collect()
}
