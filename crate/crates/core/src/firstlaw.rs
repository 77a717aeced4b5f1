//! Work, heat and coherent energy along a state trajectory.
//!
//! With `H = sum_n E_n |n><n|`, `rho = sum_k rho_k |k><k|` and
//! `c_{n,k} = <n|k>`, the internal energy `U = sum_{n,k} E_n rho_k |c_{n,k}|^2`
//! changes through three channels:
//!
//! * work: `sum rho_k |c_{n,k}|^2 dE_n`
//! * heat: `sum E_n |c_{n,k}|^2 d rho_k`
//! * coherent energy: `sum E_n rho_k d|c_{n,k}|^2`
//!
//! Each differential is evaluated on a sampled grid with three-point finite
//! differences and accumulated with the trapezoid rule. Eigenbranches are
//! tracked by eigenvector overlap first so that `rho_k(t)` and
//! `|c_{n,k}(t)|^2` are continuous.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channels::ChannelError;
use crate::quadrature::{self, QuadratureError};
use crate::spectra::{
    eig_hermitian, DensityOperator, HermitianOperator, SpectraError, SpectralDecomposition,
};

/// Smallest per-branch overlap `|<v_i|v_{i+1}>|` accepted when matching branches.
pub const TRACKING_THRESHOLD: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FirstLawError {
    #[error("need at least {needed} samples, got {found}")]
    TooFewSamples { needed: usize, found: usize },
    #[error("ambiguous eigenbranch matching at step {step} (t = {t}): best overlap {overlap:.6} <= 1/sqrt(2); refine the grid")]
    AmbiguousMatch { step: usize, t: f64, overlap: f64 },
    #[error("eigenbranches are not tracked: discontinuity at step {step} (t = {t})")]
    Untracked { step: usize, t: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("first-law closure residual {residual:e} exceeds tolerance {tolerance:e}")]
    ClosureViolation { residual: f64, tolerance: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Integration controls shared by every trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSettings {
    /// Number of sub-intervals the first grid interval is split into.
    pub endpoint_subdivision: usize,
    /// Largest accepted `|dU - (W + Q + C)|`, in gap units.
    pub closure_tolerance: f64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            endpoint_subdivision: 32,
            closure_tolerance: 1e-4,
        }
    }
}

/// Spectra of `H` and `rho` at one time, with the overlap weights
/// `overlaps[n][k] = |<n|k>|^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub hamiltonian_spectrum: SpectralDecomposition,
    pub state_spectrum: SpectralDecomposition,
    pub overlaps: Vec<Vec<f64>>,
}

impl TrajectorySample {
    pub fn new(
        t: f64,
        hamiltonian_spectrum: SpectralDecomposition,
        state_spectrum: SpectralDecomposition,
    ) -> Result<Self, FirstLawError> {
        if hamiltonian_spectrum.dim() != state_spectrum.dim() {
            return Err(FirstLawError::DimensionMismatch {
                expected: hamiltonian_spectrum.dim(),
                found: state_spectrum.dim(),
            });
        }
        let overlaps = overlap_weights(&hamiltonian_spectrum, &state_spectrum);
        Ok(Self {
            t,
            hamiltonian_spectrum,
            state_spectrum,
            overlaps,
        })
    }

    pub fn from_operators(
        t: f64,
        hamiltonian: &HermitianOperator,
        rho: &DensityOperator,
    ) -> Result<Self, FirstLawError> {
        Self::new(
            t,
            eig_hermitian(hamiltonian)?,
            eig_hermitian(rho.operator())?,
        )
    }

    /// `U = sum_{n,k} E_n rho_k |c_{n,k}|^2`.
    pub fn energy(&self) -> f64 {
        let e = self.hamiltonian_spectrum.eigenvalues();
        let r = self.state_spectrum.eigenvalues();
        let mut u = 0.0;
        for (n, row) in self.overlaps.iter().enumerate() {
            for (k, w) in row.iter().enumerate() {
                u += e[n] * r[k] * w;
            }
        }
        u
    }
}

fn overlap_weights(h: &SpectralDecomposition, rho: &SpectralDecomposition) -> Vec<Vec<f64>> {
    let d = h.dim();
    let hv = h.eigenvectors();
    let rv = rho.eigenvectors();
    (0..d)
        .map(|n| {
            (0..d)
                .map(|k| {
                    (0..d)
                        .map(|i| hv[(i, n)].conj() * rv[(i, k)])
                        .sum::<num_complex::Complex64>()
                        .norm_sqr()
                })
                .collect()
        })
        .collect()
}

fn branch_overlap(a: &SpectralDecomposition, i: usize, b: &SpectralDecomposition, j: usize) -> f64 {
    let (av, bv) = (a.eigenvectors(), b.eigenvectors());
    (0..a.dim())
        .map(|r| av[(r, i)].conj() * bv[(r, j)])
        .sum::<num_complex::Complex64>()
        .norm()
}

/// Relabels the branches of each decomposition so that branch `k` at step
/// `i + 1` is the eigenvector with the largest overlap with branch `k` at
/// step `i`. Values are only permuted.
pub fn eigen_track(
    samples: &[SpectralDecomposition],
) -> Result<Vec<SpectralDecomposition>, FirstLawError> {
    eigen_track_timed(samples, None)
}

fn eigen_track_timed(
    samples: &[SpectralDecomposition],
    times: Option<&[f64]>,
) -> Result<Vec<SpectralDecomposition>, FirstLawError> {
    if samples.len() < 2 {
        return Err(FirstLawError::TooFewSamples {
            needed: 2,
            found: samples.len(),
        });
    }
    let d = samples[0].dim();
    let mut out = Vec::with_capacity(samples.len());
    out.push(samples[0].clone());
    for (step, cur) in samples.iter().enumerate().skip(1) {
        if cur.dim() != d {
            return Err(FirstLawError::DimensionMismatch {
                expected: d,
                found: cur.dim(),
            });
        }
        let prev: &SpectralDecomposition = &out[step - 1];
        let mut perm = Vec::with_capacity(d);
        let mut used = vec![false; d];
        for k in 0..d {
            let (best, overlap) = (0..d)
                .map(|m| (m, branch_overlap(prev, k, cur, m)))
                .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if overlap <= TRACKING_THRESHOLD || used[best] {
                return Err(FirstLawError::AmbiguousMatch {
                    step,
                    t: times.map_or(f64::NAN, |t| t[step]),
                    overlap,
                });
            }
            used[best] = true;
            perm.push(best);
        }
        out.push(cur.permuted(&perm));
    }
    Ok(out)
}

/// Tracks both the Hamiltonian and the state branches of a sampled
/// trajectory and recomputes the overlap weights.
pub fn track_samples(
    samples: Vec<TrajectorySample>,
) -> Result<Vec<TrajectorySample>, FirstLawError> {
    let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let h: Vec<_> = samples
        .iter()
        .map(|s| s.hamiltonian_spectrum.clone())
        .collect();
    let r: Vec<_> = samples.iter().map(|s| s.state_spectrum.clone()).collect();
    let h = eigen_track_timed(&h, Some(&times))?;
    let r = eigen_track_timed(&r, Some(&times))?;
    times
        .into_iter()
        .zip(h.into_iter().zip(r))
        .map(|(t, (h, r))| TrajectorySample::new(t, h, r))
        .collect()
}

fn check_tracked(samples: &[TrajectorySample]) -> Result<(), FirstLawError> {
    if samples.len() < 2 {
        return Err(FirstLawError::TooFewSamples {
            needed: 2,
            found: samples.len(),
        });
    }
    for (i, w) in samples.windows(2).enumerate() {
        for (a, b) in [
            (&w[0].hamiltonian_spectrum, &w[1].hamiltonian_spectrum),
            (&w[0].state_spectrum, &w[1].state_spectrum),
        ] {
            if (0..a.dim()).any(|k| branch_overlap(a, k, b, k) <= TRACKING_THRESHOLD) {
                return Err(FirstLawError::Untracked {
                    step: i + 1,
                    t: w[1].t,
                });
            }
        }
    }
    Ok(())
}

/// Per-sample integrands of the three first-law terms.
#[derive(Clone, Debug, PartialEq)]
pub struct Integrands {
    pub work: Vec<f64>,
    pub heat: Vec<f64>,
    pub coherent_energy: Vec<f64>,
}

/// Evaluates the work, heat and coherent-energy integrands at every sample of
/// a tracked trajectory.
pub fn integrands(samples: &[TrajectorySample]) -> Result<Integrands, FirstLawError> {
    check_tracked(samples)?;
    let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let d = samples[0].state_spectrum.dim();
    let n = samples.len();

    let series = |f: &dyn Fn(&TrajectorySample) -> f64| -> Result<Vec<f64>, FirstLawError> {
        Ok(quadrature::derivative(
            &times,
            &samples.iter().map(f).collect::<Vec<_>>(),
        )?)
    };
    let mut d_energy = Vec::with_capacity(d);
    let mut d_pop = Vec::with_capacity(d);
    let mut d_overlap = vec![Vec::with_capacity(d); d];
    for idx in 0..d {
        d_energy.push(series(&|s| s.hamiltonian_spectrum.eigenvalues()[idx])?);
        d_pop.push(series(&|s| s.state_spectrum.eigenvalues()[idx])?);
    }
    for (level, row) in d_overlap.iter_mut().enumerate() {
        for k in 0..d {
            row.push(series(&|s| s.overlaps[level][k])?);
        }
    }

    let mut out = Integrands {
        work: vec![0.0; n],
        heat: vec![0.0; n],
        coherent_energy: vec![0.0; n],
    };
    for (i, s) in samples.iter().enumerate() {
        let e = s.hamiltonian_spectrum.eigenvalues();
        let r = s.state_spectrum.eigenvalues();
        for level in 0..d {
            for k in 0..d {
                let w = s.overlaps[level][k];
                out.work[i] += r[k] * w * d_energy[level][i];
                out.heat[i] += e[level] * w * d_pop[k][i];
                out.coherent_energy[i] += e[level] * r[k] * d_overlap[level][k][i];
            }
        }
    }
    Ok(out)
}

fn times_of(samples: &[TrajectorySample]) -> Vec<f64> {
    samples.iter().map(|s| s.t).collect()
}

/// Cumulative work `W(t_i)` on a tracked trajectory.
pub fn work_integral(samples: &[TrajectorySample]) -> Result<Vec<f64>, FirstLawError> {
    let f = integrands(samples)?;
    Ok(quadrature::cumulative_trapezoid(
        &times_of(samples),
        &f.work,
    )?)
}

/// Cumulative heat `Q(t_i)` on a tracked trajectory.
pub fn heat_integral(samples: &[TrajectorySample]) -> Result<Vec<f64>, FirstLawError> {
    let f = integrands(samples)?;
    Ok(quadrature::cumulative_trapezoid(
        &times_of(samples),
        &f.heat,
    )?)
}

/// Cumulative coherent energy `C(t_i)` on a tracked trajectory.
pub fn coherent_energy_integral(samples: &[TrajectorySample]) -> Result<Vec<f64>, FirstLawError> {
    let f = integrands(samples)?;
    Ok(quadrature::cumulative_trapezoid(
        &times_of(samples),
        &f.coherent_energy,
    )?)
}

/// `tr{H (rho_t - rho_0)}`.
pub fn internal_energy_change(
    hamiltonian: &HermitianOperator,
    rho_t: &DensityOperator,
    rho_0: &DensityOperator,
) -> Result<f64, FirstLawError> {
    for rho in [rho_t, rho_0] {
        if rho.dim() != hamiltonian.dim() {
            return Err(FirstLawError::DimensionMismatch {
                expected: hamiltonian.dim(),
                found: rho.dim(),
            });
        }
    }
    Ok(hamiltonian.expectation(rho_t.operator())? - hamiltonian.expectation(rho_0.operator())?)
}

/// First-law bookkeeping along a time grid, energies in gap units.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThermoTrajectory {
    pub times: Vec<f64>,
    pub work: Vec<f64>,
    pub heat: Vec<f64>,
    pub coherent_energy: Vec<f64>,
    pub internal_energy_change: Vec<f64>,
    pub closure_residual: Vec<f64>,
    /// Tracked state eigenvalues, `[time][branch]`.
    pub eigenvalue_branches: Vec<Vec<f64>>,
}

impl ThermoTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// `max_i |dU_i - (W_i + Q_i + C_i)|`.
pub fn first_law_closure(traj: &ThermoTrajectory) -> f64 {
    traj.internal_energy_change
        .iter()
        .zip(&traj.work)
        .zip(&traj.heat)
        .zip(&traj.coherent_energy)
        .map(|(((du, w), q), c)| (du - (w + q + c)).abs())
        .fold(0.0, f64::max)
}

fn sample_grid<H, S>(
    times: &[f64],
    hamiltonian: &H,
    state: &S,
) -> Result<Vec<TrajectorySample>, FirstLawError>
where
    H: Fn(f64) -> Result<HermitianOperator, FirstLawError>,
    S: Fn(f64) -> Result<DensityOperator, FirstLawError>,
{
    let raw = times
        .iter()
        .map(|&t| TrajectorySample::from_operators(t, &hamiltonian(t)?, &state(t)?))
        .collect::<Result<Vec<_>, _>>()?;
    track_samples(raw)
}

/// Samples `H(t)` and `rho(t)` on `times`, tracks eigenbranches and integrates
/// the three first-law terms.
///
/// The first interval is additionally resolved on a grid of
/// `settings.endpoint_subdivision` sub-intervals and integrated separately;
/// eigenvectors near `t = 0` can rotate like `sqrt(t)`. `dU` is computed
/// directly from `tr(H rho)` and never from the integrals.
pub fn integrate_trajectory<H, S>(
    times: &[f64],
    hamiltonian: H,
    state: S,
    settings: &IntegratorSettings,
) -> Result<ThermoTrajectory, FirstLawError>
where
    H: Fn(f64) -> Result<HermitianOperator, FirstLawError>,
    S: Fn(f64) -> Result<DensityOperator, FirstLawError>,
{
    quadrature::check_grid(times)?;
    let samples = sample_grid(times, &hamiltonian, &state)?;
    let f = integrands(&samples)?;

    let (mut work, mut heat, mut coherent) = (
        quadrature::cumulative_trapezoid(times, &f.work)?,
        quadrature::cumulative_trapezoid(times, &f.heat)?,
        quadrature::cumulative_trapezoid(times, &f.coherent_energy)?,
    );

    if settings.endpoint_subdivision > 1 && times.len() >= 3 {
        let fine_times =
            quadrature::uniform_grid(times[0], times[1], settings.endpoint_subdivision + 1);
        let fine = sample_grid(&fine_times, &hamiltonian, &state)?;
        let ff = integrands(&fine)?;
        let last = |v: &[f64]| -> Result<f64, FirstLawError> {
            Ok(*quadrature::cumulative_trapezoid(&fine_times, v)?
                .last()
                .expect("non-empty"))
        };
        let corrections = [
            last(&ff.work)? - work[1],
            last(&ff.heat)? - heat[1],
            last(&ff.coherent_energy)? - coherent[1],
        ];
        for (series, delta) in [&mut work, &mut heat, &mut coherent]
            .into_iter()
            .zip(corrections)
        {
            for v in series.iter_mut().skip(1) {
                *v += delta;
            }
        }
    }

    let rho0 = state(times[0])?;
    let h0 = hamiltonian(times[0])?;
    let u0 = h0.expectation(rho0.operator())?;
    let mut internal = Vec::with_capacity(times.len());
    for &t in times {
        let h = hamiltonian(t)?;
        internal.push(h.expectation(state(t)?.operator())? - u0);
    }
    let closure_residual = internal
        .iter()
        .zip(&work)
        .zip(&heat)
        .zip(&coherent)
        .map(|(((du, w), q), c)| (du - (w + q + c)).abs())
        .collect();

    Ok(ThermoTrajectory {
        times: times.to_vec(),
        work,
        heat,
        coherent_energy: coherent,
        internal_energy_change: internal,
        closure_residual,
        eigenvalue_branches: samples
            .iter()
            .map(|s| s.state_spectrum.eigenvalues().to_vec())
            .collect(),
    })
}
