#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Deserialize;

use strongcouple_core::experiment::{self, ExperimentConfig, ExperimentError};
use strongcouple_core::validation::{self, ValidationOptions};

const EXIT_INPUT: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "strongcouple",
    version,
    about = "Work, heat and coherent energy of a qubit strongly coupled to a thermal qubit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write CSVs, plot scripts and a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the invariant suites and the reference-number checks.
    Validate {
        /// Treat known model defects as failures.
        #[arg(long)]
        strict: bool,
        /// Grid size for the scenario checks.
        #[arg(long, default_value_t = 2001)]
        samples: usize,
        /// First-law closure tolerance in gap units.
        #[arg(long, default_value_t = 1e-4)]
        closure_tolerance: f64,
        /// Flip the sign of one off-diagonal entry of the joint matrix
        /// (mutation check for the suite itself).
        #[arg(long)]
        mutate_unitary: bool,
    },
    /// Run a parameter grid and write one summary row per configuration.
    Sweep {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Input(String),
    Numerical(String),
}

impl Failure {
    fn report(self) -> ExitCode {
        match self {
            Failure::Input(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(EXIT_INPUT)
            }
            Failure::Numerical(msg) => {
                eprintln!("numerical violation: {msg}");
                ExitCode::from(EXIT_NUMERICAL)
            }
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

fn io_failure(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Input(format!("{}: {e}", path.display()))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(io_failure(path))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn cmd_run(config_path: &Path, out: &Path) -> Result<(), Failure> {
    let start = Instant::now();
    let config: ExperimentConfig = read_json(config_path)?;
    config.validate()?;
    let result = experiment::run(&config)?;

    let mut em = output::Emitter::new(out).map_err(io_failure(out))?;
    let mut files = Vec::new();
    if config.outputs.thermo {
        files.push(("thermo_system.csv", output::thermo_csv(&result.thermo_s)));
        files.push((
            "thermo_environment.csv",
            output::thermo_csv(&result.thermo_e),
        ));
    }
    if config.outputs.info {
        files.push(("info_measures.csv", output::info_csv(&result)));
    }
    if config.outputs.diagnostics {
        files.push(("diagnostics.csv", output::diagnostics_csv(&result)));
        files.push(("markov_convergence.csv", output::markov_csv(&result)));
    }
    if config.outputs.plots {
        if config.outputs.thermo {
            files.push(("plot_thermo.gp", output::thermo_plot()));
        }
        if config.outputs.info {
            files.push(("plot_info.gp", output::info_plot()));
        }
    }
    for (name, (contents, rows)) in files {
        em.write(name, &contents, rows).map_err(io_failure(out))?;
    }
    let manifest = em
        .finish(config_path, start.elapsed().as_secs_f64())
        .map_err(io_failure(out))?;
    println!(
        "wrote {} files to {} (Q_S(t_max) = {}, closure residual {:.3e})",
        manifest.emitted_files.len() + 1,
        out.display(),
        output::num(*result.thermo_s.heat.last().unwrap_or(&f64::NAN)),
        result
            .diagnostics
            .closure_residual_s
            .max(result.diagnostics.closure_residual_e)
    );
    Ok(())
}

fn cmd_validate(
    strict: bool,
    samples: usize,
    closure_tolerance: f64,
    mutate: bool,
) -> Result<(), Failure> {
    if samples < 3 {
        return Err(Failure::Input(format!(
            "--samples must be at least 3, got {samples}"
        )));
    }
    if !(closure_tolerance > 0.0) {
        return Err(Failure::Input(format!(
            "--closure-tolerance must be positive, got {closure_tolerance}"
        )));
    }
    let seed = match std::env::var("STRONGCOUPLE_SEED") {
        Ok(s) => s.parse().map_err(|_| {
            Failure::Input(format!(
                "STRONGCOUPLE_SEED must be an unsigned integer, got {s:?}"
            ))
        })?,
        Err(_) => validation::DEFAULT_SEED,
    };
    let opts = ValidationOptions {
        samples,
        closure_tolerance,
        seed,
        unitary: if mutate {
            validation::sign_flipped_unitary
        } else {
            strongcouple_core::channels::gadc_unitary
        },
    };
    let outcomes = validation::run_validation(&opts);
    for o in &outcomes {
        println!("{o}");
    }
    let failures = outcomes
        .iter()
        .filter(|o| match o.status {
            validation::CheckStatus::Pass => false,
            validation::CheckStatus::Fail => true,
            validation::CheckStatus::KnownDefect => strict,
        })
        .count();
    if validation::passed(&outcomes, strict) {
        println!("all checks passed ({} total)", outcomes.len());
        Ok(())
    } else {
        Err(Failure::Numerical(format!(
            "{failures} of {} checks failed",
            outcomes.len()
        )))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepGrid {
    #[serde(default)]
    base: ExperimentConfig,
    alpha: Option<Vec<f64>>,
    beta: Option<Vec<f64>>,
    gamma: Option<Vec<f64>>,
    /// Interpret `base.t_max` in units of `1/gamma`.
    #[serde(default)]
    time_in_decay_units: bool,
}

impl SweepGrid {
    fn configs(&self) -> Vec<ExperimentConfig> {
        let pick = |v: &Option<Vec<f64>>, base: f64| v.clone().unwrap_or_else(|| vec![base]);
        let mut out = Vec::new();
        for &alpha in &pick(&self.alpha, self.base.alpha) {
            for &beta in &pick(&self.beta, self.base.beta) {
                for &gamma in &pick(&self.gamma, self.base.gamma) {
                    let t_max = if self.time_in_decay_units {
                        self.base.t_max / gamma
                    } else {
                        self.base.t_max
                    };
                    out.push(ExperimentConfig {
                        alpha,
                        beta,
                        gamma,
                        t_max,
                        ..self.base
                    });
                }
            }
        }
        out
    }
}

fn cmd_sweep(grid_path: &Path, out: &Path) -> Result<(), Failure> {
    let start = Instant::now();
    let grid: SweepGrid = read_json(grid_path)?;
    if grid.alpha.is_none() && grid.beta.is_none() && grid.gamma.is_none() {
        return Err(Failure::Input(format!(
            "{}: grid lists no values for alpha, beta or gamma",
            grid_path.display()
        )));
    }
    let configs = grid.configs();
    if configs.is_empty() {
        return Err(Failure::Input(format!(
            "{}: grid is empty",
            grid_path.display()
        )));
    }
    let outcome = experiment::sweep(&configs);

    let mut em = output::Emitter::new(out).map_err(io_failure(out))?;
    let (summary, rows) = output::sweep_csv(&outcome, &configs);
    em.write("sweep_summary.csv", &summary, rows)
        .map_err(io_failure(out))?;
    let (checks, rows) = output::sweep_checks_csv(&outcome);
    em.write("sweep_checks.csv", &checks, rows)
        .map_err(io_failure(out))?;
    em.finish(grid_path, start.elapsed().as_secs_f64())
        .map_err(io_failure(out))?;

    let failed = outcome.rows.iter().filter(|r| r.is_err()).count();
    println!(
        "{} configs, {failed} failed, results in {}",
        configs.len(),
        out.display()
    );
    if failed == configs.len() {
        return Err(Failure::Numerical("every configuration failed".into()));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, out } => cmd_run(config, out),
        Command::Validate {
            strict,
            samples,
            closure_tolerance,
            mutate_unitary,
        } => cmd_validate(*strict, *samples, *closure_tolerance, *mutate_unitary),
        Command::Sweep { grid, out } => cmd_sweep(grid, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}
