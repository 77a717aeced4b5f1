use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use strongcouple_core::experiment::{ExperimentResult, SweepOutcome};
use strongcouple_core::firstlaw::ThermoTrajectory;

/// 12 significant digits, `.` decimal separator, no negative zero.
pub fn num(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

#[derive(Debug, Clone, Serialize)]
pub struct EmittedFile {
    pub name: String,
    pub row_count: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config_path: String,
    pub output_dir: String,
    pub emitted_files: Vec<EmittedFile>,
    pub tool_version: String,
    pub wall_time: f64,
}

/// Collects files written to one output directory.
pub struct Emitter {
    dir: PathBuf,
    files: Vec<EmittedFile>,
}

impl Emitter {
    pub fn new(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    /// Writes `contents`; `row_count` is the number of data rows (or lines
    /// for non-tabular files).
    pub fn write(&mut self, name: &str, contents: &str, row_count: usize) -> io::Result<()> {
        fs::write(self.dir.join(name), contents)?;
        let digest = Sha256::digest(contents.as_bytes());
        self.files.push(EmittedFile {
            name: name.to_string(),
            row_count,
            sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
        });
        Ok(())
    }

    pub fn finish(self, config_path: &Path, wall_time: f64) -> io::Result<RunManifest> {
        let manifest = RunManifest {
            config_path: config_path.display().to_string(),
            output_dir: self.dir.display().to_string(),
            emitted_files: self.files,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time,
        };
        let mut json = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
        json.push('\n');
        fs::write(self.dir.join("manifest.json"), json)?;
        Ok(manifest)
    }
}

fn table(header: &[&str], columns: &[&[f64]]) -> (String, usize) {
    let rows = columns.first().map_or(0, |c| c.len());
    let mut out = header.join(",");
    out.push('\n');
    for i in 0..rows {
        let line: Vec<String> = columns.iter().map(|c| num(c[i])).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    (out, rows)
}

pub fn thermo_csv(traj: &ThermoTrajectory) -> (String, usize) {
    table(
        &["t", "W", "Q", "C", "dU"],
        &[
            &traj.times,
            &traj.work,
            &traj.heat,
            &traj.coherent_energy,
            &traj.internal_energy_change,
        ],
    )
}

pub fn info_csv(r: &ExperimentResult) -> (String, usize) {
    let i = &r.info;
    table(
        &[
            "t",
            "entropy_s",
            "entropy_e",
            "entropy_se",
            "coherence_s",
            "coherence_e",
            "negativity",
            "mutual_information",
            "heat_asymmetry",
        ],
        &[
            &i.times,
            &i.entropy_s,
            &i.entropy_e,
            &i.entropy_se,
            &i.coherence_s,
            &i.coherence_e,
            &i.negativity,
            &i.mutual_information,
            &i.heat_asymmetry,
        ],
    )
}

pub fn diagnostics_csv(r: &ExperimentResult) -> (String, usize) {
    let d = &r.diagnostics;
    let mut rows: Vec<(&str, f64)> = vec![
        ("w0", r.w0),
        ("w1", r.w1),
        ("closure_residual_system", d.closure_residual_s),
        ("closure_residual_environment", d.closure_residual_e),
        ("max_abs_work", d.max_abs_work),
        ("energy_conservation", d.energy_conservation),
        ("route_system_partial_trace", d.routes.system_partial_trace),
        (
            "route_environment_partial_trace",
            d.routes.environment_partial_trace,
        ),
        ("route_negativity", d.routes.negativity_routes),
        ("entropy_rate_mismatch", d.entropy_rate_mismatch),
        ("joint_entropy_drift", d.joint_entropy_drift),
        (
            "final_heat_system",
            *r.thermo_s.heat.last().unwrap_or(&f64::NAN),
        ),
        (
            "final_heat_environment",
            *r.thermo_e.heat.last().unwrap_or(&f64::NAN),
        ),
    ];
    if let Some(p) = d.proportionality {
        rows.push(("proportionality_ratio_mean", p.ratio_mean));
        rows.push(("proportionality_relative_spread", p.ratio_relative_spread));
        rows.push(("proportionality_points", p.points_used as f64));
    }
    let mut out = String::from("quantity,value\n");
    for (name, v) in &rows {
        let _ = writeln!(out, "{name},{}", num(*v));
    }
    (out, rows.len())
}

pub fn markov_csv(r: &ExperimentResult) -> (String, usize) {
    let mut out = String::from("n,max_deviation\n");
    for (n, dev) in &r.diagnostics.markov {
        let _ = writeln!(out, "{n},{}", num(*dev));
    }
    (out, r.diagnostics.markov.len())
}

fn lines(s: &str) -> usize {
    s.lines().count()
}

pub fn thermo_plot() -> (String, usize) {
    let s = "\
set datafile separator ','
set key autotitle columnhead
set xlabel 't'
set ylabel 'energy (E_e - E_g)'
set terminal pngcairo size 1200,500
set output 'thermo.png'
set multiplot layout 1,2
set title 'system'
plot 'thermo_system.csv' using 1:3 with lines, '' using 1:4 with lines, '' using 1:5 with lines
set title 'environment'
plot 'thermo_environment.csv' using 1:3 with lines, '' using 1:4 with lines, '' using 1:5 with lines
unset multiplot
";
    (s.to_string(), lines(s))
}

pub fn info_plot() -> (String, usize) {
    let s = "\
set datafile separator ','
set key autotitle columnhead
set xlabel 't'
set terminal pngcairo size 1200,800
set output 'info.png'
set multiplot layout 2,2
set title 'entropy (bits)'
plot 'info_measures.csv' using 1:2 with lines, '' using 1:3 with lines, '' using 1:4 with lines
set title 'l1 coherence'
plot 'info_measures.csv' using 1:5 with lines, '' using 1:6 with lines
set title 'negativity and heat asymmetry'
plot 'info_measures.csv' using 1:7 with lines, '' using 1:9 with lines
set title 'mutual information (bits)'
plot 'info_measures.csv' using 1:8 with lines
unset multiplot
";
    (s.to_string(), lines(s))
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

pub fn sweep_csv(
    outcome: &SweepOutcome,
    configs: &[strongcouple_core::experiment::ExperimentConfig],
) -> (String, usize) {
    let mut out = String::from(
        "index,alpha,beta,gamma,t_max,n_samples,peak_negativity,peak_heat_asymmetry,\
asymptotic_q_s,ratio_mean,ratio_spread,max_abs_c_s,max_abs_c_e,failure\n",
    );
    for (i, (row, c)) in outcome.rows.iter().zip(configs).enumerate() {
        let _ = write!(
            out,
            "{i},{},{},{},{},{},",
            num(c.alpha),
            num(c.beta),
            num(c.gamma),
            num(c.t_max),
            c.n_samples
        );
        match row {
            Ok(s) => {
                let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},",
                    num(s.peak_negativity),
                    num(s.peak_heat_asymmetry),
                    num(s.asymptotic_q_s),
                    opt(s.ratio_mean),
                    opt(s.ratio_spread),
                    num(s.max_abs_coherent_energy_s),
                    num(s.max_abs_coherent_energy_e),
                );
            }
            Err(e) => {
                let _ = writeln!(out, ",,,,,,,{}", quote(e));
            }
        }
    }
    (out, outcome.rows.len())
}

pub fn sweep_checks_csv(outcome: &SweepOutcome) -> (String, usize) {
    let collapse = match outcome.gamma_collapse {
        Some(true) => "true",
        Some(false) => "false",
        None => "n/a",
    };
    let failed = outcome.rows.iter().filter(|r| r.is_err()).count();
    let s = format!("check,value\ngamma_collapse,{collapse}\nfailed_configs,{failed}\n");
    (s, 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_twelve_significant_digits() {
        assert_eq!(num(0.1034575313071), "1.03457531307e-1");
        assert_eq!(num(-0.0), "0.00000000000e0");
        assert_eq!(num(2001.0), "2.00100000000e3");
    }

    #[test]
    fn table_layout() {
        let (s, n) = table(&["t", "x"], &[&[0.0, 0.5], &[1.0, -2.0]]);
        assert_eq!(n, 2);
        assert_eq!(
            s,
            "t,x\n0.00000000000e0,1.00000000000e0\n5.00000000000e-1,-2.00000000000e0\n"
        );
    }

    #[test]
    fn quoting() {
        assert_eq!(quote("bad \"x\", y"), "\"bad \"\"x\"\", y\"");
    }
}
