use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::thread;

use ahosm::analysis::verify::{verify_chain, VerificationReport};
use ahosm::analysis::{bounds_report, BoundsReport, SamplingOptions};
use ahosm::simulator::{discretization_band, enter_and_stay_time, residual_band};
use ahosm::{simulate, AnalysisError, SimulationError};
use serde::Serialize;
use thiserror::Error;

use crate::scenario::{builtin_source, Scenario, ScenarioError};

/// Fraction of the horizon after which the residual band is measured.
pub const RESIDUAL_WINDOW: f64 = 0.75;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{scenario}: simulation failed: {source}")]
    Simulation {
        scenario: String,
        source: SimulationError,
    },
    #[error("{scenario}: {source}")]
    Analysis {
        scenario: String,
        source: AnalysisError,
    },
    #[error("verification failed: {}", .0.join(", "))]
    Verification(Vec<String>),
}

impl CliError {
    /// 1 usage or parse, 2 numerical failure, 3 verification failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Scenario(_) | Self::Usage(_) | Self::Io { .. } => 1,
            Self::Simulation { .. } | Self::Analysis { .. } => 2,
            Self::Verification(_) => 3,
        }
    }
}

/// JSON summary written next to each trajectory CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub order: usize,
    pub dt: f64,
    pub t_final: f64,
    pub records: usize,
    /// `ε` of the adaptive law; absent for nominal runs.
    pub threshold: Option<f64>,
    pub enter_and_stay_time: Option<f64>,
    pub residual_after: f64,
    pub residual_band: f64,
    pub discretization_band: f64,
    pub max_phi_hat: f64,
    pub max_abs_u: f64,
    pub final_v1: f64,
}

/// Simulates one scenario and writes `<name>.csv` and `<name>.json` into `dir`.
pub fn run_scenario(scenario: &Scenario, dir: &Path) -> Result<RunSummary, CliError> {
    let spec = scenario.simulation_spec()?;
    let traj = simulate(&spec).map_err(|source| CliError::Simulation {
        scenario: scenario.name.clone(),
        source,
    })?;
    let threshold = spec.adaptive.map(|a| a.epsilon());
    let residual_after = RESIDUAL_WINDOW * spec.t_final;
    let summary = RunSummary {
        scenario: scenario.name.clone(),
        order: traj.order(),
        dt: spec.dt,
        t_final: spec.t_final,
        records: traj.len(),
        threshold,
        enter_and_stay_time: threshold.and_then(|eps| enter_and_stay_time(&traj, eps, 0.0)),
        residual_after,
        residual_band: residual_band(&traj, residual_after),
        discretization_band: discretization_band(&traj, spec.dt),
        max_phi_hat: traj.max_adaptive_gain_after(0.0),
        max_abs_u: traj.max_abs_control_after(0.0),
        final_v1: traj.lyapunov.last().copied().unwrap_or(0.0),
    };

    let csv_path = dir.join(format!("{}.csv", scenario.name));
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    let file = File::create(&csv_path).map_err(io_err(&csv_path))?;
    let mut out = BufWriter::new(file);
    traj.write_csv(&mut out, true)
        .and_then(|_| out.flush())
        .map_err(io_err(&csv_path))?;

    let json_path = dir.join(format!("{}.json", scenario.name));
    fs::write(&json_path, to_json(&summary)).map_err(io_err(&json_path))?;
    Ok(summary)
}

/// Loads every scenario first, then runs them concurrently. Summaries come
/// back in argument order.
pub fn cmd_run(args: &[String], dir: &Path) -> Result<Vec<RunSummary>, CliError> {
    let scenarios = args
        .iter()
        .map(|a| Scenario::load(a))
        .collect::<Result<Vec<_>, _>>()?;
    let mut names = BTreeSet::new();
    for s in &scenarios {
        if !names.insert(s.name.as_str()) {
            return Err(CliError::Usage(format!(
                "two scenarios would both write {}.csv",
                s.name
            )));
        }
        s.simulation_spec()?;
    }
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .iter()
            .map(|s| scope.spawn(move || run_scenario(s, dir)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    })
}

pub fn cmd_bounds(scenario: &Scenario, opts: SamplingOptions) -> Result<BoundsReport, CliError> {
    let spec = scenario.simulation_spec()?;
    let adaptive = scenario.adaptive_config()?;
    bounds_report(
        &spec.stabilizer,
        &adaptive,
        &spec.uncertainty,
        &spec.z0,
        opts,
    )
    .map_err(|source| CliError::Analysis {
        scenario: scenario.name.clone(),
        source,
    })
}

pub fn cmd_verify(
    scenario: &Scenario,
    opts: SamplingOptions,
) -> Result<VerificationReport, CliError> {
    let stab = scenario.stabilizer()?;
    Ok(verify_chain(&stab, opts.samples, opts.seed))
}

/// One line per property: status, name, worst residual and tolerance.
pub fn format_verification(report: &VerificationReport) -> String {
    let mut out = String::new();
    for p in &report.properties {
        let _ = writeln!(
            out,
            "{} {:<36} worst={:.3e} tol={:.1e} n={} {}",
            if p.passed { "PASS" } else { "FAIL" },
            p.name,
            p.worst,
            p.tolerance,
            p.samples,
            p.detail
        );
    }
    out
}

pub fn verification_outcome(report: &VerificationReport) -> Result<(), CliError> {
    let failed: Vec<String> = report.failures().map(|p| p.name.to_string()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed))
    }
}

pub fn cmd_export(name: &str) -> Result<&'static str, CliError> {
    builtin_source(name).ok_or_else(|| ScenarioError::UnknownBuiltin(name.to_string()).into())
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}
