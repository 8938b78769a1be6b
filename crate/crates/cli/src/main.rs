use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use ahosm_cli::commands::{
    cmd_bounds, cmd_export, cmd_run, cmd_verify, format_verification, to_json, verification_outcome,
};
use ahosm_cli::{CliError, Scenario};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "ahosm",
    version,
    about = "Adaptive HOSM control of perturbed integrator chains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate scenarios and write <name>.csv and <name>.json per scenario
    Run {
        /// Scenario files or built-in names; several run concurrently
        #[arg(required = true)]
        scenarios: Vec<String>,
        #[arg(short, long, env = "AHOSM_OUTPUT_DIR", default_value = "ahosm-out")]
        output: PathBuf,
    },
    /// Print the bounds report of a scenario as JSON
    Bounds {
        scenario: String,
        /// Level-set samples (default: scenario value or 10000)
        #[arg(short = 'n', long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check the stabilizer's homogeneity and Lyapunov properties
    Verify {
        scenario: String,
        #[arg(short = 'n', long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print a built-in scenario (paper-order1, paper-order3)
    ExportScenario {
        name: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn load_with_options(
    scenario: &str,
    samples: Option<usize>,
    seed: Option<u64>,
) -> Result<(Scenario, ahosm::analysis::SamplingOptions), CliError> {
    let sc = Scenario::load(scenario)?;
    let mut opts = sc.file.sampling();
    if let Some(n) = samples {
        if n == 0 {
            return Err(CliError::Usage("sample count must be positive".into()));
        }
        opts.samples = n;
    }
    if let Some(s) = seed {
        opts.seed = s;
    }
    Ok((sc, opts))
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { scenarios, output } => {
            for s in cmd_run(&scenarios, &output)? {
                let entered = s
                    .enter_and_stay_time
                    .map_or_else(|| "never".to_string(), |t| format!("{t:.4}"));
                println!(
                    "{}: enter_and_stay_time={entered} residual_band={:.6} -> {}",
                    s.scenario,
                    s.residual_band,
                    output.join(format!("{}.csv", s.scenario)).display()
                );
            }
            Ok(())
        }
        Command::Bounds {
            scenario,
            samples,
            seed,
        } => {
            let (sc, opts) = load_with_options(&scenario, samples, seed)?;
            print!("{}", to_json(&cmd_bounds(&sc, opts)?));
            Ok(())
        }
        Command::Verify {
            scenario,
            samples,
            seed,
        } => {
            let (sc, opts) = load_with_options(&scenario, samples, seed)?;
            let report = cmd_verify(&sc, opts)?;
            print!("{}", format_verification(&report));
            verification_outcome(&report)
        }
        Command::ExportScenario { name, output } => {
            let src = cmd_export(&name)?;
            match output {
                Some(path) => fs::write(&path, src).map_err(|source| CliError::Io { path, source }),
                None => {
                    print!("{src}");
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
