use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sjj_cli::commands::{self, QfiRequest, StateSource};
use sjj_cli::{CliError, CliResult, ProbeKind};
use sjj_core::{Method, Objective, OptimizerConfig};

#[derive(Parser)]
#[command(name = "sjj", version, about = "Quantum Fisher information of two-mode probes under loss")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground state of the soliton Josephson junction Hamiltonian.
    Ground {
        #[arg(long = "n")]
        n: usize,
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        /// Write the state document here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// QFI of a named probe or a state document.
    Qfi {
        /// State document to evaluate instead of a named probe.
        #[arg(long, conflicts_with_all = ["probe"])]
        state: Option<PathBuf>,
        /// noon, binomial, sjj or os.
        #[arg(long)]
        probe: Option<String>,
        #[arg(long = "n")]
        n: Option<usize>,
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        eta: f64,
        #[arg(long, default_value_t = 1)]
        k: u32,
        /// bound, exact, analytic or pure.
        #[arg(long, default_value = "bound")]
        method: String,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        phi: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Append the row to this CSV file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a sweep configuration into CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
        /// Overrides the seed in the configuration.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Closed-form precision limits and thresholds.
    Limits {
        #[arg(long = "n")]
        n: usize,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        eta: f64,
        /// One-body loss rate in 1/s for the critical time.
        #[arg(long, allow_negative_numbers = true)]
        gamma: Option<f64>,
    },
    /// Search for the probe with the largest QFI.
    Optimize {
        #[arg(long = "n")]
        n: usize,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, allow_negative_numbers = true)]
        eta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 16)]
        starts: usize,
        /// bound or exact.
        #[arg(long, default_value = "bound")]
        method: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn json(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("report serializes") + "\n"
}

fn run(cli: Cli) -> CliResult<()> {
    let stdout = std::io::stdout();
    match cli.command {
        Command::Ground { n, lambda, out } => {
            let report = commands::ground(n, lambda, out.as_deref())?;
            commands::print(stdout.lock(), &json(&report))
        }
        Command::Qfi {
            state,
            probe,
            n,
            lambda,
            eta,
            k,
            method,
            phi,
            seed,
            out,
        } => {
            let source = match (state, probe) {
                (Some(p), _) => StateSource::File(p),
                (None, Some(name)) => StateSource::Probe {
                    kind: ProbeKind::parse(&name)?,
                    n: n.ok_or_else(|| CliError::Validation("--n is required with --probe".into()))?,
                    lambda,
                },
                (None, None) => return Err(CliError::Validation("give --state or --probe".into())),
            };
            let method: Method = method.parse()?;
            let row = commands::qfi(&QfiRequest {
                source,
                eta,
                k,
                method,
                phi,
                seed,
            })?;
            if let Some(path) = out {
                commands::append_row(&path, &row)?;
            }
            commands::print(stdout.lock(), &commands::row_text(&row))
        }
        Command::Sweep { config, out, jobs, seed } => {
            let mut cfg = commands::load_config(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let result = sjj_cli::run_sweep(&cfg, out.as_deref(), jobs)?;
            let msg = format!("{} rows written to {}\n", result.rows.len(), result.csv_path.display());
            commands::print(stdout.lock(), &msg)
        }
        Command::Limits { n, k, eta, gamma } => commands::print(stdout.lock(), &json(&commands::limits(n, k, eta, gamma)?)),
        Command::Optimize {
            n,
            k,
            eta,
            seed,
            starts,
            method,
            out,
        } => {
            let objective = match method.as_str() {
                "bound" => Objective::Bound,
                "exact" => Objective::Exact,
                other => return Err(CliError::Validation(format!("unknown objective '{other}'"))),
            };
            let config = OptimizerConfig {
                starts,
                seed,
                objective,
                ..Default::default()
            };
            let report = commands::optimize(n, k, eta, &config, out.as_deref())?;
            commands::print(stdout.lock(), &json(&report))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sjj: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
