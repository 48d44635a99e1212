//! Single executable exposing the pipeline as subcommands.
//!
//! Every run resolves its full configuration (defaults included) and writes
//! it next to its outputs, so reruns from that file reproduce the trace
//! byte for byte. Exit codes: 0 success, 2 input/config error,
//! 3 computational failure.

use clap::{Parser, Subcommand};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

mod commands;
use commands::CliError;

#[derive(Parser)]
#[command(name = "qcas", about = "Active-space adaptive-VQE toolkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the adaptive solver on an FCIDUMP Hamiltonian.
    Fastvqe {
        /// Run configuration (JSON; unknown keys are rejected).
        config: PathBuf,
        /// Override the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the configured shot count.
        #[arg(long)]
        shots: Option<usize>,
        /// Override the configured iteration cap.
        #[arg(long)]
        iterations: Option<usize>,
        /// Override the operator selector (fast | adapt).
        #[arg(long)]
        selector: Option<String>,
        /// Override the one-qubit gate budget.
        #[arg(long = "budget-1q")]
        budget_1q: Option<usize>,
    },
    /// Exact diagonalization reference for an FCIDUMP Hamiltonian.
    Casci {
        fcidump: PathBuf,
    },
    /// Fragment orbital assignment, subspace MP2, and natural-virtual
    /// selection; emits a folded active-space FCIDUMP plus a report.
    Activespace {
        fcidump: PathBuf,
        /// Localized MO coefficients (JSON).
        #[arg(long)]
        mo: PathBuf,
        /// Fragment atom indices, comma-separated.
        #[arg(long)]
        fragment: String,
        /// Number of natural virtuals to keep.
        #[arg(long = "n-virtuals")]
        n_virtuals: usize,
        /// Occupied window size (spatial orbitals) for the subspace MP2.
        #[arg(long = "occ-window", default_value_t = 3)]
        occ_window: usize,
        #[arg(long = "output-dir")]
        output_dir: PathBuf,
    },
    /// Gate reduction for a circuit in the line format.
    Circopt {
        circuit: PathBuf,
        #[arg(long = "budget-1q", default_value_t = 950)]
        budget_1q: usize,
        #[arg(long = "output-dir")]
        output_dir: PathBuf,
    },
    /// Nudged-elastic-band path optimization over a built-in potential.
    Neb {
        /// Built-in potential name (mueller-brown | harmonic).
        #[arg(long, default_value = "mueller-brown")]
        potential: String,
        /// Reactant endpoint as a JSON array (defaults to a refined minimum
        /// of the built-in surface).
        #[arg(long)]
        reactant: Option<String>,
        /// Product endpoint as a JSON array.
        #[arg(long)]
        product: Option<String>,
        #[arg(long, default_value_t = 11)]
        images: usize,
        #[arg(long = "k-spring", default_value_t = 0.1)]
        k_spring: f64,
        #[arg(long = "max-force", default_value_t = 1e-3)]
        max_force: f64,
        #[arg(long = "max-steps", default_value_t = 500_000)]
        max_steps: usize,
        #[arg(long)]
        climbing: bool,
        /// Profile CSV destination (stdout when omitted).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Combine a ledger of energy components into the total energy.
    Combine {
        ledger: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Fastvqe { config, seed, shots, iterations, selector, budget_1q } => {
            commands::cmd_fastvqe(&config, commands::FastvqeOverrides {
                seed,
                shots,
                iterations,
                selector,
                budget_1q,
            })
        }
        Command::Casci { fcidump } => commands::cmd_casci(&fcidump),
        Command::Activespace { fcidump, mo, fragment, n_virtuals, occ_window, output_dir } => {
            commands::cmd_activespace(&fcidump, &mo, &fragment, n_virtuals, occ_window, &output_dir)
        }
        Command::Circopt { circuit, budget_1q, output_dir } => {
            commands::cmd_circopt(&circuit, budget_1q, &output_dir)
        }
        Command::Neb {
            potential,
            reactant,
            product,
            images,
            k_spring,
            max_force,
            max_steps,
            climbing,
            output,
        } => commands::cmd_neb(
            &potential,
            reactant.as_deref(),
            product.as_deref(),
            images,
            k_spring,
            max_force,
            max_steps,
            climbing,
            output.as_deref(),
        ),
        Command::Combine { ledger } => commands::cmd_combine(&ledger),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Compute(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(3)
        }
    }
}

/// Write a file, mapping IO failures to input errors naming the path.
pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

/// Serialize a value as pretty JSON with a trailing newline.
pub(crate) fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}
