use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fermichain::oracle::validation::{validate, ORACLE_TOLERANCE};
use fermichain::runner::{run, EXIT_CONFIG, EXIT_ORACLE_MISMATCH};

/// Entanglement entropy and mutual information of quadratic fermion chains.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a configuration file and write its CSV.
    Run {
        config: PathBuf,
        /// Worker threads; overrides `compute.workers`.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Compare every engine path with exact diagonalisation of small chains.
    Validate {
        #[arg(long, default_value_t = 10)]
        max_sites: usize,
        /// Evaluate with the opposite anomalous-correlator sign.
        #[arg(long, hide = true)]
        flip_anomalous_sign: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FERMICHAIN_LOG", "warn")).init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, workers } => {
            if workers == Some(0) {
                eprintln!("error: --workers must be at least 1");
                return ExitCode::from(EXIT_CONFIG as u8);
            }
            match run(&config, workers) {
                Ok(summary) => {
                    println!(
                        "wrote {} rows to {}{}{}",
                        summary.rows,
                        summary.output.display(),
                        match summary.skipped {
                            0 => String::new(),
                            n => format!(" ({n} points skipped)"),
                        },
                        match summary.flagged {
                            0 => String::new(),
                            n => format!(" ({n} gapless points shifted)"),
                        }
                    );
                    0
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
            }
        }
        Command::Validate {
            max_sites,
            flip_anomalous_sign,
        } => match validate(max_sites, flip_anomalous_sign) {
            Ok(report) => {
                print!("{report}");
                let failures = report.failures().count();
                println!(
                    "{} checks, {failures} failed, largest deviation {:.3e} (tolerance {ORACLE_TOLERANCE:e})",
                    report.rows.len(),
                    report.max_deviation()
                );
                if report.all_passed() {
                    0
                } else {
                    EXIT_ORACLE_MISMATCH
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_CONFIG
            }
        },
    };
    ExitCode::from(code as u8)
}
