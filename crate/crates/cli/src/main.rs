use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use fraclab::commands::{self, Output};
use fraclab::{CliError, Config};

/// Exit status for an unknown subcommand.
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "fraclab",
    version,
    about = "Nonlocal operators, solvers and analyticity estimates"
)]
struct Cli {
    /// JSON configuration file; defaults apply when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the configured random seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel quadrature
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Kernel constants and diagnostics (JSON)
    KernelInfo,
    /// Solve the collocation problem (JSON)
    Solve,
    /// Manufactured right-hand side on the grid (CSV)
    Manufacture,
    /// Derivative ladders M_k, N_k and the recursive-estimate constants (CSV)
    Ladder,
    /// Exact majorant recursion and ODE coefficients (CSV)
    Majorant,
    /// Scaled Schauder ratios (CSV)
    Schauder,
    /// Run the combinatorial and majorant verification suites
    Verify,
    /// Print the chain-rule expansion for a multi-index
    Expand {
        /// Comma-separated multi-index, e.g. 2,1
        #[arg(long)]
        alpha: String,
        /// Number of outer variables
        #[arg(long, default_value_t = 1)]
        m2: usize,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Validation("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Validation(e.to_string()))?;
    }
    let mut config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let out: Output = match cli.command {
        Command::KernelInfo => commands::kernel_info(&config)?,
        Command::Solve => commands::solve(&config)?,
        Command::Manufacture => commands::manufacture(&config)?,
        Command::Ladder => commands::ladder(&config)?,
        Command::Majorant => commands::majorant(&config)?,
        Command::Schauder => commands::schauder(&config)?,
        Command::Verify => commands::verify(&config)?,
        Command::Expand { alpha, m2 } => commands::expand(&commands::parse_alpha(&alpha)?, m2)?,
    };
    let text = out.render()?;
    match &cli.out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                ErrorKind::InvalidSubcommand | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    ExitCode::from(EXIT_USAGE)
                }
                _ => ExitCode::from(2),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Numerical { payload, .. } = &e {
                eprintln!("{payload}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
