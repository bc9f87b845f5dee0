//! `sigcalc`: reproduction runs for signature-SDE transforms and tensor
//! utilities.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "sigcalc", version, about = "Riccati, transport and moment solvers for signature SDEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Output prefix; writes <prefix>.csv, <prefix>.svg and <prefix>.report.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exit with status 2 when a scheme disagrees with its oracle.
    #[arg(long)]
    pub check: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Laplace transform E[exp(-c Y_t)] of geometric Brownian motion (scheme 1).
    GbmLaplace(commands::GbmArgs),
    /// E[exp(-X_t^4/4!)] for Brownian motion (schemes 1 and 2).
    BmQuartic(commands::QuarticArgs),
    /// Moment generating function of the Jacobi diffusion (scheme 3).
    JacobiMgf(commands::JacobiArgs),
    /// Joint characteristic function of Lévy area and Brownian endpoint.
    LevyArea(commands::LevyArgs),
    /// Expected signature of time-extended Black–Scholes (scheme 3).
    ExpectedSig(commands::ExpSigArgs),
    /// File-based tensor utilities.
    #[command(subcommand)]
    Algebra(commands::AlgebraCmd),
}

fn configure_threads() {
    if let Ok(v) = std::env::var("SIGCALC_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("ignoring SIGCALC_THREADS={v:?}"),
        }
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GbmLaplace(a) => commands::gbm_laplace(&a),
        Command::BmQuartic(a) => commands::bm_quartic(&a),
        Command::JacobiMgf(a) => commands::jacobi_mgf(&a),
        Command::LevyArea(a) => commands::levy_area(&a),
        Command::ExpectedSig(a) => commands::expected_sig(&a),
        Command::Algebra(a) => commands::algebra(&a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
