//! Command-line front end. [`run`] parses arguments, executes one command and
//! returns the process exit code: 0 pass, 1 usage or config error, 2
//! numerical failure.

mod commands;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::RunConfig;
use crate::error::Error;

pub use commands::Outcome;

#[derive(Debug, Parser)]
#[command(name = "bistable", version, about = "Solvers and estimate checks for (d/dt)(Ax) = -x + G(x)")]
pub struct Cli {
    /// Run configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Quadform,
    Tails,
    Decay,
    Sharpness,
    Haar,
    Bochner,
    Techcor,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the nonlinear problem by Picard iteration.
    Simulate {
        /// Inline spectrum block, e.g. "kind: harmonic, n: 16".
        #[arg(long)]
        spectrum: Option<String>,
        /// Boundary data as comma-separated decimals.
        #[arg(long)]
        g0: Option<String>,
        #[arg(long = "T")]
        t_end: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        grid_theta: Option<f64>,
    },
    /// Run one estimate check.
    Verify {
        #[arg(value_enum)]
        check: Check,
        /// Derivative order (decay: highest order; sharpness: highest order).
        #[arg(long)]
        k: Option<u32>,
        /// Decay exponent of the counterexample forcing.
        #[arg(long)]
        r: Option<f64>,
        /// Trajectory CSV to check instead of simulating.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Solve the linear two-point boundary-value problem and cross-check it.
    Bvp,
    /// Boundary-layer tails of the discrete-velocity model over a data sweep.
    BoltzmannTail {
        #[arg(long = "K")]
        k: Option<usize>,
        #[arg(long)]
        amplitude: Option<f64>,
        /// Comma-separated scale factors applied to the base data.
        #[arg(long)]
        g0_scale_sweep: Option<String>,
        #[arg(long = "T")]
        t_end: Option<f64>,
    },
    /// Tabulate sup ‖|A|^{-r} T_s(t) h‖ against C t^{-r}.
    SharpnessScan {
        #[arg(long)]
        r: Option<f64>,
        /// Dyadic grid 2^lo ..= 2^hi.
        #[arg(long, allow_hyphen_values = true)]
        lo: Option<i32>,
        #[arg(long, allow_hyphen_values = true)]
        hi: Option<i32>,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Divergence { .. } => 2,
        _ => 1,
    }
}

fn report_error(e: &Error) {
    match e {
        Error::ContractViolation { .. } => eprintln!("error: certification failed: {e}"),
        _ => eprintln!("error: {e}"),
    }
}

/// Parse `args` (including the program name) and run.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            report_error(&e);
            return 1;
        }
    };
    match commands::dispatch(&cli, cfg) {
        Ok(Outcome::Pass) => 0,
        Ok(Outcome::Fail(msg)) => {
            eprintln!("check failed: {msg}");
            2
        }
        Err(e) => {
            report_error(&e);
            exit_code(&e)
        }
    }
}

fn load_config(cli: &Cli) -> crate::error::Result<RunConfig> {
    match &cli.config {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            RunConfig::parse(&text)
        }
        None => Ok(RunConfig::default()),
    }
}
