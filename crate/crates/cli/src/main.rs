//! `polysing`: construct singular solutions, certify them, and emit tables.
//!
//! Exit status: 0 success, 1 a mandatory certificate check failed, 2 bad input,
//! 3 parameters outside the construction's hypotheses, 4 I/O or numerical failure.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::BuildFlags;

#[derive(Debug, Parser)]
#[command(name = "polysing", version, about = "Singular solutions of polyharmonic inequalities, with certificates")]
struct Cli {
    /// Output directory
    #[arg(long, global = true, env = "POLYSING_OUT", default_value = "out")]
    out: PathBuf,
    /// TOML or JSON config; its values override flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for the sample points inside bumps
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a spec and write spec.json and sequence.csv
    Construct {
        #[command(flatten)]
        build: BuildFlags,
        /// Spec path (default: <out>/spec.json)
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Certify a spec; exit 0 iff every certificate passes
    Verify {
        #[arg(long)]
        spec: PathBuf,
        /// Certificate path (default: <out>/certificates.json)
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Exact Kelvin identity on radial powers, or exterior growth of a spec
    KelvinCheck {
        #[arg(long, default_value_t = 3)]
        m: u32,
        #[arg(long, default_value_t = 7)]
        n: usize,
        #[arg(long, default_value_t = -9, allow_hyphen_values = true)]
        s_lo: i32,
        #[arg(long, default_value_t = 9, allow_hyphen_values = true)]
        s_hi: i32,
        /// Exterior spec to check instead of the radial sweep
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Exact polyharmonicity of every fundamental solution up to (mmax, nmax)
    KernelTable {
        #[arg(long, default_value_t = 5)]
        mmax: u32,
        #[arg(long, default_value_t = 12)]
        nmax: usize,
    },
    /// Build and certify every reference construction; write a JSON + CSV bundle
    Report,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file = match cli.config.as_deref().map(config::FileConfig::load).transpose() {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let ctx = commands::Context {
        out: cli.out,
        file,
        seed: cli.seed,
    };
    let result = match cli.command {
        Command::Construct { build, output } => commands::construct(&ctx, &build, output),
        Command::Verify { spec, output } => commands::verify(&ctx, &spec, output),
        Command::KelvinCheck { m, n, s_lo, s_hi, spec } => commands::kelvin_check(&ctx, m, n, s_lo, s_hi, spec),
        Command::KernelTable { mmax, nmax } => commands::kernel_table(&ctx, mmax, nmax),
        Command::Report => commands::report(&ctx),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
