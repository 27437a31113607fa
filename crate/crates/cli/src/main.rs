use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;

/// Exact computations with Tate spaces, completed tensor products and
/// bidirected grids over GF(p).
#[derive(Debug, Parser)]
#[command(name = "tatespace", version)]
struct Cli {
    /// Prime field used when a document does not name one.
    #[arg(long, global = true, default_value_t = 2)]
    field: u32,
    /// Levels to materialize for lazy objects.
    #[arg(long, global = true, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    depth: u64,
    /// Seed for generators and check suites.
    #[arg(long, global = true, env = "TATESPACE_SEED", default_value_t = 0)]
    seed: u64,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TensorOp {
    Star,
    Bang,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GenKind {
    Grid,
    Tate,
    Tower,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SuiteArg {
    Laws,
    Grid,
    Appendix,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate, split and decompose a grid; verify κ and any pairings.
    Decompose {
        /// Grid document; `-` or omitted reads stdin.
        input: Option<PathBuf>,
    },
    /// Dual of a space object or of a grid with its witness.
    Dual { input: Option<PathBuf> },
    /// Completed tensor product of two objects.
    Tensor {
        #[arg(long, value_enum)]
        op: TensorOp,
        a: PathBuf,
        b: PathBuf,
    },
    /// Run a randomized invariant suite.
    Check {
        #[arg(long, value_enum)]
        suite: SuiteArg,
    },
    /// Emit a random valid instance.
    Gen {
        #[arg(long, value_enum)]
        kind: GenKind,
        /// Ground-truth sidecar path for grids (default: `<out>.truth.json`).
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Also plant product, coproduct and duality families.
        #[arg(long)]
        pairings: bool,
    },
    /// Human-readable summary of an output document.
    Report { input: Option<PathBuf> },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = commands::run(&cli);
    ExitCode::from(outcome)
}
