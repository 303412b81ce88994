use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod config;

use config::RunFlags;

/// Stochastic local search for hybrid XOR-CNF formulas, with a crossbar
/// accelerator emulator.
#[derive(Debug, Parser)]
#[command(name = "xnfsat", version)]
struct Cli {
    /// TOML file with default flag values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the effective configuration to stderr
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one trial; exit 10 when satisfied, 20 when the flip budget runs out
    Solve {
        input: PathBuf,
        #[command(flatten)]
        run: RunFlags,
        /// Also write the result record here
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<String>,
    },
    /// Convert between CNF and XNF representations
    Convert {
        input: PathBuf,
        #[arg(long, value_enum)]
        to: Target,
        /// Output file (stdout when absent)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Cut XOR clauses wider than this with auxiliary variables before expanding
        #[arg(long)]
        width: Option<usize>,
        /// Refuse to expand XOR clauses wider than this
        #[arg(long, default_value_t = xnfsat_core::transform::DEFAULT_EXPANSION_CAP)]
        cap: usize,
        /// Widest XOR clause recovered from CNF blocks
        #[arg(long, default_value_t = xnfsat_core::transform::DEFAULT_EXTRACTION_K_MAX)]
        k_max: usize,
    },
    /// Generate a satisfiable instance plus a witness sidecar (<out>.witness)
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Run many trials per instance and noise level; emit per-trial and aggregate rows
    Bench {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        run: RunFlags,
        #[arg(long)]
        trials: Option<usize>,
        /// Worker threads (default: all cores)
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// csv or jsonl
        #[arg(long)]
        format: Option<String>,
        /// Successes required before a success-curve point is trusted
        #[arg(long)]
        min_successes: Option<usize>,
        /// Bootstrap resamples for the ITS99 standard error
        #[arg(long)]
        resamples: Option<usize>,
        /// Measure wall-clock time per trial (off by default so reruns are byte-identical)
        #[arg(long)]
        wall_time: bool,
        /// Only emit aggregate rows
        #[arg(long)]
        aggregate_only: bool,
        /// Print the noise-level table and the best sigma to stderr
        #[arg(long)]
        grid_search: bool,
    },
    /// Per-component energy breakdown and crossbar area for one instance
    EnergyReport {
        input: PathBuf,
        #[command(flatten)]
        run: RunFlags,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        jobs: Option<usize>,
        /// Count the make and break arrays separately
        #[arg(long)]
        pipelined: bool,
    },
    /// Dump the programmed crossbar as a plain PBM image
    Program {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Target {
    Cnf,
    Xnf,
}

#[derive(Debug, Subcommand)]
enum GenKind {
    /// Minimal disagreement parity instance
    Mdp {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Labels flipped in the planted data (default k)
        #[arg(long)]
        flips: Option<usize>,
        #[arg(long, env = "XNFSAT_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Planted random XOR-SAT
    Xorsat {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 3)]
        arity: usize,
        #[arg(long, env = "XNFSAT_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage errors share the generic error status; help and version succeed
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                commands::EXIT_ERROR
            } else {
                commands::EXIT_OK
            });
        }
    };
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::EXIT_ERROR)
        }
    }
}
