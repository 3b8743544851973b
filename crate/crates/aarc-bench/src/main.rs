//! `bench` — benchmark runner and report generator for the aarc solvers.

use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

use aarc_bench::report::{render_table, write_report, FStarSource};
use aarc_bench::{run_bench, write_digest, BenchSpec};

#[derive(Parser)]
#[command(name = "bench", about = "Run solver benchmarks and convergence-rate reports")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one or more solvers on a dataset and write traces + summaries.
    Run {
        /// Dataset: a libsvm file path, a registered stand-in name, or
        /// `synthetic:<kind>:k=v,...` (kinds: quadratic, logsumexp, quartic).
        #[arg(long)]
        data: String,
        /// Ridge weight for logistic objectives.
        #[arg(long)]
        lambda: f64,
        /// Comma-separated solver names (aarc, aarcq, arc, aagd, agd,
        /// hybrid_aarc).
        #[arg(long, required = true)]
        solvers: Vec<String>,
        /// Seed for the start point (and synthetic instance, if any).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Start point: `far_normal:<variance>`, `zeros`, or `file:<path>`.
        #[arg(long, default_value = "far_normal:5000")]
        init: String,
        /// Output directory for per-solver `<name>.csv` / `<name>.json`.
        #[arg(long)]
        out: PathBuf,
        /// Config override `key=value`; repeatable. Dotted keys reach nested
        /// fields (`fd.kappa_hs=0.1`, `subsolver.kind=dense`); harness keys
        /// (`agd_budget`, `switch_window`, ...) are also accepted.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Compute scaled-gap envelopes and tail slopes from a trace directory.
    Report {
        /// Directory containing `<solver>.csv` / `<solver>.json` pairs.
        #[arg(long)]
        traces: PathBuf,
        /// Reference optimum: `ref` (fresh high-accuracy run) or `meta`
        /// (objective metadata, synthetic instances only).
        #[arg(long, default_value = "ref")]
        fstar: String,
    },
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Run { data, lambda, solvers, seed, init, out, set } => {
            let spec = BenchSpec::from_args(&data, lambda, &solvers, seed, &init, out, &set)?;
            let outcomes = run_bench(&spec)?;
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            for o in &outcomes {
                write_digest(&mut lock, o)?;
            }
        }
        Cmd::Report { traces, fstar } => {
            let doc = write_report(&traces, FStarSource::parse(&fstar)?)?;
            print!("{}", render_table(&doc));
        }
    }
    Ok(())
}
