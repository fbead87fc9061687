mod commands;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Tsirelson norms, Bourgain–Delbaen stages and saturation experiments.
#[derive(Debug, Parser)]
#[command(name = "bdx", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ParamsArgs {
    /// Parameter file (`n`, `b`, `r`, optional `tol`).
    #[arg(long, conflicts_with = "derive")]
    params: Option<PathBuf>,
    /// Derive weights from `n,r,b1`.
    #[arg(long, value_name = "N,R,B1")]
    derive: Option<String>,
}

#[derive(Debug, Args)]
struct RegistryArgs {
    /// Number of stages to materialize.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    stages: u64,
    /// Filter file; without it the enumeration is exhaustive.
    #[arg(long)]
    filters: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Tsirelson,
    Bd,
    Analysis,
    Lower,
    Upper,
    Prop14,
    All,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate and print a parameter set.
    Params {
        #[command(flatten)]
        params: ParamsArgs,
    },
    /// Tsirelson norm of a finitely supported vector.
    TsNorm {
        #[command(flatten)]
        params: ParamsArgs,
        /// File or inline text of `index:value` pairs.
        #[arg(long)]
        vec: String,
        /// Also print a norming functional.
        #[arg(long)]
        witness: bool,
    },
    /// Build the stages and print the registry dump.
    BdBuild {
        #[command(flatten)]
        params: ParamsArgs,
        #[command(flatten)]
        registry: RegistryArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sup norm of an extended vector; entries are `position:value`.
    BdNorm {
        #[command(flatten)]
        params: ParamsArgs,
        #[arg(long)]
        vec: String,
        #[arg(long)]
        horizon: usize,
        #[arg(long)]
        filters: Option<PathBuf>,
    },
    /// Evaluation, r- and tree analysis of one node as JSON.
    AnalyzeGamma {
        #[command(flatten)]
        params: ParamsArgs,
        #[command(flatten)]
        registry: RegistryArgs,
        /// Registry position of the node.
        #[arg(long)]
        id: usize,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        tree: bool,
    },
    /// Run verification suites; exit 1 when a check fails.
    Verify {
        #[command(flatten)]
        params: ParamsArgs,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
        stages: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Seeded experiments.
    Experiment {
        #[command(subcommand)]
        kind: Experiment,
    },
}

#[derive(Debug, Subcommand)]
enum Experiment {
    /// Norms of block combinations against their ℓ_r size.
    Saturation {
        #[command(flatten)]
        params: ParamsArgs,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Number of blocks.
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
        scale: u64,
        /// CSV report, or JSON when the name ends in `.json`; stdout carries the summary.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Parallelism cap; output does not depend on it.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        jobs: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
