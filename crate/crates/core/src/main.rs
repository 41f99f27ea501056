//! Command-line front end: `generate`, `solve`, `sweep`, `report`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fourhom::config::RunConfig;
use fourhom::experiment::{generate_previews, rerender_report, run_experiment, run_single};
use fourhom::{Error, Result};

#[derive(Parser)]
#[command(
    name = "fourhom",
    version,
    about = "FFT-based periodic homogenization on reduced frequency sets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Voxelize the geometry and write phase-map and mask previews
    /// (no solving).
    Generate(RunArgs),
    /// Solve the first configured (pattern, R) combination and write fields.
    Solve(RunArgs),
    /// Full sweep: reference solve, every (pattern, R) combination, error
    /// reports, timing tables, and plot data.
    Sweep(RunArgs),
    /// Re-render plot data and the crossover scan from a stored errors.csv.
    Report(ReportArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (falls back to `output_dir` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the pointwise stages (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Override the config's geometry seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ReportArgs {
    /// Stored errors.csv produced by `sweep`.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for the re-rendered artifacts.
    #[arg(long)]
    out: PathBuf,
}

fn load(args: &RunArgs) -> Result<(RunConfig, PathBuf)> {
    if let Some(threads) = args.threads {
        // Ignore "already built": only possible if load() ran twice.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let mut config = RunConfig::from_file(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let out = args
        .out
        .clone()
        .or_else(|| config.output_dir.as_ref().map(PathBuf::from))
        .ok_or_else(|| {
            Error::invalid("no output directory: pass --out or set output_dir in the config")
        })?;
    Ok((config, out))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(args) => {
            let (config, out) = load(&args)?;
            generate_previews(&config, &out)?;
            println!("previews written to {}", out.display());
        }
        Command::Solve(args) => {
            let (config, out) = load(&args)?;
            let sol = run_single(&config, &out)?;
            println!(
                "converged in {} iterations (residual {:.3e}, {:.3} s); fields in {}",
                sol.total_iterations(),
                sol.final_residual(),
                sol.timings.total_seconds(),
                out.display()
            );
        }
        Command::Sweep(args) => {
            let (config, out) = load(&args)?;
            let outcome = run_experiment(&config, &out)?;
            for table in &outcome.timing_tables {
                print!("{}", table.to_text());
                println!();
            }
            match outcome.crossover_r {
                Some(r) => println!("crossover: radial micro error <= adapted at R = {r}"),
                None => println!("crossover: none in the swept R values"),
            }
            for failure in &outcome.failures {
                eprintln!("failed combination: {failure}");
            }
            println!(
                "{} report rows written to {}",
                outcome.reports.len(),
                out.join("errors.csv").display()
            );
        }
        Command::Report(args) => {
            let reports = rerender_report(&args.config, &args.out)?;
            println!(
                "re-rendered {} rows into {}",
                reports.len(),
                args.out.display()
            );
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Invalid(_) | Error::Format { .. } => 2,
        Error::Solver(_) | Error::ImaginaryResidue { .. } => 3,
        Error::Io { .. } => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
