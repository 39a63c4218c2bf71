use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use glcip::{Formulation, GeneratorParams, Rational};
use glcip_cli::{
    cmd_bench, cmd_generate, cmd_generate_grid, cmd_solve, cmd_verify, exit_code, report_json, write_csv, Grid,
    SolveArgs, EXIT_ERROR, EXIT_INFEASIBLE_SOLUTION, EXIT_OK,
};

#[derive(Parser)]
#[command(name = "glcip", version, about = "Exact solver for the generalized least cost influence problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridArg {
    Desk,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one instance, or a whole grid with a bench manifest.
    Generate {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 0.1)]
        beta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "0.5")]
        alpha: Rational,
        #[arg(long, default_value = "1")]
        gamma: Rational,
        /// Output file; `.json` selects JSON, anything else the text format.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Generate a benchmark grid into `--dir` instead.
        #[arg(long, value_enum)]
        grid: Option<GridArg>,
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[arg(long, default_value = "instances")]
        dir: PathBuf,
    },
    /// Solve an instance and print the JSON report.
    Solve {
        instance: PathBuf,
        #[arg(long, default_value = "icc+")]
        formulation: Formulation,
        /// Seconds.
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
        #[arg(long)]
        node_limit: Option<usize>,
        /// Only look for solutions cheaper than this.
        #[arg(long)]
        cutoff: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Omit wall time so repeated runs give identical reports.
        #[arg(long)]
        reproducible: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a solution (bare incentive vector or solve report) against an instance.
    Verify { instance: PathBuf, solution: PathBuf },
    /// Run a manifest and print the aggregate table as CSV.
    Bench {
        manifest: PathBuf,
        /// Default per-row time limit in seconds.
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
        /// Aggregate CSV destination (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-run CSV destination.
        #[arg(long)]
        runs: Option<PathBuf>,
    },
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    if let Some(path) = out {
        std::fs::write(path, format!("{text}\n")).with_context(|| format!("writing {}", path.display()))?;
    }
    println!("{text}");
    Ok(())
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Generate { n, k, beta, seed, alpha, gamma, out, grid, seeds, dir } => {
            if let Some(grid) = grid {
                let grid = match grid {
                    GridArg::Desk => Grid::Desk,
                    GridArg::Full => Grid::Full,
                };
                let manifest = cmd_generate_grid(grid, seeds, &dir, &Formulation::ALL)?;
                println!("{}", manifest.display());
            } else {
                let inst = cmd_generate(&GeneratorParams::new(n, k, beta, seed, alpha, gamma), out.as_deref())?;
                if out.is_none() {
                    print!("{}", inst.to_text());
                }
            }
            Ok(EXIT_OK)
        }
        Command::Solve { instance, formulation, time_limit, node_limit, cutoff, seed, reproducible, out } => {
            let args = SolveArgs { formulation, time_limit, node_limit, cutoff, seed, reproducible };
            let report = cmd_solve(&instance, &args)?;
            emit(&report_json(&report), out.as_ref())?;
            Ok(exit_code(&report))
        }
        Command::Verify { instance, solution } => {
            let v = cmd_verify(&instance, &solution)?;
            println!("{}", serde_json::to_string_pretty(&v)?);
            Ok(if v.feasible { EXIT_OK } else { EXIT_INFEASIBLE_SOLUTION })
        }
        Command::Bench { manifest, time_limit, out, runs } => {
            let (rows, agg) = cmd_bench(&manifest, time_limit)?;
            if let Some(path) = runs {
                write_csv(&rows, std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?)?;
            }
            match out {
                Some(path) => write_csv(&agg, std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?)?,
                None => write_csv(&agg, std::io::stdout().lock())?,
            }
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // Usage errors share the generic error code; 2 is reserved for limits.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR as u8 } else { EXIT_OK as u8 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
