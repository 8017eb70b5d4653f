//! Command-line front end: sample configurations, estimate boundary norms,
//! bound Cheeger constants, solve the restricted continuum problem, and run
//! the scaling and shape experiments.
//!
//! Exit codes: 0 success, 2 argument error, 3 data/cache error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use percolab::beta::BetaError;
use percolab::cheeger::{cheeger_search, Host};
use percolab::continuum::{solve_restricted, Norm, SolverSettings};
use percolab::harness::{
    cache_norm_table, run_scaling, run_shape, scaling_csv, shape_csv, ExperimentSpec,
    HarnessError, NormSpec,
};
use percolab::lattice::{cluster, giant_component, sample_config, Config, LatticeError};

/// Cache directory: $PERCOLAB_CACHE or ./.percolab-cache.
fn cache_dir() -> PathBuf {
    std::env::var_os("PERCOLAB_CACHE")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(".percolab-cache"))
}

#[derive(Parser)]
#[command(name = "percolab", version, about = "percolation isoperimetry laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a bond-percolation configuration and write a binary snapshot.
    Sample(SampleArgs),
    /// Estimate the boundary norm table for a percolation parameter.
    Beta(BetaArgs),
    /// Cheeger sandwich of the giant component of a configuration snapshot.
    Cheeger(CheegerArgs),
    /// Solve the restricted continuum problem for a norm.
    Solve(SolveArgs),
    /// Scaling experiment: n·Φ̂ against the predicted continuum limit.
    Scale(ScaleArgs),
    /// Shape experiment: rescaled optimizers against continuum candidates.
    Shape(ScaleArgs),
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    n: i32,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Padding; defaults to n.
    #[arg(long)]
    pad: Option<i32>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BetaArgs {
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 3)]
    resolution: usize,
    /// Comma-separated increasing scales.
    #[arg(long, default_value = "8,16,32", value_delimiter = ',')]
    scales: Vec<u32>,
    #[arg(long, default_value_t = 8)]
    replicas: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CheegerArgs {
    /// Configuration snapshot from `sample`.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 20_000)]
    budget: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// Builtin norm name (euclid, l1, linf, with optional *scale) or a norm
    /// table file path.
    #[arg(long, default_value = "euclid")]
    norm: String,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, default_value_t = 12)]
    control_points: usize,
    #[arg(long, default_value_t = 4)]
    restarts: u32,
    #[arg(long, default_value_t = 1500)]
    iterations: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ScaleArgs {
    #[arg(long)]
    p: f64,
    /// Comma-separated strictly increasing box radii.
    #[arg(long, value_delimiter = ',')]
    n: Vec<i32>,
    /// Comma-separated seeds, one scaling row per (n, seed).
    #[arg(long, default_value = "1", value_delimiter = ',')]
    seeds: Vec<u64>,
    /// pad = ceil(factor * n).
    #[arg(long, default_value_t = 1.0)]
    pad_factor: f64,
    /// Builtin norm, table path, or `estimate` to build one for p.
    #[arg(long, default_value = "estimate")]
    norm: String,
    #[arg(long, default_value_t = 20_000)]
    budget: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    resolution: usize,
    #[arg(long, default_value = "8,16,32", value_delimiter = ',')]
    scales: Vec<u32>,
    #[arg(long, default_value_t = 6)]
    replicas: u32,
    /// Grid resolution for shape distances.
    #[arg(long, default_value_t = 0.05)]
    shape_resolution: f64,
    #[arg(long)]
    out: PathBuf,
}

fn norm_spec(name: &str, args: &ScaleArgs) -> NormSpec {
    if name == "estimate" {
        NormSpec::Estimate {
            resolution: args.resolution,
            scales: args.scales.clone(),
            replicas: args.replicas,
        }
    } else if Norm::parse_builtin(name).is_ok() {
        NormSpec::Builtin(name.to_string())
    } else {
        NormSpec::TableFile(PathBuf::from(name))
    }
}

fn experiment_spec(args: &ScaleArgs) -> ExperimentSpec {
    ExperimentSpec {
        p: args.p,
        n_grid: args.n.clone(),
        seeds: args.seeds.clone(),
        pad_factor: args.pad_factor,
        norm: norm_spec(&args.norm, args),
        cheeger_budget: args.budget,
        solver: SolverSettings {
            seed: args.seed,
            ..Default::default()
        },
        cache_dir: cache_dir(),
        density_radius: 150,
        density_replicas: 16,
        master_seed: args.seed,
    }
}

/// 2 for argument errors, 3 for data/cache errors.
fn classify(err: &HarnessError) -> u8 {
    match err {
        HarnessError::Argument(_) => 2,
        HarnessError::Lattice(LatticeError::Argument(_))
        | HarnessError::Lattice(LatticeError::Subcritical(_))
        | HarnessError::Lattice(LatticeError::Capacity(_)) => 2,
        HarnessError::Beta(BetaError::Argument(_)) => 2,
        HarnessError::Continuum(percolab::continuum::ContinuumError::Argument(_)) => 2,
        _ => 3,
    }
}

fn run() -> Result<(), (u8, String)> {
    let cli = Cli::parse();
    let arg_err = |m: String| (2u8, m);
    let data_err = |m: String| (3u8, m);
    match cli.command {
        Command::Sample(args) => {
            let pad = args.pad.unwrap_or(args.n);
            let config = sample_config(args.n, args.p, args.seed, pad)
                .map_err(|e| arg_err(e.to_string()))?;
            let mut file = fs::File::create(&args.out).map_err(|e| data_err(e.to_string()))?;
            config
                .write_snapshot(&mut file)
                .map_err(|e| data_err(e.to_string()))?;
            println!(
                "wrote snapshot n={} pad={} p={} seed={} to {}",
                args.n,
                pad,
                args.p,
                args.seed,
                args.out.display()
            );
        }
        Command::Beta(args) => {
            let outcome = cache_norm_table(
                &cache_dir(),
                args.p,
                args.resolution,
                &args.scales,
                args.replicas,
                args.seed,
            )
            .map_err(|e| (classify(&e), e.to_string()))?;
            fs::write(&args.out, outcome.table.to_text())
                .map_err(|e| data_err(e.to_string()))?;
            println!(
                "{} norm table for p={} ({} directions) -> {}",
                if outcome.hit { "cached" } else { "built" },
                args.p,
                args.resolution,
                args.out.display()
            );
        }
        Command::Cheeger(args) => {
            let file = fs::File::open(&args.config).map_err(|e| data_err(e.to_string()))?;
            let config =
                Arc::new(Config::read_snapshot(file).map_err(|e| data_err(e.to_string()))?);
            let labeling = Arc::new(cluster(&config));
            let giant =
                giant_component(&config, &labeling).map_err(|e| arg_err(e.to_string()))?;
            let host = Host::from_subgraph(&giant);
            let result = cheeger_search(&host, args.budget, args.seed)
                .map_err(|e| arg_err(e.to_string()))?;
            fs::write(&args.out, result.to_text(&host)).map_err(|e| data_err(e.to_string()))?;
            println!(
                "phi in [{}, {}] = [{:.6}, {:.6}], |giant| = {}",
                result.phi_lower,
                result.phi_upper,
                result.phi_lower.to_f64(),
                result.phi_upper.to_f64(),
                giant.len()
            );
        }
        Command::Solve(args) => {
            let norm = if let Ok(n) = Norm::parse_builtin(&args.norm) {
                n
            } else {
                let raw =
                    fs::read_to_string(&args.norm).map_err(|e| data_err(e.to_string()))?;
                Norm::Table(
                    percolab::beta::NormTable::from_text(&raw)
                        .map_err(|e| data_err(e.to_string()))?,
                )
            };
            let settings = SolverSettings {
                control_points: args.control_points,
                restarts: args.restarts,
                seed: args.seed,
                iterations: args.iterations,
                ..Default::default()
            };
            let result = solve_restricted(&norm, args.alpha, settings)
                .map_err(|e| arg_err(e.to_string()))?;
            fs::write(&args.out, result.to_text()).map_err(|e| data_err(e.to_string()))?;
            println!(
                "phi_hat({}) = {:.6} via {}",
                args.alpha, result.phi_hat, result.optimizer_family
            );
        }
        Command::Scale(args) => {
            let spec = experiment_spec(&args);
            let report = run_scaling(&spec).map_err(|e| (classify(&e), e.to_string()))?;
            fs::write(&args.out, scaling_csv(&report)).map_err(|e| data_err(e.to_string()))?;
            println!(
                "theta_hat = {:.6}, phi_hat = {:.6}, predicted n·Φ limit = {:.6}",
                report.theta_hat, report.phi_hat, report.predicted_limit
            );
            println!(
                "largest-n mean of n·Φ̂ = {:.6} over {} rows -> {}",
                report.largest_n_mean,
                report.records.len(),
                args.out.display()
            );
        }
        Command::Shape(args) => {
            let spec = experiment_spec(&args);
            let report =
                run_shape(&spec, args.shape_resolution).map_err(|e| (classify(&e), e.to_string()))?;
            fs::write(&args.out, shape_csv(&report)).map_err(|e| data_err(e.to_string()))?;
            let ok = report.records.iter().filter(|r| r.error.is_none()).count();
            println!(
                "shape distances for {ok}/{} optimizers -> {}",
                report.records.len(),
                args.out.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
