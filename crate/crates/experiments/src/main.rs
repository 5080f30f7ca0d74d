use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use sparsegrad_experiments::{run, write_outputs, ExperimentConfig, Kind, Manifest, WORKERS_ENV};

#[derive(Parser)]
#[command(name = "sparsegrad", version, about = "Run reconstruction experiments and write result tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One-bar recovery sweep over the bar offset.
    Onebar(RunArgs),
    /// Two-bar contrast sweep over the background level.
    Twobar(RunArgs),
    /// Super-resolution from low-frequency Fourier data.
    Superres(RunArgs),
    /// MRI from radial k-space lines.
    Mri(RunArgs),
    /// Limited-angle CT.
    Ct(RunArgs),
    /// Parameter sensitivity grid.
    Sensitivity(RunArgs),
    /// Box and inner-iteration ablations.
    Ablation(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file with flat key = value pairs.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Re-run the configuration stored in a manifest.json.
    #[arg(long, conflicts_with = "config")]
    manifest: Option<PathBuf>,
    /// Output directory.
    #[arg(short, long, default_value = "runs")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Config override, `key=value` in TOML syntax. Repeatable.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn resolve(kind: Kind, args: &RunArgs) -> Result<ExperimentConfig> {
    let mut overrides = args.overrides.clone();
    if let Some(seed) = args.seed {
        overrides.push(format!("seed={seed}"));
    }
    match &args.manifest {
        Some(path) => {
            let m = Manifest::load(path)?;
            let mut table = toml::Table::try_from(&m.config)?;
            for o in &overrides {
                table.extend(sparsegrad_experiments::config::parse_override(o)?);
            }
            ExperimentConfig::resolve(kind, table)
        }
        None => ExperimentConfig::load(kind, args.config.as_deref(), &overrides),
    }
}

fn execute(kind: Kind, args: &RunArgs) -> Result<()> {
    let cfg = resolve(kind, args)?;
    let workers = match std::env::var(WORKERS_ENV) {
        Ok(v) => v.parse::<usize>().with_context(|| format!("{WORKERS_ENV} must be a positive integer"))?,
        Err(_) => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    let outcome = pool.install(|| run(&cfg))?;
    write_outputs(&args.out, &cfg, &outcome)?;
    let exact = outcome.rows.iter().filter(|r| r.exact_recovery()).count();
    eprintln!("{}: {} rows ({exact} exact recoveries) written to {}", kind.name(), outcome.rows.len(), args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Onebar(a) => (Kind::Onebar, a),
        Command::Twobar(a) => (Kind::Twobar, a),
        Command::Superres(a) => (Kind::Superres, a),
        Command::Mri(a) => (Kind::Mri, a),
        Command::Ct(a) => (Kind::Ct, a),
        Command::Sensitivity(a) => (Kind::Sensitivity, a),
        Command::Ablation(a) => (Kind::Ablation, a),
    };
    match execute(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
