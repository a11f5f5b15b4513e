mod config;
mod job;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{JobConfig, Pipeline};
use job::{Job, JobError};

/// Generate, verify and classify surfaces of Bryant type in Minkowski 4-space.
#[derive(Debug, Parser)]
#[command(name = "bryant4", version)]
struct Cli {
    #[arg(value_enum)]
    pipeline: Pipeline,
    /// TOML job description.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for the report, meshes and CSV files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Multiplies every acceptance tolerance.
    #[arg(long)]
    tol_scale: Option<f64>,
    /// Nodes per side, overriding the config.
    #[arg(long)]
    grid_n: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => return fail(JobError::validation("IoError", format!("{}: {e}", cli.config.display()))),
    };
    let config = match JobConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let outcome = Job {
        config: &config,
        pipeline: cli.pipeline,
        out: &cli.out,
        grid_n: cli.grid_n,
        tol_scale: cli.tol_scale,
    }
    .run();
    print!("{}", outcome.text);
    ExitCode::from(outcome.exit_code as u8)
}

fn fail(e: JobError) -> ExitCode {
    print!("{}", e.block());
    ExitCode::from(e.exit_code as u8)
}
