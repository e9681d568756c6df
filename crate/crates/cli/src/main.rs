//! `virtphot` command-line runner.

mod config;
mod plot;
mod report;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use report::CliError;

#[derive(Parser)]
#[command(name = "virtphot", version, about = "Virtual-photon conversion simulator")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute a run configuration and write its artifacts.
    Run { config: PathBuf },
    /// Parse and validate a configuration without running it.
    Validate { config: PathBuf },
    /// Render an SVG from a CSV file and a TOML plot spec.
    Plot {
        csv: PathBuf,
        spec: PathBuf,
        /// Directory for the SVG (default: next to the CSV).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Cmd::Run { config } => {
            let cfg = RunConfig::load(&config)?;
            let summary = run::run(&cfg)?;
            println!("{}", serde_json::json!({ "status": "ok", "outputs": summary.outputs, "config_sha256": summary.config_sha256 }));
        }
        Cmd::Validate { config } => {
            let cfg = RunConfig::load(&config)?;
            let (resolved, hash) = cfg.resolved();
            println!("{}", serde_json::json!({ "status": "valid", "config_sha256": hash, "config": resolved }));
        }
        Cmd::Plot { csv, spec, out_dir } => {
            let spec = plot::PlotSpec::load(&spec)?;
            let dir = out_dir
                .or_else(|| std::env::var_os(run::OUT_DIR_ENV).map(PathBuf::from))
                .unwrap_or_else(|| csv.parent().map(PathBuf::from).unwrap_or_default());
            std::fs::create_dir_all(&dir).map_err(|e| CliError::io("output directory", &dir, e))?;
            match plot::emit_plot(&csv, &spec, &dir)? {
                Some(p) => println!("{}", serde_json::json!({ "status": "ok", "outputs": [p] })),
                None => println!("{}", serde_json::json!({ "status": "empty", "outputs": [] })),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
