//! `extremal`: experiments on Diophantine exponents, extremality criteria
//! and (C, α)-good functions. Exit status 0 means no violation, 2 means a
//! criterion violation was found and 1 means an error.

mod commands;
mod config;
mod progress;
mod selftest;
mod table;
mod values;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{Command, ExperimentConfig, FileConfig, Format, OutputSpec, DEFAULT_PRECISION_BITS};
use progress::Progress;

#[derive(Debug, Parser)]
#[command(name = "extremal", version, about = "Extremality and Diophantine exponent experiments")]
struct Cli {
    /// JSON file holding a full run (`command`, `parameters`, `seed`, `output`, `precision`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice. Defaults to 7.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    /// Bits of precision for truncated irrationals.
    #[arg(long, global = true, env = "EXTREMAL_PRECISION")]
    precision: Option<u32>,
    /// Worker threads for parallel enumeration (0 lets rayon decide).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Add a decimal column next to each exact column.
    #[arg(long, global = true)]
    decimal: bool,
    /// Suppress progress messages on standard error.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

const DEFAULT_SEED: u64 = 7;

/// Command-line flags take precedence over the config file.
fn resolve(cli: Cli) -> Result<ExperimentConfig, String> {
    let file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            Some(serde_json::from_str::<FileConfig>(&text).map_err(|e| format!("{}: {e}", path.display()))?)
        }
        None => None,
    };
    let (file_command, file_seed, file_output, file_precision) = match file {
        Some(f) => (Some(f.command), f.seed, f.output, f.precision),
        None => (None, None, None, None),
    };
    let command = cli
        .command
        .or(file_command)
        .ok_or("no subcommand given and no --config file; see --help")?;
    let base = file_output.unwrap_or_default();
    let output = OutputSpec {
        path: cli.output.or(base.path),
        format: cli.format.unwrap_or(base.format),
        decimal: cli.decimal || base.decimal,
    };
    Ok(ExperimentConfig {
        command,
        seed: cli.seed.or(file_seed).unwrap_or(DEFAULT_SEED),
        output,
        precision: cli.precision.or(file_precision).unwrap_or(DEFAULT_PRECISION_BITS),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.workers > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let progress = Progress::new(cli.quiet);
    let config = match resolve(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    progress.note(&format!("running {} (seed {}, {} bits)", config.command.name(), config.seed, config.precision));
    let artifact = match commands::run(&config, &progress) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let text = table::render(&config, &artifact);
    match &config.output.path {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    match (&config.command, artifact.violated) {
        (_, false) => ExitCode::SUCCESS,
        // A failing self-test is a broken build, not a mathematical finding.
        (Command::Selftest(_), true) => {
            eprintln!("error: self-test failed: {}", artifact.summary["failed"]);
            ExitCode::from(1)
        }
        (_, true) => ExitCode::from(2),
    }
}
