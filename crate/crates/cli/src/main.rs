use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use modmetric_cli::{load_config, prepare, run, Command, Format};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "modmetric", version, about = "Sampled checks for metric modulars")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    #[arg(long)]
    config: PathBuf,
    /// Overrides plan.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads for sampling sweeps. Does not change the report.
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("modmetric: {message}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn execute(cli: Cli) -> Result<u8, String> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err("--workers must be at least 1".into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    let mut config = load_config(&cli.config).map_err(|e| e.to_string())?;
    if let Some(seed) = cli.seed {
        config.plan.seed = seed;
    }
    if let Some(format) = cli.format {
        config.output.format = format;
    }
    let out = cli.out.or_else(|| config.output.path.clone());
    let base = cli.config.parent().unwrap_or(Path::new("."));
    let prepared = prepare(config, cli.command, base).map_err(|e| e.to_string())?;

    let report = run(&prepared);
    let text = match prepared.config.output.format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    };
    match out {
        Some(path) => std::fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(if report.passed() { 0 } else { EXIT_FAIL })
}
