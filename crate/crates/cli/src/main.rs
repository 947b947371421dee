use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use spad_ofdm_cli::commands::{run, Command};
use spad_ofdm_cli::config::{parse_config, parse_override};

/// Analytic curves, Monte Carlo cross-checks and clipping optimization for
/// SPAD-receiver DCO-OFDM links. Results are written as CSV.
#[derive(Parser, Debug)]
#[command(name = "spad-ofdm", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Flat `key = value` file; missing keys take reference defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key after the file is read; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output CSV path; standard output when omitted or `-`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("SPAD_OFDM_THREADS") else { return Ok(()) };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).with_context(|| format!("SPAD_OFDM_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring worker threads")?;
    Ok(())
}

fn execute(cli: &Cli) -> Result<usize> {
    configure_threads()?;
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        None => String::new(),
    };
    let overrides = cli.set.iter().map(|s| parse_override(s)).collect::<Result<Vec<_>, _>>()?;
    let cfg = parse_config(&text, &overrides)?;

    let mut out: Box<dyn Write> = match &cli.out {
        Some(path) if path.as_os_str() != "-" => {
            Box::new(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
        }
        _ => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let outcome = run(cli.command, &cfg, &mut out)?;
    out.flush()?;
    log::info!("{:?}: {} rows", cli.command, outcome.rows);
    Ok(outcome.failures)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(failures) => {
            eprintln!("validation failed: {failures} checks out of tolerance");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
