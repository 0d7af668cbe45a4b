use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ionqrm_cli::config::{Command, OutputFormat};
use ionqrm_cli::output::write_atomic;
use ionqrm_cli::{run, CliError, Document, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "ionqrm",
    version,
    about = "Trapped-ion quantum Rabi model toolkit"
)]
struct Args {
    /// build, verify, evolve, scan, regime or all-checks
    command: Command,

    /// Configuration file (`key = value` lines)
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override a configuration key, e.g. `--set eta=0.05`
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Write output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long)]
    format: Option<OutputFormat>,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("IONQRM_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.trim().parse().map_err(|_| {
        CliError::Io(format!(
            "IONQRM_THREADS must be a non-negative integer, got '{value}'"
        ))
    })?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    Ok(())
}

fn load(args: &Args) -> Result<RunConfig, CliError> {
    let mut doc = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
            Document::parse(&text)?
        }
        None => Document::default(),
    };
    doc.set_override(&format!("command={}", args.command))?;
    for o in &args.overrides {
        doc.set_override(o)?;
    }
    if let Some(out) = &args.out {
        doc.set_override(&format!("out={}", out.display()))?;
    }
    if let Some(f) = args.format {
        doc.set_override(&format!("format={f}"))?;
    }
    Ok(RunConfig::from_document(&doc)?)
}

fn execute(args: &Args) -> Result<bool, CliError> {
    configure_threads()?;
    let cfg = load(args)?;
    let output = run(&cfg)?;
    for line in &output.log {
        eprintln!("{line}");
    }
    match &cfg.out {
        Some(path) => write_atomic(path.as_ref(), &output.body)
            .map_err(|e| CliError::Io(format!("cannot write {path}: {e}")))?,
        None => print!("{}", output.body),
    }
    Ok(output.success)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(2)
        }
    }
}
