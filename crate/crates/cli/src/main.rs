use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ppcpcov_cli::{init_workers, preset, render_csv, CliError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "ppcpcov", about = "Downlink coverage for Poisson cluster networks", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and emit CSV on stdout or to a file.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Config file (flat key = value lines, '#' comments).
    #[arg(long)]
    config: Option<PathBuf>,

    /// Named preset used as the base configuration.
    #[arg(long)]
    preset: Option<String>,

    /// Override the run mode: analytic | simulate | compare | contact.
    #[arg(long)]
    mode: Option<String>,

    /// Override a single key, e.g. --set model.sigma2=1.5 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Print the effective configuration and exit without running.
    #[arg(long)]
    dump_config: bool,
}

fn effective_config(args: &RunArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &args.preset {
        Some(name) => preset(name).ok_or_else(|| {
            CliError::Config(ppcpcov_cli::ConfigError(format!("unknown preset: {name}")))
        })?,
        None => ExperimentConfig::default(),
    };
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)?;
        cfg.apply_text(&text)?;
    }
    if let Some(mode) = &args.mode {
        cfg.set("mode", mode)?;
    }
    for kv in &args.set {
        cfg.apply_override(kv)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(args: &RunArgs, text: &str) -> Result<(), CliError> {
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(args: &RunArgs) -> Result<(), CliError> {
    let cfg = effective_config(args)?;
    if args.dump_config {
        return emit(args, &cfg.dump());
    }
    let csv = render_csv(&cfg)?;
    emit(args, &csv)
}

fn main() -> ExitCode {
    init_workers();
    let cli = Cli::parse();
    let Command::Run(args) = cli.command;
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ppcpcov: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
