//! `ulamkit` command-line interface.
//!
//! Exit codes: 0 success, 1 usage, parse or numerical error, 2 stability
//! hypotheses not satisfied.

mod commands;
mod config;

use anyhow::Result;
use clap::{Parser, Subcommand};
use config::{ConstantArgs, Merge, PortraitArgs, RunConfig, ShadowArgs, SharpnessArgs, SystemArgs, TransformArgs};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "ulamkit", version, about = "Ulam constants and shadowing for 2-D linear systems in Jordan-type forms")]
struct Cli {
    /// TOML run configuration; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Best Ulam constant, its argmax and the divergence conditions (JSON)
    Constant {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        args: ConstantArgs,
    },
    /// Shadow an approximate solution given by expressions (JSON + deviation CSV)
    Shadow {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        args: ShadowArgs,
    },
    /// Extremal-forcing experiment (summary JSON + ratio CSV)
    Sharpness {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        args: SharpnessArgs,
    },
    /// Reduce A(t) by a transform R(t) and propagate the constant
    Transform {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        args: TransformArgs,
    },
    /// Run a registered case (or `all`, or `list`) and diff against expectations
    Example {
        id: String,
        /// Skip the extremal-forcing experiments
        #[arg(long)]
        quick: bool,
        /// Print JSON instead of text
        #[arg(long)]
        json: bool,
    },
    /// Perturbed orbits and their shadows as CSV
    Portrait {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        args: PortraitArgs,
    },
}

/// The stability hypotheses do not hold; maps to exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct HypothesesFailed(pub String);

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("ULAMKIT_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| anyhow::anyhow!("ULAMKIT_THREADS must be a positive integer, got `{v}`"))?;
        if n == 0 {
            anyhow::bail!("ULAMKIT_THREADS must be a positive integer, got 0");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    init_threads()?;
    let file = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Constant { system, args } => commands::constant(&system.merge(file.system), &args.merge(file.constant)),
        Command::Shadow { system, args } => commands::shadow(&system.merge(file.system), &args.merge(file.shadow)),
        Command::Sharpness { system, args } => {
            commands::sharpness(&system.merge(file.system), &args.merge(file.sharpness))
        }
        Command::Transform { system, args } => {
            commands::transform(&system.merge(file.system), &args.merge(file.transform))
        }
        Command::Example { id, quick, json } => commands::example(&id, quick, json),
        Command::Portrait { system, args } => commands::portrait(&system.merge(file.system), &args.merge(file.portrait)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<HypothesesFailed>().is_some() => {
            eprintln!("hypotheses not satisfied: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
