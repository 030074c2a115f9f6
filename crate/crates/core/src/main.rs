use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, ValueEnum};

use csswaves::cli::{parse_config, run, Command, EXIT_VALIDATION};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Solve,
    TwoSolutions,
    Sweep,
    Geometry,
    Sp,
    TmProbe,
    Omega0,
    Verify,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Solve => Command::Solve,
            Cmd::TwoSolutions => Command::TwoSolutions,
            Cmd::Sweep => Command::Sweep,
            Cmd::Geometry => Command::Geometry,
            Cmd::Sp => Command::Sp,
            Cmd::TmProbe => Command::TmProbe,
            Cmd::Omega0 => Command::Omega0,
            Cmd::Verify => Command::Verify,
        }
    }
}

/// Radial standing waves of a gauged Schrödinger system: solvers and probes.
#[derive(Debug, Parser)]
#[command(name = "csswaves", version)]
struct Args {
    command: Cmd,
    /// JSON configuration; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for the random probe directions (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_VALIDATION as u8)
        }
    }
}

fn real_main() -> anyhow::Result<i32> {
    let args = Args::parse();
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?,
        None => "{}".to_string(),
    };
    let mut config = parse_config(&text)?;
    config.command = args.command.into();
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Ok(v) = std::env::var("CSSWAVES_THREADS") {
        let cap: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .with_context(|| format!("CSSWAVES_THREADS must be a positive integer, got {v:?}"))?;
        config.sweep.workers = Some(config.sweep.workers.map_or(cap, |w| w.min(cap)));
    }
    let out = args
        .out
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("csswaves-out"));
    let outcome = run(&config, &out);
    if outcome.exit_code == 0 {
        println!("{}: {}", config.command.name(), outcome.summary);
    } else {
        eprintln!("{}: {}", config.command.name(), outcome.summary);
    }
    Ok(outcome.exit_code)
}
