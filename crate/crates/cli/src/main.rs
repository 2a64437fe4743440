use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

use config::Config;

#[derive(Parser, Debug)]
#[command(name = "nmc", version, about = "Fractional mean curvature experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file (flat `key = value` with `[section]` headers).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Overrides `seed` in `[run]`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; overrides `threads` in `[run]` (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Curvature along boundary samples of a body.
    Curvature,
    /// Positivity check of the barrier family.
    BarrierVerify,
    /// Cone constant over a decreasing grid of slopes.
    ConeSweep,
    /// Sliding barriers onto a candidate set.
    Slide,
    /// Flatness certificate and Hölder rescaling check for a graph.
    Blowdown,
    /// Perimeter of a body in a box.
    Perimeter,
}

/// How a finished command maps to the exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Done,
    Inconclusive,
}

fn run(cli: &Cli) -> anyhow::Result<Status> {
    let mut cfg = Config::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.set("run", "seed", seed);
    }
    if let Some(t) = cli.threads {
        cfg.set("run", "threads", t);
    }
    let threads: usize = cfg.get("run", "threads", 0)?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    std::fs::create_dir_all(&cli.out)?;
    let out = commands::Output::new(&cli.out);
    match cli.command {
        Command::Curvature => commands::curvature(&cfg, &out),
        Command::BarrierVerify => commands::barrier_verify(&cfg, &out),
        Command::ConeSweep => commands::cone_sweep(&cfg, &out),
        Command::Slide => commands::slide(&cfg, &out),
        Command::Blowdown => commands::blowdown(&cfg, &out),
        Command::Perimeter => commands::perimeter(&cfg, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Status::Done) => ExitCode::SUCCESS,
        Ok(Status::Inconclusive) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
