use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use carrier_lab::{generate, render_corpus, run, run_kind, ExperimentConfig, Kind, RunOptions, Summary, EXIT_ERROR};
use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "carrier-lab", version, about = "Circle packings, good embeddings and random-walk potential theory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to the config's `[output] dir` or `out/<name>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "CARRIER_LAB_THREADS")]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write graph, combinatorial and packing files for the corpus.
    Generate(Common),
    /// Pack every triangulation in the corpus and audit residuals.
    Pack(Common),
    /// Goodness validation of every corpus graph.
    Validate(Common),
    /// Run the config's experiment sweep.
    Measure(Common),
    /// Draw every corpus graph as SVG.
    Render(Common),
    /// generate, render and measure.
    All(Common),
}

fn report(s: &Summary) -> i32 {
    print!("{}", s.to_text());
    s.exit_code()
}

fn execute(cli: Cli) -> Result<i32> {
    let common = match &cli.command {
        Command::Generate(c) | Command::Pack(c) | Command::Validate(c) | Command::Measure(c) | Command::Render(c) | Command::All(c) => {
            c.clone()
        }
    };
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the worker pool")?;
    }
    let cfg = ExperimentConfig::load(&common.config).with_context(|| format!("reading {}", common.config.display()))?;
    let opts = RunOptions { out_dir: common.out, seed: common.seed };
    let code = match cli.command {
        Command::Generate(_) => {
            for p in generate(&cfg, &opts)? {
                println!("wrote {}", p.display());
            }
            0
        }
        Command::Render(_) => {
            for p in render_corpus(&cfg, &opts)? {
                println!("wrote {}", p.display());
            }
            0
        }
        Command::Pack(_) => report(&run_kind(&cfg, Kind::Pack, &opts)?),
        Command::Validate(_) => report(&run_kind(&cfg, Kind::Validate, &opts)?),
        Command::Measure(_) => report(&run(&cfg, &opts)?),
        Command::All(_) => {
            generate(&cfg, &opts)?;
            render_corpus(&cfg, &opts)?;
            report(&run(&cfg, &opts)?)
        }
    };
    Ok(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    };
    ExitCode::from(code as u8)
}
