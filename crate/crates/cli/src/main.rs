//! `dqffl` command-line tool.
//!
//! Exit codes: 0 success, 1 other failure, 2 configuration error,
//! 3 training diverged, 4 checkpoint could not be written.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dqffl::data::ShardStats;
use dqffl::experiment::{self, ExperimentConfig};
use dqffl::Error;

#[derive(Parser)]
#[command(
    name = "dqffl",
    version,
    about = "Fairness-aware federated learning simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured strategy over every seed and write the artifacts.
    Run(Common),
    /// Train the q-selection agent over many episodes.
    TrainAgent {
        #[command(flatten)]
        common: Common,
        /// Train on a two-armed bandit instead of federated runs.
        #[arg(long)]
        bandit_mode: bool,
        /// Continue from a checkpoint directory.
        #[arg(long, value_name = "DIR")]
        resume: Option<PathBuf>,
    },
    /// Generate the synthetic federation of the first seed and export it.
    GenData(Common),
    /// Rebuild comparison.csv from a stored rounds.jsonl.
    Report {
        /// Directory holding rounds.jsonl.
        #[arg(long, value_name = "DIR")]
        input: PathBuf,
        /// Where to write comparison.csv (defaults to the input directory).
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Use this single master seed instead of the configured list.
    #[arg(long, value_name = "SEED")]
    seed_override: Option<u64>,
    /// Run client updates (and independent runs) on a thread pool.
    #[arg(long)]
    parallel: bool,
}

impl Common {
    fn load(&self) -> dqffl::Result<(ExperimentConfig, PathBuf)> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed_override {
            cfg = cfg.with_seed_override(seed);
        }
        if self.parallel {
            cfg.run.parallel = true;
        }
        let out = self
            .out
            .clone()
            .or_else(|| cfg.out.clone())
            .ok_or_else(|| Error::Config("no output directory: pass --out or set `out`".into()))?;
        Ok((cfg, out))
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) => 2,
        e if e.is_divergence() => 3,
        Error::Checkpoint { .. } => 4,
        _ => 1,
    }
}

fn execute(cli: Cli) -> dqffl::Result<()> {
    match cli.command {
        Command::Run(common) => {
            let (cfg, out) = common.load()?;
            let arts = experiment::cmd_run(&cfg, &out)?;
            for row in &arts.comparison {
                println!(
                    "{:<16} mean {:6.2}%  worst10 {:6.2}%  best10 {:6.2}%  variance {:8.2}",
                    row.strategy, row.average_pct, row.worst10_pct, row.best10_pct, row.variance
                );
            }
            println!("wrote {}", out.display());
        }
        Command::TrainAgent {
            common,
            bandit_mode,
            resume,
        } => {
            let (cfg, out) = common.load()?;
            let res = experiment::cmd_train_agent(&cfg, &out, bandit_mode, resume.as_deref())?;
            if let Some(last) = res.curve.last() {
                let pi = last
                    .pi_best
                    .map(|p| format!("  pi_best {p:.4}"))
                    .unwrap_or_default();
                println!(
                    "episode {}  return {:.4}{pi}",
                    last.episode, last.episode_return
                );
            }
            println!("wrote {}", out.display());
        }
        Command::GenData(common) => {
            let (cfg, out) = common.load()?;
            let manifest = experiment::cmd_gen_data(&cfg, &out)?;
            let fed = dqffl::data::import(&out)?;
            let stats = dqffl::data::shard_stats(&fed.shards)?;
            println!("{}", ShardStats::TABLE_HEADER);
            println!("{}", stats.table_row("synthetic"));
            println!(
                "wrote {} clients, {} samples to {}",
                manifest.clients.len(),
                manifest.total_samples,
                out.display()
            );
        }
        Command::Report { input, out } => {
            let out = out.unwrap_or_else(|| input.clone());
            let rows = experiment::cmd_report(&input, &out)?;
            println!(
                "{} strategies -> {}",
                rows.len(),
                Path::new(&out).join(experiment::COMPARISON_FILE).display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
