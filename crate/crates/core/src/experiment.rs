//! Experiment harness behind the `dqffl` command-line tool.
//!
//! An experiment is one [`RunConfig`] replayed over a list of strategies and
//! master seeds. Every artifact is plain text (JSON, JSON-lines, CSV) written
//! with a fixed field order, so repeated runs produce byte-identical files.
//!
//! Artifacts of [`cmd_run`]:
//!
//! | file | content |
//! |------|---------|
//! | `rounds.jsonl` | one [`RoundLine`] per round of every run |
//! | `summary.json` | [`ExperimentSummary`]: config plus per-run results |
//! | `comparison.csv` | one [`ComparisonRow`] per strategy, mean and std over seeds |
//! | `histogram.csv` | final per-client accuracy histogram per run |
//! | `q_trace.csv` | the `q` applied in each round of each run |
//! | `runs/<strategy>_seed<N>/summary.json` | the full [`RunSummary`] of one run |

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::{Agent, Bandit, QGrid};
use crate::aggregation::{Strategy, StrategyConfig, StrategyKind};
use crate::data::{self, FederatedDataset, Manifest};
use crate::error::{Error, Result};
use crate::federation::{self, MessageLedger, RoundRecord, RunConfig, RunSummary, Seeds};
use crate::metrics::{fairness_report, histogram, FairnessReport};
use crate::SCHEMA_VERSION;

pub const ROUNDS_FILE: &str = "rounds.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";
pub const COMPARISON_FILE: &str = "comparison.csv";
pub const HISTOGRAM_FILE: &str = "histogram.csv";
pub const Q_TRACE_FILE: &str = "q_trace.csv";
pub const LEARNING_CURVE_FILE: &str = "learning_curve.csv";
pub const CHECKPOINT_DIR: &str = "checkpoints";

/// Top-level config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Template for every run. Its `seeds` table is replaced by streams
    /// derived from each entry of `seeds`.
    pub run: RunConfig,
    /// Strategies to compare; empty means just `run.strategy`.
    #[serde(default)]
    pub strategies: Vec<StrategyConfig>,
    /// Master seeds; results are averaged over them.
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Agent episodes. In `run`, a dynamic_q agent plays this many episodes
    /// on each seed's federation and the last one is reported. In
    /// `train-agent`, the total number of training episodes.
    #[serde(default = "default_episodes")]
    pub episodes: usize,
    /// Checkpoint cadence (episodes) for `train-agent`.
    #[serde(default = "default_checkpoint_every")]
    pub checkpoint_every: usize,
    #[serde(default = "default_bin_width")]
    pub histogram_bin_width: f64,
    /// Start dynamic_q runs from this trained agent instead of a fresh one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent_checkpoint: Option<PathBuf>,
    /// Output directory; the `--out` flag takes precedence. Not echoed into
    /// artifacts, so output location never changes file contents.
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_episodes() -> usize {
    1
}

fn default_checkpoint_every() -> usize {
    10
}

fn default_bin_width() -> f64 {
    0.1
}

impl ExperimentConfig {
    pub fn new(run: RunConfig) -> Self {
        Self {
            run,
            strategies: Vec::new(),
            seeds: default_seeds(),
            episodes: default_episodes(),
            checkpoint_every: default_checkpoint_every(),
            histogram_bin_width: default_bin_width(),
            agent_checkpoint: None,
            out: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read and validate a config file. Unreadable files count as config
    /// errors.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must not be empty".into()));
        }
        if self.episodes == 0 {
            return Err(Error::Config("episodes must be >= 1".into()));
        }
        if self.checkpoint_every == 0 {
            return Err(Error::Config("checkpoint_every must be >= 1".into()));
        }
        if !(self.histogram_bin_width > 0.0 && self.histogram_bin_width <= 1.0) {
            return Err(Error::Config(
                "histogram_bin_width must lie in (0, 1]".into(),
            ));
        }
        self.run.validate()?;
        for s in self.strategy_list() {
            s.validate()?;
        }
        Ok(())
    }

    pub fn strategy_list(&self) -> Vec<StrategyConfig> {
        if self.strategies.is_empty() {
            vec![self.run.strategy]
        } else {
            self.strategies.clone()
        }
    }

    /// Replace the seed list with a single seed.
    pub fn with_seed_override(mut self, seed: u64) -> Self {
        self.seeds = vec![seed];
        self
    }

    /// The concrete run for one strategy and master seed.
    pub fn run_config(&self, strategy: StrategyConfig, seed: u64) -> RunConfig {
        RunConfig {
            strategy,
            seeds: Seeds::from_master(seed),
            ..self.run.clone()
        }
    }
}

fn dataset_for(run: &RunConfig) -> Result<FederatedDataset> {
    data::generate(&run.data_config())
}

fn fresh_or_loaded_agent(cfg: &ExperimentConfig, run: &RunConfig) -> Result<Agent> {
    match &cfg.agent_checkpoint {
        Some(dir) => {
            let agent = Agent::load(dir)?;
            if agent.config.state_len() != run.agent.state_len() {
                return Err(Error::Config(format!(
                    "agent checkpoint {} expects {} state features, run produces {}",
                    dir.display(),
                    agent.config.state_len(),
                    run.agent.state_len()
                )));
            }
            Ok(agent)
        }
        None => Agent::new(run.agent.clone(), run.seeds.agent),
    }
}

/// Execute one (strategy, seed) cell of the experiment.
pub fn run_cell(cfg: &ExperimentConfig, strategy: StrategyConfig, seed: u64) -> Result<RunSummary> {
    let run = cfg.run_config(strategy, seed);
    let data = dataset_for(&run)?;
    if strategy.strategy()? != Strategy::DynamicQ {
        return federation::run_on(&run, &data, None);
    }
    let mut agent = fresh_or_loaded_agent(cfg, &run)?;
    let mut last = None;
    for _ in 0..cfg.episodes {
        last = Some(federation::run_on(&run, &data, Some(&mut agent))?);
    }
    Ok(last.expect("episodes >= 1"))
}

/// One finished run together with the master seed that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub seed: u64,
    pub summary: RunSummary,
}

/// Every strategy × seed cell, strategy-major, in config order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<CellResult>> {
    cfg.validate()?;
    let cells: Vec<(StrategyConfig, u64)> = cfg
        .strategy_list()
        .into_iter()
        .flat_map(|s| cfg.seeds.iter().map(move |&seed| (s, seed)))
        .collect();
    let work = |&(s, seed): &(StrategyConfig, u64)| {
        run_cell(cfg, s, seed).map(|summary| CellResult { seed, summary })
    };
    if cfg.run.parallel {
        cells.par_iter().map(work).collect()
    } else {
        cells.iter().map(work).collect()
    }
}

/// A line of `rounds.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLine {
    pub schema_version: u32,
    pub strategy: String,
    pub seed: u64,
    pub fairness_alpha: f64,
    #[serde(flatten)]
    pub record: RoundRecord,
}

/// Per-run entry of `summary.json` (rounds live in `rounds.jsonl`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub strategy: String,
    pub seed: u64,
    pub seeds: Seeds,
    pub fairness: FairnessReport,
    pub ledger: MessageLedger,
    pub episode_return: Option<f64>,
    pub final_client_accuracies: Vec<f64>,
    pub q_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub runs: Vec<RunEntry>,
}

/// One row of `comparison.csv`. Column names are part of the tool's
/// interface; percentages are accuracies × 100, `variance` is in percent².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub strategy: String,
    pub num_seeds: usize,
    /// Master seeds joined by `;`.
    pub seeds: String,
    pub average_pct: f64,
    pub average_pct_std: f64,
    pub worst10_pct: f64,
    pub worst10_pct_std: f64,
    pub best10_pct: f64,
    pub best10_pct_std: f64,
    pub variance: f64,
    pub variance_std: f64,
    pub jain: f64,
    pub gini: f64,
    /// Empty when some run had a client at zero accuracy.
    pub alpha_utility: Option<f64>,
    pub bytes_down: u64,
    pub bytes_up: u64,
    pub messages: u64,
}

/// Mean and sample standard deviation (0 for a single value).
fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Aggregate per-run results into one row per strategy, keeping first-seen
/// strategy order.
pub fn comparison(runs: &[(String, u64, FairnessReport, MessageLedger)]) -> Vec<ComparisonRow> {
    let mut order: Vec<&str> = Vec::new();
    for (s, ..) in runs {
        if !order.contains(&s.as_str()) {
            order.push(s);
        }
    }
    order
        .into_iter()
        .map(|strategy| {
            let group: Vec<_> = runs.iter().filter(|r| r.0 == strategy).collect();
            let col = |f: &dyn Fn(&FairnessReport) -> f64| -> (f64, f64) {
                mean_std(&group.iter().map(|r| f(&r.2)).collect::<Vec<_>>())
            };
            let n = group.len() as u64;
            let (average_pct, average_pct_std) = col(&|f| f.mean * 100.0);
            let (worst10_pct, worst10_pct_std) = col(&|f| f.worst_decile * 100.0);
            let (best10_pct, best10_pct_std) = col(&|f| f.best_decile * 100.0);
            let (variance, variance_std) = col(&|f| f.variance);
            let utilities: Option<Vec<f64>> = group.iter().map(|r| r.2.alpha_utility).collect();
            ComparisonRow {
                strategy: strategy.to_string(),
                num_seeds: group.len(),
                seeds: group
                    .iter()
                    .map(|r| r.1.to_string())
                    .collect::<Vec<_>>()
                    .join(";"),
                average_pct,
                average_pct_std,
                worst10_pct,
                worst10_pct_std,
                best10_pct,
                best10_pct_std,
                variance,
                variance_std,
                jain: col(&|f| f.jain).0,
                gini: col(&|f| f.gini).0,
                alpha_utility: utilities.map(|u| mean_std(&u).0),
                bytes_down: group.iter().map(|r| r.3.bytes_down).sum::<u64>() / n,
                bytes_up: group.iter().map(|r| r.3.bytes_up).sum::<u64>() / n,
                messages: group.iter().map(|r| r.3.messages()).sum::<u64>() / n,
            }
        })
        .collect()
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn csv_bytes<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)
            .map_err(|e| Error::Contract(format!("csv encoding: {e}")))?;
    }
    w.into_inner()
        .map_err(|e| Error::Contract(format!("csv encoding: {e}")))
}

pub fn write_comparison(path: &Path, rows: &[ComparisonRow]) -> Result<()> {
    write_file(path, &csv_bytes(rows)?)
}

pub fn read_comparison(path: &Path) -> Result<Vec<ComparisonRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::parse(path, e.to_string()))?;
    r.deserialize()
        .map(|row| row.map_err(|e| Error::parse(path, e.to_string())))
        .collect()
}

#[derive(Serialize)]
struct HistogramRow<'a> {
    strategy: &'a str,
    seed: u64,
    bin_lo: f64,
    bin_hi: f64,
    count: usize,
}

#[derive(Serialize)]
struct QTraceRow<'a> {
    strategy: &'a str,
    seed: u64,
    round: usize,
    q: f64,
    action: Option<usize>,
}

fn slug(label: &str) -> String {
    let s: String = label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect();
    s.trim_end_matches('_').to_string()
}

fn json_line<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("artifact types serialize")
}

fn json_pretty<T: Serialize>(value: &T) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("artifact types serialize");
    text.push('\n');
    text.into_bytes()
}

/// What `cmd_run` produced.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub cells: Vec<CellResult>,
    pub comparison: Vec<ComparisonRow>,
}

/// Run the experiment and write all artifacts into `out`.
pub fn cmd_run(cfg: &ExperimentConfig, out: &Path) -> Result<RunArtifacts> {
    let cells = run_experiment(cfg)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let alpha = cfg.run.fairness_alpha;

    let mut rounds = String::new();
    let mut hist_rows = Vec::new();
    let mut trace_rows = Vec::new();
    let mut entries = Vec::new();
    for CellResult { seed, summary } in &cells {
        let strategy = summary.strategy.as_str();
        for r in &summary.rounds {
            let line = RoundLine {
                schema_version: SCHEMA_VERSION,
                strategy: strategy.to_string(),
                seed: *seed,
                fairness_alpha: alpha,
                record: r.clone(),
            };
            rounds.push_str(&json_line(&line));
            rounds.push('\n');
            trace_rows.push(QTraceRow {
                strategy,
                seed: *seed,
                round: r.round,
                q: r.q,
                action: r.action,
            });
        }
        for bin in histogram(&summary.final_client_accuracies, cfg.histogram_bin_width)? {
            hist_rows.push(HistogramRow {
                strategy,
                seed: *seed,
                bin_lo: bin.lo,
                bin_hi: bin.hi,
                count: bin.count,
            });
        }
        let qs = summary.q_trace();
        entries.push(RunEntry {
            strategy: strategy.to_string(),
            seed: *seed,
            seeds: summary.seeds,
            fairness: summary.fairness.clone(),
            ledger: summary.ledger,
            episode_return: summary.episode_return,
            final_client_accuracies: summary.final_client_accuracies.clone(),
            q_mean: qs.iter().sum::<f64>() / qs.len() as f64,
        });
        let dir = out
            .join("runs")
            .join(format!("{}_seed{seed}", slug(strategy)));
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        write_file(&dir.join(SUMMARY_FILE), &json_pretty(summary))?;
    }

    let table: Vec<_> = entries
        .iter()
        .map(|e| (e.strategy.clone(), e.seed, e.fairness.clone(), e.ledger))
        .collect();
    let comparison = comparison(&table);
    write_file(&out.join(ROUNDS_FILE), rounds.as_bytes())?;
    write_file(&out.join(HISTOGRAM_FILE), &csv_bytes(hist_rows)?)?;
    write_file(&out.join(Q_TRACE_FILE), &csv_bytes(trace_rows)?)?;
    write_comparison(&out.join(COMPARISON_FILE), &comparison)?;
    let summary = ExperimentSummary {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        runs: entries,
    };
    write_file(&out.join(SUMMARY_FILE), &json_pretty(&summary))?;
    Ok(RunArtifacts { cells, comparison })
}

/// Parse `rounds.jsonl`, rejecting unknown schema versions.
pub fn read_rounds(path: &Path) -> Result<Vec<RoundLine>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let line: RoundLine = serde_json::from_str(l)
                .map_err(|e| Error::parse(path, format!("line {}: {e}", i + 1)))?;
            if line.schema_version != SCHEMA_VERSION {
                return Err(Error::parse(
                    path,
                    format!(
                        "line {}: unsupported schema_version {}",
                        i + 1,
                        line.schema_version
                    ),
                ));
            }
            Ok(line)
        })
        .collect()
}

/// Rebuild the comparison table from stored round logs alone.
pub fn report(lines: &[RoundLine]) -> Result<Vec<ComparisonRow>> {
    // (strategy, seed) in first-seen order.
    let mut keys: Vec<(String, u64)> = Vec::new();
    let mut groups: BTreeMap<(String, u64), Vec<&RoundLine>> = BTreeMap::new();
    for l in lines {
        let key = (l.strategy.clone(), l.seed);
        if !groups.contains_key(&key) {
            keys.push(key.clone());
        }
        groups.entry(key).or_default().push(l);
    }
    let mut table = Vec::new();
    for key in keys {
        let group = &groups[&key];
        let last = group
            .iter()
            .max_by_key(|l| l.record.round)
            .expect("non-empty");
        let accs = last.record.client_test_accuracies.as_ref().ok_or_else(|| {
            Error::Contract(format!(
                "{} seed {}: final round has no client test accuracies (truncated log?)",
                key.0, key.1
            ))
        })?;
        let fairness = fairness_report(accs, last.fairness_alpha)?;
        let ledger = group.iter().fold(MessageLedger::default(), |mut acc, l| {
            let m = l.record.messages / 2;
            acc.bytes_down += l.record.bytes_down;
            acc.bytes_up += l.record.bytes_up;
            acc.messages_down += m;
            acc.messages_up += l.record.messages - m;
            acc
        });
        table.push((key.0, key.1, fairness, ledger));
    }
    Ok(comparison(&table))
}

/// `report` subcommand: read `<input>/rounds.jsonl`, write
/// `<out>/comparison.csv`.
pub fn cmd_report(input: &Path, out: &Path) -> Result<Vec<ComparisonRow>> {
    let rows = report(&read_rounds(&input.join(ROUNDS_FILE))?)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_comparison(&out.join(COMPARISON_FILE), &rows)?;
    Ok(rows)
}

/// `gen-data` subcommand: generate the first seed's federation and export it.
pub fn cmd_gen_data(cfg: &ExperimentConfig, out: &Path) -> Result<Manifest> {
    cfg.validate()?;
    let run = cfg.run_config(cfg.run.strategy, cfg.seeds[0]);
    let fed = dataset_for(&run)?;
    data::export(&fed, out)?;
    data::read_manifest(out)
}

/// One row of `learning_curve.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// 1-based count of episodes the agent has completed.
    pub episode: u64,
    /// Master seed of the federation played; empty in bandit mode.
    pub seed: Option<u64>,
    /// Discounted return `G_0`.
    pub episode_return: f64,
    /// Mean applied `q` over the episode.
    pub mean_q: f64,
    /// Probability of the rewarded arm after the update (bandit mode).
    pub pi_best: Option<f64>,
    /// Baseline value at the first step after the update.
    pub baseline0: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub agent: Agent,
    pub curve: Vec<CurvePoint>,
}

fn save_checkpoint(agent: &Agent, dir: &Path) -> Result<()> {
    agent.save(dir).map_err(|e| match e {
        Error::Io { path, source } => Error::Checkpoint {
            path,
            detail: source.to_string(),
        },
        other => other,
    })
}

/// The degenerate two-armed environment: `q ∈ {0, 1}`, reward 1 for the
/// first arm, constant state.
pub fn bandit_agent_config(cfg: &ExperimentConfig) -> crate::agent::AgentConfig {
    crate::agent::AgentConfig {
        q_grid: QGrid::new(vec![0.0, 1.0]).expect("valid grid"),
        ..cfg.run.agent.clone()
    }
}

/// `train-agent` subcommand.
///
/// Plays `episodes` episodes, each a fresh federated run on the seed
/// `seeds[i % len]` (or a bandit episode), updating the policy after each.
/// Checkpoints go to `<out>/checkpoints/episode_NNNNNN` every
/// `checkpoint_every` episodes and to `<out>/checkpoints/final`;
/// the learning curve goes to `<out>/learning_curve.csv`.
pub fn cmd_train_agent(
    cfg: &ExperimentConfig,
    out: &Path,
    bandit_mode: bool,
    resume: Option<&Path>,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let run_template = cfg.run_config(
        StrategyConfig {
            kind: StrategyKind::DynamicQ,
            q: None,
            loss_floor: cfg.run.strategy.loss_floor,
        },
        cfg.seeds[0],
    );
    let agent_cfg = if bandit_mode {
        bandit_agent_config(cfg)
    } else {
        run_template.agent.clone()
    };
    let mut agent = match resume {
        Some(dir) => {
            let a = Agent::load(dir)?;
            if a.config != agent_cfg {
                return Err(Error::Config(format!(
                    "checkpoint {} was trained with a different agent config",
                    dir.display()
                )));
            }
            a
        }
        None => Agent::new(agent_cfg.clone(), run_template.seeds.agent)?,
    };
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let ckpt_root = out.join(CHECKPOINT_DIR);

    let bandit = Bandit::two_armed(agent_cfg.state_len());
    let mut datasets: BTreeMap<u64, (RunConfig, FederatedDataset)> = BTreeMap::new();
    let mut curve = Vec::with_capacity(cfg.episodes);
    for _ in 0..cfg.episodes {
        let index = agent.episodes_completed;
        let point = if bandit_mode {
            let ret = bandit.episode(&mut agent)?;
            CurvePoint {
                episode: agent.episodes_completed,
                seed: None,
                episode_return: ret,
                mean_q: 0.0,
                pi_best: Some(bandit.best_probability(&agent)?),
                baseline0: agent.baseline.get(0),
            }
        } else {
            let seed = cfg.seeds[(index % cfg.seeds.len() as u64) as usize];
            let (run, data) = match datasets.entry(seed) {
                std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::btree_map::Entry::Vacant(e) => {
                    let run = cfg.run_config(run_template.strategy, seed);
                    let data = dataset_for(&run)?;
                    e.insert((run, data))
                }
            };
            let (run, data) = (&*run, &*data);
            let s = federation::run_on(run, data, Some(&mut agent))?;
            let qs = s.q_trace();
            CurvePoint {
                episode: agent.episodes_completed,
                seed: Some(seed),
                episode_return: s.episode_return.unwrap_or(0.0),
                mean_q: qs.iter().sum::<f64>() / qs.len() as f64,
                pi_best: None,
                baseline0: agent.baseline.get(0),
            }
        };
        curve.push(point);
        if agent.episodes_completed % cfg.checkpoint_every as u64 == 0 {
            let dir = ckpt_root.join(format!("episode_{:06}", agent.episodes_completed));
            save_checkpoint(&agent, &dir)?;
        }
    }
    save_checkpoint(&agent, &ckpt_root.join("final"))?;
    write_file(&out.join(LEARNING_CURVE_FILE), &csv_bytes(&curve)?)?;
    Ok(TrainOutcome { agent, curve })
}

pub fn read_learning_curve(path: &Path) -> Result<Vec<CurvePoint>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::parse(path, e.to_string()))?;
    r.deserialize()
        .map(|row| row.map_err(|e| Error::parse(path, e.to_string())))
        .collect()
}
