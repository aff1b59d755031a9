//! Round orchestration.
//!
//! Every round follows the same three steps:
//!
//! 1. The server samples `m` clients uniformly without replacement and
//!    broadcasts the global model `ω^t` to them.
//! 2. Each client reports the loss of `ω^t` on a drawn batch and trains it
//!    locally, then uploads the updated model (plus the loss scalar, for the
//!    loss-weighted strategies).
//! 3. The server picks `q` (fixed, or from the agent), computes aggregation
//!    weights, and averages the uploads into `ω^{t+1}`.
//!
//! The ledger counts one broadcast and one upload per selected client per
//! round: `m·P` bytes down, and `m·P` (FedAvg) or `m·(P+e)` bytes up, with
//! `P = 8·#params` and `e = 8`.

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::{build_state, compute_reward, Agent, AgentConfig};
use crate::aggregation::{
    aggregate, dqffl_weights, fedavg_weights, weighted_loss, Strategy, StrategyConfig,
};
use crate::data::{self, ClientShard, FederatedDataset, SynthConfig};
use crate::error::{Error, Result};
use crate::metrics::{fairness_report, FairnessReport};
use crate::model::{self, init_params, Batch, ModelSpec, ParamVector};
use crate::rng;
use crate::trainer::{self, param_bytes, ClientReport, LocalConfig};
use crate::SCHEMA_VERSION;

/// Independent seeds for every random stream of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    pub data: u64,
    pub selection: u64,
    pub agent: u64,
    pub init: u64,
    pub shuffle: u64,
}

impl Seeds {
    /// Derive all streams from one master seed.
    pub fn from_master(seed: u64) -> Self {
        Self {
            data: rng::derive_seed(seed, &[1]),
            selection: rng::derive_seed(seed, &[2]),
            agent: rng::derive_seed(seed, &[3]),
            init: rng::derive_seed(seed, &[4]),
            shuffle: rng::derive_seed(seed, &[5]),
        }
    }
}

impl Default for Seeds {
    fn default() -> Self {
        Self::from_master(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub rounds: usize,
    /// Clients per round. Mutually exclusive with `participation_fraction`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub participants: Option<usize>,
    /// `C`, giving `m = max(⌈C·K⌉, 1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub participation_fraction: Option<f64>,
    pub model: ModelSpec,
    /// `data.seed` is replaced by `seeds.data`.
    #[serde(default)]
    pub data: SynthConfig,
    #[serde(default)]
    pub strategy: StrategyConfig,
    /// `local.shuffle_seed_base` is replaced by `seeds.shuffle`.
    #[serde(default)]
    pub local: LocalConfig,
    #[serde(default)]
    pub agent: AgentConfig,
    #[serde(default)]
    pub seeds: Seeds,
    /// Per-client validation sweep cadence (rounds); the last round always
    /// gets a sweep.
    #[serde(default = "default_eval_every")]
    pub eval_every: usize,
    /// α for the utility column of the fairness report.
    #[serde(default = "default_alpha")]
    pub fairness_alpha: f64,
    /// Run the selected clients' local rounds on a thread pool. Results do
    /// not depend on it, so it is never written into artifacts.
    #[serde(default, skip_serializing)]
    pub parallel: bool,
}

fn default_eval_every() -> usize {
    10
}

fn default_alpha() -> f64 {
    1.0
}

impl RunConfig {
    /// Defaults used throughout the examples: logistic model, 30 clients,
    /// 10 per round, lr 0.1, batch 10, one local epoch.
    pub fn new(strategy: StrategyConfig) -> Self {
        let data = SynthConfig::default();
        Self {
            rounds: 100,
            participants: Some(10),
            participation_fraction: None,
            model: ModelSpec::logistic(data.input_dim, data.num_classes),
            data,
            strategy,
            local: LocalConfig::default(),
            agent: AgentConfig::default(),
            seeds: Seeds::default(),
            eval_every: default_eval_every(),
            fairness_alpha: default_alpha(),
            parallel: false,
        }
    }

    pub fn data_config(&self) -> SynthConfig {
        SynthConfig {
            seed: self.seeds.data,
            ..self.data.clone()
        }
    }

    pub fn local_config(&self) -> LocalConfig {
        LocalConfig {
            shuffle_seed_base: self.seeds.shuffle,
            ..self.local.clone()
        }
    }

    /// Clients per round for a federation of `k` clients.
    pub fn participants_for(&self, k: usize) -> Result<usize> {
        let m = match (self.participants, self.participation_fraction) {
            (Some(m), None) => m,
            (None, Some(c)) if c > 0.0 && c <= 1.0 => ((c * k as f64).ceil() as usize).max(1),
            (None, Some(c)) => {
                return Err(Error::Config(format!(
                    "participation_fraction {c} outside (0, 1]"
                )))
            }
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "set either participants or participation_fraction, not both".into(),
                ))
            }
            (None, None) => {
                return Err(Error::Config(
                    "one of participants or participation_fraction is required".into(),
                ))
            }
        };
        if m == 0 || m > k {
            return Err(Error::Config(format!(
                "participants must lie in [1, {k}], got {m}"
            )));
        }
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::Config("rounds must be >= 1".into()));
        }
        if self.eval_every == 0 {
            return Err(Error::Config("eval_every must be >= 1".into()));
        }
        self.model.validate()?;
        self.data.validate()?;
        if self.model.input_dim != self.data.input_dim
            || self.model.num_classes != self.data.num_classes
        {
            return Err(Error::Config(
                "model input_dim/num_classes must match the data".into(),
            ));
        }
        self.strategy.validate()?;
        self.local.validate()?;
        self.agent.validate()?;
        self.participants_for(self.data.num_clients)?;
        crate::metrics::alpha_utility(1.0, self.fairness_alpha)
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }
}

/// Uniform sample of `m` of `k` clients for round `round`, sorted ascending.
pub fn select_clients(k: usize, m: usize, round: usize, seed: u64) -> Result<Vec<usize>> {
    if m == 0 || m > k {
        return Err(Error::Contract(format!("cannot select {m} of {k} clients")));
    }
    let mut rng = rng::stream(seed, &[0x5E1E, round as u64]);
    let mut ids = index::sample(&mut rng, k, m).into_vec();
    ids.sort_unstable();
    Ok(ids)
}

/// Running communication totals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageLedger {
    pub bytes_down: u64,
    pub bytes_up: u64,
    pub messages_down: u64,
    pub messages_up: u64,
}

impl MessageLedger {
    pub fn messages(&self) -> u64 {
        self.messages_down + self.messages_up
    }
}

/// Log of one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub selected: Vec<usize>,
    /// `F_k(ω^t)` per selected client, aligned with `selected`.
    pub losses: Vec<f64>,
    pub q: f64,
    /// Index into the q grid, for agent-driven rounds.
    pub action: Option<usize>,
    /// Aggregation weights, aligned with `selected`.
    pub weights: Vec<f64>,
    /// `Σ_k w_k F_k(ω^t)`.
    pub weighted_loss: f64,
    /// Server-validation accuracy of the aggregated model `ω^{t+1}`.
    pub accuracy: f64,
    /// Reward credited to this round's choice of q.
    pub reward: f64,
    /// Every client's validation accuracy of `ω^{t+1}` on sweep rounds.
    pub client_val_accuracies: Option<Vec<f64>>,
    /// Every client's local-test accuracy of the final model (last round only).
    pub client_test_accuracies: Option<Vec<f64>>,
    pub bytes_down: u64,
    pub bytes_up: u64,
    pub messages: u64,
}

/// Outcome of a full run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub strategy: String,
    pub seeds: Seeds,
    pub model: ModelSpec,
    pub param_bytes: u64,
    pub final_params: Vec<f64>,
    pub final_client_accuracies: Vec<f64>,
    pub fairness: FairnessReport,
    pub ledger: MessageLedger,
    /// Discounted return of the episode, for agent-driven runs.
    pub episode_return: Option<f64>,
    pub rounds: Vec<RoundRecord>,
}

impl RunSummary {
    pub fn q_trace(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.q).collect()
    }
}

/// Server-side view of a client: the orchestrator can ask for work and
/// evaluations, never for samples.
struct Client<'a> {
    shard: &'a ClientShard,
}

impl Client<'_> {
    fn train(
        &self,
        global: &ParamVector,
        cfg: &LocalConfig,
        round: usize,
        send_loss: bool,
    ) -> Result<ClientReport> {
        trainer::local_round(self.shard, global, cfg, round, send_loss)
    }

    fn probe_loss(&self, params: &ParamVector, cfg: &LocalConfig, round: usize) -> Result<f64> {
        trainer::reported_loss(self.shard, params, cfg, round)
    }

    fn validation_accuracy(&self, params: &ParamVector) -> Result<f64> {
        model::accuracy(params, &self.shard.validation)
    }

    fn test_accuracy(&self, params: &ParamVector) -> Result<f64> {
        model::accuracy(params, &self.shard.test)
    }
}

/// State of one run in progress.
pub struct Simulation<'a> {
    cfg: &'a RunConfig,
    local: LocalConfig,
    strategy: Strategy,
    clients: Vec<Client<'a>>,
    shares: Vec<f64>,
    server_validation: &'a Batch,
    participants: usize,
    global: ParamVector,
    accuracy: f64,
    prev_q: f64,
    ledger: MessageLedger,
    records: Vec<RoundRecord>,
}

impl<'a> Simulation<'a> {
    pub fn new(cfg: &'a RunConfig, data: &'a FederatedDataset) -> Result<Self> {
        cfg.validate()?;
        let k = data.num_clients();
        if k != cfg.data.num_clients {
            return Err(Error::Config(format!(
                "config expects {} clients, dataset has {k}",
                cfg.data.num_clients
            )));
        }
        let global = init_params(&cfg.model, cfg.seeds.init)?;
        let accuracy = model::accuracy(&global, &data.server_validation)?;
        Ok(Self {
            local: cfg.local_config(),
            strategy: cfg.strategy.strategy()?,
            clients: data.shards.iter().map(|shard| Client { shard }).collect(),
            shares: data.weights(),
            server_validation: &data.server_validation,
            participants: cfg.participants_for(k)?,
            global,
            accuracy,
            prev_q: cfg.agent.initial_q,
            ledger: MessageLedger::default(),
            records: Vec::with_capacity(cfg.rounds),
            cfg,
        })
    }

    pub fn global(&self) -> &ParamVector {
        &self.global
    }

    pub fn ledger(&self) -> MessageLedger {
        self.ledger
    }

    pub fn records(&self) -> &[RoundRecord] {
        &self.records
    }

    fn policy_error(round: usize, e: Error) -> Error {
        match e {
            Error::DivergedPolicy(d) => Error::DivergedPolicy(format!("round {round}: {d}")),
            other => other,
        }
    }

    fn credit(&mut self, agent: Option<&mut Agent>, round: usize, reward: f64) -> Result<()> {
        self.records[round].reward = reward;
        if let Some(agent) = agent {
            agent.reward(round, reward)?;
        }
        Ok(())
    }

    /// Execute round `t` (steps 1–3) and return its record.
    pub fn run_round(&mut self, t: usize, mut agent: Option<&mut Agent>) -> Result<&RoundRecord> {
        if t != self.records.len() || t >= self.cfg.rounds {
            return Err(Error::Contract(format!(
                "round {t} out of sequence (next is {})",
                self.records.len()
            )));
        }
        if self.strategy == Strategy::DynamicQ && agent.is_none() {
            return Err(Error::Contract("dynamic_q rounds need an agent".into()));
        }
        let m = self.participants;
        let p_bytes = param_bytes(&self.global);
        let send_loss = self.strategy.sends_loss();

        // Step 1: select and broadcast.
        let selected = select_clients(self.clients.len(), m, t, self.cfg.seeds.selection)?;
        let bytes_down = m as u64 * p_bytes;

        // Step 2: local work. Reports come back in ascending client order.
        let (global, local) = (&self.global, &self.local);
        let work = |&id: &usize| self.clients[id].train(global, local, t, send_loss);
        let reports: Vec<ClientReport> = if self.cfg.parallel {
            selected.par_iter().map(work).collect::<Result<_>>()?
        } else {
            selected.iter().map(work).collect::<Result<_>>()?
        };
        let losses: Vec<f64> = reports.iter().map(|r| r.reported_loss).collect();
        let bytes_up: u64 = reports.iter().map(|r| r.upload_bytes).sum();

        // The previous action produced ω^t; its reward uses a^t and F(ω^t).
        if t > 0 && !self.cfg.agent.same_step_reward {
            let r = compute_reward(self.accuracy, &losses)?;
            self.credit(agent.as_deref_mut(), t - 1, r)?;
        }

        // Step 3: choose q, weight, aggregate.
        let (q, action) = match self.strategy {
            Strategy::Fedavg => (0.0, None),
            Strategy::StaticQ(q) => (q, None),
            Strategy::DynamicQ => {
                let agent = agent.as_deref_mut().expect("checked above");
                let mut state = build_state(
                    &losses,
                    self.prev_q,
                    t,
                    self.cfg.rounds,
                    self.cfg.agent.m_max,
                )?;
                if self.cfg.agent.accuracy_in_state {
                    state.features.push(self.accuracy);
                }
                let a = agent.act(state).map_err(|e| Self::policy_error(t, e))?;
                (a.q, Some(a.index))
            }
        };
        let weights = match self.strategy {
            Strategy::Fedavg => fedavg_weights(&reports, &self.shares)?,
            _ => dqffl_weights(&reports, &self.shares, q, self.cfg.strategy.loss_floor)?,
        };
        let objective = weighted_loss(&reports, &weights)?;
        let next = aggregate(&reports, &weights)?;
        if !next.is_finite() {
            return Err(Error::DivergedClient {
                round: t,
                client: selected[0],
                detail: "aggregated model is non-finite".into(),
            });
        }
        self.global = next;
        self.accuracy = model::accuracy(&self.global, self.server_validation)?;
        self.prev_q = q;

        self.ledger.bytes_down += bytes_down;
        self.ledger.bytes_up += bytes_up;
        self.ledger.messages_down += m as u64;
        self.ledger.messages_up += m as u64;

        let last = t + 1 == self.cfg.rounds;
        let client_val_accuracies = if last || (t + 1) % self.cfg.eval_every == 0 {
            Some(self.sweep(|c, p| c.validation_accuracy(p))?)
        } else {
            None
        };
        let client_test_accuracies = if last {
            Some(self.sweep(|c, p| c.test_accuracy(p))?)
        } else {
            None
        };

        self.records.push(RoundRecord {
            round: t,
            selected,
            losses: losses.clone(),
            q,
            action,
            weights: weights.values,
            weighted_loss: objective,
            accuracy: self.accuracy,
            reward: 0.0,
            client_val_accuracies,
            client_test_accuracies,
            bytes_down,
            bytes_up,
            messages: 2 * m as u64,
        });
        if self.cfg.agent.same_step_reward {
            let r = compute_reward(self.accuracy, &losses)?;
            self.credit(agent, t, r)?;
        }
        Ok(&self.records[t])
    }

    fn sweep(&self, f: impl Fn(&Client, &ParamVector) -> Result<f64> + Sync) -> Result<Vec<f64>> {
        if self.cfg.parallel {
            self.clients
                .par_iter()
                .map(|c| f(c, &self.global))
                .collect()
        } else {
            self.clients.iter().map(|c| f(c, &self.global)).collect()
        }
    }

    /// Credit the last action (outside the protocol: the server evaluates
    /// `ω^T` on the last round's clients) and assemble the summary.
    pub fn finish(mut self, mut agent: Option<&mut Agent>) -> Result<RunSummary> {
        let t_end = self.records.len();
        if t_end != self.cfg.rounds {
            return Err(Error::Contract(format!(
                "finish after {t_end} of {} rounds",
                self.cfg.rounds
            )));
        }
        if !self.cfg.agent.same_step_reward {
            let last = &self.records[t_end - 1];
            let losses = last
                .selected
                .iter()
                .map(|&id| self.clients[id].probe_loss(&self.global, &self.local, t_end))
                .collect::<Result<Vec<_>>>()?;
            let r = compute_reward(self.accuracy, &losses)?;
            self.credit(agent.as_deref_mut(), t_end - 1, r)?;
        }
        let episode_return = match (&self.strategy, agent) {
            (Strategy::DynamicQ, Some(agent)) => Some(
                agent
                    .finish_episode()
                    .map_err(|e| Self::policy_error(t_end, e))?,
            ),
            _ => None,
        };
        let final_client_accuracies = self.records[t_end - 1]
            .client_test_accuracies
            .clone()
            .expect("last round carries test accuracies");
        let fairness = fairness_report(&final_client_accuracies, self.cfg.fairness_alpha)?;
        Ok(RunSummary {
            schema_version: SCHEMA_VERSION,
            strategy: self.strategy.label(),
            seeds: self.cfg.seeds,
            model: self.cfg.model,
            param_bytes: param_bytes(&self.global),
            final_params: self.global.values,
            final_client_accuracies,
            fairness,
            ledger: self.ledger,
            episode_return,
            rounds: self.records,
        })
    }
}

/// Run all rounds on `data`. Agent-driven strategies use `agent` (one
/// episode, one policy update at the end); other strategies ignore it.
pub fn run_on(
    cfg: &RunConfig,
    data: &FederatedDataset,
    mut agent: Option<&mut Agent>,
) -> Result<RunSummary> {
    let mut sim = Simulation::new(cfg, data)?;
    let uses_agent = sim.strategy == Strategy::DynamicQ;
    if !uses_agent {
        agent = None;
    }
    if let Some(a) = agent.as_deref_mut() {
        if a.config.state_len() != cfg.agent.state_len() {
            return Err(Error::Config(
                "agent state length disagrees with run config".into(),
            ));
        }
        a.begin_episode();
    }
    for t in 0..cfg.rounds {
        sim.run_round(t, agent.as_deref_mut())?;
    }
    sim.finish(agent)
}

/// Generate the federation, build a fresh agent when needed, and run.
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let data = data::generate(&cfg.data_config())?;
    let mut agent = match cfg.strategy.strategy()? {
        Strategy::DynamicQ => Some(Agent::new(cfg.agent.clone(), cfg.seeds.agent)?),
        _ => None,
    };
    run_on(cfg, &data, agent.as_mut())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::QGrid;

    fn small(strategy: StrategyConfig) -> RunConfig {
        let data = SynthConfig {
            num_clients: 10,
            input_dim: 6,
            num_classes: 3,
            samples_min: 20,
            samples_max: 60,
            ..SynthConfig::default()
        };
        RunConfig {
            rounds: 12,
            participants: Some(4),
            model: ModelSpec::logistic(6, 3),
            data,
            eval_every: 5,
            ..RunConfig::new(strategy)
        }
    }

    #[test]
    fn selection_examples() {
        assert_eq!(select_clients(5, 5, 3, 1).unwrap(), vec![0, 1, 2, 3, 4]);
        let one = select_clients(10, 1, 4, 9).unwrap();
        assert_eq!(one, select_clients(10, 1, 4, 9).unwrap());
        assert_eq!(one.len(), 1);
        assert!(select_clients(3, 4, 0, 0).is_err());
        assert!(select_clients(3, 0, 0, 0).is_err());
    }

    #[test]
    fn selection_is_uniform() {
        let mut counts = [0usize; 10];
        for t in 0..10_000 {
            let s = select_clients(10, 3, t, 77).unwrap();
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            s.iter().for_each(|&i| counts[i] += 1);
        }
        for c in counts {
            assert!((2850..=3150).contains(&c), "{counts:?}");
        }
    }

    #[test]
    fn participation_fraction() {
        let mut cfg = small(StrategyConfig::fedavg());
        cfg.participants = None;
        cfg.participation_fraction = Some(0.25);
        assert_eq!(cfg.participants_for(10).unwrap(), 3);
        cfg.participation_fraction = Some(0.01);
        assert_eq!(cfg.participants_for(10).unwrap(), 1);
        cfg.participants = Some(2);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn no_op_round_keeps_initial_model() {
        let mut cfg = small(StrategyConfig::fedavg());
        cfg.rounds = 1;
        cfg.participants = Some(1);
        cfg.local.learning_rate = 0.0;
        let s = run(&cfg).unwrap();
        let init = init_params(&cfg.model, cfg.seeds.init).unwrap();
        assert_eq!(s.final_params, init.values);
    }

    #[test]
    fn ledger_matches_closed_forms() {
        for strat in [
            StrategyConfig::fedavg(),
            StrategyConfig::static_q(1.0),
            StrategyConfig::dynamic_q(),
        ] {
            let cfg = small(strat);
            let s = run(&cfg).unwrap();
            let p = (6 * 3 + 3) as u64 * 8;
            let (t, m) = (cfg.rounds as u64, 4u64);
            let up = if strat.kind == crate::aggregation::StrategyKind::Fedavg {
                p
            } else {
                p + 8
            };
            assert_eq!(s.ledger.bytes_down, t * m * p);
            assert_eq!(s.ledger.bytes_up, t * m * up);
            assert_eq!(s.ledger.messages(), t * 2 * m);
            for r in &s.rounds {
                assert_eq!(
                    (r.bytes_down, r.bytes_up, r.messages),
                    (m * p, m * up, 2 * m)
                );
            }
            assert_eq!(
                s.ledger.bytes_up,
                s.rounds.iter().map(|r| r.bytes_up).sum::<u64>()
            );
        }
    }

    #[test]
    fn records_are_consistent() {
        let cfg = small(StrategyConfig::dynamic_q());
        let s = run(&cfg).unwrap();
        assert_eq!(s.rounds.len(), 12);
        for r in &s.rounds {
            assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(r.weights.iter().all(|&w| w >= 0.0));
            assert!(cfg.agent.q_grid.values().contains(&r.q));
            assert!(r.reward >= 0.0 && r.reward <= 1.0);
            let sweep = (r.round + 1) % 5 == 0 || r.round == 11;
            assert_eq!(r.client_val_accuracies.is_some(), sweep);
        }
        assert_eq!(s.final_client_accuracies.len(), 10);
        assert!(s.episode_return.is_some());
    }

    #[test]
    fn runs_are_deterministic_and_parallel_safe() {
        let cfg = small(StrategyConfig::dynamic_q());
        let a = run(&cfg).unwrap();
        assert_eq!(a, run(&cfg).unwrap());
        let par = RunConfig {
            parallel: true,
            ..cfg
        };
        assert_eq!(a, run(&par).unwrap());
    }

    #[test]
    fn zero_grid_reproduces_fedavg() {
        let fed = run(&small(StrategyConfig::fedavg())).unwrap();
        let mut cfg = small(StrategyConfig::dynamic_q());
        cfg.agent.q_grid = QGrid::new(vec![0.0]).unwrap();
        let dq = run(&cfg).unwrap();
        assert_eq!(fed.final_params, dq.final_params);
        for (a, b) in fed.rounds.iter().zip(&dq.rounds) {
            assert_eq!(a.weights, b.weights);
            assert_eq!(a.losses, b.losses);
            assert_eq!(a.accuracy, b.accuracy);
            assert_eq!(a.reward, b.reward);
        }
    }

    #[test]
    fn weighted_loss_uses_applied_weights() {
        let s = run(&small(StrategyConfig::static_q(2.0))).unwrap();
        for r in &s.rounds {
            let num: f64 = r.losses.iter().zip(&r.weights).map(|(l, w)| l * w).sum();
            assert!((num - r.weighted_loss).abs() < 1e-12);
        }
    }

    #[test]
    fn dynamic_round_without_agent_is_rejected() {
        let cfg = small(StrategyConfig::dynamic_q());
        let data = data::generate(&cfg.data_config()).unwrap();
        let mut sim = Simulation::new(&cfg, &data).unwrap();
        assert!(matches!(sim.run_round(0, None), Err(Error::Contract(_))));
        assert!(sim.run_round(3, None).is_err());
    }

    #[test]
    fn same_step_reward_flag() {
        let mut cfg = small(StrategyConfig::dynamic_q());
        cfg.agent.same_step_reward = true;
        let s = run(&cfg).unwrap();
        for r in &s.rounds {
            let expect = compute_reward(r.accuracy, &r.losses).unwrap();
            assert_eq!(r.reward, expect);
        }
    }

    #[test]
    fn divergence_reports_round_context() {
        let mut cfg = small(StrategyConfig::fedavg());
        cfg.local.learning_rate = 1e308;
        cfg.model.weight_init_scale = 1.0;
        let err = run(&cfg).unwrap_err();
        assert!(err.is_divergence(), "{err}");
    }
}
