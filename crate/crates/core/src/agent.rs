//! Server-side agent that picks the aggregation exponent `q` each round.
//!
//! The agent observes a fixed-length summary of the losses the selected
//! clients reported ([`PolicyState`]), samples an index into a discrete grid
//! of `q` values from a softmax policy ([`PolicyNet`]), and after each full
//! federated run (one episode) takes a REINFORCE step
//!
//! ```text
//! θ ← θ + lr · Σ_t ∇θ log π(a_t | s_t) · (G_t − b_t)
//! G_t = Σ_{t' ≥ t} γ^{t'−t} r_{t'}
//! ```
//!
//! where `b_t` is an exponential moving average of `G_t` over past episodes.
//! Rewards are `a · exp(−Var(losses))`: validation accuracy discounted by the
//! spread of the client losses.

use std::fs;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::population_variance;
use crate::rng;
use crate::textio;
use crate::SCHEMA_VERSION;

/// Discrete action space: candidate values of `q`, strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct QGrid(Vec<f64>);

impl QGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config("q grid must not be empty".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Config(
                "q grid values must be finite and >= 0".into(),
            ));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("q grid must be strictly increasing".into()));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.0[index]
    }
}

impl Default for QGrid {
    fn default() -> Self {
        Self(vec![0.0, 0.1, 0.5, 1.0, 2.0, 5.0])
    }
}

impl TryFrom<Vec<f64>> for QGrid {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        QGrid::new(v)
    }
}

impl From<QGrid> for Vec<f64> {
    fn from(g: QGrid) -> Self {
        g.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AgentConfig {
    pub q_grid: QGrid,
    /// Number of loss slots in the state; extra clients are truncated.
    pub m_max: usize,
    pub hidden: usize,
    pub learning_rate: f64,
    pub gamma: f64,
    pub baseline_decay: f64,
    /// Sample actions (true) or act greedily.
    pub explore: bool,
    /// `prev_q` fed to the state in the first round.
    pub initial_q: f64,
    /// Credit the action of round t with `a^{t+1}·exp(−Var(F(ω^t)))` instead
    /// of waiting for the next round's losses.
    pub same_step_reward: bool,
    /// Append the current validation accuracy to the state.
    pub accuracy_in_state: bool,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            q_grid: QGrid::default(),
            m_max: 10,
            hidden: 32,
            learning_rate: 1e-2,
            gamma: 0.99,
            baseline_decay: 0.9,
            explore: true,
            initial_q: 0.0,
            same_step_reward: false,
            accuracy_in_state: false,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.m_max == 0 {
            return fail("agent m_max must be >= 1");
        }
        if self.hidden == 0 {
            return fail("agent hidden width must be >= 1");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return fail("agent learning_rate must be finite and >= 0");
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return fail("gamma must lie in [0, 1]");
        }
        if !(0.0..1.0).contains(&self.baseline_decay) {
            return fail("baseline_decay must lie in [0, 1)");
        }
        if !(self.initial_q.is_finite() && self.initial_q >= 0.0) {
            return fail("initial_q must be finite and >= 0");
        }
        Ok(())
    }

    pub fn state_len(&self) -> usize {
        self.m_max + 4 + usize::from(self.accuracy_in_state)
    }
}

/// Featurized per-client losses.
///
/// Layout: `m_max` losses sorted descending (zero-padded or truncated to the
/// largest), then mean loss, std of losses, previous `q`, and `t / T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyState {
    pub features: Vec<f64>,
}

pub fn build_state(
    losses: &[f64],
    prev_q: f64,
    round: usize,
    total_rounds: usize,
    m_max: usize,
) -> Result<PolicyState> {
    if losses.is_empty() {
        return Err(Error::Contract("state needs at least one loss".into()));
    }
    if losses.iter().any(|l| !l.is_finite()) {
        return Err(Error::Contract("state losses must be finite".into()));
    }
    let mut sorted = losses.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted.resize(m_max, 0.0);
    let mean = losses.iter().sum::<f64>() / losses.len() as f64;
    let std = population_variance(losses).sqrt();
    sorted.extend([mean, std, prev_q, round as f64 / total_rounds.max(1) as f64]);
    Ok(PolicyState { features: sorted })
}

/// Reward for an action: `accuracy · exp(−Var(losses))`.
pub fn compute_reward(accuracy: f64, losses: &[f64]) -> Result<f64> {
    if !(0.0..=1.0).contains(&accuracy) {
        return Err(Error::Contract(format!(
            "accuracy {accuracy} outside [0, 1]"
        )));
    }
    if losses.is_empty() {
        return Err(Error::Contract("reward needs at least one loss".into()));
    }
    Ok(accuracy * (-population_variance(losses)).exp())
}

/// Feed-forward policy: state → tanh → tanh → logits over the q grid.
///
/// Parameter layout: `W1 (h×n)`, `b1`, `W2 (h×h)`, `b2`, `W3 (A×h)`, `b3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyNet {
    pub input: usize,
    pub hidden: usize,
    pub actions: usize,
    pub params: Vec<f64>,
}

struct Activations {
    h1: Vec<f64>,
    h2: Vec<f64>,
    logits: Vec<f64>,
}

impl PolicyNet {
    pub fn num_params(input: usize, hidden: usize, actions: usize) -> usize {
        hidden * input + hidden + hidden * hidden + hidden + actions * hidden + actions
    }

    /// Hidden layers get scaled-normal (Xavier) weights; the output layer
    /// starts at zero so the initial policy is uniform.
    pub fn new(input: usize, hidden: usize, actions: usize, seed: u64) -> Self {
        let mut params = vec![0.0; Self::num_params(input, hidden, actions)];
        let mut rng = rng::stream(seed, &[0xA6E7]);
        let s1 = (1.0 / input as f64).sqrt();
        let s2 = (1.0 / hidden as f64).sqrt();
        let w1 = hidden * input;
        let w2 = w1 + hidden;
        for p in &mut params[..w1] {
            *p = s1 * rng.sample::<f64, _>(StandardNormal);
        }
        for p in &mut params[w2..w2 + hidden * hidden] {
            *p = s2 * rng.sample::<f64, _>(StandardNormal);
        }
        Self {
            input,
            hidden,
            actions,
            params,
        }
    }

    pub fn from_params(
        input: usize,
        hidden: usize,
        actions: usize,
        params: Vec<f64>,
    ) -> Result<Self> {
        if params.len() != Self::num_params(input, hidden, actions) {
            return Err(Error::Contract(format!(
                "policy expects {} parameters, got {}",
                Self::num_params(input, hidden, actions),
                params.len()
            )));
        }
        Ok(Self {
            input,
            hidden,
            actions,
            params,
        })
    }

    fn offsets(&self) -> [usize; 6] {
        let (n, h, a) = (self.input, self.hidden, self.actions);
        let w1 = 0;
        let b1 = w1 + h * n;
        let w2 = b1 + h;
        let b2 = w2 + h * h;
        let w3 = b2 + h;
        let b3 = w3 + a * h;
        [w1, b1, w2, b2, w3, b3]
    }

    fn forward(&self, state: &PolicyState) -> Result<Activations> {
        if state.features.len() != self.input {
            return Err(Error::Contract(format!(
                "state has {} features, policy expects {}",
                state.features.len(),
                self.input
            )));
        }
        let [w1, b1, w2, b2, w3, b3] = self.offsets();
        let (h, a) = (self.hidden, self.actions);
        let p = &self.params;
        let layer = |w: usize, b: usize, rows: usize, x: &[f64]| -> Vec<f64> {
            (0..rows)
                .map(|j| {
                    let row = &p[w + j * x.len()..w + (j + 1) * x.len()];
                    p[b + j] + row.iter().zip(x).map(|(u, v)| u * v).sum::<f64>()
                })
                .collect()
        };
        let mut h1 = layer(w1, b1, h, &state.features);
        h1.iter_mut().for_each(|v| *v = v.tanh());
        let mut h2 = layer(w2, b2, h, &h1);
        h2.iter_mut().for_each(|v| *v = v.tanh());
        let logits = layer(w3, b3, a, &h2);
        if logits.iter().any(|z| !z.is_finite()) {
            return Err(Error::DivergedPolicy("non-finite logits".into()));
        }
        Ok(Activations { h1, h2, logits })
    }

    pub fn logits(&self, state: &PolicyState) -> Result<Vec<f64>> {
        Ok(self.forward(state)?.logits)
    }

    pub fn probabilities(&self, state: &PolicyState) -> Result<Vec<f64>> {
        Ok(softmax(&self.forward(state)?.logits))
    }

    /// `log π(action | state)` and its gradient with respect to the parameters.
    pub fn log_prob_grad(&self, state: &PolicyState, action: usize) -> Result<(f64, Vec<f64>)> {
        let act = self.forward(state)?;
        if action >= self.actions {
            return Err(Error::Contract(format!("action {action} out of range")));
        }
        let [w1, b1, w2, b2, w3, b3] = self.offsets();
        let (n, h, a) = (self.input, self.hidden, self.actions);
        let p = &self.params;
        let probs = softmax(&act.logits);
        let log_prob = act.logits[action] - log_sum_exp(&act.logits);

        let mut g = vec![0.0; p.len()];
        // d log π_a / d z = onehot(a) − π
        let dz: Vec<f64> = (0..a)
            .map(|k| f64::from(u8::from(k == action)) - probs[k])
            .collect();
        let mut dh2 = vec![0.0; h];
        for k in 0..a {
            g[b3 + k] = dz[k];
            for j in 0..h {
                g[w3 + k * h + j] = dz[k] * act.h2[j];
                dh2[j] += dz[k] * p[w3 + k * h + j];
            }
        }
        let da2: Vec<f64> = (0..h)
            .map(|j| dh2[j] * (1.0 - act.h2[j] * act.h2[j]))
            .collect();
        let mut dh1 = vec![0.0; h];
        for k in 0..h {
            g[b2 + k] = da2[k];
            for j in 0..h {
                g[w2 + k * h + j] = da2[k] * act.h1[j];
                dh1[j] += da2[k] * p[w2 + k * h + j];
            }
        }
        for k in 0..h {
            let da1 = dh1[k] * (1.0 - act.h1[k] * act.h1[k]);
            g[b1 + k] = da1;
            for j in 0..n {
                g[w1 + k * n + j] = da1 * state.features[j];
            }
        }
        Ok((log_prob, g))
    }
}

fn log_sum_exp(z: &[f64]) -> f64 {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp(z);
    z.iter().map(|v| (v - lse).exp()).collect()
}

/// A chosen action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub q: f64,
    pub index: usize,
    pub log_prob: f64,
}

/// Sample (explore) or take the argmax (lowest index on ties) of the policy.
pub fn select_action(
    net: &PolicyNet,
    grid: &QGrid,
    state: &PolicyState,
    rng: &mut impl Rng,
    explore: bool,
) -> Result<Action> {
    if net.actions != grid.len() {
        return Err(Error::Contract("policy head does not match q grid".into()));
    }
    let logits = net.logits(state)?;
    let probs = softmax(&logits);
    let index = if explore {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = probs.len() - 1;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                chosen = i;
                break;
            }
        }
        chosen
    } else {
        crate::model::argmax(&logits)
    };
    Ok(Action {
        q: grid.get(index),
        index,
        log_prob: logits[index] - log_sum_exp(&logits),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub state: PolicyState,
    pub action: usize,
    pub log_prob: f64,
    pub reward: f64,
}

/// One episode of (state, action, log-prob, reward) steps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<Step>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Discounted reward-to-go `G_t` for every step.
    pub fn returns(&self, gamma: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.steps.len()];
        let mut acc = 0.0;
        for (t, s) in self.steps.iter().enumerate().rev() {
            acc = s.reward + gamma * acc;
            out[t] = acc;
        }
        out
    }
}

/// Per-step exponential moving average of returns. A step seen for the first
/// time starts at its observed return rather than at zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub decay: f64,
    pub values: Vec<f64>,
}

impl Baseline {
    pub fn new(decay: f64) -> Self {
        Self {
            decay,
            values: Vec::new(),
        }
    }

    pub fn get(&self, t: usize) -> f64 {
        self.values.get(t).copied().unwrap_or(0.0)
    }

    pub fn observe(&mut self, returns: &[f64]) {
        for (b, g) in self.values.iter_mut().zip(returns) {
            *b = self.decay * *b + (1.0 - self.decay) * g;
        }
        if self.values.len() < returns.len() {
            self.values.extend_from_slice(&returns[self.values.len()..]);
        }
    }
}

/// One REINFORCE step on `net` from `trajectory`, then fold the episode's
/// returns into `baseline`.
///
/// The ascent direction is averaged over the episode's steps, so the step
/// size does not grow with the horizon.
pub fn policy_update(
    net: &mut PolicyNet,
    trajectory: &Trajectory,
    learning_rate: f64,
    gamma: f64,
    baseline: &mut Baseline,
) -> Result<()> {
    if trajectory.is_empty() {
        return Err(Error::Contract(
            "cannot update from an empty trajectory".into(),
        ));
    }
    if trajectory.steps.iter().any(|s| !s.reward.is_finite()) {
        return Err(Error::DivergedPolicy("non-finite reward".into()));
    }
    let returns = trajectory.returns(gamma);
    let mut grad = vec![0.0; net.params.len()];
    for (t, (step, g_t)) in trajectory.steps.iter().zip(&returns).enumerate() {
        let advantage = g_t - baseline.get(t);
        if advantage == 0.0 {
            continue;
        }
        let (_, g) = net.log_prob_grad(&step.state, step.action)?;
        for (acc, v) in grad.iter_mut().zip(g) {
            *acc += advantage * v;
        }
    }
    if grad.iter().any(|v| !v.is_finite()) {
        return Err(Error::DivergedPolicy("non-finite policy gradient".into()));
    }
    let scale = learning_rate / trajectory.len() as f64;
    for (p, g) in net.params.iter_mut().zip(&grad) {
        *p += scale * g;
    }
    baseline.observe(&returns);
    Ok(())
}

/// Policy, baseline, and episode bookkeeping owned by the orchestrator.
#[derive(Debug, Clone)]
pub struct Agent {
    pub config: AgentConfig,
    pub net: PolicyNet,
    pub baseline: Baseline,
    pub episodes_completed: u64,
    seed: u64,
    rng: ChaCha8Rng,
    trajectory: Trajectory,
}

impl Agent {
    pub fn new(config: AgentConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let net = PolicyNet::new(config.state_len(), config.hidden, config.q_grid.len(), seed);
        let baseline = Baseline::new(config.baseline_decay);
        Ok(Self {
            rng: rng::stream(seed, &[0]),
            config,
            net,
            baseline,
            episodes_completed: 0,
            seed,
            trajectory: Trajectory::default(),
        })
    }

    /// Reset the per-episode trajectory and action stream.
    pub fn begin_episode(&mut self) {
        self.trajectory = Trajectory::default();
        self.rng = rng::stream(self.seed, &[self.episodes_completed]);
    }

    pub fn act(&mut self, state: PolicyState) -> Result<Action> {
        let action = select_action(
            &self.net,
            &self.config.q_grid,
            &state,
            &mut self.rng,
            self.config.explore,
        )?;
        self.trajectory.steps.push(Step {
            state,
            action: action.index,
            log_prob: action.log_prob,
            reward: 0.0,
        });
        Ok(action)
    }

    /// Credit a reward to the action taken at `step`.
    pub fn reward(&mut self, step: usize, reward: f64) -> Result<()> {
        let s = self
            .trajectory
            .steps
            .get_mut(step)
            .ok_or_else(|| Error::Contract(format!("no action recorded at step {step}")))?;
        s.reward = reward;
        Ok(())
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }

    /// Update the policy from the finished episode. Returns the episode
    /// return `G_0`.
    pub fn finish_episode(&mut self) -> Result<f64> {
        let traj = std::mem::take(&mut self.trajectory);
        let g0 = traj
            .returns(self.config.gamma)
            .first()
            .copied()
            .unwrap_or(0.0);
        if !traj.is_empty() {
            policy_update(
                &mut self.net,
                &traj,
                self.config.learning_rate,
                self.config.gamma,
                &mut self.baseline,
            )?;
        }
        self.episodes_completed += 1;
        Ok(g0)
    }

    pub fn probabilities(&self, state: &PolicyState) -> Result<Vec<f64>> {
        self.net.probabilities(state)
    }

    /// Write `policy.params` and `agent.json` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        textio::write_values(&dir.join(POLICY_FILE), &self.net.params)?;
        let meta = CheckpointMeta {
            schema_version: SCHEMA_VERSION,
            config: self.config.clone(),
            seed: self.seed,
            episodes_completed: self.episodes_completed,
            baseline: self.baseline.clone(),
            input: self.net.input,
            hidden: self.net.hidden,
            actions: self.net.actions,
        };
        let path = dir.join(AGENT_FILE);
        let text = serde_json::to_string_pretty(&meta).expect("checkpoint serializes");
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(AGENT_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let meta: CheckpointMeta =
            serde_json::from_str(&text).map_err(|e| Error::parse(&path, e.to_string()))?;
        if meta.schema_version != SCHEMA_VERSION {
            return Err(Error::parse(&path, "unsupported schema_version"));
        }
        let params = textio::read_values(&dir.join(POLICY_FILE))?;
        let net = PolicyNet::from_params(meta.input, meta.hidden, meta.actions, params)?;
        let mut agent = Agent::new(meta.config, meta.seed)?;
        if agent.net.input != net.input || agent.net.actions != net.actions {
            return Err(Error::parse(
                &path,
                "checkpoint shape disagrees with its config",
            ));
        }
        agent.net = net;
        agent.baseline = meta.baseline;
        agent.episodes_completed = meta.episodes_completed;
        Ok(agent)
    }
}

pub const POLICY_FILE: &str = "policy.params";
pub const AGENT_FILE: &str = "agent.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointMeta {
    schema_version: u32,
    config: AgentConfig,
    seed: u64,
    episodes_completed: u64,
    baseline: Baseline,
    input: usize,
    hidden: usize,
    actions: usize,
}

/// Degenerate environment for checking the learner: a constant state and
/// one step per episode with a fixed reward per action.
pub struct Bandit {
    pub rewards: Vec<f64>,
    pub state: PolicyState,
}

impl Bandit {
    pub fn two_armed(state_len: usize) -> Self {
        Self {
            rewards: vec![1.0, 0.0],
            state: PolicyState {
                features: vec![1.0; state_len],
            },
        }
    }

    /// Play one episode and update the agent. Returns the episode return.
    pub fn episode(&self, agent: &mut Agent) -> Result<f64> {
        agent.begin_episode();
        let a = agent.act(self.state.clone())?;
        agent.reward(0, self.rewards[a.index])?;
        agent.finish_episode()
    }

    /// Probability the agent assigns to the best arm.
    pub fn best_probability(&self, agent: &Agent) -> Result<f64> {
        let best = crate::model::argmax(&self.rewards);
        Ok(agent.probabilities(&self.state)?[best])
    }
}
