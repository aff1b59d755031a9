//! One client's work in a round: report the loss of the incoming global model
//! on a drawn batch, then run `E` epochs of mini-batch SGD from it.

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::data::ClientShard;
use crate::error::{Error, Result};
use crate::model::{self, ParamVector};
use crate::rng;

/// Wire size of one transmitted real number.
pub const BYTES_PER_VALUE: u64 = 8;
/// Payload of the scalar loss sent alongside the model.
pub const LOSS_BYTES: u64 = BYTES_PER_VALUE;

/// Serialized size of a parameter payload.
pub fn param_bytes(params: &ParamVector) -> u64 {
    params.len() as u64 * BYTES_PER_VALUE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LocalConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub local_epochs: usize,
    pub shuffle_seed_base: u64,
    /// Report the loss over the whole train split instead of one batch.
    pub full_train_loss: bool,
}

impl Default for LocalConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            batch_size: 10,
            local_epochs: 1,
            shuffle_seed_base: 0,
            full_train_loss: false,
        }
    }
}

impl LocalConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(Error::Config(
                "learning_rate must be finite and >= 0".into(),
            ));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        if self.local_epochs == 0 {
            return Err(Error::Config("local_epochs must be >= 1".into()));
        }
        Ok(())
    }
}

/// What a client sends back after a round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientReport {
    pub client_id: usize,
    pub updated_params: ParamVector,
    /// `F_k(ω^t)`: loss of the received model before any local update.
    pub reported_loss: f64,
    /// Training samples consumed across all local epochs.
    pub samples_used: usize,
    pub upload_bytes: u64,
}

/// Loss of `params` on the batch a client would report in round `round`.
///
/// The batch holds `min(B, n_train)` distinct training rows drawn from a
/// stream keyed by `(shuffle_seed_base, client_id, round)`.
pub fn reported_loss(
    shard: &ClientShard,
    params: &ParamVector,
    cfg: &LocalConfig,
    round: usize,
) -> Result<f64> {
    let n = shard.train.len();
    let value = if cfg.full_train_loss || cfg.batch_size >= n {
        model::loss(params, &shard.train)?
    } else {
        let mut rng = rng::stream(
            cfg.shuffle_seed_base,
            &[shard.client_id as u64, round as u64, 0],
        );
        let rows = index::sample(&mut rng, n, cfg.batch_size).into_vec();
        model::loss(params, &shard.train.select(&rows))?
    };
    if !value.is_finite() {
        return Err(Error::DivergedClient {
            round,
            client: shard.client_id,
            detail: format!("reported loss is {value}"),
        });
    }
    Ok(value)
}

/// Mini-batch boundaries for one epoch. A trailing single-sample batch is
/// dropped when `B > 1` and there is at least one full batch before it.
fn batches(n: usize, b: usize) -> impl Iterator<Item = std::ops::Range<usize>> {
    (0..n.div_ceil(b))
        .map(move |i| i * b..((i + 1) * b).min(n))
        .filter(move |r| !(r.len() == 1 && b > 1 && r.start > 0))
}

/// Run one client's round. `send_loss` decides whether the loss scalar is
/// part of the upload (and so of `upload_bytes`).
pub fn local_round(
    shard: &ClientShard,
    global: &ParamVector,
    cfg: &LocalConfig,
    round: usize,
    send_loss: bool,
) -> Result<ClientReport> {
    cfg.validate()?;
    let loss = reported_loss(shard, global, cfg, round)?;

    let diverged = |detail: String| Error::DivergedClient {
        round,
        client: shard.client_id,
        detail,
    };
    let mut params = global.clone();
    let n = shard.train.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = rng::stream(
        cfg.shuffle_seed_base,
        &[shard.client_id as u64, round as u64, 1],
    );
    let mut samples_used = 0;
    for _ in 0..cfg.local_epochs {
        order.shuffle(&mut rng);
        for range in batches(n, cfg.batch_size) {
            let batch = shard.train.select(&order[range.clone()]);
            let (l, grad) = model::loss_grad(&params, &batch)?;
            if !l.is_finite() || !grad.is_finite() {
                return Err(diverged(format!("non-finite loss/gradient ({l})")));
            }
            params.sgd_step(cfg.learning_rate, &grad);
            samples_used += range.len();
        }
    }
    if !params.is_finite() {
        return Err(diverged("parameters became non-finite".into()));
    }

    let upload_bytes = param_bytes(&params) + if send_loss { LOSS_BYTES } else { 0 };
    Ok(ClientReport {
        client_id: shard.client_id,
        updated_params: params,
        reported_loss: loss,
        samples_used,
        upload_bytes,
    })
}
