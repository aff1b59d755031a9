//! Aggregation weights and the weighted model average.
//!
//! The fair weights for a round with exponent `q` are
//!
//! ```text
//! w_k = p_k · max(F_k, ε)^q  /  Σ_i p_i · max(F_i, ε)^q
//! ```
//!
//! over the selected clients, where `F_k` is the loss client `k` reported for
//! the broadcast model. `q = 0` gives FedAvg's data-size weights bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ParamVector;
use crate::trainer::ClientReport;

pub const DEFAULT_LOSS_FLOOR: f64 = 1e-8;

/// Which aggregation rule a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Fedavg,
    StaticQ(f64),
    DynamicQ,
}

impl Strategy {
    pub fn label(&self) -> String {
        match self {
            Strategy::Fedavg => "fedavg".into(),
            Strategy::StaticQ(q) => format!("static_q({q})"),
            Strategy::DynamicQ => "dynamic_q".into(),
        }
    }

    /// Whether clients upload their loss scalar next to the model.
    pub fn sends_loss(&self) -> bool {
        !matches!(self, Strategy::Fedavg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Fedavg,
    StaticQ,
    DynamicQ,
}

/// Config-file form of a [`Strategy`]: `kind`, `q` (static_q only) and the
/// loss floor applied before exponentiation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default = "default_floor")]
    pub loss_floor: f64,
}

fn default_floor() -> f64 {
    DEFAULT_LOSS_FLOOR
}

impl Default for StrategyConfig {
    fn default() -> Self {
        Self::fedavg()
    }
}

impl StrategyConfig {
    pub fn new(strategy: Strategy) -> Self {
        let (kind, q) = match strategy {
            Strategy::Fedavg => (StrategyKind::Fedavg, None),
            Strategy::StaticQ(q) => (StrategyKind::StaticQ, Some(q)),
            Strategy::DynamicQ => (StrategyKind::DynamicQ, None),
        };
        Self {
            kind,
            q,
            loss_floor: DEFAULT_LOSS_FLOOR,
        }
    }

    pub fn fedavg() -> Self {
        Self::new(Strategy::Fedavg)
    }

    pub fn static_q(q: f64) -> Self {
        Self::new(Strategy::StaticQ(q))
    }

    pub fn dynamic_q() -> Self {
        Self::new(Strategy::DynamicQ)
    }

    pub fn strategy(&self) -> Result<Strategy> {
        match (self.kind, self.q) {
            (StrategyKind::StaticQ, Some(q)) if q.is_finite() && q >= 0.0 => {
                Ok(Strategy::StaticQ(q))
            }
            (StrategyKind::StaticQ, Some(q)) => Err(Error::Config(format!(
                "static_q needs a finite q >= 0, got {q}"
            ))),
            (StrategyKind::StaticQ, None) => Err(Error::Config("static_q requires q".into())),
            (_, Some(_)) => Err(Error::Config("q is only valid for static_q".into())),
            (StrategyKind::Fedavg, None) => Ok(Strategy::Fedavg),
            (StrategyKind::DynamicQ, None) => Ok(Strategy::DynamicQ),
        }
    }

    pub fn label(&self) -> String {
        self.strategy()
            .map(|s| s.label())
            .unwrap_or_else(|_| "invalid".into())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.loss_floor > 0.0 && self.loss_floor <= 1e-3) {
            return Err(Error::Config("loss_floor must lie in (0, 1e-3]".into()));
        }
        self.strategy().map(|_| ())
    }
}

/// Per-client aggregation weights, ordered by ascending client id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub client_ids: Vec<usize>,
    pub values: Vec<f64>,
}

impl WeightVector {
    pub fn get(&self, client_id: usize) -> Option<f64> {
        self.client_ids
            .binary_search(&client_id)
            .ok()
            .map(|i| self.values[i])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.client_ids
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }
}

/// Reports sorted by client id, rejecting duplicates and empty input.
fn ordered(reports: &[ClientReport]) -> Result<Vec<&ClientReport>> {
    if reports.is_empty() {
        return Err(Error::Contract(
            "aggregation needs at least one report".into(),
        ));
    }
    let mut sorted: Vec<&ClientReport> = reports.iter().collect();
    sorted.sort_by_key(|r| r.client_id);
    if sorted.windows(2).any(|w| w[0].client_id == w[1].client_id) {
        return Err(Error::Contract("duplicate client id among reports".into()));
    }
    Ok(sorted)
}

fn share(p: &[f64], id: usize) -> Result<f64> {
    let v = *p
        .get(id)
        .ok_or_else(|| Error::Contract(format!("no data share for client {id}")))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Contract(format!("data share of client {id} is {v}")));
    }
    Ok(v)
}

fn normalize(ids: Vec<usize>, raw: Vec<f64>) -> WeightVector {
    let total: f64 = raw.iter().sum();
    WeightVector {
        client_ids: ids,
        values: raw.into_iter().map(|v| v / total).collect(),
    }
}

/// FedAvg weights: data shares renormalized over the selected clients.
/// `shares[k]` is `p_k` for client id `k`.
pub fn fedavg_weights(reports: &[ClientReport], shares: &[f64]) -> Result<WeightVector> {
    let sorted = ordered(reports)?;
    let ids: Vec<usize> = sorted.iter().map(|r| r.client_id).collect();
    let raw = ids
        .iter()
        .map(|&id| share(shares, id))
        .collect::<Result<_>>()?;
    Ok(normalize(ids, raw))
}

/// Loss-exponent weights `p_k·F_k^q / Σ p_i·F_i^q` with losses floored at
/// `floor`. Powers are formed as `exp(q·ln F − max_i q·ln F_i)`; the common
/// shift cancels in the ratio.
pub fn dqffl_weights(
    reports: &[ClientReport],
    shares: &[f64],
    q: f64,
    floor: f64,
) -> Result<WeightVector> {
    if !q.is_finite() || q < 0.0 {
        return Err(Error::Contract(format!(
            "q must be finite and >= 0, got {q}"
        )));
    }
    let sorted = ordered(reports)?;
    let mut log_terms = Vec::with_capacity(sorted.len());
    for r in &sorted {
        if !r.reported_loss.is_finite() {
            return Err(Error::Contract(format!(
                "client {} reported non-finite loss",
                r.client_id
            )));
        }
        log_terms.push(q * r.reported_loss.max(floor).ln());
    }
    let shift = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ids: Vec<usize> = sorted.iter().map(|r| r.client_id).collect();
    let mut raw = Vec::with_capacity(ids.len());
    for (&id, lt) in ids.iter().zip(&log_terms) {
        raw.push(share(shares, id)? * (lt - shift).exp());
    }
    Ok(normalize(ids, raw))
}

/// Weighted objective `Σ_k w_k F_k` of the selected clients' reported losses.
pub fn weighted_loss(reports: &[ClientReport], weights: &WeightVector) -> Result<f64> {
    let sorted = ordered(reports)?;
    sorted
        .iter()
        .map(|r| {
            weights
                .get(r.client_id)
                .map(|w| w * r.reported_loss)
                .ok_or_else(|| Error::Contract(format!("no weight for client {}", r.client_id)))
        })
        .sum()
}

/// `Σ_k w_k · θ_k`, summed in ascending client id order.
pub fn aggregate(reports: &[ClientReport], weights: &WeightVector) -> Result<ParamVector> {
    let sorted = ordered(reports)?;
    let ids: Vec<usize> = sorted.iter().map(|r| r.client_id).collect();
    if ids != weights.client_ids {
        return Err(Error::Contract(
            "weights are not keyed by exactly the reporting clients".into(),
        ));
    }
    let first = &sorted[0].updated_params;
    let mut out = ParamVector::zeros(first.spec);
    if out.len() != first.len() {
        return Err(Error::Contract(
            "parameter length disagrees with its spec".into(),
        ));
    }
    for (r, &w) in sorted.iter().zip(&weights.values) {
        if r.updated_params.len() != out.len() || r.updated_params.spec != first.spec {
            return Err(Error::Contract(format!(
                "client {} sent parameters of a different shape",
                r.client_id
            )));
        }
        for (o, v) in out.values.iter_mut().zip(&r.updated_params.values) {
            *o += w * v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::{Strategy, *};
    use crate::model::ModelSpec;
    use proptest::prelude::*;

    fn report(id: usize, loss: f64, values: Vec<f64>) -> ClientReport {
        let spec = ModelSpec::logistic(values.len() / 2 - 1, 2);
        ClientReport {
            client_id: id,
            updated_params: ParamVector::from_values(spec, values).unwrap(),
            reported_loss: loss,
            samples_used: 0,
            upload_bytes: 0,
        }
    }

    fn losses(ls: &[f64]) -> Vec<ClientReport> {
        ls.iter()
            .enumerate()
            .map(|(i, &l)| report(i, l, vec![0.0; 4]))
            .collect()
    }

    #[test]
    fn fedavg_proportional_to_size() {
        let w = fedavg_weights(&losses(&[1.0, 1.0]), &[100.0 / 400.0, 300.0 / 400.0]).unwrap();
        assert_eq!(w.values, vec![0.25, 0.75]);
        let w = fedavg_weights(&losses(&[1.0, 2.0, 3.0, 4.0]), &[0.25; 4]).unwrap();
        assert!(w.values.iter().all(|&v| v == 0.25));
        let single = fedavg_weights(&losses(&[3.0]), &[0.1]).unwrap();
        assert_eq!(single.values, vec![1.0]);
    }

    #[test]
    fn fedavg_renormalizes_over_selected_subset() {
        let shares = [0.1, 0.2, 0.3, 0.4];
        let reports = vec![report(1, 1.0, vec![0.0; 4]), report(3, 1.0, vec![0.0; 4])];
        let w = fedavg_weights(&reports, &shares).unwrap();
        assert_eq!(w.client_ids, vec![1, 3]);
        assert!((w.values[0] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn q_zero_is_bitwise_fedavg() {
        let reports = losses(&[0.3, 2.5, 1e-12, 7.0]);
        let shares = [0.13, 0.41, 0.07, 0.39];
        let a = fedavg_weights(&reports, &shares).unwrap();
        let b = dqffl_weights(&reports, &shares, 0.0, DEFAULT_LOSS_FLOOR).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn q_one_ratio() {
        let w = dqffl_weights(&losses(&[2.0, 1.0]), &[0.5, 0.5], 1.0, DEFAULT_LOSS_FLOOR).unwrap();
        assert!((w.values[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((w.values[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn q_two_hand_computed() {
        // Unnormalized (0.25·16, 0.75·1) = (4.0, 0.75).
        let w =
            dqffl_weights(&losses(&[4.0, 1.0]), &[0.25, 0.75], 2.0, DEFAULT_LOSS_FLOOR).unwrap();
        assert!((w.values[0] - 4.0 / 4.75).abs() < 1e-15);
        assert!((w.values[1] - 0.75 / 4.75).abs() < 1e-15);
    }

    #[test]
    fn floor_keeps_perfect_clients_positive() {
        let w = dqffl_weights(&losses(&[0.0, 1.0]), &[0.5, 0.5], 1.0, 1e-8).unwrap();
        assert!(w.values[0] > 0.0);
        assert!((w.values[0] - 1e-8 / (1.0 + 1e-8)).abs() < 1e-20);
    }

    #[test]
    fn large_exponents_do_not_overflow() {
        let w = dqffl_weights(&losses(&[1e3, 999.0, 1.0]), &[0.3, 0.3, 0.4], 10.0, 1e-8).unwrap();
        assert!(w.values.iter().all(|v| v.is_finite()));
        assert!((w.values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(dqffl_weights(&losses(&[1.0]), &[1.0], -1.0, 1e-8).is_err());
        assert!(dqffl_weights(&losses(&[f64::NAN]), &[1.0], 1.0, 1e-8).is_err());
        assert!(dqffl_weights(&[], &[], 1.0, 1e-8).is_err());
        assert!(fedavg_weights(&losses(&[1.0, 1.0]), &[1.0]).is_err());
    }

    #[test]
    fn aggregate_examples() {
        let a = report(0, 1.0, vec![1.0, 2.0, 3.0, 4.0]);
        let single = WeightVector {
            client_ids: vec![0],
            values: vec![1.0],
        };
        assert_eq!(
            aggregate(std::slice::from_ref(&a), &single).unwrap(),
            a.updated_params
        );

        let b = report(1, 1.0, vec![1.0, 2.0, 3.0, 4.0]);
        let w = WeightVector {
            client_ids: vec![0, 1],
            values: vec![0.3, 0.7],
        };
        let out = aggregate(&[a.clone(), b], &w).unwrap();
        for (x, y) in out.values.iter().zip(&a.updated_params.values) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn aggregate_matches_naive_weighted_sum() {
        let vs = [
            vec![0.5, -1.25, 3.0, 2.0],
            vec![1.5, 0.25, -2.0, 0.125],
            vec![-0.75, 4.0, 1.0, -3.5],
        ];
        let reports: Vec<_> = vs
            .iter()
            .enumerate()
            .map(|(i, v)| report(i, 1.0, v.clone()))
            .collect();
        let w = WeightVector {
            client_ids: vec![0, 1, 2],
            values: vec![0.2, 0.3, 0.5],
        };
        let out = aggregate(&reports, &w).unwrap();
        for (j, got) in out.values.iter().enumerate() {
            let expect = 0.2 * vs[0][j] + 0.3 * vs[1][j] + 0.5 * vs[2][j];
            assert!((got - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn aggregate_rejects_mismatch() {
        let a = report(0, 1.0, vec![0.0; 4]);
        let b = report(1, 1.0, vec![0.0; 6]);
        let w = WeightVector {
            client_ids: vec![0, 1],
            values: vec![0.5, 0.5],
        };
        assert!(matches!(
            aggregate(&[a.clone(), b], &w),
            Err(Error::Contract(_))
        ));
        let wrong_keys = WeightVector {
            client_ids: vec![5],
            values: vec![1.0],
        };
        assert!(aggregate(&[a], &wrong_keys).is_err());
    }

    #[test]
    fn weighted_loss_matches_explicit_ratio_form() {
        let ls = [0.4, 1.7, 0.9];
        let shares = [0.2, 0.5, 0.3];
        let q = 1.5;
        let reports = losses(&ls);
        let w = dqffl_weights(&reports, &shares, q, 1e-8).unwrap();
        let num: f64 = (0..3).map(|k| shares[k] * ls[k].powf(q) * ls[k]).sum();
        let den: f64 = (0..3).map(|k| shares[k] * ls[k].powf(q)).sum();
        assert!((weighted_loss(&reports, &w).unwrap() - num / den).abs() < 1e-12);
    }

    #[test]
    fn strategy_config_parses() {
        let c: StrategyConfig = toml::from_str("kind = \"static_q\"\nq = 1.0").unwrap();
        assert_eq!(c.strategy().unwrap(), Strategy::StaticQ(1.0));
        assert_eq!(c.label(), "static_q(1)");
        assert_eq!(c.loss_floor, DEFAULT_LOSS_FLOOR);
        assert!(StrategyConfig {
            loss_floor: 0.1,
            ..c
        }
        .validate()
        .is_err());
        assert!(toml::from_str::<StrategyConfig>("kind = \"fedavg\"\nbogus = 1").is_err());
        let missing: StrategyConfig = toml::from_str("kind = \"static_q\"").unwrap();
        assert!(missing.validate().is_err());
        let stray: StrategyConfig = toml::from_str("kind = \"fedavg\"\nq = 2.0").unwrap();
        assert!(stray.validate().is_err());
    }

    proptest! {
        #[test]
        fn weights_on_simplex_and_scale_free(
            ls in prop::collection::vec(1e-3f64..50.0, 1..12),
            q in 0.0f64..10.0,
            c in 1e-2f64..1e2,
        ) {
            let shares: Vec<f64> = (0..ls.len()).map(|i| 1.0 + i as f64).collect();
            let w = dqffl_weights(&losses(&ls), &shares, q, 1e-8).unwrap();
            prop_assert!(w.values.iter().all(|&v| v >= 0.0));
            prop_assert!((w.values.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let scaled: Vec<f64> = ls.iter().map(|l| l * c).collect();
            let ws = dqffl_weights(&losses(&scaled), &shares, q, 1e-8).unwrap();
            for (a, b) in w.values.iter().zip(&ws.values) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
