//! Fairness statistics over per-client accuracies and the α-fairness utility.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Population variance (divide by `n`). Zero for an empty slice.
pub fn population_variance(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
}

/// α-fairness utility: `ln x` for `α = 1`, otherwise `x^(1−α) / (1−α)`.
///
/// The second branch carries no `−1` in the numerator, so the two branches do
/// not meet as `α → 1`; the `α = 1` case is matched exactly, not as a limit.
pub fn alpha_utility(x: f64, alpha: f64) -> Result<f64> {
    if x <= 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!("alpha utility needs x > 0, got {x}")));
    }
    if alpha < 0.0 || !alpha.is_finite() {
        return Err(Error::Domain(format!(
            "alpha must be finite and >= 0, got {alpha}"
        )));
    }
    if alpha == 1.0 {
        Ok(x.ln())
    } else {
        Ok(x.powf(1.0 - alpha) / (1.0 - alpha))
    }
}

/// Jain's index `(Σx)² / (K·Σx²)`; 1 when every value is zero.
pub fn jain_index(xs: &[f64]) -> f64 {
    let sum: f64 = xs.iter().sum();
    let sq: f64 = xs.iter().map(|x| x * x).sum();
    if sq == 0.0 {
        1.0
    } else {
        sum * sum / (xs.len() as f64 * sq)
    }
}

/// Gini coefficient via the sorted-rank formula
/// `Σ_i (2i − n − 1)·x_(i) / (n·Σx)`, ranks `i` from 1. Zero when every value
/// is zero.
pub fn gini(xs: &[f64]) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let sum: f64 = sorted.iter().sum();
    if sum == 0.0 {
        return 0.0;
    }
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, x)| (2.0 * (i as f64 + 1.0) - n - 1.0) * x)
        .sum();
    // Non-negative in exact arithmetic; clamp rounding noise on equal values.
    (weighted / (n * sum)).max(0.0)
}

/// Summary of how evenly the global model serves the clients.
///
/// Accuracies and decile means are fractions in `[0, 1]`; `variance` is in
/// percent² (accuracies scaled to 0–100 first).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub clients: usize,
    pub mean: f64,
    /// Mean of the `⌈K/10⌉` lowest accuracies.
    pub worst_decile: f64,
    /// Mean of the `⌈K/10⌉` highest accuracies.
    pub best_decile: f64,
    pub variance: f64,
    pub jain: f64,
    pub gini: f64,
    pub alpha: f64,
    /// `Σ_k U_α(acc_k)`; `None` when some accuracy is 0 (outside the domain).
    pub alpha_utility: Option<f64>,
}

pub fn fairness_report(accuracies: &[f64], alpha: f64) -> Result<FairnessReport> {
    if accuracies.is_empty() {
        return Err(Error::Contract(
            "fairness report needs at least one client".into(),
        ));
    }
    if let Some(a) = accuracies.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::Contract(format!("accuracy {a} outside [0, 1]")));
    }
    let k = accuracies.len();
    let mut sorted = accuracies.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tail = k.div_ceil(10);
    let mean_of = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let percent: Vec<f64> = accuracies.iter().map(|a| a * 100.0).collect();
    let alpha_utility = if accuracies.iter().all(|&a| a > 0.0) {
        Some(
            accuracies
                .iter()
                .map(|&a| alpha_utility(a, alpha))
                .sum::<Result<f64>>()?,
        )
    } else {
        alpha_utility(1.0, alpha)?;
        None
    };
    Ok(FairnessReport {
        clients: k,
        mean: mean_of(accuracies),
        worst_decile: mean_of(&sorted[..tail]),
        best_decile: mean_of(&sorted[k - tail..]),
        variance: population_variance(&percent),
        jain: jain_index(accuracies),
        gini: gini(accuracies),
        alpha,
        alpha_utility,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Counts of accuracies in `[0, 1]` over bins `[i·w, (i+1)·w)`; the last bin
/// also takes 1.0.
pub fn histogram(accuracies: &[f64], bin_width: f64) -> Result<Vec<HistogramBin>> {
    if bin_width <= 0.0 || !bin_width.is_finite() {
        return Err(Error::Contract(format!(
            "bin width must be > 0, got {bin_width}"
        )));
    }
    let bins = ((1.0 / bin_width) - 1e-9).ceil().max(1.0) as usize;
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|i| HistogramBin {
            lo: i as f64 * bin_width,
            hi: ((i + 1) as f64 * bin_width).min(1.0),
            count: 0,
        })
        .collect();
    for &a in accuracies {
        let idx = ((a / bin_width).floor().max(0.0) as usize).min(bins - 1);
        out[idx].count += 1;
    }
    Ok(out)
}
