//! Differentiable classifiers written out by hand: multinomial logistic
//! regression and a one-hidden-layer tanh MLP.
//!
//! Parameters live in a single flat [`ParamVector`]. The layout is
//!
//! * logistic: `W (C×d, row-major)`, `b (C)`
//! * mlp: `W1 (h×d)`, `b1 (h)`, `W2 (C×h)`, `b2 (C)`
//!
//! All losses are mean cross-entropy computed through a stable log-sum-exp.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Logistic,
    Mlp,
}

/// Architecture descriptor. Maps flat parameter indices to layers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub input_dim: usize,
    pub num_classes: usize,
    /// Ignored for logistic models.
    #[serde(default)]
    pub hidden_dim: usize,
    #[serde(default = "default_init_scale")]
    pub weight_init_scale: f64,
}

fn default_init_scale() -> f64 {
    0.01
}

impl ModelSpec {
    pub fn logistic(input_dim: usize, num_classes: usize) -> Self {
        Self {
            kind: ModelKind::Logistic,
            input_dim,
            num_classes,
            hidden_dim: 0,
            weight_init_scale: default_init_scale(),
        }
    }

    pub fn mlp(input_dim: usize, hidden_dim: usize, num_classes: usize) -> Self {
        Self {
            kind: ModelKind::Mlp,
            input_dim,
            num_classes,
            hidden_dim,
            weight_init_scale: 0.1,
        }
    }

    pub fn with_init_scale(mut self, scale: f64) -> Self {
        self.weight_init_scale = scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::Config("model input_dim must be >= 1".into()));
        }
        if self.num_classes < 2 {
            return Err(Error::Config("model num_classes must be >= 2".into()));
        }
        if self.kind == ModelKind::Mlp && self.hidden_dim == 0 {
            return Err(Error::Config("mlp hidden_dim must be >= 1".into()));
        }
        if !self.weight_init_scale.is_finite() || self.weight_init_scale < 0.0 {
            return Err(Error::Config(
                "weight_init_scale must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn num_params(&self) -> usize {
        let (d, c, h) = (self.input_dim, self.num_classes, self.hidden_dim);
        match self.kind {
            ModelKind::Logistic => d * c + c,
            ModelKind::Mlp => d * h + h + h * c + c,
        }
    }

    /// Index ranges of the weight matrices (as opposed to biases).
    fn weight_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let (d, c, h) = (self.input_dim, self.num_classes, self.hidden_dim);
        match self.kind {
            ModelKind::Logistic => std::iter::once(0..d * c).collect(),
            ModelKind::Mlp => {
                let w2 = d * h + h;
                vec![0..d * h, w2..w2 + h * c]
            }
        }
    }
}

/// Flat vector of all trainable parameters of one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub spec: ModelSpec,
    pub values: Vec<f64>,
}

impl ParamVector {
    pub fn zeros(spec: ModelSpec) -> Self {
        Self {
            values: vec![0.0; spec.num_params()],
            spec,
        }
    }

    pub fn from_values(spec: ModelSpec, values: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.num_params() {
            return Err(Error::Contract(format!(
                "expected {} parameters, got {}",
                spec.num_params(),
                values.len()
            )));
        }
        Ok(Self { spec, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `self -= step * grad`, element-wise.
    pub fn sgd_step(&mut self, step: f64, grad: &ParamVector) {
        for (w, g) in self.values.iter_mut().zip(&grad.values) {
            *w -= step * g;
        }
    }
}

/// Labelled samples, row-major features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Batch {
    dim: usize,
    features: Vec<f64>,
    labels: Vec<usize>,
}

impl Batch {
    pub fn new(dim: usize, features: Vec<f64>, labels: Vec<usize>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Contract(
                "batch feature dimension must be >= 1".into(),
            ));
        }
        if labels.is_empty() {
            return Err(Error::Contract(
                "batch must contain at least one sample".into(),
            ));
        }
        if features.len() != dim * labels.len() {
            return Err(Error::Contract(format!(
                "feature buffer has {} values, expected {}×{}",
                features.len(),
                labels.len(),
                dim
            )));
        }
        if let Some(bad) = features.iter().find(|v| !v.is_finite()) {
            return Err(Error::Contract(format!("non-finite feature {bad}")));
        }
        Ok(Self {
            dim,
            features,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// New batch holding the given rows, in the given order.
    pub fn select(&self, rows: &[usize]) -> Batch {
        let mut features = Vec::with_capacity(rows.len() * self.dim);
        let mut labels = Vec::with_capacity(rows.len());
        for &r in rows {
            features.extend_from_slice(self.row(r));
            labels.push(self.labels[r]);
        }
        Batch {
            dim: self.dim,
            features,
            labels,
        }
    }

    /// Concatenate batches of equal dimension.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a Batch>) -> Result<Batch> {
        let mut iter = parts.into_iter().peekable();
        let dim = iter
            .peek()
            .map(|b| b.dim)
            .ok_or_else(|| Error::Contract("cannot concatenate zero batches".into()))?;
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for b in iter {
            if b.dim != dim {
                return Err(Error::Contract("batch dimensions differ".into()));
            }
            features.extend_from_slice(&b.features);
            labels.extend_from_slice(&b.labels);
        }
        Ok(Batch {
            dim,
            features,
            labels,
        })
    }
}

/// Draw initial parameters: weights `N(0, scale²)`, biases zero.
pub fn init_params(spec: &ModelSpec, seed: u64) -> Result<ParamVector> {
    spec.validate()?;
    let mut params = ParamVector::zeros(*spec);
    let mut rng = rng::stream(seed, &[0x1A17]);
    for range in spec.weight_ranges() {
        for w in &mut params.values[range] {
            let z: f64 = rng.sample(StandardNormal);
            *w = spec.weight_init_scale * z;
        }
    }
    Ok(params)
}

fn check(params: &ParamVector, batch: &Batch) -> Result<()> {
    let spec = &params.spec;
    if params.values.len() != spec.num_params() {
        return Err(Error::Contract(format!(
            "parameter vector has {} entries, architecture needs {}",
            params.values.len(),
            spec.num_params()
        )));
    }
    if batch.dim != spec.input_dim {
        return Err(Error::Contract(format!(
            "batch dimension {} does not match model input {}",
            batch.dim, spec.input_dim
        )));
    }
    if let Some(&y) = batch.labels.iter().find(|&&y| y >= spec.num_classes) {
        return Err(Error::Contract(format!(
            "label {y} out of range for {} classes",
            spec.num_classes
        )));
    }
    Ok(())
}

/// `out = W x + b` for a row-major `W` of shape `out.len() × x.len()`.
fn affine(w: &[f64], b: &[f64], x: &[f64], out: &mut [f64]) {
    let d = x.len();
    for (j, o) in out.iter_mut().enumerate() {
        let row = &w[j * d..(j + 1) * d];
        *o = b[j] + row.iter().zip(x).map(|(a, c)| a * c).sum::<f64>();
    }
}

fn log_sum_exp(z: &[f64]) -> f64 {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Scratch buffers for one forward/backward pass.
struct Pass {
    hidden: Vec<f64>,
    logits: Vec<f64>,
    dlogits: Vec<f64>,
    dhidden: Vec<f64>,
}

impl Pass {
    fn new(spec: &ModelSpec) -> Self {
        Self {
            hidden: vec![0.0; spec.hidden_dim],
            logits: vec![0.0; spec.num_classes],
            dlogits: vec![0.0; spec.num_classes],
            dhidden: vec![0.0; spec.hidden_dim],
        }
    }

    fn forward(&mut self, params: &ParamVector, x: &[f64]) {
        let spec = &params.spec;
        let (d, c, h) = (spec.input_dim, spec.num_classes, spec.hidden_dim);
        let v = &params.values;
        match spec.kind {
            ModelKind::Logistic => affine(&v[..d * c], &v[d * c..], x, &mut self.logits),
            ModelKind::Mlp => {
                let (w1, rest) = v.split_at(d * h);
                let (b1, rest) = rest.split_at(h);
                let (w2, b2) = rest.split_at(h * c);
                affine(w1, b1, x, &mut self.hidden);
                self.hidden.iter_mut().for_each(|a| *a = a.tanh());
                affine(w2, b2, &self.hidden, &mut self.logits);
            }
        }
    }

    /// Per-sample loss; fills `dlogits` with `softmax - onehot`.
    fn loss_and_dlogits(&mut self, label: usize) -> f64 {
        let lse = log_sum_exp(&self.logits);
        for (g, z) in self.dlogits.iter_mut().zip(&self.logits) {
            *g = (z - lse).exp();
        }
        self.dlogits[label] -= 1.0;
        lse - self.logits[label]
    }

    /// Accumulate `scale * dL/dθ` for the current sample into `grad`.
    fn backward(&mut self, params: &ParamVector, x: &[f64], scale: f64, grad: &mut [f64]) {
        let spec = &params.spec;
        let (d, c, h) = (spec.input_dim, spec.num_classes, spec.hidden_dim);
        match spec.kind {
            ModelKind::Logistic => {
                let (gw, gb) = grad.split_at_mut(d * c);
                for k in 0..c {
                    let dz = scale * self.dlogits[k];
                    gb[k] += dz;
                    for (g, xi) in gw[k * d..(k + 1) * d].iter_mut().zip(x) {
                        *g += dz * xi;
                    }
                }
            }
            ModelKind::Mlp => {
                let w2 = &params.values[d * h + h..d * h + h + h * c];
                let (gw1, rest) = grad.split_at_mut(d * h);
                let (gb1, rest) = rest.split_at_mut(h);
                let (gw2, gb2) = rest.split_at_mut(h * c);
                self.dhidden.iter_mut().for_each(|v| *v = 0.0);
                for k in 0..c {
                    let dz = scale * self.dlogits[k];
                    gb2[k] += dz;
                    let row = &w2[k * h..(k + 1) * h];
                    for j in 0..h {
                        gw2[k * h + j] += dz * self.hidden[j];
                        self.dhidden[j] += dz * row[j];
                    }
                }
                for j in 0..h {
                    let da = self.dhidden[j] * (1.0 - self.hidden[j] * self.hidden[j]);
                    gb1[j] += da;
                    for (g, xi) in gw1[j * d..(j + 1) * d].iter_mut().zip(x) {
                        *g += da * xi;
                    }
                }
            }
        }
    }
}

/// Mean cross-entropy of `params` on `batch`.
pub fn loss(params: &ParamVector, batch: &Batch) -> Result<f64> {
    check(params, batch)?;
    let mut pass = Pass::new(&params.spec);
    let mut total = 0.0;
    for i in 0..batch.len() {
        pass.forward(params, batch.row(i));
        total += log_sum_exp(&pass.logits) - pass.logits[batch.label(i)];
    }
    Ok(total / batch.len() as f64)
}

/// Mean cross-entropy and its analytic gradient.
pub fn loss_grad(params: &ParamVector, batch: &Batch) -> Result<(f64, ParamVector)> {
    check(params, batch)?;
    let mut pass = Pass::new(&params.spec);
    let mut grad = ParamVector::zeros(params.spec);
    let scale = 1.0 / batch.len() as f64;
    let mut total = 0.0;
    for i in 0..batch.len() {
        let x = batch.row(i);
        pass.forward(params, x);
        total += pass.loss_and_dlogits(batch.label(i));
        pass.backward(params, x, scale, &mut grad.values);
    }
    Ok((total * scale, grad))
}

/// Predicted class of one sample; ties go to the lowest class index.
pub fn predict(params: &ParamVector, x: &[f64]) -> usize {
    let mut pass = Pass::new(&params.spec);
    pass.forward(params, x);
    argmax(&pass.logits)
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Fraction of samples whose argmax prediction equals the label.
pub fn accuracy(params: &ParamVector, batch: &Batch) -> Result<f64> {
    check(params, batch)?;
    let mut pass = Pass::new(&params.spec);
    let mut correct = 0usize;
    for i in 0..batch.len() {
        pass.forward(params, batch.row(i));
        if argmax(&pass.logits) == batch.label(i) {
            correct += 1;
        }
    }
    Ok(correct as f64 / batch.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand_distr::{Distribution, Normal};

    fn random_batch(spec: &ModelSpec, n: usize, seed: u64) -> Batch {
        let mut rng = rng::stream(seed, &[99]);
        let normal = Normal::new(0.0, 1.5).unwrap();
        let features = (0..n * spec.input_dim)
            .map(|_| normal.sample(&mut rng))
            .collect();
        let labels = (0..n)
            .map(|_| rng.random_range(0..spec.num_classes))
            .collect();
        Batch::new(spec.input_dim, features, labels).unwrap()
    }

    /// Softmax cross-entropy evaluated sample by sample with explicit loops,
    /// independent of the `Pass` machinery.
    fn naive_loss(params: &ParamVector, batch: &Batch) -> f64 {
        let s = params.spec;
        let v = &params.values;
        let mut total = 0.0;
        for i in 0..batch.len() {
            let x = batch.row(i);
            let logits: Vec<f64> = match s.kind {
                ModelKind::Logistic => (0..s.num_classes)
                    .map(|k| {
                        let mut z = v[s.input_dim * s.num_classes + k];
                        for j in 0..s.input_dim {
                            z += v[k * s.input_dim + j] * x[j];
                        }
                        z
                    })
                    .collect(),
                ModelKind::Mlp => {
                    let (d, h, c) = (s.input_dim, s.hidden_dim, s.num_classes);
                    let hid: Vec<f64> = (0..h)
                        .map(|j| {
                            let mut a = v[d * h + j];
                            for m in 0..d {
                                a += v[j * d + m] * x[m];
                            }
                            a.tanh()
                        })
                        .collect();
                    (0..c)
                        .map(|k| {
                            let mut z = v[d * h + h + h * c + k];
                            for j in 0..h {
                                z += v[d * h + h + k * h + j] * hid[j];
                            }
                            z
                        })
                        .collect()
                }
            };
            let denom: f64 = logits.iter().map(|z| z.exp()).sum();
            let p = logits[batch.label(i)].exp() / denom;
            total += -p.ln();
        }
        total / batch.len() as f64
    }

    fn specs() -> Vec<ModelSpec> {
        vec![
            ModelSpec::logistic(3, 2).with_init_scale(1.0),
            ModelSpec::logistic(5, 4).with_init_scale(1.0),
            ModelSpec::mlp(4, 5, 3).with_init_scale(1.0),
        ]
    }

    #[test]
    fn parameter_counts() {
        assert_eq!(ModelSpec::logistic(3, 2).num_params(), 8);
        assert_eq!(ModelSpec::mlp(4, 5, 3).num_params(), 43);
        assert_eq!(init_params(&ModelSpec::logistic(3, 2), 1).unwrap().len(), 8);
        assert_eq!(init_params(&ModelSpec::mlp(4, 5, 3), 1).unwrap().len(), 43);
    }

    #[test]
    fn init_is_deterministic_with_zero_biases() {
        let spec = ModelSpec::mlp(4, 5, 3);
        let a = init_params(&spec, 7).unwrap();
        assert_eq!(a, init_params(&spec, 7).unwrap());
        assert_ne!(a, init_params(&spec, 8).unwrap());
        assert!(a.values[20..25].iter().all(|&b| b == 0.0));
        assert!(a.values[40..43].iter().all(|&b| b == 0.0));
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(matches!(
            init_params(&ModelSpec::logistic(0, 2), 0),
            Err(Error::Config(_))
        ));
        assert!(init_params(&ModelSpec::logistic(3, 1), 0).is_err());
        assert!(init_params(&ModelSpec::mlp(3, 0, 2), 0).is_err());
    }

    #[test]
    fn zero_params_give_uniform_loss() {
        for (c, expected) in [(2usize, 2f64.ln()), (10, 10f64.ln())] {
            let spec = ModelSpec::logistic(6, c);
            let batch = random_batch(&spec, 17, c as u64);
            let l = loss(&ParamVector::zeros(spec), &batch).unwrap();
            assert!((l - expected).abs() < 1e-12, "{l} vs {expected}");
        }
    }

    #[test]
    fn loss_matches_naive_oracle() {
        for (k, spec) in specs().into_iter().enumerate() {
            let p = init_params(&spec, k as u64).unwrap();
            let batch = random_batch(&spec, 23, 40 + k as u64);
            let fast = loss(&p, &batch).unwrap();
            let slow = naive_loss(&p, &batch);
            assert!((fast - slow).abs() < 1e-12 * slow.max(1.0));
            let (l2, _) = loss_grad(&p, &batch).unwrap();
            assert!((l2 - fast).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for (k, spec) in specs().into_iter().enumerate() {
            for trial in 0..5u64 {
                let p = init_params(&spec, 100 + trial).unwrap();
                let batch = random_batch(&spec, 11, trial * 7 + k as u64);
                let (_, g) = loss_grad(&p, &batch).unwrap();
                let err = crate::testutil::max_rel_fd_error(&p.values, &g.values, 1e-5, |v| {
                    loss(
                        &ParamVector {
                            spec,
                            values: v.to_vec(),
                        },
                        &batch,
                    )
                    .unwrap()
                });
                assert!(err < 1e-6, "{spec:?}: {err}");
            }
        }
    }

    #[test]
    fn duplicated_rows_leave_gradient_unchanged() {
        let spec = ModelSpec::mlp(4, 5, 3).with_init_scale(0.7);
        let p = init_params(&spec, 3).unwrap();
        let batch = random_batch(&spec, 9, 4);
        let doubled: Vec<usize> = (0..9).flat_map(|i| [i, i]).collect();
        let (l1, g1) = loss_grad(&p, &batch).unwrap();
        let (l2, g2) = loss_grad(&p, &batch.select(&doubled)).unwrap();
        assert!((l1 - l2).abs() < 1e-14);
        for (a, b) in g1.values.iter().zip(&g2.values) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn row_permutation_invariance() {
        let spec = ModelSpec::logistic(5, 4).with_init_scale(1.0);
        let p = init_params(&spec, 5).unwrap();
        let batch = random_batch(&spec, 30, 6);
        let mut order: Vec<usize> = (0..30).collect();
        order.shuffle(&mut rng::stream(1, &[]));
        let shuffled = batch.select(&order);
        let (l1, g1) = loss_grad(&p, &batch).unwrap();
        let (l2, g2) = loss_grad(&p, &shuffled).unwrap();
        assert!((l1 - l2).abs() < 1e-12);
        for (a, b) in g1.values.iter().zip(&g2.values) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(
            accuracy(&p, &batch).unwrap(),
            accuracy(&p, &shuffled).unwrap()
        );
    }

    #[test]
    fn separable_training_drives_gradient_to_zero() {
        // Two well-separated clusters on the first axis.
        let spec = ModelSpec::logistic(2, 2);
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for i in 0..20 {
            let off = i as f64 * 0.05;
            features.extend_from_slice(&[2.0 + off, off]);
            labels.push(0);
            features.extend_from_slice(&[-2.0 - off, -off]);
            labels.push(1);
        }
        let batch = Batch::new(2, features, labels).unwrap();
        let mut p = ParamVector::zeros(spec);
        let (_, g0) = loss_grad(&p, &batch).unwrap();
        for _ in 0..3000 {
            let (_, g) = loss_grad(&p, &batch).unwrap();
            p.sgd_step(0.5, &g);
        }
        let (l, g) = loss_grad(&p, &batch).unwrap();
        assert!(g.norm() < 1e-3 * g0.norm(), "{} vs {}", g.norm(), g0.norm());
        assert!(l < 1e-3);
        assert_eq!(accuracy(&p, &batch).unwrap(), 1.0);
    }

    #[test]
    fn zero_params_predict_class_zero() {
        let spec = ModelSpec::logistic(3, 2);
        let batch = random_batch(&spec, 50, 12);
        let zeros = batch.labels().iter().filter(|&&y| y == 0).count() as f64 / 50.0;
        assert_eq!(accuracy(&ParamVector::zeros(spec), &batch).unwrap(), zeros);
    }

    #[test]
    fn random_params_are_near_chance_on_balanced_data() {
        let spec = ModelSpec::logistic(8, 10).with_init_scale(1.0);
        let n = 5000;
        let mut rng = rng::stream(77, &[]);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let features = (0..n * 8).map(|_| normal.sample(&mut rng)).collect();
        let labels = (0..n).map(|i| i % 10).collect();
        let batch = Batch::new(8, features, labels).unwrap();
        let mut accs = Vec::new();
        for seed in 0..20 {
            accs.push(accuracy(&init_params(&spec, seed).unwrap(), &batch).unwrap());
        }
        let mean = accs.iter().sum::<f64>() / accs.len() as f64;
        assert!((mean - 0.1).abs() < 0.05, "mean accuracy {mean}");
    }

    #[test]
    fn dimension_mismatch_is_contract_error() {
        let p = ParamVector::zeros(ModelSpec::logistic(3, 2));
        let batch = Batch::new(4, vec![0.0; 4], vec![0]).unwrap();
        assert!(matches!(loss(&p, &batch), Err(Error::Contract(_))));
        let bad_label = Batch::new(3, vec![0.0; 3], vec![5]).unwrap();
        assert!(matches!(accuracy(&p, &bad_label), Err(Error::Contract(_))));
    }

    #[test]
    fn batch_rejects_bad_shapes() {
        assert!(Batch::new(2, vec![0.0; 3], vec![0, 1]).is_err());
        assert!(Batch::new(2, vec![], vec![]).is_err());
        assert!(Batch::new(1, vec![f64::NAN], vec![0]).is_err());
    }

    #[test]
    fn large_logits_stay_finite() {
        let spec = ModelSpec::logistic(1, 3);
        let p = ParamVector::from_values(spec, vec![800.0, -800.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let batch = Batch::new(1, vec![1.0, -1.0], vec![1, 0]).unwrap();
        let (l, g) = loss_grad(&p, &batch).unwrap();
        assert!(l.is_finite() && l > 0.0);
        assert!(g.is_finite());
    }
}
