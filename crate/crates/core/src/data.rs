//! Non-IID synthetic federations.
//!
//! Each client `k` gets its own linear labelling model and feature
//! distribution. With `alpha` controlling how far client models wander from a
//! shared base model and `beta` how far client feature means wander:
//!
//! ```text
//! u_k ~ N(0, alpha)         W_k = W_0 + u_k + sqrt(alpha)·Z    (Z iid N(0,1))
//! B_k ~ N(0, beta)          v_k = B_k + sqrt(beta)·Z'
//! x   ~ N(v_k, diag(j^-1.2))
//! y   = argmax(W_k x + b_k + noise)
//! ```
//!
//! so `alpha = beta = 0` makes every client sample from one generating model.
//! Sample counts are log-uniform in `[samples_min, samples_max]` and every
//! client splits 80/10/10 into train/test/validation.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Batch;
use crate::rng;
use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub num_clients: usize,
    pub input_dim: usize,
    pub num_classes: usize,
    /// Spread of client labelling models around the shared model.
    pub alpha: f64,
    /// Spread of client feature means.
    pub beta: f64,
    pub samples_min: usize,
    pub samples_max: usize,
    /// 0 disables; in (0, 1] draws per-client class proportions from a
    /// symmetric Dirichlet with concentration `(1 - skew) / skew` and keeps
    /// samples by rejection.
    pub label_skew: f64,
    /// Std of Gaussian noise added to the logits before the argmax.
    pub label_noise: f64,
    /// Fraction of each client's validation split copied into the
    /// server-held pool.
    pub server_val_fraction: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            num_clients: 30,
            input_dim: 20,
            num_classes: 5,
            alpha: 1.0,
            beta: 1.0,
            samples_min: 20,
            samples_max: 400,
            label_skew: 0.0,
            label_noise: 0.0,
            server_val_fraction: 0.1,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.num_clients < 2 {
            return fail("num_clients must be >= 2");
        }
        if self.input_dim == 0 {
            return fail("input_dim must be >= 1");
        }
        if self.num_classes < 2 {
            return fail("num_classes must be >= 2");
        }
        if self.samples_min > self.samples_max {
            return fail("samples_min must not exceed samples_max");
        }
        if self.samples_min < 10 {
            return fail("samples_min must be >= 10 so every split gets a sample");
        }
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("label_noise", self.label_noise),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!("{name} must be finite and >= 0")));
            }
        }
        if !(0.0..=1.0).contains(&self.label_skew) {
            return fail("label_skew must lie in [0, 1]");
        }
        if !(self.server_val_fraction > 0.0 && self.server_val_fraction <= 1.0) {
            return fail("server_val_fraction must lie in (0, 1]");
        }
        Ok(())
    }
}

/// One client's private data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientShard {
    pub client_id: usize,
    pub train: Batch,
    pub test: Batch,
    pub validation: Batch,
    /// `s_k`: train + test + validation.
    pub sample_count: usize,
    /// `p_k = s_k / Σ s_i` over the whole federation.
    pub weight: f64,
}

/// A generated (or loaded) federation.
#[derive(Debug, Clone, PartialEq)]
pub struct FederatedDataset {
    pub config: SynthConfig,
    pub shards: Vec<ClientShard>,
    /// Pooled copy of part of every client's validation split.
    pub server_validation: Batch,
}

impl FederatedDataset {
    pub fn num_clients(&self) -> usize {
        self.shards.len()
    }

    /// `p_k` indexed by client id.
    pub fn weights(&self) -> Vec<f64> {
        self.shards.iter().map(|s| s.weight).collect()
    }
}

/// Split sizes for `s` samples: (train, test, validation).
pub fn split_sizes(s: usize) -> Result<(usize, usize, usize)> {
    if s < 10 {
        return Err(Error::Config(format!(
            "client with {s} samples cannot be split 80/10/10"
        )));
    }
    let tenth = (s as f64 * 0.1).round() as usize;
    Ok((s - 2 * tenth, tenth, tenth))
}

fn log_uniform_count(rng: &mut impl Rng, lo: usize, hi: usize) -> usize {
    if lo == hi {
        return lo;
    }
    let (a, b) = ((lo as f64).ln(), ((hi + 1) as f64).ln());
    let v = rng.random_range(a..b).exp().floor() as usize;
    v.clamp(lo, hi)
}

struct ClientModel {
    weights: Vec<f64>,
    bias: Vec<f64>,
    feature_mean: Vec<f64>,
    class_props: Option<Vec<f64>>,
}

fn draw_client_model(
    cfg: &SynthConfig,
    base_w: &[f64],
    base_b: &[f64],
    rng: &mut impl Rng,
) -> Result<ClientModel> {
    let (d, c) = (cfg.input_dim, cfg.num_classes);
    let u: f64 = rng.sample::<f64, _>(StandardNormal) * cfg.alpha.sqrt();
    let shift: f64 = rng.sample::<f64, _>(StandardNormal) * cfg.beta.sqrt();
    let mut jitter = |scale: f64| scale * rng.sample::<f64, _>(StandardNormal);
    let weights = base_w
        .iter()
        .map(|w| w + u + jitter(cfg.alpha.sqrt()))
        .collect();
    let bias = base_b
        .iter()
        .map(|b| b + u + jitter(cfg.alpha.sqrt()))
        .collect();
    let feature_mean = (0..d).map(|_| shift + jitter(cfg.beta.sqrt())).collect();
    let class_props = if cfg.label_skew > 0.0 {
        let conc = ((1.0 - cfg.label_skew) / cfg.label_skew).max(1e-3);
        let gamma = Gamma::new(conc, 1.0).map_err(|e| Error::Config(e.to_string()))?;
        let g: Vec<f64> = (0..c).map(|_| gamma.sample(rng).max(1e-300)).collect();
        let sum: f64 = g.iter().sum();
        Some(g.into_iter().map(|v| v / sum).collect())
    } else {
        None
    };
    Ok(ClientModel {
        weights,
        bias,
        feature_mean,
        class_props,
    })
}

fn draw_samples(
    cfg: &SynthConfig,
    model: &ClientModel,
    count: usize,
    rng: &mut impl Rng,
) -> (Vec<f64>, Vec<usize>) {
    let (d, c) = (cfg.input_dim, cfg.num_classes);
    let stds: Vec<f64> = (1..=d).map(|j| (j as f64).powf(-1.2).sqrt()).collect();
    let noise = Normal::new(0.0, cfg.label_noise.max(f64::MIN_POSITIVE)).expect("valid std");
    let max_prop = model
        .class_props
        .as_ref()
        .map(|p| p.iter().copied().fold(0.0, f64::max));
    let mut features = Vec::with_capacity(count * d);
    let mut labels = Vec::with_capacity(count);
    let mut x = vec![0.0; d];
    let mut logits = vec![0.0; c];
    let mut attempts = 0usize;
    while labels.len() < count {
        for j in 0..d {
            x[j] = model.feature_mean[j] + stds[j] * rng.sample::<f64, _>(StandardNormal);
        }
        for (k, z) in logits.iter_mut().enumerate() {
            let row = &model.weights[k * d..(k + 1) * d];
            *z = model.bias[k] + row.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
            if cfg.label_noise > 0.0 {
                *z += noise.sample(rng);
            }
        }
        let y = crate::model::argmax(&logits);
        attempts += 1;
        if let (Some(props), Some(max)) = (&model.class_props, max_prop) {
            // Give up on the skew after enough rejections rather than loop forever.
            let accept = attempts > 1000 * count || rng.random::<f64>() * max < props[y];
            if !accept {
                continue;
            }
        }
        features.extend_from_slice(&x);
        labels.push(y);
    }
    (features, labels)
}

/// Generate a federation. Deterministic given `cfg.seed`.
pub fn generate(cfg: &SynthConfig) -> Result<FederatedDataset> {
    cfg.validate()?;
    let (d, c) = (cfg.input_dim, cfg.num_classes);
    let mut base_rng = rng::stream(cfg.seed, &[0xDA7A]);
    let base_w: Vec<f64> = (0..d * c)
        .map(|_| base_rng.sample(StandardNormal))
        .collect();
    let base_b: Vec<f64> = (0..c).map(|_| base_rng.sample(StandardNormal)).collect();

    let mut drafts = Vec::with_capacity(cfg.num_clients);
    for k in 0..cfg.num_clients {
        let mut rng = rng::stream(cfg.seed, &[0xDA7A, k as u64]);
        let s = log_uniform_count(&mut rng, cfg.samples_min, cfg.samples_max);
        let (n_train, n_test, n_val) = split_sizes(s)?;
        let model = draw_client_model(cfg, &base_w, &base_b, &mut rng)?;
        let (features, labels) = draw_samples(cfg, &model, s, &mut rng);
        let all = Batch::new(d, features, labels)?;
        let idx: Vec<usize> = (0..s).collect();
        let train = all.select(&idx[..n_train]);
        let test = all.select(&idx[n_train..n_train + n_test]);
        let validation = all.select(&idx[n_train + n_test..n_train + n_test + n_val]);
        drafts.push((train, test, validation, s));
    }
    let shards = finish_shards(drafts);
    let server_validation = pool_validation(&shards, cfg.server_val_fraction)?;
    Ok(FederatedDataset {
        config: cfg.clone(),
        shards,
        server_validation,
    })
}

fn finish_shards(drafts: Vec<(Batch, Batch, Batch, usize)>) -> Vec<ClientShard> {
    let total: usize = drafts.iter().map(|d| d.3).sum();
    drafts
        .into_iter()
        .enumerate()
        .map(|(client_id, (train, test, validation, s))| ClientShard {
            client_id,
            train,
            test,
            validation,
            sample_count: s,
            weight: s as f64 / total as f64,
        })
        .collect()
}

fn pool_validation(shards: &[ClientShard], fraction: f64) -> Result<Batch> {
    let parts: Vec<Batch> = shards
        .iter()
        .map(|s| {
            let n = ((s.validation.len() as f64 * fraction).ceil() as usize)
                .clamp(1, s.validation.len());
            s.validation.select(&(0..n).collect::<Vec<_>>())
        })
        .collect();
    Batch::concat(&parts)
}

/// Summary counts over a set of shards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShardStats {
    pub clients: usize,
    pub total_samples: usize,
    pub min_samples: usize,
    pub median_samples: f64,
    pub max_samples: usize,
}

impl ShardStats {
    /// Header for the `Dataset,Clients,Sample` table.
    pub const TABLE_HEADER: &'static str = "Dataset,Clients,Sample";

    pub fn table_row(&self, dataset: &str) -> String {
        format!("{dataset},{},{}", self.clients, self.total_samples)
    }
}

pub fn shard_stats(shards: &[ClientShard]) -> Result<ShardStats> {
    if shards.is_empty() {
        return Err(Error::Contract(
            "shard_stats needs at least one shard".into(),
        ));
    }
    let mut counts: Vec<usize> = shards.iter().map(|s| s.sample_count).collect();
    counts.sort_unstable();
    let n = counts.len();
    let median = if n % 2 == 1 {
        counts[n / 2] as f64
    } else {
        (counts[n / 2 - 1] + counts[n / 2]) as f64 / 2.0
    };
    Ok(ShardStats {
        clients: n,
        total_samples: counts.iter().sum(),
        min_samples: counts[0],
        median_samples: median,
        max_samples: counts[n - 1],
    })
}

// ---------------------------------------------------------------------------
// Directory export / import
// ---------------------------------------------------------------------------

/// Manifest written next to the per-client sample files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema_version: u32,
    pub config: SynthConfig,
    pub input_dim: usize,
    pub num_classes: usize,
    pub total_samples: usize,
    pub server_validation: usize,
    pub clients: Vec<ManifestClient>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestClient {
    pub client_id: usize,
    pub dir: String,
    pub samples: usize,
    pub train: usize,
    pub test: usize,
    pub validation: usize,
}

pub const MANIFEST_FILE: &str = "manifest.json";

fn write_samples(path: &Path, batch: &Batch) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for i in 0..batch.len() {
        let mut line = batch.label(i).to_string();
        for v in batch.row(i) {
            line.push(' ');
            line.push_str(&v.to_string());
        }
        line.push('\n');
        w.write_all(line.as_bytes())
            .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_samples(path: &Path, dim: usize) -> Result<Batch> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_ascii_whitespace();
        let label = fields
            .next()
            .and_then(|f| f.parse::<usize>().ok())
            .ok_or_else(|| Error::parse(path, format!("line {}: bad label", n + 1)))?;
        let before = features.len();
        for f in fields {
            let v: f64 = f
                .parse()
                .map_err(|_| Error::parse(path, format!("line {}: bad value {f:?}", n + 1)))?;
            features.push(v);
        }
        if features.len() - before != dim {
            return Err(Error::parse(
                path,
                format!("line {}: expected {dim} features", n + 1),
            ));
        }
        labels.push(label);
    }
    Batch::new(dim, features, labels).map_err(|e| Error::parse(path, e.to_string()))
}

fn client_dir(id: usize) -> String {
    format!("client_{id:04}")
}

/// Write the federation as `manifest.json` plus one directory per client with
/// `train.txt`, `test.txt` and `validation.txt`, and a pooled
/// `server_validation.txt`.
pub fn export(fed: &FederatedDataset, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut clients = Vec::with_capacity(fed.shards.len());
    for s in &fed.shards {
        let name = client_dir(s.client_id);
        let cdir = dir.join(&name);
        fs::create_dir_all(&cdir).map_err(|e| Error::io(&cdir, e))?;
        write_samples(&cdir.join("train.txt"), &s.train)?;
        write_samples(&cdir.join("test.txt"), &s.test)?;
        write_samples(&cdir.join("validation.txt"), &s.validation)?;
        clients.push(ManifestClient {
            client_id: s.client_id,
            dir: name,
            samples: s.sample_count,
            train: s.train.len(),
            test: s.test.len(),
            validation: s.validation.len(),
        });
    }
    write_samples(&dir.join("server_validation.txt"), &fed.server_validation)?;
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        config: fed.config.clone(),
        input_dim: fed.config.input_dim,
        num_classes: fed.config.num_classes,
        total_samples: clients.iter().map(|c| c.samples).sum(),
        server_validation: fed.server_validation.len(),
        clients,
    };
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| Error::parse(&path, e.to_string()))?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(Error::parse(
            &path,
            format!("unsupported schema_version {}", manifest.schema_version),
        ));
    }
    Ok(manifest)
}

/// Load a federation previously written by [`export`].
pub fn import(dir: &Path) -> Result<FederatedDataset> {
    let manifest = read_manifest(dir)?;
    let d = manifest.input_dim;
    let mut drafts = Vec::with_capacity(manifest.clients.len());
    for (expect_id, c) in manifest.clients.iter().enumerate() {
        if c.client_id != expect_id {
            return Err(Error::parse(
                dir.join(MANIFEST_FILE),
                "client ids must be 0..K in order",
            ));
        }
        let cdir = dir.join(&c.dir);
        let train = read_samples(&cdir.join("train.txt"), d)?;
        let test = read_samples(&cdir.join("test.txt"), d)?;
        let validation = read_samples(&cdir.join("validation.txt"), d)?;
        if train.len() + test.len() + validation.len() != c.samples {
            return Err(Error::parse(&cdir, "sample counts disagree with manifest"));
        }
        drafts.push((train, test, validation, c.samples));
    }
    let server_validation = read_samples(&dir.join("server_validation.txt"), d)?;
    Ok(FederatedDataset {
        config: manifest.config,
        shards: finish_shards(drafts),
        server_validation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{init_params, loss, ModelSpec};

    fn small(seed: u64) -> SynthConfig {
        SynthConfig {
            num_clients: 8,
            input_dim: 5,
            num_classes: 3,
            samples_min: 10,
            samples_max: 80,
            seed,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate(&small(3)).unwrap();
        let b = generate(&small(3)).unwrap();
        assert_eq!(a, b);
        assert_ne!(
            a.shards[0].train,
            generate(&small(4)).unwrap().shards[0].train
        );
    }

    #[test]
    fn weights_sum_to_one_and_splits_partition() {
        let fed = generate(&small(1)).unwrap();
        let sum: f64 = fed.shards.iter().map(|s| s.weight).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        for s in &fed.shards {
            assert!(s.weight > 0.0);
            assert!((10..=80).contains(&s.sample_count));
            let (tr, te, va) = split_sizes(s.sample_count).unwrap();
            assert_eq!(
                (s.train.len(), s.test.len(), s.validation.len()),
                (tr, te, va)
            );
            assert!(te >= 1 && va >= 1);
        }
    }

    #[test]
    fn split_sizes_follow_80_10_10() {
        assert_eq!(split_sizes(10).unwrap(), (8, 1, 1));
        assert_eq!(split_sizes(100).unwrap(), (80, 10, 10));
        assert_eq!(split_sizes(37).unwrap(), (29, 4, 4));
        assert!(matches!(split_sizes(9), Err(Error::Config(_))));
    }

    #[test]
    fn infeasible_configs_rejected() {
        let mut cfg = small(0);
        cfg.samples_min = 5;
        assert!(matches!(generate(&cfg), Err(Error::Config(_))));
        let mut cfg = small(0);
        cfg.num_clients = 1;
        assert!(generate(&cfg).is_err());
        let mut cfg = small(0);
        cfg.samples_max = 9;
        assert!(generate(&cfg).is_err());
    }

    #[test]
    fn server_pool_copies_client_validation_rows() {
        let fed = generate(&small(2)).unwrap();
        let mut offset = 0;
        for s in &fed.shards {
            let n = ((s.validation.len() as f64 * 0.1).ceil() as usize).max(1);
            for i in 0..n {
                assert_eq!(fed.server_validation.row(offset + i), s.validation.row(i));
            }
            offset += n;
        }
        assert_eq!(offset, fed.server_validation.len());
    }

    #[test]
    fn seed_changes_data_but_not_shapes_when_counts_fixed() {
        let mut a = small(5);
        a.samples_min = 40;
        a.samples_max = 40;
        let mut b = a.clone();
        b.seed = 6;
        let (fa, fb) = (generate(&a).unwrap(), generate(&b).unwrap());
        assert_ne!(fa.shards[0].train, fb.shards[0].train);
        for (x, y) in fa.shards.iter().zip(&fb.shards) {
            assert_eq!(x.sample_count, y.sample_count);
            assert_eq!(x.train.len(), y.train.len());
        }
    }

    /// Mean cross-entropy of a model trained on the pooled data, per client.
    fn per_client_loss_variance(cfg: &SynthConfig) -> f64 {
        let fed = generate(cfg).unwrap();
        let spec = ModelSpec::logistic(cfg.input_dim, cfg.num_classes);
        let pooled = Batch::concat(fed.shards.iter().map(|s| &s.train)).unwrap();
        let mut p = init_params(&spec, 0).unwrap();
        for _ in 0..300 {
            let (_, g) = crate::model::loss_grad(&p, &pooled).unwrap();
            p.sgd_step(0.5, &g);
        }
        let losses: Vec<f64> = fed
            .shards
            .iter()
            .map(|s| loss(&p, &s.train).unwrap())
            .collect();
        crate::metrics::population_variance(&losses)
    }

    #[test]
    fn heterogeneity_increases_loss_variance() {
        let mut het = 0.0;
        let mut hom = 0.0;
        for seed in 0..5 {
            let base = SynthConfig {
                num_clients: 30,
                input_dim: 10,
                num_classes: 5,
                samples_min: 30,
                samples_max: 120,
                seed,
                ..SynthConfig::default()
            };
            het += per_client_loss_variance(&base);
            hom += per_client_loss_variance(&SynthConfig {
                alpha: 0.0,
                beta: 0.0,
                ..base
            });
        }
        assert!(het > hom, "heterogeneous {het} vs homogeneous {hom}");
    }

    #[test]
    fn label_skew_concentrates_classes() {
        let mut cfg = small(9);
        cfg.label_skew = 0.95;
        cfg.samples_min = 60;
        cfg.samples_max = 60;
        let fed = generate(&cfg).unwrap();
        // With strong skew most clients are dominated by one class.
        let dominated = fed
            .shards
            .iter()
            .filter(|s| {
                let mut counts = [0usize; 3];
                s.train.labels().iter().for_each(|&y| counts[y] += 1);
                *counts.iter().max().unwrap() as f64 > 0.6 * s.train.len() as f64
            })
            .count();
        assert!(dominated >= 5, "{dominated}");
    }

    #[test]
    fn stats_edge_cases() {
        let fed = generate(&small(1)).unwrap();
        let one = shard_stats(&fed.shards[..1]).unwrap();
        assert_eq!(one.min_samples as f64, one.median_samples);
        assert_eq!(one.max_samples, one.min_samples);
        assert!(shard_stats(&[]).is_err());

        let mut cfg = small(2);
        cfg.samples_min = 50;
        cfg.samples_max = 50;
        let eq = shard_stats(&generate(&cfg).unwrap().shards).unwrap();
        assert_eq!(eq.total_samples, 8 * 50);
        assert_eq!(eq.table_row("Synthetic"), "Synthetic,8,400");
        assert_eq!(ShardStats::TABLE_HEADER, "Dataset,Clients,Sample");
    }

    #[test]
    fn export_import_round_trip() {
        let fed = generate(&small(11)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        export(&fed, dir.path()).unwrap();
        let back = import(dir.path()).unwrap();
        assert_eq!(fed, back);
        let manifest = read_manifest(dir.path()).unwrap();
        assert_eq!(manifest.clients.len(), 8);
        assert_eq!(
            manifest.total_samples,
            shard_stats(&fed.shards).unwrap().total_samples
        );
    }

    #[test]
    fn import_rejects_malformed_lines() {
        let fed = generate(&small(12)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        export(&fed, dir.path()).unwrap();
        fs::write(dir.path().join("client_0000/train.txt"), "1 0.5\n").unwrap();
        assert!(matches!(import(dir.path()), Err(Error::Parse { .. })));
    }
}
