//! Mini-batch training with validation-driven model selection.
//!
//! Updates use Adam. Each epoch reshuffles the training rows with a seed
//! derived from the run seed and the epoch number; dropout masks come from a
//! second per-epoch stream. Validation accuracy selects the returned
//! parameters, and training stops after `patience` epochs without a strict
//! improvement.

mod bench;
mod metrics;

use std::path::Path;
use std::time::Instant;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use bench::{bench_epoch_time, linear_fit, BenchReport, BenchRow};
pub use metrics::{classification_metrics, Metrics};

use crate::encoder::{forward, loss_and_grads, predict, EncoderConfig, EncoderParams};
use crate::error::{Error, Result};
use crate::hetgraph::io::Split;
use crate::precompute::GroupTensor;
use crate::seed::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 3e-3,
            batch_size: 10_000,
            max_epochs: 200,
            patience: 30,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("lr must be a finite nonnegative number, got {}", self.lr)));
        }
        if self.batch_size == 0 || self.max_epochs == 0 || self.patience == 0 {
            return Err(Error::Config("batch_size, max_epochs and patience must be positive".into()));
        }
        if self.patience > self.max_epochs {
            return Err(Error::Config(format!(
                "patience {} exceeds max_epochs {}",
                self.patience, self.max_epochs
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub valid_metric: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: EncoderParams<f32>,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_valid: f64,
}

pub(crate) struct Adam {
    m: EncoderParams<f32>,
    v: EncoderParams<f32>,
    t: i32,
    lr: f32,
}

impl Adam {
    const BETA1: f32 = 0.9;
    const BETA2: f32 = 0.999;
    const EPS: f32 = 1e-8;

    pub(crate) fn new(params: &EncoderParams<f32>, lr: f64) -> Self {
        Self {
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
            lr: lr as f32,
        }
    }

    fn step(&mut self, params: &mut EncoderParams<f32>, grads: &EncoderParams<f32>) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        let blocks = params
            .blocks_mut()
            .into_iter()
            .zip(grads.blocks())
            .zip(self.m.blocks_mut())
            .zip(self.v.blocks_mut());
        for (((p, g), m), v) in blocks {
            for i in 0..p.len() {
                m[i] = Self::BETA1 * m[i] + (1.0 - Self::BETA1) * g[i];
                v[i] = Self::BETA2 * v[i] + (1.0 - Self::BETA2) * g[i] * g[i];
                p[i] -= self.lr * (m[i] / c1) / ((v[i] / c2).sqrt() + Self::EPS);
            }
        }
    }
}

/// Rows `idx` of the first `iterations` slabs of every group.
pub(crate) fn gather(groups: &[GroupTensor], idx: &[usize], iterations: usize) -> Vec<Vec<Array2<f32>>> {
    groups
        .iter()
        .map(|g| g.slabs[..iterations].iter().map(|s| s.select(Axis(0), idx)).collect())
        .collect()
}

pub(crate) fn check_groups(groups: &[GroupTensor], rows: usize) -> Result<usize> {
    let first = groups
        .first()
        .ok_or_else(|| Error::Config("no groups to train on".into()))?;
    let k = first.iterations();
    if k == 0 {
        return Err(Error::Config("groups hold no iteration slabs".into()));
    }
    for g in groups {
        if g.iterations() != k || g.rows() != rows {
            return Err(Error::shape(
                format!("group `{}`", g.relation),
                (rows, k),
                (g.rows(), g.iterations()),
            ));
        }
    }
    Ok(k)
}

fn class_labels(labels: &[u32], idx: &[usize], num_classes: usize) -> Result<Vec<usize>> {
    idx.iter()
        .map(|&i| {
            let y = labels[i];
            if (y as usize) < num_classes {
                Ok(y as usize)
            } else {
                Err(Error::InvalidLabel {
                    row: i,
                    label: y,
                    num_classes,
                })
            }
        })
        .collect()
}

/// One pass over `train_idx`; returns the row-weighted mean loss.
#[allow(clippy::too_many_arguments)]
pub(crate) fn run_epoch(
    params: &mut EncoderParams<f32>,
    adam: &mut Adam,
    groups: &[GroupTensor],
    labels: &[usize],
    train_idx: &[usize],
    iterations: usize,
    enc_cfg: &EncoderConfig,
    train_cfg: &TrainConfig,
    epoch: usize,
) -> Result<f64> {
    let epoch_bytes = (epoch as u64).to_le_bytes();
    let mut order: Vec<usize> = (0..train_idx.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(
        train_cfg.seed,
        &[b"shuffle", &epoch_bytes],
    )));
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(derive_seed(train_cfg.seed, &[b"dropout", &epoch_bytes]));
    let mut total = 0.0;
    for chunk in order.chunks(train_cfg.batch_size) {
        let rows: Vec<usize> = chunk.iter().map(|&o| train_idx[o]).collect();
        let ys: Vec<usize> = chunk.iter().map(|&o| labels[o]).collect();
        let batch = gather(groups, &rows, iterations);
        let (loss, grads) = loss_and_grads(params, enc_cfg, &batch, &ys, &mut dropout_rng)?;
        adam.step(params, &grads);
        total += loss as f64 * rows.len() as f64;
    }
    if !params.is_finite() {
        return Err(Error::NonFinite(format!("parameters after epoch {epoch}")));
    }
    Ok(total / train_idx.len() as f64)
}

/// Eval-mode class predictions for `idx`, in order.
pub fn predict_rows(
    params: &EncoderParams<f32>,
    enc_cfg: &EncoderConfig,
    groups: &[GroupTensor],
    idx: &[usize],
    batch_size: usize,
) -> Result<Vec<usize>> {
    let k = check_groups(groups, groups.first().map_or(0, |g| g.rows()))?;
    if let Some(&bad) = idx.iter().find(|&&i| i >= groups[0].rows()) {
        return Err(Error::Config(format!("row {bad} out of range")));
    }
    let mut unused = ChaCha8Rng::seed_from_u64(0);
    let mut out = Vec::with_capacity(idx.len());
    for chunk in idx.chunks(batch_size.max(1)) {
        let logits = forward(params, enc_cfg, &gather(groups, chunk, k), false, &mut unused)?;
        out.extend(predict(&logits));
    }
    Ok(out)
}

pub fn evaluate(
    params: &EncoderParams<f32>,
    enc_cfg: &EncoderConfig,
    groups: &[GroupTensor],
    labels: &[u32],
    idx: &[usize],
) -> Result<Metrics> {
    let truth = class_labels(labels, idx, enc_cfg.num_classes)?;
    let pred = predict_rows(params, enc_cfg, groups, idx, 10_000)?;
    Ok(classification_metrics(&truth, &pred))
}

pub fn train(
    groups: &[GroupTensor],
    labels: &[u32],
    split: &Split,
    enc_cfg: &EncoderConfig,
    train_cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    train_cfg.validate()?;
    enc_cfg.validate()?;
    let rows = labels.len();
    let k = check_groups(groups, rows)?;
    split.validate(rows)?;
    if split.train.is_empty() {
        return Err(Error::Config("training split is empty".into()));
    }
    let train_y = class_labels(labels, &split.train, enc_cfg.num_classes)?;
    class_labels(labels, &split.valid, enc_cfg.num_classes)?;
    class_labels(labels, &split.test, enc_cfg.num_classes)?;

    let dims: Vec<usize> = groups.iter().map(|g| g.dim()).collect();
    let mut params = EncoderParams::<f32>::init(enc_cfg, &dims, k, derive_seed(train_cfg.seed, &[b"init"]))?;
    let mut adam = Adam::new(&params, train_cfg.lr);
    let mut best = params.clone();
    let mut best_valid = f64::NEG_INFINITY;
    let mut best_epoch = 0;
    let mut since_best = 0;
    let mut history = Vec::new();

    for epoch in 1..=train_cfg.max_epochs {
        let started = Instant::now();
        let train_loss = run_epoch(
            &mut params,
            &mut adam,
            groups,
            &train_y,
            &split.train,
            k,
            enc_cfg,
            train_cfg,
            epoch,
        )?;
        let valid_metric = if split.valid.is_empty() {
            -train_loss
        } else {
            evaluate(&params, enc_cfg, groups, labels, &split.valid)?.accuracy
        };
        history.push(EpochRecord {
            epoch,
            train_loss,
            valid_metric,
            seconds: started.elapsed().as_secs_f64(),
        });
        log::debug!("epoch {epoch}: loss {train_loss:.5} valid {valid_metric:.4}");
        if valid_metric > best_valid {
            best_valid = valid_metric;
            best_epoch = epoch;
            best = params.clone();
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= train_cfg.patience {
                break;
            }
        }
    }
    Ok(TrainOutcome {
        params: best,
        history,
        best_epoch,
        best_valid,
    })
}

/// Writes `epoch,train_loss,valid_metric,seconds` rows.
pub fn write_history_csv(path: &Path, history: &[EpochRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Format(e.to_string()))?;
    for r in history {
        w.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
