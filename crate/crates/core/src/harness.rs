//! Training and comparison harness: trains identical networks under each
//! loss on the same data and seed, records per-epoch curves, and exports
//! comparison artifacts.
//!
//! Hold-everything-fixed contract: within a bench every cell with the same
//! seed shares initial weights, batch order and split; only the loss
//! differs. All randomness derives from the config seed and never from the
//! loss, so the contract holds by construction.

use crate::data::Dataset;
use crate::losses::{LossError, LossSpec};
use crate::network::{Activation, Network, NetworkError, OutputHead};
use crate::optim::{OptimError, OptimizerState};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Optim(#[from] OptimError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkDesc {
    pub layer_sizes: Vec<usize>,
    pub hidden_activation: Activation,
    pub output_head: OutputHead,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub loss: LossSpec,
    pub optimizer: OptimizerState,
    pub batch_size: usize,
    pub epochs: usize,
    /// Fixed step budget per epoch with wraparound; `None` runs one full
    /// pass (ceil(N / batch_size) steps).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps_per_epoch: Option<usize>,
    pub seed: u64,
    pub network: NetworkDesc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub train_loss: f64,
    pub train_acc: f64,
    pub test_acc: f64,
    pub grad_norm_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: TrainConfig,
    pub epochs: Vec<EpochStats>,
    pub final_train_acc: f64,
    pub final_test_acc: f64,
    pub wall_time_secs: f64,
    /// Epoch index at which a non-finite loss or gradient appeared; the run
    /// stops there and keeps the curves recorded so far.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diverged_at: Option<usize>,
}

impl RunRecord {
    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some()
    }
}

fn validate(
    config: &TrainConfig,
    train_ds: &Dataset,
    test_ds: &Dataset,
) -> Result<(), HarnessError> {
    config.loss.validate()?;
    if config.epochs == 0 {
        return Err(HarnessError::Config("epochs must be at least 1".into()));
    }
    if config.batch_size == 0 || config.batch_size > train_ds.len() {
        return Err(HarnessError::Config(format!(
            "batch_size {} must lie in [1, {}]",
            config.batch_size,
            train_ds.len()
        )));
    }
    if config.steps_per_epoch == Some(0) {
        return Err(HarnessError::Config("steps_per_epoch must be positive".into()));
    }
    let sizes = &config.network.layer_sizes;
    if sizes.first() != Some(&train_ds.feature_dim()) {
        return Err(HarnessError::ShapeMismatch(format!(
            "network input {:?} vs feature dimension {}",
            sizes.first(),
            train_ds.feature_dim()
        )));
    }
    if test_ds.feature_dim() != train_ds.feature_dim() {
        return Err(HarnessError::ShapeMismatch(
            "train/test feature dimensions differ".into(),
        ));
    }
    let classes = train_ds.class_count;
    let covered = match config.network.output_head {
        OutputHead::Sigmoid => classes == 2,
        OutputHead::Softmax => sizes.last() == Some(&classes),
    };
    if !covered {
        return Err(HarnessError::ShapeMismatch(format!(
            "output layer {:?} does not cover {} classes",
            sizes.last(),
            classes
        )));
    }
    Ok(())
}

fn accuracy(net: &Network, ds: &Dataset) -> Result<f64, NetworkError> {
    let mut hits = 0usize;
    for (x, &label) in ds.features.iter().zip(&ds.labels) {
        if net.predict_class(x)? == label {
            hits += 1;
        }
    }
    Ok(hits as f64 / ds.len() as f64)
}

/// Trains one network under one loss. Deterministic per config: init,
/// shuffling and batching all derive from `config.seed`.
pub fn train(
    config: &TrainConfig,
    train_ds: &Dataset,
    test_ds: &Dataset,
) -> Result<RunRecord, HarnessError> {
    validate(config, train_ds, test_ds)?;
    let start = Instant::now();
    let desc = &config.network;
    let mut net = Network::init(
        &desc.layer_sizes,
        desc.hidden_activation,
        desc.output_head,
        config.seed,
    )?;
    let mut optimizer = OptimizerState::new(
        config.optimizer.kind,
        config.optimizer.learning_rate,
        config.optimizer.beta1,
        config.optimizer.beta2,
        config.optimizer.epsilon,
    )?;
    let samples = train_ds.samples();
    let n = samples.len();
    let steps_per_epoch = config
        .steps_per_epoch
        .unwrap_or_else(|| n.div_ceil(config.batch_size));
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut order: Vec<usize> = (0..n).collect();

    let mut epochs = Vec::with_capacity(config.epochs);
    let mut diverged_at = None;

    'training: for epoch in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut cursor = 0usize;
        let mut loss_sum = 0.0;
        let mut norm_sum = 0.0;
        let mut steps_done = 0usize;
        for _ in 0..steps_per_epoch {
            let batch: Vec<(Vec<f64>, Vec<f64>)> = (0..config.batch_size)
                .map(|k| samples[order[(cursor + k) % n]].clone())
                .collect();
            cursor = (cursor + config.batch_size) % n;
            let (loss, grads) = net.backward(&batch, &config.loss)?;
            if !loss.is_finite() || !grads.is_finite() {
                diverged_at = Some(epoch);
            } else if let Err(err) = optimizer.step(&mut net, &grads) {
                match err {
                    OptimError::NonFiniteGradient => diverged_at = Some(epoch),
                    other => return Err(other.into()),
                }
            }
            if diverged_at.is_some() {
                epochs.push(EpochStats {
                    train_loss: loss,
                    train_acc: accuracy(&net, train_ds)?,
                    test_acc: accuracy(&net, test_ds)?,
                    grad_norm_mean: if steps_done == 0 {
                        0.0
                    } else {
                        norm_sum / steps_done as f64
                    },
                });
                break 'training;
            }
            loss_sum += loss;
            norm_sum += grads.l2_norm();
            steps_done += 1;
        }
        epochs.push(EpochStats {
            train_loss: loss_sum / steps_done as f64,
            train_acc: accuracy(&net, train_ds)?,
            test_acc: accuracy(&net, test_ds)?,
            grad_norm_mean: norm_sum / steps_done as f64,
        });
    }

    let last = epochs.last().expect("at least one epoch");
    Ok(RunRecord {
        config: config.clone(),
        final_train_acc: last.train_acc,
        final_test_acc: last.test_acc,
        wall_time_secs: start.elapsed().as_secs_f64(),
        diverged_at,
        epochs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchCell {
    pub run_id: String,
    pub loss_name: String,
    pub seed: u64,
    pub record: RunRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSummary {
    pub loss_name: String,
    pub mean_test_acc: f64,
    pub min_test_acc: f64,
    pub max_test_acc: f64,
    pub mean_train_acc: f64,
    pub diverged_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchTable {
    /// Loss-major, seed-minor; ordering is by index, never completion time.
    pub cells: Vec<BenchCell>,
    /// Per-loss aggregates ranked by mean final test accuracy, descending.
    pub summaries: Vec<LossSummary>,
}

/// Runs `train` for every (loss, seed) pair with everything else held
/// fixed. Cells execute in parallel; divergence is recorded per cell, not
/// raised.
pub fn bench_losses(
    losses: &[LossSpec],
    base: &TrainConfig,
    train_ds: &Dataset,
    test_ds: &Dataset,
    seeds: &[u64],
) -> Result<BenchTable, HarnessError> {
    if losses.is_empty() || seeds.is_empty() {
        return Err(HarnessError::Config(
            "bench needs at least one loss and one seed".into(),
        ));
    }
    let jobs: Vec<(usize, &LossSpec, u64)> = losses
        .iter()
        .enumerate()
        .flat_map(|(i, loss)| {
            seeds
                .iter()
                .enumerate()
                .map(move |(j, &seed)| (i * seeds.len() + j, loss, seed))
        })
        .collect();
    let cells: Vec<BenchCell> = jobs
        .par_iter()
        .map(|&(index, loss, seed)| {
            let mut config = base.clone();
            config.loss = *loss;
            config.seed = seed;
            let record = train(&config, train_ds, test_ds)?;
            Ok(BenchCell {
                run_id: format!("cell{index:03}-{}-s{seed}", loss.name()),
                loss_name: loss.name(),
                seed,
                record,
            })
        })
        .collect::<Result<_, HarnessError>>()?;

    let mut summaries: Vec<(usize, LossSummary)> = losses
        .iter()
        .enumerate()
        .map(|(i, loss)| {
            let rows: Vec<&BenchCell> = cells
                .iter()
                .skip(i * seeds.len())
                .take(seeds.len())
                .collect();
            let accs: Vec<f64> = rows.iter().map(|c| c.record.final_test_acc).collect();
            let summary = LossSummary {
                loss_name: loss.name(),
                mean_test_acc: accs.iter().sum::<f64>() / accs.len() as f64,
                min_test_acc: accs.iter().cloned().fold(f64::INFINITY, f64::min),
                max_test_acc: accs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                mean_train_acc: rows.iter().map(|c| c.record.final_train_acc).sum::<f64>()
                    / rows.len() as f64,
                diverged_cells: rows.iter().filter(|c| c.record.diverged()).count(),
            };
            (i, summary)
        })
        .collect();
    summaries.sort_by(|(ia, a), (ib, b)| {
        b.mean_test_acc
            .partial_cmp(&a.mean_test_acc)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(ia.cmp(ib))
    });

    Ok(BenchTable {
        cells,
        summaries: summaries.into_iter().map(|(_, s)| s).collect(),
    })
}

fn write_curve_rows<W: Write>(
    w: &mut W,
    run_id: &str,
    loss_name: &str,
    record: &RunRecord,
) -> std::io::Result<()> {
    for (epoch, stats) in record.epochs.iter().enumerate() {
        writeln!(
            w,
            "{run_id},{loss_name},{epoch},{},{},{}",
            stats.train_loss, stats.train_acc, stats.test_acc
        )?;
    }
    Ok(())
}

/// One CSV row per epoch: `run_id,loss_name,epoch,train_loss,train_acc,test_acc`.
pub fn write_run_csv<W: Write>(record: &RunRecord, run_id: &str, mut w: W) -> std::io::Result<()> {
    writeln!(w, "run_id,loss_name,epoch,train_loss,train_acc,test_acc")?;
    write_curve_rows(&mut w, run_id, &record.config.loss.name(), record)
}

/// Full bench curves in the same per-epoch schema, cells in table order.
pub fn write_bench_csv<W: Write>(table: &BenchTable, mut w: W) -> std::io::Result<()> {
    writeln!(w, "run_id,loss_name,epoch,train_loss,train_acc,test_acc")?;
    for cell in &table.cells {
        write_curve_rows(&mut w, &cell.run_id, &cell.loss_name, &cell.record)?;
    }
    Ok(())
}

/// Human-readable ranking of a bench, one loss per line.
pub fn format_summary(table: &BenchTable) -> String {
    let mut out = String::new();
    out.push_str("rank  loss                          mean    min     max     diverged\n");
    for (rank, s) in table.summaries.iter().enumerate() {
        out.push_str(&format!(
            "{:<5} {:<29} {:.4}  {:.4}  {:.4}  {}\n",
            rank + 1,
            s.loss_name,
            s.mean_test_acc,
            s.min_test_acc,
            s.max_test_acc,
            s.diverged_cells
        ));
    }
    out
}
