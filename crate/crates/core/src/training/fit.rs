use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::adam::{AdamConfig, AdamState};
use super::loss::{bce_grad, bce_sum};
use super::TrainError;
use crate::nn::{AutoencoderModel, Tensor3, DEFAULT_MAX_NORM};
use crate::rng::{derive_seed, CounterRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    #[default]
    Bce,
}

fn default_true() -> bool {
    true
}

fn default_max_norm() -> f64 {
    DEFAULT_MAX_NORM
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub window_len: usize,
    #[serde(default = "default_true")]
    pub shuffle_each_epoch: bool,
    #[serde(default)]
    pub loss: LossKind,
    #[serde(default)]
    pub adam: AdamConfig,
    #[serde(default = "default_max_norm")]
    pub max_norm: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 8,
            epochs: 10,
            seed: 0,
            window_len: 16_384,
            shuffle_each_epoch: true,
            loss: LossKind::Bce,
            adam: AdamConfig::default(),
            max_norm: DEFAULT_MAX_NORM,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, downsampling_factor: usize) -> Result<(), TrainError> {
        let bad = |m: String| Err(TrainError::InvalidConfig(m));
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1".into());
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        if self.window_len == 0 || !self.window_len.is_multiple_of(downsampling_factor) {
            return bad(format!(
                "window_len {} must be a positive multiple of {downsampling_factor}",
                self.window_len
            ));
        }
        if self.max_norm.is_nan() || self.max_norm <= 0.0 {
            return bad("max_norm must be positive".into());
        }
        let a = self.adam;
        if !(a.lr > 0.0 && (0.0..1.0).contains(&a.beta1) && (0.0..1.0).contains(&a.beta2) && a.epsilon > 0.0) {
            return bad("invalid Adam hyperparameters".into());
        }
        Ok(())
    }
}

/// A normalized noisy window and its normalized clean target.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainPair {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
}

/// Cuts aligned signals into non-overlapping `window_len` pairs; a trailing
/// remainder shorter than one window is dropped.
pub fn make_windows(input: &[f64], target: &[f64], window_len: usize) -> Vec<TrainPair> {
    assert_eq!(input.len(), target.len(), "input and target must be aligned");
    input
        .chunks_exact(window_len)
        .zip(target.chunks_exact(window_len))
        .map(|(i, t)| TrainPair {
            input: i.to_vec(),
            target: t.to_vec(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LossCurve {
    pub records: Vec<EpochRecord>,
}

impl LossCurve {
    /// `epoch,train_loss,val_loss`; the validation column is empty when
    /// there is no validation set.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,val_loss\n");
        for r in &self.records {
            let val = r.val_loss.map(|v| v.to_string()).unwrap_or_default();
            writeln!(out, "{},{},{}", r.epoch, r.train_loss, val).unwrap();
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("loss curve serializes") + "\n"
    }

    pub fn train_losses(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.train_loss).collect()
    }
}

/// Reported to the observer after every optimizer step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub epoch: usize,
    pub batch: usize,
    pub step: u64,
    pub loss: f64,
}

fn check_pairs(pairs: &[TrainPair], window_len: usize) -> Result<(), TrainError> {
    for p in pairs {
        if p.input.len() != window_len || p.target.len() != window_len {
            return Err(TrainError::InvalidConfig(format!(
                "pair of lengths {}/{} does not match window_len {window_len}",
                p.input.len(),
                p.target.len()
            )));
        }
    }
    Ok(())
}

fn batch_tensors(pairs: &[&TrainPair]) -> Result<(Tensor3, Vec<f64>), TrainError> {
    let inputs: Vec<&[f64]> = pairs.iter().map(|p| p.input.as_slice()).collect();
    let x = Tensor3::from_signals(&inputs)?;
    let target = pairs.iter().flat_map(|p| p.target.iter().copied()).collect();
    Ok((x, target))
}

/// Mean elementwise BCE of the model over `pairs`, evaluated in batches.
pub fn evaluate_bce(model: &AutoencoderModel, pairs: &[TrainPair], batch_size: usize) -> Result<f64, TrainError> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for chunk in pairs.chunks(batch_size.max(1)) {
        let refs: Vec<&TrainPair> = chunk.iter().collect();
        let (x, target) = batch_tensors(&refs)?;
        let (y, _) = model.forward(&x)?;
        sum += bce_sum(&target, y.data());
        count += target.len();
    }
    Ok(sum / count.max(1) as f64)
}

pub fn fit(
    model: AutoencoderModel,
    train: &[TrainPair],
    val: &[TrainPair],
    cfg: &TrainConfig,
) -> Result<(AutoencoderModel, LossCurve), TrainError> {
    fit_with_observer(model, train, val, cfg, |_, _| {})
}

/// Minibatch training: shuffle, forward, BCE, backward, Adam step, max-norm
/// projection. `observer` sees the model after every projected step.
pub fn fit_with_observer<F>(
    mut model: AutoencoderModel,
    train: &[TrainPair],
    val: &[TrainPair],
    cfg: &TrainConfig,
    mut observer: F,
) -> Result<(AutoencoderModel, LossCurve), TrainError>
where
    F: FnMut(&StepInfo, &AutoencoderModel),
{
    cfg.validate(model.arch().downsampling_factor())?;
    if train.is_empty() {
        return Err(TrainError::EmptyTrainSet);
    }
    check_pairs(train, cfg.window_len)?;
    check_pairs(val, cfg.window_len)?;

    let mut adam = AdamState::new(&model.parameters(), cfg.adam);
    let mut curve = LossCurve::default();
    let mut order: Vec<usize> = (0..train.len()).collect();

    for epoch in 1..=cfg.epochs {
        if cfg.shuffle_each_epoch {
            order = (0..train.len()).collect();
            CounterRng::new(derive_seed(cfg.seed, epoch as u64)).shuffle(&mut order);
        }
        let mut loss_sum = 0.0;
        let mut elements = 0usize;
        for (batch, idx) in order.chunks(cfg.batch_size).enumerate() {
            let refs: Vec<&TrainPair> = idx.iter().map(|&i| &train[i]).collect();
            let (x, target) = batch_tensors(&refs)?;
            let (y, cache) = model.forward(&x)?;
            let batch_sum = bce_sum(&target, y.data());
            if !batch_sum.is_finite() {
                return Err(TrainError::NonFiniteLoss { epoch, batch });
            }
            let grad = bce_grad(&target, y.data())?;
            let (b, l, c) = y.shape();
            let grads = model.backward(&cache, &Tensor3::from_raw(grad, b, l, c))?;
            if grads.slices().iter().any(|g| g.iter().any(|v| !v.is_finite())) {
                return Err(TrainError::NonFiniteLoss { epoch, batch });
            }
            adam.step(&mut model.parameters_mut(), &grads.slices())?;
            model.apply_max_norm(cfg.max_norm);
            if model.parameters().iter().any(|p| p.iter().any(|v| !v.is_finite())) {
                return Err(TrainError::NonFiniteLoss { epoch, batch });
            }

            loss_sum += batch_sum;
            elements += target.len();
            let info = StepInfo {
                epoch,
                batch,
                step: adam.t,
                loss: batch_sum / target.len() as f64,
            };
            observer(&info, &model);
        }
        let train_loss = loss_sum / elements as f64;
        let val_loss = if val.is_empty() {
            None
        } else {
            let v = evaluate_bce(&model, val, cfg.batch_size)?;
            if !v.is_finite() {
                return Err(TrainError::NonFiniteLoss { epoch, batch: 0 });
            }
            Some(v)
        };
        log::info!(
            "epoch {epoch}/{}: train {train_loss:.6} val {}",
            cfg.epochs,
            val_loss.map_or("-".to_string(), |v| format!("{v:.6}"))
        );
        curve.records.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
        });
    }
    Ok((model, curve))
}
