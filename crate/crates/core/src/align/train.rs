//! Seeded mini-batch training with gradient accumulation.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::align::checkpoint::Checkpoint;
use crate::align::loss::LossNormalization;
use crate::align::model::{AlignModel, AlignPair, Gradients, TRAINABLE};
use crate::align::optim::{adamw_step, AdamState, AdamWConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlignHyper {
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub accum_steps: usize,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub seed: u64,
    pub loss_norm: LossNormalization,
}

impl Default for AlignHyper {
    fn default() -> Self {
        let opt = AdamWConfig::default();
        Self {
            lr: opt.lr,
            batch_size: 32,
            epochs: 60,
            accum_steps: 4,
            weight_decay: opt.weight_decay,
            beta1: opt.beta1,
            beta2: opt.beta2,
            eps: opt.eps,
            seed: 0,
            loss_norm: LossNormalization::PerPair,
        }
    }
}

impl AlignHyper {
    pub fn optimizer(&self) -> AdamWConfig {
        AdamWConfig {
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps,
            weight_decay: self.weight_decay,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.accum_steps == 0 {
            return Err(Error::Config("batch size and accumulation steps must be positive".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("learning rate {} must be positive", self.lr)));
        }
        Ok(())
    }
}

/// Mean loss over consecutive batches of the pairs in stored order.
pub fn eval_loss(model: &AlignModel, pairs: &[AlignPair], batch_size: usize) -> Result<f64> {
    let mut total = 0.0;
    let mut count = 0;
    for chunk in pairs.chunks(batch_size) {
        total += model.batch_loss(chunk)?;
        count += 1;
    }
    Ok(total / count as f64)
}

fn decay_mask() -> Vec<bool> {
    TRAINABLE.iter().map(|n| !matches!(*n, "log_tau" | "logit_bias")).collect()
}

/// Trains `model` in place. The loss curve holds the evaluation loss at
/// initialization followed by one value per epoch.
pub fn train_pairs(model: AlignModel, pairs: &[AlignPair], hyper: &AlignHyper) -> Result<Checkpoint> {
    hyper.validate()?;
    if pairs.is_empty() {
        return Err(Error::Config("empty training corpus".into()));
    }
    let mut model = model;
    model.loss_norm = hyper.loss_norm;
    let opt = hyper.optimizer();
    let decay = decay_mask();
    let sizes: Vec<usize> = model.trainable().iter().map(|t| t.len()).collect();
    let mut state = AdamState::zeros(&sizes);
    let mut rng = crate::util::rng(hyper.seed);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let mut loss_curve = vec![eval_loss(&model, pairs, hyper.batch_size)?];

    for epoch in 0..hyper.epochs {
        order.shuffle(&mut rng);
        let mut acc = Gradients::zeros_like(&model);
        let mut pending = 0usize;
        for chunk in order.chunks(hyper.batch_size) {
            let batch: Vec<AlignPair> = chunk.iter().map(|&i| pairs[i].clone()).collect();
            let (_, g) = model.forward_backward(&batch)?;
            acc.add_assign(&g);
            pending += 1;
            if pending == hyper.accum_steps {
                apply(&mut model, &mut acc, pending, &decay, &mut state, &opt);
                pending = 0;
            }
        }
        if pending > 0 {
            apply(&mut model, &mut acc, pending, &decay, &mut state, &opt);
        }
        let loss = eval_loss(&model, pairs, hyper.batch_size)?;
        log::debug!("epoch {} loss {loss:.6}", epoch + 1);
        loss_curve.push(loss);
    }

    Ok(Checkpoint {
        model,
        hyper: *hyper,
        loss_curve,
        optimizer: Some(state),
    })
}

fn apply(
    model: &mut AlignModel,
    acc: &mut Gradients,
    pending: usize,
    decay: &[bool],
    state: &mut AdamState,
    opt: &AdamWConfig,
) {
    acc.scale(1.0 / pending as f64);
    adamw_step(&mut model.trainable_mut(), &acc.0, decay, state, opt);
    acc.0.iter_mut().flatten().for_each(|x| *x = 0.0);
}
