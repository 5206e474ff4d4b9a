use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TanhNetwork;
use crate::error::{arg, Error, Result};

/// Rows `(x, y)` stored flat.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub input_dim: usize,
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
}

impl Dataset {
    pub fn new(input_dim: usize, inputs: Vec<f64>, targets: Vec<f64>) -> Result<Self> {
        if input_dim == 0 || inputs.len() != input_dim * targets.len() {
            return arg(format!(
                "dataset shape mismatch: {} input values, {} targets, dimension {input_dim}",
                inputs.len(),
                targets.len()
            ));
        }
        Ok(Self {
            input_dim,
            inputs,
            targets,
        })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn row(&self, i: usize) -> (&[f64], f64) {
        let n = self.input_dim;
        (&self.inputs[i * n..(i + 1) * n], self.targets[i])
    }

    pub fn target_mean(&self) -> f64 {
        self.targets.iter().sum::<f64>() / self.len().max(1) as f64
    }

    /// CSV with columns `x0..x{N-1}, y`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<String> = (0..self.input_dim).map(|k| format!("x{k}")).collect();
        header.push("y".into());
        w.write_record(&header)?;
        for i in 0..self.len() {
            let (x, y) = self.row(i);
            let mut rec: Vec<String> = x.iter().map(|v| format!("{v:e}")).collect();
            rec.push(format!("{y:e}"));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Learning rate at the last epoch as a fraction of the initial one,
    /// reached by cosine decay; 1 keeps it constant.
    pub final_lr_fraction: f64,
    /// Data-parallel gradients over chunks of 16 rows.
    pub parallel: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 300,
            batch_size: 64,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
            final_lr_fraction: 0.01,
            parallel: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: usize,
    pub widths: (usize, usize),
    pub initial_train_mse: f64,
    pub final_train_mse: f64,
    pub heldout_sup_error: f64,
    pub heldout_mean_abs: f64,
    pub param_count: usize,
    pub seed: u64,
    /// Mean batch loss per epoch, before each update.
    pub loss_curve: Vec<f64>,
}

impl TrainReport {
    pub fn write_loss_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["epoch", "train_mse"])?;
        for (i, l) in self.loss_curve.iter().enumerate() {
            w.write_record([(i + 1).to_string(), format!("{l:e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Held-out `(sup |Ĝ - y|, mean |Ĝ - y|)`.
pub fn heldout_errors(net: &TanhNetwork, data: &Dataset) -> (f64, f64) {
    if data.is_empty() {
        return (0.0, 0.0);
    }
    let errs: Vec<f64> = (0..data.len())
        .map(|i| {
            let (x, y) = data.row(i);
            (net.trace(x).out - y).abs()
        })
        .collect();
    let sup = errs.iter().copied().fold(0.0, f64::max);
    (sup, errs.iter().sum::<f64>() / errs.len() as f64)
}

/// Mini-batch Adam on `½ mean (Ĝ(x) - y)²`. Deterministic per seed in
/// serial mode.
pub fn train(net: &mut TanhNetwork, data: &Dataset, heldout: &Dataset, config: &TrainConfig) -> Result<TrainReport> {
    if data.input_dim != net.input_dim() || (!heldout.is_empty() && heldout.input_dim != net.input_dim()) {
        return arg(format!(
            "dataset dimension {} does not match network input {}",
            data.input_dim,
            net.input_dim()
        ));
    }
    if config.batch_size == 0 || !(config.learning_rate > 0.0) {
        return arg("batch_size and learning_rate must be positive");
    }
    if !(config.final_lr_fraction > 0.0 && config.final_lr_fraction <= 1.0) {
        return arg("final_lr_fraction must lie in (0, 1]");
    }
    let initial = net.mse(&data.inputs, &data.targets);
    if !initial.is_finite() {
        return Err(Error::Divergence("initial training loss is not finite".into()));
    }
    let n = net.input_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut m = vec![0.0; net.param_count()];
    let mut v = vec![0.0; net.param_count()];
    let mut step = 0i32;
    let mut curve = Vec::with_capacity(config.epochs);
    let mut xs = Vec::with_capacity(config.batch_size * n);
    let mut ys = Vec::with_capacity(config.batch_size);
    for epoch in 0..config.epochs {
        if data.is_empty() {
            break;
        }
        order.shuffle(&mut rng);
        let progress = epoch as f64 / (config.epochs.max(2) - 1) as f64;
        let f = config.final_lr_fraction;
        let lr = config.learning_rate * (f + (1.0 - f) * 0.5 * (1.0 + (std::f64::consts::PI * progress).cos()));
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            xs.clear();
            ys.clear();
            for &i in batch {
                let (x, y) = data.row(i);
                xs.extend_from_slice(x);
                ys.push(y);
            }
            epoch_loss += net.mse(&xs, &ys) * batch.len() as f64;
            let g = if config.parallel {
                net.gradient_parallel(&xs, &ys, 16)?
            } else {
                net.gradient(&xs, &ys)?
            };
            step += 1;
            let c1 = 1.0 - config.beta1.powi(step);
            let c2 = 1.0 - config.beta2.powi(step);
            for (k, p) in net.params.iter_mut().enumerate() {
                m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g[k];
                v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g[k] * g[k];
                *p -= lr * (m[k] / c1) / ((v[k] / c2).sqrt() + config.epsilon);
            }
        }
        let loss = epoch_loss / data.len() as f64;
        if !loss.is_finite() || net.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Divergence(format!(
                "training loss became non-finite in epoch {} (lr {})",
                epoch + 1,
                config.learning_rate
            )));
        }
        curve.push(loss);
    }
    let (sup, mean) = heldout_errors(net, heldout);
    Ok(TrainReport {
        epochs: curve.len(),
        widths: net.widths(),
        initial_train_mse: initial,
        final_train_mse: net.mse(&data.inputs, &data.targets),
        heldout_sup_error: sup,
        heldout_mean_abs: mean,
        param_count: net.param_count(),
        seed: config.seed,
        loss_curve: curve,
    })
}
