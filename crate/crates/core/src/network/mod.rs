//! Two-hidden-layer tanh network `x ↦ aᵀ tanh(W2 tanh(W1 x − b1) − b2)`.

mod train;
mod widths;

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};

pub use train::{train, Dataset, TrainConfig, TrainReport};
pub use widths::{theoretical_widths, WidthSchedule};

/// Parameters are stored flat in the order `W1` (row-major, `w1 × n`), `b1`,
/// `W2` (row-major, `w2 × w1`), `b2`, `a`; gradients share the layout.
#[derive(Clone, Debug, PartialEq)]
pub struct TanhNetwork {
    input_dim: usize,
    w1: usize,
    w2: usize,
    params: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
struct Layout {
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
    a: usize,
    end: usize,
}

/// Activations of one forward pass.
struct Trace {
    h1: Vec<f64>,
    h2: Vec<f64>,
    out: f64,
}

impl TanhNetwork {
    /// Glorot-uniform weights, zero biases.
    pub fn init(input_dim: usize, widths: (usize, usize), seed: u64) -> Result<Self> {
        let (w1, w2) = widths;
        if input_dim == 0 || w1 == 0 || w2 == 0 {
            return arg(format!(
                "network dimensions must be positive, got input {input_dim}, widths ({w1}, {w2})"
            ));
        }
        let mut net = Self {
            input_dim,
            w1,
            w2,
            params: vec![0.0; 0],
        };
        let l = net.layout();
        net.params = vec![0.0; l.end];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fill = |range: std::ops::Range<usize>, fan_in: usize, fan_out: usize, p: &mut [f64]| {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for v in &mut p[range] {
                *v = rng.random_range(-limit..limit);
            }
        };
        fill(l.w1..l.b1, input_dim, w1, &mut net.params);
        fill(l.w2..l.b2, w1, w2, &mut net.params);
        fill(l.a..l.end, w2, 1, &mut net.params);
        Ok(net)
    }

    /// Network from explicit parameters in the flat layout.
    pub fn from_params(input_dim: usize, widths: (usize, usize), params: Vec<f64>) -> Result<Self> {
        let mut net = Self::init(input_dim, widths, 0)?;
        if params.len() != net.params.len() {
            return arg(format!(
                "expected {} parameters, got {}",
                net.params.len(),
                params.len()
            ));
        }
        if params.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("network parameters must be finite".into()));
        }
        net.params = params;
        Ok(net)
    }

    fn layout(&self) -> Layout {
        let w1 = 0;
        let b1 = w1 + self.w1 * self.input_dim;
        let w2 = b1 + self.w1;
        let b2 = w2 + self.w2 * self.w1;
        let a = b2 + self.w2;
        Layout {
            w1,
            b1,
            w2,
            b2,
            a,
            end: a + self.w2,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn widths(&self) -> (usize, usize) {
        (self.w1, self.w2)
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn outer_weights(&self) -> &[f64] {
        &self.params[self.layout().a..]
    }

    pub fn biases(&self) -> (&[f64], &[f64]) {
        let l = self.layout();
        (&self.params[l.b1..l.w2], &self.params[l.b2..l.a])
    }

    fn trace(&self, x: &[f64]) -> Trace {
        let l = self.layout();
        let p = &self.params;
        let n = self.input_dim;
        let h1: Vec<f64> = (0..self.w1)
            .map(|i| {
                let row = &p[l.w1 + i * n..l.w1 + (i + 1) * n];
                let z: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum();
                (z - p[l.b1 + i]).tanh()
            })
            .collect();
        let h2: Vec<f64> = (0..self.w2)
            .map(|i| {
                let row = &p[l.w2 + i * self.w1..l.w2 + (i + 1) * self.w1];
                let z: f64 = row.iter().zip(&h1).map(|(w, v)| w * v).sum();
                (z - p[l.b2 + i]).tanh()
            })
            .collect();
        let out = p[l.a..l.end].iter().zip(&h2).map(|(a, h)| a * h).sum();
        Trace { h1, h2, out }
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.input_dim {
            return arg(format!(
                "input has length {}, network expects {}",
                x.len(),
                self.input_dim
            ));
        }
        Ok(self.trace(x).out)
    }

    /// Mean squared error `mean (Ĝ(x) - y)²` over rows of `inputs`.
    pub fn mse(&self, inputs: &[f64], targets: &[f64]) -> f64 {
        if targets.is_empty() {
            return 0.0;
        }
        let n = self.input_dim;
        let s: f64 = targets
            .iter()
            .enumerate()
            .map(|(r, y)| (self.trace(&inputs[r * n..(r + 1) * n]).out - y).powi(2))
            .sum();
        s / targets.len() as f64
    }

    /// Adds `scale · ∂/∂θ ½(Ĝ(x) - y)²` into `grad`.
    fn accumulate(&self, x: &[f64], y: f64, scale: f64, grad: &mut [f64]) {
        let l = self.layout();
        let p = &self.params;
        let n = self.input_dim;
        let t = self.trace(x);
        let e = scale * (t.out - y);
        let mut d1 = vec![0.0; self.w1];
        for i in 0..self.w2 {
            grad[l.a + i] += e * t.h2[i];
            let d2 = e * p[l.a + i] * (1.0 - t.h2[i] * t.h2[i]);
            if d2 == 0.0 {
                continue;
            }
            grad[l.b2 + i] -= d2;
            let row = l.w2 + i * self.w1;
            for j in 0..self.w1 {
                grad[row + j] += d2 * t.h1[j];
                d1[j] += d2 * p[row + j];
            }
        }
        for (j, dj) in d1.iter().enumerate() {
            let d = dj * (1.0 - t.h1[j] * t.h1[j]);
            grad[l.b1 + j] -= d;
            let row = l.w1 + j * n;
            for k in 0..n {
                grad[row + k] += d * x[k];
            }
        }
    }

    /// Exact gradient of `½ mean (Ĝ(x) - y)²` over the batch, in the flat
    /// parameter layout.
    pub fn gradient(&self, inputs: &[f64], targets: &[f64]) -> Result<Vec<f64>> {
        self.check_batch(inputs, targets)?;
        let mut grad = vec![0.0; self.params.len()];
        let scale = 1.0 / targets.len() as f64;
        let n = self.input_dim;
        for (r, &y) in targets.iter().enumerate() {
            self.accumulate(&inputs[r * n..(r + 1) * n], y, scale, &mut grad);
        }
        Ok(grad)
    }

    /// Same quantity as [`gradient`](Self::gradient), accumulated over
    /// fixed chunks in parallel and summed in chunk order: deterministic, but
    /// rounded differently from the serial sum.
    pub fn gradient_parallel(&self, inputs: &[f64], targets: &[f64], chunk: usize) -> Result<Vec<f64>> {
        use rayon::prelude::*;
        self.check_batch(inputs, targets)?;
        let chunk = chunk.max(1);
        let scale = 1.0 / targets.len() as f64;
        let n = self.input_dim;
        let parts: Vec<Vec<f64>> = targets
            .par_chunks(chunk)
            .zip(inputs.par_chunks(chunk * n))
            .map(|(ys, xs)| {
                let mut g = vec![0.0; self.params.len()];
                for (r, &y) in ys.iter().enumerate() {
                    self.accumulate(&xs[r * n..(r + 1) * n], y, scale, &mut g);
                }
                g
            })
            .collect();
        let mut grad = vec![0.0; self.params.len()];
        for part in parts {
            for (g, v) in grad.iter_mut().zip(part) {
                *g += v;
            }
        }
        Ok(grad)
    }

    fn check_batch(&self, inputs: &[f64], targets: &[f64]) -> Result<()> {
        if targets.is_empty() {
            return arg("gradient needs a nonempty batch");
        }
        if inputs.len() != targets.len() * self.input_dim {
            return arg(format!(
                "batch has {} input values for {} targets of dimension {}",
                inputs.len(),
                targets.len(),
                self.input_dim
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&Checkpoint::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Checkpoint = serde_json::from_str(s)?;
        let params = [c.w1, c.b1, c.w2, c.b2, c.a].concat();
        Self::from_params(c.input_dim, (c.widths[0], c.widths[1]), params)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Checkpoint {
    input_dim: usize,
    widths: [usize; 2],
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: Vec<f64>,
    a: Vec<f64>,
}

impl From<&TanhNetwork> for Checkpoint {
    fn from(net: &TanhNetwork) -> Self {
        let l = net.layout();
        let p = &net.params;
        Self {
            input_dim: net.input_dim,
            widths: [net.w1, net.w2],
            w1: p[l.w1..l.b1].to_vec(),
            b1: p[l.b1..l.w2].to_vec(),
            w2: p[l.w2..l.b2].to_vec(),
            b2: p[l.b2..l.a].to_vec(),
            a: p[l.a..l.end].to_vec(),
        }
    }
}
