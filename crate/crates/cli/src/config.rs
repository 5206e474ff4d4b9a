use std::path::{Path, PathBuf};

use clap::Args;
use rfl_core::experiments::SamplingConfig;
use rfl_core::functionals::FunctionalConfig;
use rfl_core::kernels::KernelConfig;
use rfl_core::network::TrainConfig;
use rfl_core::Error;
use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = include_str!("schema.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandName {
    Rates,
    Eigen,
    Project,
    Train,
    Flm,
    Meta,
}

impl CommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Rates => "rates",
            Self::Eigen => "eigen",
            Self::Project => "project",
            Self::Train => "train",
            Self::Flm => "flm",
            Self::Meta => "meta",
        }
    }
}

/// Effective run configuration: the `--config` file with flags applied on
/// top. Echoed into `report.json`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional: Option<FunctionalConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_list: Option<Vec<usize>>,
    #[serde(default, rename = "M", skip_serializing_if = "Option::is_none")]
    pub big_m: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub widths: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<TrainConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingConfig>,
    /// Hölder exponent used by `meta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    /// Decay constant of the power-function bound used by `meta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

/// Flags shared by every experiment subcommand.
#[derive(Args, Clone, Debug, Default)]
pub struct Flags {
    /// JSON run configuration; flags override its values
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Kernel family: gaussian, inverse_multiquadric (multiquadric, imq), sobolev (matern)
    #[arg(long)]
    pub kernel: Option<String>,
    /// Kernel width σ [default: 1]
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Inverse multiquadric exponent β
    #[arg(long)]
    pub beta: Option<f64>,
    /// Sobolev smoothness r
    #[arg(long)]
    pub r: Option<f64>,
    /// Input dimension d [default: 1]
    #[arg(long)]
    pub d: Option<usize>,
    /// Grid size m (nodes {0, 1/m, ..., 1}^d) [default: 8]
    #[arg(long)]
    pub m: Option<usize>,
    /// Comma-separated grid sizes [default: rates 4,8,16,32,64; eigen 1..8; flm 2,4,8]
    #[arg(long = "m-list", value_delimiter = ',')]
    pub m_list: Option<Vec<usize>>,
    /// Network size parameter M of the rate theorems (meta)
    #[arg(long = "M")]
    pub big_m: Option<u64>,
    /// Random seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory [default: $RFL_OUT_DIR/<command>, else rfl-out/<command>]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads [default: 1]
    #[arg(long)]
    pub threads: Option<usize>,
    /// Comma-separated hidden widths as W1xW2 [default: train 64x64; flm 128x128]
    #[arg(long, value_delimiter = ',')]
    pub widths: Option<Vec<String>>,
    /// Number of unit-ball samples [default: project 100; train 2000; flm 4000]
    #[arg(long = "n-samples")]
    pub n_samples: Option<usize>,
    /// Points used for sup norms over [0,1]^d [default: 2048]
    #[arg(long = "eval-resolution")]
    pub eval_resolution: Option<usize>,
    /// Functional kind: linear_integral, gflm, ode_map, l2_energy, constant [default: linear_integral]
    #[arg(long)]
    pub functional: Option<String>,
    /// Weight β(t) of integral functionals: one, sin2pi, zero [default: one; flm sin2pi]
    #[arg(long)]
    pub weight: Option<String>,
    /// Link g of the gflm functional: identity, tanh, logistic, sin [default: identity; flm tanh]
    #[arg(long)]
    pub link: Option<String>,
    /// Training epochs [default: 300]
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Adam learning rate [default: 0.001]
    #[arg(long)]
    pub lr: Option<f64>,
    /// Hölder exponent s (meta) [default: 1]
    #[arg(long)]
    pub s: Option<f64>,
    /// Power-function decay constant c (meta) [default: 1]
    #[arg(long)]
    pub c: Option<f64>,
}

pub fn config_error(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}

fn parse_widths(items: &[String]) -> Result<Vec<[usize; 2]>, Error> {
    items
        .iter()
        .map(|s| {
            let (a, b) = s
                .split_once(['x', 'X'])
                .ok_or_else(|| config_error(format!("widths must look like 64x64, got {s:?}")))?;
            let p = |v: &str| {
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| config_error(format!("invalid width {v:?} in {s:?}")))
            };
            Ok([p(a)?, p(b)?])
        })
        .collect()
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| {
            config_error(format!(
                "config {} does not match the run-config schema (see `rfl schema`): {e}",
                path.display()
            ))
        })
    }

    /// Applies command-line flags over the file values.
    pub fn merge(mut self, command: CommandName, f: &Flags) -> Result<Self, Error> {
        if let Some(c) = self.command {
            if c != command {
                return Err(config_error(format!(
                    "config file is for command {:?}, invoked as {:?}",
                    c.as_str(),
                    command.as_str()
                )));
            }
        }
        self.command = Some(command);
        if let Some(family) = &f.kernel {
            let keep_dim = self.kernel.as_ref().map_or(1, |k| k.dim);
            self.kernel = Some(KernelConfig {
                family: family.clone(),
                sigma: 1.0,
                beta: None,
                r: None,
                dim: keep_dim,
            });
        }
        if f.sigma.is_some() || f.beta.is_some() || f.r.is_some() || f.d.is_some() {
            let k = self
                .kernel
                .as_mut()
                .ok_or_else(|| config_error("kernel parameters given without --kernel"))?;
            if let Some(v) = f.sigma {
                k.sigma = v;
            }
            if let Some(v) = f.beta {
                k.beta = Some(v);
            }
            if let Some(v) = f.r {
                k.r = Some(v);
            }
            if let Some(v) = f.d {
                k.dim = v;
            }
        }
        if f.functional.is_some() || f.weight.is_some() || f.link.is_some() {
            let mut fc = match (&f.functional, self.functional.take()) {
                (Some(kind), _) => FunctionalConfig {
                    kind: kind.clone(),
                    ..FunctionalConfig::l2_energy()
                },
                (None, Some(fc)) => fc,
                (None, None) if command == CommandName::Flm => FunctionalConfig::gflm("sin2pi", "tanh"),
                (None, None) => FunctionalConfig::linear_integral("one"),
            };
            if let Some(w) = &f.weight {
                fc.beta = Some(w.clone());
            }
            if let Some(l) = &f.link {
                fc.link = Some(l.clone());
            }
            self.functional = Some(fc);
        }
        macro_rules! set {
            ($field:ident, $val:expr) => {
                if let Some(v) = $val {
                    self.$field = Some(v);
                }
            };
        }
        set!(m, f.m);
        set!(m_list, f.m_list.clone());
        set!(big_m, f.big_m);
        set!(seed, f.seed);
        set!(output_dir, f.out.clone());
        set!(threads, f.threads);
        set!(n_samples, f.n_samples);
        set!(eval_resolution, f.eval_resolution);
        set!(s, f.s);
        set!(c, f.c);
        if let Some(w) = &f.widths {
            self.widths = Some(parse_widths(w)?);
        }
        if f.epochs.is_some() || f.lr.is_some() {
            let t = self.train.get_or_insert_with(TrainConfig::default);
            if let Some(e) = f.epochs {
                t.epochs = e;
            }
            if let Some(lr) = f.lr {
                t.learning_rate = lr;
            }
        }
        Ok(self)
    }

    pub fn require_kernel(&self) -> Result<KernelConfig, Error> {
        self.kernel.clone().ok_or_else(|| {
            config_error("missing required field `kernel` (pass --kernel or set \"kernel\" in the config; see `rfl schema`)")
        })
    }

    pub fn output_dir(&self) -> PathBuf {
        let cmd = self.command.map_or("run", CommandName::as_str);
        if let Some(d) = &self.output_dir {
            return d.clone();
        }
        match std::env::var_os("RFL_OUT_DIR") {
            Some(root) if !root.is_empty() => PathBuf::from(root).join(cmd),
            _ => PathBuf::from("rfl-out").join(cmd),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn eval_resolution(&self) -> usize {
        self.eval_resolution.unwrap_or(2048)
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seed(),
            ..self.train.clone().unwrap_or_default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let file: RunConfig = serde_json::from_str(
            r#"{"kernel": {"family": "gaussian", "sigma": 2.0}, "m": 4, "seed": 9, "M": 100}"#,
        )
        .unwrap();
        let flags = Flags {
            sigma: Some(0.5),
            m: Some(6),
            widths: Some(vec!["8x16".into()]),
            ..Default::default()
        };
        let c = file.merge(CommandName::Train, &flags).unwrap();
        assert_eq!(c.kernel.as_ref().unwrap().sigma, 0.5);
        assert_eq!((c.m, c.seed, c.big_m), (Some(6), Some(9), Some(100)));
        assert_eq!(c.widths, Some(vec![[8, 16]]));
        assert_eq!(c.command, Some(CommandName::Train));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_widths() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"kernal": {}}"#).is_err());
        assert!(parse_widths(&["64-64".into()]).is_err());
        let flags = Flags {
            sigma: Some(1.0),
            ..Default::default()
        };
        assert!(RunConfig::default().merge(CommandName::Rates, &flags).is_err());
    }

    #[test]
    fn schema_lists_every_field() {
        let schema: serde_json::Value = serde_json::from_str(SCHEMA).unwrap();
        let props = schema["properties"].as_object().unwrap();
        let full = RunConfig {
            command: Some(CommandName::Meta),
            kernel: Some(KernelConfig::gaussian(1.0, 1)),
            functional: Some(FunctionalConfig::l2_energy()),
            m: Some(1),
            m_list: Some(vec![1]),
            big_m: Some(2),
            widths: Some(vec![[1, 1]]),
            n_samples: Some(1),
            seed: Some(1),
            output_dir: Some("x".into()),
            eval_resolution: Some(1),
            threads: Some(1),
            train: Some(TrainConfig::default()),
            sampling: Some(SamplingConfig::default()),
            s: Some(1.0),
            c: Some(1.0),
        };
        let value = serde_json::to_value(&full).unwrap();
        let keys: Vec<&String> = value.as_object().unwrap().keys().collect();
        assert_eq!(keys.len(), props.len());
        for k in keys {
            assert!(props.contains_key(k), "{k} missing from schema");
        }
        assert_eq!(schema["additionalProperties"], false);
    }
}
