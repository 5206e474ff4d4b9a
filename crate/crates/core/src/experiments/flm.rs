use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::data::{error_decomposition, generate_dataset_with, Decomposition, DecompositionConfig, SamplingConfig};
use super::report::{fmt_f64, line_plot, ExperimentReport, Provenance, Table};
use crate::error::{arg, Result};
use crate::functionals::{Functional, FunctionalConfig};
use crate::kernels::KernelConfig;
use crate::network::{train, TanhNetwork, TrainConfig, TrainReport};

/// `e_{k+1} ≤ (1 + band) e_k` for every consecutive pair.
pub fn nonincreasing_within(values: &[f64], band: f64) -> bool {
    values.windows(2).all(|w| w[1] <= (1.0 + band) * w[0])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlmConfig {
    pub beta: String,
    pub link: String,
    pub kernel: KernelConfig,
    pub m_list: Vec<usize>,
    pub n_samples: usize,
    pub widths: (usize, usize),
    pub seed: u64,
    pub eval_resolution: usize,
    pub sampling: SamplingConfig,
    pub train: TrainConfig,
}

impl Default for FlmConfig {
    fn default() -> Self {
        Self {
            beta: "sin2pi".into(),
            link: "tanh".into(),
            kernel: KernelConfig::gaussian(1.0, 1),
            m_list: vec![2, 4, 8],
            n_samples: 4000,
            widths: (128, 128),
            seed: 0,
            eval_resolution: 2048,
            sampling: SamplingConfig::default(),
            train: TrainConfig::default(),
        }
    }
}

/// Trains one network per grid size on targets of the generalized FLM
/// regression map and records the error decomposition for each.
pub fn flm_experiment(config: &FlmConfig) -> Result<(ExperimentReport, Vec<Decomposition>)> {
    let start = Instant::now();
    if config.kernel.dim != 1 {
        return arg("the FLM experiment needs d = 1");
    }
    let kernel = config.kernel.build()?;
    let fc = FunctionalConfig::gflm(&config.beta, &config.link);
    let functional = fc.build()?;
    let mut decomps = Vec::with_capacity(config.m_list.len());
    for &m in &config.m_list {
        let dc = DecompositionConfig {
            m,
            n_samples: config.n_samples,
            widths: config.widths,
            seed: config.seed,
            eval_resolution: config.eval_resolution,
            sampling: config.sampling,
            train: TrainConfig {
                seed: config.seed,
                ..config.train.clone()
            },
        };
        let (d, _, _) = error_decomposition(&kernel, functional.as_ref(), &dc)?;
        log::info!(
            "flm m={m}: sup {:.3e}, term I {:.3e}, term II {:.3e}",
            d.train.heldout_sup_error,
            d.term_i,
            d.term_ii
        );
        decomps.push(d);
    }
    let mut rep = ExperimentReport::new("flm", serde_json::to_value(config)?);
    rep.seeds = vec![config.seed];
    rep.add_table("flm", decomposition_table(&config.kernel.label(), config.seed, &decomps)?);
    for d in &decomps {
        rep.add_table(&format!("loss_m{}", d.m), loss_table(&config.kernel.label(), Some(d.m), config.seed, &d.train)?);
    }
    let sups: Vec<f64> = decomps.iter().map(|d| d.train.heldout_sup_error).collect();
    rep.checks.insert("sup_error_nonincreasing_20pct".into(), nonincreasing_within(&sups, 0.2));
    rep.checks.insert("triangle_inequality".into(), decomps.iter().all(|d| d.triangle_holds));
    rep.checks.insert("term_i_bound".into(), decomps.iter().all(|d| d.term_i_bound_holds));
    if let Some(d) = decomps.first() {
        rep.values.insert("c_f".into(), d.c_f);
    }
    let series = |f: fn(&Decomposition) -> f64| decomps.iter().map(|d| (d.m as f64, f(d))).collect::<Vec<_>>();
    rep.plots.insert(
        "flm".into(),
        line_plot(
            "generalized FLM: held-out errors",
            "m",
            "error",
            &[
                ("sup error".into(), series(|d| d.train.heldout_sup_error)),
                ("term I".into(), series(|d| d.term_i)),
                ("term II".into(), series(|d| d.term_ii)),
            ],
            true,
        ),
    );
    rep.wall_time = start.elapsed().as_secs_f64();
    Ok((rep, decomps))
}

pub fn decomposition_table(kernel: &str, seed: u64, decomps: &[Decomposition]) -> Result<Table> {
    let mut t = Table::new(&[
        "n_nodes",
        "w1",
        "w2",
        "heldout_sup_error",
        "heldout_mean_abs",
        "term_i",
        "term_ii",
        "total",
        "triangle_holds",
        "epsilon",
        "c_f",
        "term_i_bound",
        "term_i_bound_holds",
        "ln_c_g",
        "baseline_mean_abs",
        "final_train_mse",
    ]);
    for d in decomps {
        t.push(
            &Provenance::new(kernel, Some(d.m), None, Some(seed)),
            vec![
                d.n_nodes.to_string(),
                d.widths.0.to_string(),
                d.widths.1.to_string(),
                fmt_f64(d.train.heldout_sup_error),
                fmt_f64(d.train.heldout_mean_abs),
                fmt_f64(d.term_i),
                fmt_f64(d.term_ii),
                fmt_f64(d.total),
                d.triangle_holds.to_string(),
                fmt_f64(d.epsilon),
                fmt_f64(d.c_f),
                fmt_f64(d.term_i_bound),
                d.term_i_bound_holds.to_string(),
                fmt_f64(d.c_g.ln_value),
                fmt_f64(d.baseline_mean_abs),
                fmt_f64(d.train.final_train_mse),
            ],
        )?;
    }
    Ok(t)
}

pub fn loss_table(kernel: &str, m: Option<usize>, seed: u64, report: &TrainReport) -> Result<Table> {
    let mut t = Table::new(&["w1", "w2", "epoch", "train_mse"]);
    let prov = Provenance::new(kernel, m, None, Some(seed));
    for (i, l) in report.loss_curve.iter().enumerate() {
        t.push(
            &prov,
            vec![
                report.widths.0.to_string(),
                report.widths.1.to_string(),
                (i + 1).to_string(),
                fmt_f64(*l),
            ],
        )?;
    }
    Ok(t)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WidthStudyConfig {
    pub kernel: KernelConfig,
    pub functional: FunctionalConfig,
    pub m: usize,
    pub n_samples: usize,
    pub widths: Vec<(usize, usize)>,
    pub seed: u64,
    pub sampling: SamplingConfig,
    pub train: TrainConfig,
}

impl Default for WidthStudyConfig {
    fn default() -> Self {
        Self {
            kernel: KernelConfig::gaussian(1.0, 1),
            functional: FunctionalConfig::linear_integral("one"),
            m: 8,
            n_samples: 2000,
            widths: vec![(8, 8), (32, 32), (128, 128)],
            seed: 0,
            sampling: SamplingConfig::default(),
            train: TrainConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WidthStudy {
    pub reports: Vec<TrainReport>,
    /// Held-out errors of the best constant predictor (mean training target).
    pub baseline_mean_abs: f64,
    pub baseline_sup: f64,
    #[serde(skip)]
    pub networks: Vec<TanhNetwork>,
}

/// Trains networks of increasing width on one dataset.
pub fn width_study(config: &WidthStudyConfig) -> Result<(ExperimentReport, WidthStudy)> {
    let start = Instant::now();
    let kernel = config.kernel.build()?;
    let functional: Arc<dyn Functional> = config.functional.build()?;
    let data = generate_dataset_with(
        &kernel,
        functional.as_ref(),
        config.m,
        config.n_samples,
        config.seed,
        &config.sampling,
    )?;
    let mean_y = data.train.target_mean();
    let base: Vec<f64> = data.heldout.targets.iter().map(|y| (y - mean_y).abs()).collect();
    let baseline_mean_abs = base.iter().sum::<f64>() / base.len().max(1) as f64;
    let baseline_sup = base.iter().copied().fold(0.0, f64::max);
    let mut reports = Vec::new();
    let mut networks = Vec::new();
    for &w in &config.widths {
        let mut net = TanhNetwork::init(data.nodes.len(), w, config.seed)?;
        let tc = TrainConfig {
            seed: config.seed,
            ..config.train.clone()
        };
        let r = train(&mut net, &data.train, &data.heldout, &tc)?;
        log::info!(
            "widths {:?}: held-out sup {:.3e}, mean {:.3e}",
            w,
            r.heldout_sup_error,
            r.heldout_mean_abs
        );
        reports.push(r);
        networks.push(net);
    }
    let label = config.kernel.label();
    let mut rep = ExperimentReport::new("train", serde_json::to_value(config)?);
    rep.seeds = vec![config.seed];
    let mut t = Table::new(&[
        "w1",
        "w2",
        "param_count",
        "epochs",
        "initial_train_mse",
        "final_train_mse",
        "heldout_sup_error",
        "heldout_mean_abs",
        "baseline_mean_abs",
        "baseline_sup",
    ]);
    for r in &reports {
        t.push(
            &Provenance::new(&label, Some(config.m), None, Some(config.seed)),
            vec![
                r.widths.0.to_string(),
                r.widths.1.to_string(),
                r.param_count.to_string(),
                r.epochs.to_string(),
                fmt_f64(r.initial_train_mse),
                fmt_f64(r.final_train_mse),
                fmt_f64(r.heldout_sup_error),
                fmt_f64(r.heldout_mean_abs),
                fmt_f64(baseline_mean_abs),
                fmt_f64(baseline_sup),
            ],
        )?;
    }
    rep.add_table("train", t);
    let mut losses = Table::new(&["w1", "w2", "epoch", "train_mse"]);
    for r in &reports {
        losses.rows.extend(loss_table(&label, Some(config.m), config.seed, r)?.rows);
    }
    rep.add_table("loss", losses);
    let sups: Vec<f64> = reports.iter().map(|r| r.heldout_sup_error).collect();
    rep.checks.insert("sup_error_nonincreasing_20pct".into(), nonincreasing_within(&sups, 0.2));
    rep.values.insert("baseline_mean_abs".into(), baseline_mean_abs);
    rep.plots.insert(
        "train".into(),
        line_plot(
            "held-out sup error by width",
            "first hidden width",
            "error",
            &[(
                "sup error".into(),
                reports.iter().map(|r| (r.widths.0 as f64, r.heldout_sup_error)).collect(),
            )],
            true,
        ),
    );
    rep.wall_time = start.elapsed().as_secs_f64();
    Ok((
        rep,
        WidthStudy {
            reports,
            baseline_mean_abs,
            baseline_sup,
            networks,
        },
    ))
}
