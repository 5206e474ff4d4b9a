use std::path::Path;

use rfl_core::experiments::{
    eigen_report, flm_experiment, projection_demo, rate_study_eigen, rate_study_power, theorem_metadata, width_study,
    ExperimentReport, FlmConfig, Provenance, Table, Theorem, TheoremParams, WidthStudyConfig,
};
use rfl_core::functionals::FunctionalConfig;
use rfl_core::Result;

use crate::config::{config_error, CommandName, RunConfig};

/// Runs one subcommand and writes its report. Returns the report so callers
/// can inspect checks.
pub fn run(cfg: &RunConfig) -> Result<ExperimentReport> {
    let command = cfg.command.ok_or_else(|| config_error("no command"))?;
    let echo = serde_json::to_value(cfg)?;
    let out = cfg.output_dir();
    let mut rep = match command {
        CommandName::Rates => rates(cfg, echo)?,
        CommandName::Eigen => eigen(cfg, echo)?,
        CommandName::Project => project(cfg)?,
        CommandName::Train => train(cfg, &out)?,
        CommandName::Flm => flm(cfg)?,
        CommandName::Meta => meta(cfg)?,
    };
    rep.config = serde_json::to_value(cfg)?;
    rep.write(&out)?;
    log::info!("wrote {}", out.join("report.json").display());
    for (name, ok) in &rep.checks {
        if !ok {
            log::warn!("check {name} failed");
        }
    }
    Ok(rep)
}

fn rates(cfg: &RunConfig, echo: serde_json::Value) -> Result<ExperimentReport> {
    let kc = cfg.require_kernel()?;
    let kernel = kc.build()?;
    let m_list = cfg.m_list.clone().unwrap_or_else(|| vec![4, 8, 16, 32, 64]);
    let study = rate_study_power(&kernel, &m_list, cfg.eval_resolution())?;
    study.report(echo)
}

fn eigen(cfg: &RunConfig, echo: serde_json::Value) -> Result<ExperimentReport> {
    let kc = cfg.require_kernel()?;
    let kernel = kc.build()?;
    let m_list = cfg.m_list.clone().unwrap_or_else(|| (1..=8).collect());
    let rows = rate_study_eigen(&kernel, &m_list)?;
    eigen_report(&kc, &rows, echo)
}

fn project(cfg: &RunConfig) -> Result<ExperimentReport> {
    let kernel = cfg.require_kernel()?.build()?;
    let (rep, _) = projection_demo(
        &kernel,
        cfg.m.unwrap_or(8),
        cfg.n_samples.unwrap_or(100),
        cfg.seed(),
        cfg.eval_resolution(),
    )?;
    Ok(rep)
}

fn train(cfg: &RunConfig, out: &Path) -> Result<ExperimentReport> {
    let widths = match &cfg.widths {
        Some(w) => w.iter().map(|&[a, b]| (a, b)).collect(),
        None => vec![(64, 64)],
    };
    let study_cfg = WidthStudyConfig {
        kernel: cfg.require_kernel()?,
        functional: cfg
            .functional
            .clone()
            .unwrap_or_else(|| FunctionalConfig::linear_integral("one")),
        m: cfg.m.unwrap_or(8),
        n_samples: cfg.n_samples.unwrap_or(2000),
        widths,
        seed: cfg.seed(),
        sampling: cfg.sampling.unwrap_or_default(),
        train: cfg.train_config(),
    };
    let (rep, study) = width_study(&study_cfg)?;
    let dir = out.join("networks");
    std::fs::create_dir_all(&dir)?;
    for net in &study.networks {
        let (w1, w2) = net.widths();
        net.save(&dir.join(format!("net_{w1}x{w2}.json")))?;
    }
    Ok(rep)
}

fn flm(cfg: &RunConfig) -> Result<ExperimentReport> {
    let defaults = FlmConfig::default();
    let (beta, link) = match &cfg.functional {
        Some(fc) if fc.kind != "gflm" => {
            return Err(config_error(format!(
                "flm runs the gflm functional, got kind {:?}",
                fc.kind
            )))
        }
        Some(fc) => (
            fc.beta.clone().unwrap_or(defaults.beta.clone()),
            fc.link.clone().unwrap_or(defaults.link.clone()),
        ),
        None => (defaults.beta.clone(), defaults.link.clone()),
    };
    let widths = match cfg.widths.as_deref() {
        None => defaults.widths,
        Some([[a, b]]) => (*a, *b),
        Some(_) => return Err(config_error("flm takes a single width pair")),
    };
    let flm_cfg = FlmConfig {
        beta,
        link,
        kernel: cfg.require_kernel()?,
        m_list: cfg.m_list.clone().unwrap_or(defaults.m_list),
        n_samples: cfg.n_samples.unwrap_or(defaults.n_samples),
        widths,
        seed: cfg.seed(),
        eval_resolution: cfg.eval_resolution(),
        sampling: cfg.sampling.unwrap_or_default(),
        train: cfg.train_config(),
    };
    Ok(flm_experiment(&flm_cfg)?.0)
}

fn meta(cfg: &RunConfig) -> Result<ExperimentReport> {
    let kc = cfg.require_kernel()?;
    let theorem: Theorem = kc.family.parse()?;
    let big_m = cfg
        .big_m
        .ok_or_else(|| config_error("meta needs --M (network size parameter)"))?;
    let defaults = TheoremParams::default();
    let params = TheoremParams {
        d: kc.dim,
        s: cfg.s.unwrap_or(defaults.s),
        r: kc.r.unwrap_or(defaults.r),
        sigma: kc.sigma,
        beta: kc.beta.unwrap_or(defaults.beta),
        c: cfg.c,
    };
    let md = theorem_metadata(theorem, big_m, &params)?;
    println!("{}", serde_json::to_string_pretty(&md)?);
    let mut rep = ExperimentReport::new("meta", serde_json::Value::Null);
    let opt = |v: Option<u128>| v.map_or_else(|| "overflow".to_string(), |x| x.to_string());
    let mut t = Table::new(&["m_real", "m_grid", "n_nodes", "w1", "w2", "param_count", "error_bound"]);
    t.push(
        &Provenance::new(kc.label(), Some(md.m as usize), Some(big_m), None),
        vec![
            md.m_real.to_string(),
            md.m.to_string(),
            md.n_nodes.map_or_else(|| "overflow".into(), |n| n.to_string()),
            md.widths.as_ref().map_or_else(|| "overflow".into(), |w| w.w1.to_string()),
            md.widths.as_ref().map_or_else(|| "overflow".into(), |w| opt(w.w2)),
            md.widths.as_ref().map_or_else(|| "overflow".into(), |w| opt(w.param_count_bound)),
            md.error_bound.to_string(),
        ],
    )?;
    rep.add_table("meta", t);
    rep.values.insert("m_real".into(), md.m_real);
    rep.values.insert("error_bound".into(), md.error_bound);
    if let Some(w) = &md.widths {
        rep.checks.insert("width_hypothesis".into(), w.hypothesis_satisfied);
    }
    Ok(rep)
}
