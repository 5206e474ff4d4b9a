use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::evaluation_set;
use super::report::{fmt_f64, ExperimentReport, Provenance, Table};
use crate::error::Result;
use crate::geometry::uniform_grid;
use crate::kernels::Kernel;
use crate::numeric::DoubleDouble;
use crate::rkhs::{sample_unit_ball, GramSystem, RkhsFunction};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProjectionRow {
    pub sample: usize,
    pub rkhs_norm: f64,
    pub sup_error: f64,
    pub max_node_residual: f64,
    /// `max_x |f(x) - Pf(x)| / (‖f‖ ε(x))` over points with `ε(x) > 0`.
    pub max_bound_ratio: f64,
}

/// Projects random unit-ball functions onto the grid nodes and compares
/// `|f - Pf|` pointwise with `‖f‖ · ε(x)`.
pub fn projection_demo(
    kernel: &Arc<dyn Kernel>,
    m: usize,
    n_samples: usize,
    seed: u64,
    eval_resolution: usize,
) -> Result<(ExperimentReport, Vec<ProjectionRow>)> {
    let d = kernel.dim();
    let system = GramSystem::<DoubleDouble>::build(kernel.clone(), uniform_grid(m, d)?)?;
    let eval = evaluation_set(d, eval_resolution)?;
    let power: Vec<f64> = eval.iter().map(|x| system.power_function(x)).collect();
    let epsilon = power.iter().copied().fold(0.0, f64::max);
    let rows: Vec<ProjectionRow> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let f: RkhsFunction<DoubleDouble> =
                sample_unit_ball(kernel.clone(), 8, 1.0, seed.wrapping_add(i as u64))?.widen();
            let pf = system.interpolate(&f)?;
            let norm = f.norm_t().to_f64();
            let mut sup = 0.0f64;
            let mut ratio = 0.0f64;
            for (x, p) in eval.iter().zip(&power) {
                let e = (f.eval_t(x) - pf.eval_t(x)).abs().to_f64();
                sup = sup.max(e);
                if *p > 0.0 {
                    ratio = ratio.max(e / (norm * p));
                }
            }
            let residual = system
                .points()
                .iter()
                .map(|t| (f.eval_t(t) - pf.eval_t(t)).abs().to_f64())
                .fold(0.0, f64::max);
            Ok(ProjectionRow {
                sample: i,
                rkhs_norm: norm,
                sup_error: sup,
                max_node_residual: residual,
                max_bound_ratio: ratio,
            })
        })
        .collect::<Result<_>>()?;
    let cfg = kernel.config();
    let mut rep = ExperimentReport::new("project", serde_json::Value::Null);
    rep.seeds = vec![seed];
    let mut t = Table::new(&["sample", "rkhs_norm", "sup_error", "epsilon", "max_node_residual", "max_bound_ratio"]);
    for r in &rows {
        t.push(
            &Provenance::new(cfg.label(), Some(m), None, Some(seed)),
            vec![
                r.sample.to_string(),
                fmt_f64(r.rkhs_norm),
                fmt_f64(r.sup_error),
                fmt_f64(epsilon),
                fmt_f64(r.max_node_residual),
                fmt_f64(r.max_bound_ratio),
            ],
        )?;
    }
    rep.add_table("project", t);
    rep.values.insert("epsilon".into(), epsilon);
    rep.values.insert("jitter".into(), system.jitter_used());
    rep.checks.insert(
        "pointwise_bound".into(),
        rows.iter().all(|r| r.max_bound_ratio <= 1.0 + 1e-6),
    );
    Ok((rep, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelConfig;

    #[test]
    fn gaussian_projection_respects_power_bound() {
        let k = KernelConfig::gaussian(0.5, 1).build().unwrap();
        let (rep, rows) = projection_demo(&k, 4, 10, 1, 256).unwrap();
        assert!(rep.all_checks_pass());
        assert!(rows.iter().all(|r| (r.rkhs_norm - 1.0).abs() < 1e-12 && r.max_node_residual < 1e-12));
        assert!(rows.iter().all(|r| r.sup_error <= rep.values["epsilon"] * (1.0 + 1e-6)));
    }
}
