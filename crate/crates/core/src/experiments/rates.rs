use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::evaluation_set;
use super::report::{fmt_f64, line_plot, ExperimentReport, FittedSlope, Provenance, Table};
use crate::error::{arg, Error, Result};
use crate::geometry::uniform_grid;
use crate::kernels::{Kernel, KernelConfig, KernelFamily};
use crate::numeric::fit::linear_fit;
use crate::numeric::{DoubleDouble, Precision};
use crate::rkhs::GramSystem;
use crate::spectral::{check_eigen_lower_bound, SpectralReport};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PowerRow {
    pub m: usize,
    pub n_nodes: usize,
    /// Sup of the power function over the evaluation set.
    pub epsilon: f64,
    pub jitter: f64,
    pub precision: Precision,
    /// `false` when ε rounded to zero; such rows are left out of the fit.
    pub resolved: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PowerRateStudy {
    pub kernel: KernelConfig,
    pub eval_resolution: usize,
    pub rows: Vec<PowerRow>,
    /// Regressor of `ln ε`: `ln m` (sobolev), `m` (multiquadric) or
    /// `m ln m` (gaussian).
    pub regressor: String,
    pub fit: FittedSlope,
    /// Exponent `d - 2r` of the Sobolev rate, for comparison.
    pub reference_slope: Option<f64>,
    /// `ε(m_{k+1}) / ε(m_k)` over resolved rows.
    pub ratios: Vec<f64>,
    pub slope_negative: bool,
    pub ratios_decreasing: bool,
}

/// Sup power function across grid sizes, computed in double-double, with the
/// family-specific regression of `ln ε`.
pub fn rate_study_power(kernel: &Arc<dyn Kernel>, m_list: &[usize], eval_resolution: usize) -> Result<PowerRateStudy> {
    if m_list.len() < 4 {
        return arg(format!("rate study needs at least 4 grid sizes, got {}", m_list.len()));
    }
    if m_list.windows(2).any(|w| w[0] >= w[1]) || m_list[0] == 0 {
        return arg("m_list must be strictly increasing and positive");
    }
    let d = kernel.dim();
    let eval = evaluation_set(d, eval_resolution)?;
    let rows: Vec<PowerRow> = m_list
        .par_iter()
        .map(|&m| {
            let system = GramSystem::<DoubleDouble>::build(kernel.clone(), uniform_grid(m, d)?)?;
            Ok(PowerRow {
                m,
                n_nodes: system.len(),
                epsilon: system.power_function_sup(&eval)?,
                jitter: system.jitter_used(),
                precision: system.precision(),
                resolved: false,
            })
        })
        .collect::<Result<Vec<PowerRow>>>()?
        .into_iter()
        .map(|r| PowerRow {
            resolved: r.epsilon > 0.0,
            ..r
        })
        .collect();
    let used: Vec<&PowerRow> = rows.iter().filter(|r| r.resolved).collect();
    if used.len() < 2 {
        return Err(Error::NonFinite(
            "power function vanished on the evaluation set for all but one grid; the Gram systems are too ill-conditioned".into(),
        ));
    }
    if used.len() < rows.len() {
        log::warn!(
            "{} grid size(s) left out of the fit: power function below round-off",
            rows.len() - used.len()
        );
    }
    let ln_eps: Vec<f64> = used.iter().map(|r| r.epsilon.ln()).collect();
    let ms: Vec<f64> = used.iter().map(|r| r.m as f64).collect();
    let cfg = kernel.config();
    let (regressor, x, reference) = match kernel.family() {
        KernelFamily::Sobolev => (
            "ln m",
            ms.iter().map(|m| m.ln()).collect::<Vec<_>>(),
            cfg.r.map(|r| d as f64 - 2.0 * r),
        ),
        KernelFamily::InverseMultiquadric => ("m", ms.clone(), None),
        KernelFamily::Gaussian => ("m ln m", ms.iter().map(|m| m * m.ln()).collect(), None),
    };
    let fit = FittedSlope::from(linear_fit(&x, &ln_eps)?);
    let ratios: Vec<f64> = used.windows(2).map(|w| w[1].epsilon / w[0].epsilon).collect();
    Ok(PowerRateStudy {
        kernel: cfg,
        eval_resolution,
        rows,
        regressor: regressor.into(),
        slope_negative: fit.slope < 0.0,
        ratios_decreasing: ratios.windows(2).all(|w| w[1] < w[0]),
        fit,
        reference_slope: reference,
        ratios,
    })
}

impl PowerRateStudy {
    pub fn report(&self, config: serde_json::Value) -> Result<ExperimentReport> {
        let mut rep = ExperimentReport::new("rates", config);
        let label = self.kernel.label();
        let mut t = Table::new(&["n_nodes", "epsilon", "ln_epsilon", "jitter", "precision", "resolved"]);
        for r in &self.rows {
            t.push(
                &Provenance::new(&label, Some(r.m), None, None),
                vec![
                    r.n_nodes.to_string(),
                    fmt_f64(r.epsilon),
                    fmt_f64(r.epsilon.ln()),
                    fmt_f64(r.jitter),
                    r.precision.as_str().into(),
                    r.resolved.to_string(),
                ],
            )?;
        }
        rep.add_table("rates", t);
        rep.fitted_slopes.insert(format!("ln_epsilon_vs_{}", self.regressor.replace(' ', "_")), self.fit);
        rep.checks.insert("slope_negative".into(), self.slope_negative);
        if self.kernel.family == KernelFamily::Gaussian.as_str() {
            rep.checks.insert("ratios_decreasing".into(), self.ratios_decreasing);
        }
        if let Some(r) = self.reference_slope {
            rep.values.insert("reference_slope".into(), r);
        }
        let pts: Vec<(f64, f64)> = self.rows.iter().map(|r| (r.m as f64, r.epsilon)).collect();
        rep.plots.insert(
            "rates".into(),
            line_plot(&format!("sup power function, {label}"), "m", "epsilon", &[(label.clone(), pts)], true),
        );
        Ok(rep)
    }
}

/// `λ_N` against `m Γ_m` and `m^d Γ_m` for each grid size.
pub fn rate_study_eigen(kernel: &Arc<dyn Kernel>, m_list: &[usize]) -> Result<Vec<SpectralReport>> {
    match kernel.family() {
        KernelFamily::Gaussian | KernelFamily::Sobolev => {}
        other => {
            return Err(Error::Unsupported(format!(
                "eigenvalue study needs a gaussian or sobolev kernel, got {}",
                other.as_str()
            )))
        }
    }
    m_list
        .iter()
        .map(|&m| check_eigen_lower_bound(kernel, m, kernel.dim()))
        .collect()
}

pub fn eigen_report(kernel: &KernelConfig, rows: &[SpectralReport], config: serde_json::Value) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("eigen", config);
    let label = kernel.label();
    let mut t = Table::new(&[
        "d",
        "n_nodes",
        "lambda_min",
        "ln_lambda_min",
        "m_gamma",
        "ln_m_gamma",
        "m_pow_d_gamma",
        "ln_m_pow_d_gamma",
        "satisfied",
        "satisfied_pow_d",
        "precision",
    ]);
    for r in rows {
        t.push(
            &Provenance::new(&label, Some(r.m), None, None),
            vec![
                r.d.to_string(),
                r.n.to_string(),
                fmt_f64(r.lambda_min),
                fmt_f64(r.ln_lambda_min),
                fmt_f64(r.bound_m_gamma),
                fmt_f64(r.ln_bound_m_gamma),
                fmt_f64(r.bound_m_pow_d_gamma),
                fmt_f64(r.ln_bound_m_pow_d_gamma),
                r.bound_satisfied.to_string(),
                r.bound_pow_d_satisfied.to_string(),
                r.precision.as_str().into(),
            ],
        )?;
    }
    rep.add_table("eigen", t);
    rep.checks.insert("lambda_ge_m_gamma".into(), rows.iter().all(|r| r.bound_satisfied));
    rep.checks.insert("lambda_ge_m_pow_d_gamma".into(), rows.iter().all(|r| r.bound_pow_d_satisfied));
    let lam: Vec<(f64, f64)> = rows.iter().map(|r| (r.m as f64, r.lambda_min)).collect();
    let bnd: Vec<(f64, f64)> = rows.iter().map(|r| (r.m as f64, r.bound_m_gamma)).collect();
    rep.plots.insert(
        "eigen".into(),
        line_plot(
            &format!("smallest Gram eigenvalue, {label}"),
            "m",
            "value",
            &[("lambda_N".into(), lam), ("m Gamma_m".into(), bnd)],
            true,
        ),
    );
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sobolev_rate_is_negative() {
        let k = KernelConfig::sobolev(2.0, 1).build().unwrap();
        let s = rate_study_power(&k, &[4, 8, 16, 32], 512).unwrap();
        assert!(s.slope_negative);
        assert_eq!(s.reference_slope, Some(-3.0));
        assert_eq!(s.regressor, "ln m");
        // Oracle: the power function vanishes at the nodes and is positive
        // between them, so ε is bounded by κ.
        assert!(s.rows.iter().all(|r| r.epsilon > 0.0 && r.epsilon < k.kappa()));
    }

    #[test]
    fn gaussian_ratios_decrease() {
        let k = KernelConfig::gaussian(1.0, 1).build().unwrap();
        let s = rate_study_power(&k, &[1, 2, 4, 8], 1024).unwrap();
        assert!(s.ratios_decreasing, "{:?}", s.ratios);
        assert!(s.slope_negative);
    }

    #[test]
    fn unresolved_grids_are_skipped() {
        let k = KernelConfig::gaussian(1.0, 1).build().unwrap();
        let s = rate_study_power(&k, &[4, 8, 16, 32], 256).unwrap();
        assert!(s.rows[0].resolved && s.rows[1].resolved);
        assert_eq!(s.fit.n, s.rows.iter().filter(|r| r.resolved).count());
        assert!(s.slope_negative);
    }

    #[test]
    fn validation() {
        let k = KernelConfig::gaussian(1.0, 1).build().unwrap();
        assert!(rate_study_power(&k, &[1, 2, 4], 64).is_err());
        assert!(rate_study_power(&k, &[1, 4, 2, 8], 64).is_err());
        let mq = KernelConfig::multiquadric(1.0, 1.0, 1).build().unwrap();
        assert!(matches!(rate_study_eigen(&mq, &[1, 2]), Err(Error::Unsupported(_))));
    }

    #[test]
    fn eigen_rows_satisfy_bound() {
        let k = KernelConfig::sobolev(1.0, 1).build().unwrap();
        let rows = rate_study_eigen(&k, &[1, 2, 4]).unwrap();
        assert!(rows.iter().all(|r| r.bound_satisfied));
        let rep = eigen_report(&k.config(), &rows, serde_json::Value::Null).unwrap();
        assert!(rep.all_checks_pass());
        assert_eq!(rep.tables["eigen"].rows.len(), 3);
    }
}
