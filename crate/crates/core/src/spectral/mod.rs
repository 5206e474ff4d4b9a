//! Smallest Gram eigenvalues, the `m Γ_m` lower bound and the Hölder
//! constant `C_G` of the induced finite-dimensional map.

pub mod jacobi;
pub mod wide;

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use jacobi::{inverse_power_norm, smallest_eigenpair, smallest_eigenvalue, Eigenpair};
pub use wide::{smallest_eigenvalue_wide, WideEigen};

use crate::error::{arg, Error, Result};
use crate::geometry::{fill_distance, uniform_grid, PointSet};
use crate::kernels::{m_d_constant, Kernel, KernelConfig, KernelFamily, KernelScalar};
use crate::numeric::fit::{linear_fit, LinearFit};
use crate::numeric::linalg::Matrix;
use crate::numeric::Precision;
use crate::rkhs::gram::gram_matrix;
use crate::rkhs::GramSystem;

/// Smallest Gram eigenvalue together with how it was obtained.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LambdaMin {
    pub value: f64,
    pub ln_value: f64,
    pub precision: Precision,
    /// Jacobi residual `‖Kv - λv‖` (f64 path only).
    pub residual: Option<f64>,
    /// `ln` of the certified lower bound from the wide path.
    pub ln_certified_lower: Option<f64>,
    /// `‖K^{-1}‖_op` from an independent inverse power iteration (f64 path).
    pub inv_norm_power_iteration: Option<f64>,
}

/// `λ_N(K[t̄])`: cyclic Jacobi in `f64`, recomputed in 256-bit arithmetic when
/// the `f64` value is below `10³ N ε ‖K‖_F`.
pub fn gram_lambda_min(kernel: &dyn Kernel, points: &PointSet) -> Result<LambdaMin> {
    let g: Matrix<f64> = gram_matrix(kernel, points, points);
    let pair = smallest_eigenpair(&g)?;
    let n = points.len();
    let floor = 1e3 * n as f64 * f64::EPSILON * g.frobenius_norm();
    if pair.value > floor {
        let inv = inverse_power_norm(&g, 20_000, 1e-15);
        return Ok(LambdaMin {
            value: pair.value,
            ln_value: pair.value.ln(),
            precision: Precision::F64,
            residual: Some(pair.residual),
            ln_certified_lower: None,
            inv_norm_power_iteration: inv,
        });
    }
    log::debug!(
        "lambda_min {:e} below f64 floor {floor:e}; escalating to 256-bit",
        pair.value
    );
    match smallest_eigenvalue_wide(kernel, points) {
        Some(w) => Ok(LambdaMin {
            value: w.lambda,
            ln_value: w.ln_lambda,
            precision: Precision::Wide256,
            residual: None,
            ln_certified_lower: w.ln_certified_lower,
            inv_norm_power_iteration: None,
        }),
        None => Err(Error::SingularGram {
            n,
            max_jitter: 0.0,
        }),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralReport {
    pub kernel: KernelConfig,
    pub m: usize,
    pub d: usize,
    pub n: usize,
    pub lambda_min: f64,
    pub ln_lambda_min: f64,
    pub inv_op_norm: f64,
    pub inv_op_norm_power_iteration: Option<f64>,
    pub bound_m_gamma: f64,
    pub ln_bound_m_gamma: f64,
    pub bound_m_pow_d_gamma: f64,
    pub ln_bound_m_pow_d_gamma: f64,
    pub bound_satisfied: bool,
    pub bound_pow_d_satisfied: bool,
    pub precision: Precision,
    pub jacobi_residual: Option<f64>,
    pub ln_certified_lower: Option<f64>,
}

/// Computes `λ_N` on the uniform grid and compares it with `m Γ_m` (and
/// `m^d Γ_m`), in log space with relative slack `10^-6`.
pub fn check_eigen_lower_bound(kernel: &Arc<dyn Kernel>, m: usize, d: usize) -> Result<SpectralReport> {
    if m == 0 {
        return arg("m must be >= 1");
    }
    if d != kernel.dim() {
        return arg(format!("d = {d} differs from kernel dimension {}", kernel.dim()));
    }
    let ln_gamma = kernel.ln_gamma_m(m)?;
    let points = uniform_grid(m, d)?;
    let lam = gram_lambda_min(kernel.as_ref(), &points)?;
    let ln_m = (m as f64).ln();
    let ln_b1 = ln_m + ln_gamma;
    let ln_bd = d as f64 * ln_m + ln_gamma;
    let slack = (1.0 - 1e-6f64).ln();
    // The wide path certifies λ_N from below; use that side when present.
    let ln_lam_low = lam.ln_certified_lower.unwrap_or(lam.ln_value);
    Ok(SpectralReport {
        kernel: kernel.config(),
        m,
        d,
        n: points.len(),
        lambda_min: lam.value,
        ln_lambda_min: lam.ln_value,
        inv_op_norm: 1.0 / lam.value,
        inv_op_norm_power_iteration: lam.inv_norm_power_iteration,
        bound_m_gamma: ln_b1.exp(),
        ln_bound_m_gamma: ln_b1,
        bound_m_pow_d_gamma: ln_bd.exp(),
        ln_bound_m_pow_d_gamma: ln_bd,
        bound_satisfied: ln_lam_low >= ln_b1 + slack,
        bound_pow_d_satisfied: ln_lam_low >= ln_bd + slack,
        precision: lam.precision,
        jacobi_residual: lam.residual,
        ln_certified_lower: lam.ln_certified_lower,
    })
}

/// `C_G` of the map `G(x) = F(Σ x_i ψ_i)`, with both the computed operator
/// norm and the Fourier bound `1/(m Γ_m)` where available.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HolderConstantG {
    pub value: f64,
    pub ln_value: f64,
    pub inv_op_norm: f64,
    pub fill_distance: f64,
    pub alpha: f64,
    pub c_k: f64,
    pub c_k_estimated: bool,
    /// Same formula with `‖K^{-1}‖_op` replaced by `1/(m Γ_m)`.
    pub ln_value_fourier_bound: Option<f64>,
}

/// `C_G = C_F (1 + ‖K[t̄]^{-1}‖_op √N C_K h^α)^s`.
pub fn holder_constant_g<T: KernelScalar>(system: &GramSystem<T>, s: f64, c_f: f64) -> Result<f64> {
    holder_constant_g_report(system, s, c_f).map(|r| r.value)
}

pub fn holder_constant_g_report<T: KernelScalar>(
    system: &GramSystem<T>,
    s: f64,
    c_f: f64,
) -> Result<HolderConstantG> {
    c_g_for_nodes(system.kernel(), system.points(), s, c_f)
}

fn c_g_for_nodes(kernel: &Arc<dyn Kernel>, points: &PointSet, s: f64, c_f: f64) -> Result<HolderConstantG> {
    if !(s > 0.0 && s <= 1.0) {
        return arg(format!("Hölder exponent s must lie in (0, 1], got {s}"));
    }
    if !(c_f >= 0.0) {
        return arg("C_F must be nonnegative");
    }
    let hd = kernel.holder_data();
    let h = fill_distance(points, None)?;
    let lam = gram_lambda_min(kernel.as_ref(), points)?;
    let inv = (-lam.ln_value).exp();
    let n = points.len() as f64;
    let ln_of = |ln_inv: f64| {
        // ln(1 + e^{ln_inv} √N C_K h^α), stable for huge operator norms.
        let ln_term = ln_inv + 0.5 * n.ln() + hd.c_k.ln() + hd.alpha * h.ln();
        let ln1p = if ln_term > 30.0 {
            ln_term + (-ln_term).exp().ln_1p()
        } else {
            ln_term.exp().ln_1p()
        };
        c_f.ln() + s * ln1p
    };
    let ln_value = ln_of(-lam.ln_value);
    let fourier = points.grid_m().and_then(|m| {
        kernel
            .ln_gamma_m(m)
            .ok()
            .map(|lg| ln_of(-((m as f64).ln() + lg)))
    });
    Ok(HolderConstantG {
        value: if c_f == 0.0 { 0.0 } else { ln_value.exp() },
        ln_value,
        inv_op_norm: inv,
        fill_distance: h,
        alpha: hd.alpha,
        c_k: hd.c_k,
        c_k_estimated: hd.estimated,
        ln_value_fourier_bound: fourier,
    })
}

/// Growth of `ln C_G` across grid sizes against the shape of the analytic
/// bound for the kernel family.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthCheck {
    pub kernel: KernelConfig,
    pub m: Vec<usize>,
    pub ln_c_g: Vec<f64>,
    /// What `ln C_G` is regressed on: `ln m`, `m` or `m²`.
    pub regressor: String,
    pub fit: LinearFit,
    pub allowed_slope: f64,
    pub passed: bool,
}

pub fn growth_check(kernel: &Arc<dyn Kernel>, m_list: &[usize], s: f64, c_f: f64) -> Result<GrowthCheck> {
    if m_list.len() < 2 {
        return arg("growth check needs at least two grid sizes");
    }
    let cfg = kernel.config();
    let d = kernel.dim() as f64;
    let mut ln_cg = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let grid = uniform_grid(m, kernel.dim())?;
        ln_cg.push(c_g_for_nodes(kernel, &grid, s, c_f)?.ln_value);
    }
    let ms: Vec<f64> = m_list.iter().map(|&m| m as f64).collect();
    let (regressor, x, allowed) = match kernel.family() {
        KernelFamily::Sobolev => {
            let r = cfg.r.unwrap_or(0.0);
            let deg = 2.0 * r * s + d * s / 2.0 - 2.0 * s;
            ("ln m", ms.iter().map(|m| m.ln()).collect::<Vec<_>>(), deg * 1.1)
        }
        KernelFamily::InverseMultiquadric => {
            let md = m_d_constant(kernel.dim());
            ("m", ms.clone(), 4.0 * cfg.sigma * md * s * 1.1)
        }
        KernelFamily::Gaussian => {
            let pi2 = std::f64::consts::PI.powi(2);
            let s2 = cfg.sigma * cfg.sigma;
            ("m^2", ms.iter().map(|m| m * m).collect(), s2 * pi2 * d * s * 1.1)
        }
    };
    let fit = linear_fit(&x, &ln_cg)?;
    Ok(GrowthCheck {
        kernel: cfg,
        m: m_list.to_vec(),
        ln_c_g: ln_cg,
        regressor: regressor.into(),
        passed: fit.slope <= allowed,
        fit,
        allowed_slope: allowed,
    })
}

/// Batch CSV with one row per report.
pub fn write_batch_csv(path: &Path, reports: &[SpectralReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "kernel",
        "m",
        "d",
        "lambda_min",
        "m_gamma",
        "m_pow_d_gamma",
        "satisfied",
        "satisfied_pow_d",
        "precision",
    ])?;
    for r in reports {
        w.write_record([
            r.kernel.label(),
            r.m.to_string(),
            r.d.to_string(),
            format!("{:e}", r.lambda_min),
            format!("{:e}", r.bound_m_gamma),
            format!("{:e}", r.bound_m_pow_d_gamma),
            r.bound_satisfied.to_string(),
            r.bound_pow_d_satisfied.to_string(),
            format!("{:?}", r.precision),
        ])?;
    }
    w.flush()?;
    Ok(())
}
