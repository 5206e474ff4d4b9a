use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};
use crate::kernels::m_d_constant;
use crate::network::{theoretical_widths, WidthSchedule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    Sobolev,
    Multiquadric,
    Gaussian,
}

impl std::str::FromStr for Theorem {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sobolev" | "matern" => Ok(Self::Sobolev),
            "multiquadric" | "inverse_multiquadric" | "imq" => Ok(Self::Multiquadric),
            "gaussian" => Ok(Self::Gaussian),
            _ => arg(format!("unknown theorem {s:?}; known: sobolev, multiquadric, gaussian")),
        }
    }
}

/// Parameters of the rate theorems. `c` is the decay constant of the power
/// function bound; the theorems do not fix it numerically.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TheoremParams {
    pub d: usize,
    pub s: f64,
    pub r: f64,
    pub sigma: f64,
    pub beta: f64,
    pub c: Option<f64>,
}

impl Default for TheoremParams {
    fn default() -> Self {
        Self {
            d: 1,
            s: 1.0,
            r: 2.0,
            sigma: 1.0,
            beta: 1.0,
            c: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TheoremMetadata {
    pub theorem: Theorem,
    pub big_m: u64,
    pub params: TheoremParams,
    /// `c` actually used (1 when not supplied).
    pub c_used: f64,
    pub m_real: f64,
    pub m: u64,
    pub n_nodes: Option<u64>,
    pub widths: Option<WidthSchedule>,
    /// Right-hand side of the theorem with its unspecified constant set to 1.
    pub error_bound: f64,
    pub error_bound_expression: String,
}

/// Grid size, node count, width schedule and error-bound shape prescribed by
/// the rate theorem for the given `M`. Informational only.
pub fn theorem_metadata(theorem: Theorem, big_m: u64, params: &TheoremParams) -> Result<TheoremMetadata> {
    if big_m < 2 {
        return arg("M must be at least 2");
    }
    let p = *params;
    if p.d == 0 || !(p.s > 0.0 && p.s <= 1.0) || !(p.sigma > 0.0) {
        return arg("theorem parameters need d >= 1, s in (0, 1], sigma > 0");
    }
    let d = p.d as f64;
    let s = p.s;
    let lm = (big_m as f64).ln();
    let c = p.c.unwrap_or(1.0);
    if !(c > 0.0) {
        return arg("c must be positive");
    }
    let pi = std::f64::consts::PI;
    let (m_real, bound, expr) = match theorem {
        Theorem::Sobolev => {
            if !(p.r - d / 2.0 > 1.0) {
                log::warn!("Sobolev theorem assumes r - d/2 > 1 (r = {}, d = {})", p.r, p.d);
            }
            let m = (big_m as f64).powf(1.0 / (2.0 * s * (2.0 * p.r - 1.0)));
            let e = (2.0 * p.r - d) / (2.0 * (2.0 * p.r - 1.0));
            (
                m,
                d.powf(s * (p.r + 0.5)) * (big_m as f64).powf(-e),
                "d^{s(r+1/2)} M^{-(2r-d)/(2(2r-1))}".to_string(),
            )
        }
        Theorem::Multiquadric => {
            let md = m_d_constant(p.d);
            let m = lm / (4.0 * md * p.sigma * s + c * s / d.sqrt());
            let e = c / (4.0 * md * d.sqrt() * p.sigma + c);
            (
                m,
                lm.powf((2.0 * d - s * p.beta).max(0.0)) * (big_m as f64).powf(-e),
                "log(M)^{max(0, 2d - s beta)} M^{-c/(4 M_d sqrt(d) sigma + c)}".to_string(),
            )
        }
        Theorem::Gaussian => {
            let m = 2.0 * lm
                / (c * s / d.sqrt() + (c * c * s * s / d + 4.0 * p.sigma.powi(2) * pi * pi * d * s * lm).sqrt());
            let e = (0.5 * lm.ln() - (c * s + p.sigma * pi * d * s.sqrt()).ln()) / (2.0 * (1.0 + p.sigma * pi * d));
            (
                m,
                lm.powf(d) * (big_m as f64).powf(-e),
                "log(M)^d M^{-(log log M / 2 - log(cs + sigma pi d sqrt(s))) / (2(1 + sigma pi d))}".to_string(),
            )
        }
    };
    // Guard against representation error at exact powers, e.g. 64^{1/6}.
    let m = if (m_real - m_real.round()).abs() < 1e-9 {
        m_real.round()
    } else {
        m_real.ceil()
    }
    .max(1.0) as u64;
    let n_nodes = u32::try_from(p.d).ok().and_then(|e| (m + 1).checked_pow(e));
    Ok(TheoremMetadata {
        theorem,
        big_m,
        params: p,
        c_used: c,
        m_real,
        m,
        n_nodes,
        widths: n_nodes.map(|n| theoretical_widths(n, big_m)),
        error_bound: bound,
        error_bound_expression: expr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sobolev_grid_size() {
        let md = theorem_metadata(Theorem::Sobolev, 64, &TheoremParams::default()).unwrap();
        assert_eq!(md.m, 2);
        assert_eq!(md.n_nodes, Some(3));
        assert_eq!(md.widths.unwrap().w1, 3 * 63);
        // M^{-(2r-d)/(2(2r-1))} = 64^{-1/2} for r = 2, d = 1.
        assert!((md.error_bound - 0.125).abs() < 1e-15);
    }

    #[test]
    fn multiquadric_grid_size() {
        let params = TheoremParams {
            c: Some(1.0),
            ..Default::default()
        };
        let big_m = 10f64.exp().round() as u64;
        let md = theorem_metadata(Theorem::Multiquadric, big_m, &params).unwrap();
        let m1 = std::f64::consts::PI.powi(2) / 3.0;
        let want = (big_m as f64).ln() / (4.0 * m1 + 1.0);
        assert!((md.m_real - want).abs() < 1e-12);
        assert_eq!(md.m, 1);
    }

    #[test]
    fn gaussian_grid_grows_like_sqrt_log() {
        let p = TheoremParams {
            c: Some(1.0),
            ..Default::default()
        };
        let a = theorem_metadata(Theorem::Gaussian, 1 << 20, &p).unwrap();
        let b = theorem_metadata(Theorem::Gaussian, 1 << 60, &p).unwrap();
        assert!(b.m_real > a.m_real);
        let lm = (2f64).powi(60).ln();
        let asym = (lm / std::f64::consts::PI.powi(2)).sqrt();
        assert!((b.m_real / asym - 1.0).abs() < 0.2);
        assert!(theorem_metadata(Theorem::Gaussian, 1, &p).is_err());
        assert!("rbf".parse::<Theorem>().is_err());
    }
}
