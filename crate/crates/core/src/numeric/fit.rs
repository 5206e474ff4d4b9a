use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};

/// Ordinary least-squares line `y ≈ intercept + slope · x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Residual standard error `sqrt(SSE / (n - 2))`.
    pub residual_std_error: f64,
    pub slope_std_error: f64,
    pub n: usize,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n != y.len() {
        return arg("fit needs equally many x and y values");
    }
    if n < 2 {
        return arg("fit needs at least two points");
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(crate::Error::NonFinite("non-finite value in fit data".into()));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return arg("fit needs at least two distinct x values");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    let (residual_std_error, slope_std_error) = if n > 2 {
        let s = (sse / (nf - 2.0)).sqrt();
        (s, s / sxx.sqrt())
    } else {
        (0.0, 0.0)
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
        residual_std_error,
        slope_std_error,
        n,
    })
}
