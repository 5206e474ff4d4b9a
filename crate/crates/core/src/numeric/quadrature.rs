use crate::error::{arg, Result};

/// Composite Simpson value together with a Richardson error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub points: usize,
}

/// Composite Simpson rule on `[a, b]` with `points` (odd, ≥ 3) equispaced
/// nodes.
pub fn simpson_values(values: &[f64], a: f64, b: f64) -> Result<f64> {
    let n = values.len();
    if n < 3 || n % 2 == 0 {
        return arg(format!("simpson needs an odd number of points >= 3, got {n}"));
    }
    let h = (b - a) / (n - 1) as f64;
    let mut s = values[0] + values[n - 1];
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    Ok(s * h / 3.0)
}

/// Simpson with `points` nodes, plus the step-halving Richardson estimate
/// `16 |S(h/2) - S(h)| / 15` for the error of `S(h)`.
pub fn simpson_with_estimate(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    points: usize,
) -> Result<Quadrature> {
    if points < 3 || points % 2 == 0 {
        return arg(format!("quadrature_points must be odd and >= 3, got {points}"));
    }
    let fine_n = 2 * points - 1;
    let h = (b - a) / (fine_n - 1) as f64;
    let fine: Vec<f64> = (0..fine_n).map(|i| f(a + i as f64 * h)).collect();
    let coarse: Vec<f64> = fine.iter().step_by(2).copied().collect();
    let s_fine = simpson_values(&fine, a, b)?;
    let s_coarse = simpson_values(&coarse, a, b)?;
    Ok(Quadrature {
        value: s_coarse,
        error_estimate: (s_fine - s_coarse).abs() * 16.0 / 15.0,
        points,
    })
}

/// Trapezoid rule on `[a, b]` with `n` intervals; exponentially accurate for
/// integrands that decay double-exponentially at both ends.
pub fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = 0.5 * (f(a) + f(b));
    for i in 1..n {
        s += f(a + i as f64 * h);
    }
    s * h
}
