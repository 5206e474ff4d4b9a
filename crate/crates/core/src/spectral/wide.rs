//! Smallest Gram eigenvalue in 256-bit arithmetic, for matrices whose
//! spectrum falls below the `f64` resolution floor.

use std::collections::HashMap;

use astro_float::BigFloat;

use crate::geometry::PointSet;
use super::jacobi::start_component;
use crate::kernels::Kernel;
use crate::numeric::wide::{ln_to_f64, to_f64, WideCtx};

/// Result of the wide computation.
#[derive(Clone, Debug)]
pub struct WideEigen {
    /// Rayleigh quotient at the converged inverse-iteration vector; an upper
    /// bound for `λ_N`.
    pub lambda: f64,
    pub ln_lambda: f64,
    /// `ln` of a certified lower bound (Cholesky of `K - μI` succeeded).
    pub ln_certified_lower: Option<f64>,
    pub iterations: usize,
}

struct Dense {
    n: usize,
    data: Vec<BigFloat>,
}

impl Dense {
    fn at(&self, i: usize, j: usize) -> &BigFloat {
        &self.data[i * self.n + j]
    }
}

/// Gram matrix in 256 bits. Uniform grids use exact squared distances
/// `s / m²` with integer `s`, and evaluate each distinct `s` once.
fn gram(kernel: &dyn Kernel, points: &PointSet, ctx: &mut WideCtx) -> Option<Dense> {
    let n = points.len();
    let d = points.dim();
    let mut data = vec![ctx.zero(); n * n];
    match points.grid_m() {
        Some(m) => {
            let mut cache: HashMap<u64, BigFloat> = HashMap::new();
            let m2 = ctx.int((m * m) as i64);
            let idx = |p: &[f64]| -> Vec<i64> { p.iter().map(|x| (x * m as f64).round() as i64).collect() };
            let ids: Vec<Vec<i64>> = points.iter().map(idx).collect();
            for i in 0..n {
                for j in i..n {
                    let s: i64 = (0..d).map(|k| (ids[i][k] - ids[j][k]).pow(2)).sum();
                    let v = match cache.get(&(s as u64)) {
                        Some(v) => v.clone(),
                        None => {
                            let r2 = ctx.div(&ctx.int(s), &m2);
                            let v = kernel.profile_wide(&r2, ctx)?;
                            cache.insert(s as u64, v.clone());
                            v
                        }
                    };
                    data[i * n + j] = v.clone();
                    data[j * n + i] = v;
                }
            }
        }
        None => {
            for i in 0..n {
                for j in i..n {
                    let mut r2 = ctx.zero();
                    for (a, b) in points.point(i).iter().zip(points.point(j)) {
                        let diff = ctx.sub(&ctx.num(*a), &ctx.num(*b));
                        r2 = ctx.add(&r2, &ctx.mul(&diff, &diff));
                    }
                    let v = kernel.profile_wide(&r2, ctx)?;
                    data[i * n + j] = v.clone();
                    data[j * n + i] = v;
                }
            }
        }
    }
    Some(Dense { n, data })
}

fn cholesky(a: &Dense, shift: &BigFloat, ctx: &WideCtx) -> Option<Dense> {
    let n = a.n;
    let mut l = vec![ctx.zero(); n * n];
    for j in 0..n {
        let mut dsum = ctx.sub(a.at(j, j), shift);
        for k in 0..j {
            let x = &l[j * n + k];
            dsum = ctx.sub(&dsum, &ctx.mul(x, x));
        }
        if dsum.is_negative() || dsum.is_zero() {
            return None;
        }
        let djj = ctx.sqrt(&dsum);
        for i in j + 1..n {
            let mut s = a.at(i, j).clone();
            for k in 0..j {
                s = ctx.sub(&s, &ctx.mul(&l[i * n + k], &l[j * n + k]));
            }
            l[i * n + j] = ctx.div(&s, &djj);
        }
        l[j * n + j] = djj;
    }
    Some(Dense { n, data: l })
}

fn solve(l: &Dense, b: &[BigFloat], ctx: &WideCtx) -> Vec<BigFloat> {
    let n = l.n;
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i].clone();
        for k in 0..i {
            s = ctx.sub(&s, &ctx.mul(l.at(i, k), &y[k]));
        }
        y[i] = ctx.div(&s, l.at(i, i));
    }
    for i in (0..n).rev() {
        let mut s = y[i].clone();
        for k in i + 1..n {
            s = ctx.sub(&s, &ctx.mul(l.at(k, i), &y[k]));
        }
        y[i] = ctx.div(&s, l.at(i, i));
    }
    y
}

fn dot(a: &[BigFloat], b: &[BigFloat], ctx: &WideCtx) -> BigFloat {
    a.iter().zip(b).fold(ctx.zero(), |acc, (x, y)| ctx.add(&acc, &ctx.mul(x, y)))
}

/// Smallest eigenvalue of `K[t̄]` by inverse iteration in 256-bit arithmetic,
/// with a Sylvester-inertia certificate for the lower side. Returns `None`
/// when the kernel has no wide profile or the matrix is not positive definite
/// even at this precision.
pub fn smallest_eigenvalue_wide(kernel: &dyn Kernel, points: &PointSet) -> Option<WideEigen> {
    let mut ctx = WideCtx::default();
    let k = gram(kernel, points, &mut ctx)?;
    let zero = ctx.zero();
    let l = cholesky(&k, &zero, &ctx)?;
    let n = k.n;
    let mut x: Vec<BigFloat> = (0..n).map(|i| ctx.num(start_component(i))).collect();
    let mut mu = ctx.zero();
    let mut iterations = 0;
    for it in 0..400 {
        iterations = it + 1;
        let y = solve(&l, &x, &ctx);
        // With K y = x: Rayleigh quotient of K at y is (yᵀx) / (yᵀy).
        let yy = dot(&y, &y, &ctx);
        let new_mu = ctx.div(&dot(&y, &x, &ctx), &yy);
        let norm = ctx.sqrt(&yy);
        x = y.iter().map(|v| ctx.div(v, &norm)).collect();
        let change = to_f64(&ctx.div(&ctx.sub(&new_mu, &mu), &new_mu)).abs();
        mu = new_mu;
        if change < 1e-30 {
            break;
        }
    }
    let mut ln_certified_lower = None;
    for rel in [1e-9, 1e-6, 1e-3, 1e-1] {
        let shift = ctx.mul(&mu, &ctx.num(1.0 - rel));
        if cholesky(&k, &shift, &ctx).is_some() {
            ln_certified_lower = Some(ln_to_f64(&shift));
            break;
        }
    }
    Some(WideEigen {
        lambda: to_f64(&mu),
        ln_lambda: ln_to_f64(&mu),
        ln_certified_lower,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::uniform_grid;
    use crate::kernels::KernelConfig;
    use crate::numeric::linalg::Matrix;
    use crate::numeric::DoubleDouble;
    use crate::spectral::jacobi::smallest_eigenpair;

    #[test]
    fn agrees_with_double_double_jacobi() {
        let k = KernelConfig::gaussian(1.0, 1).build().unwrap();
        let pts = uniform_grid(6, 1).unwrap();
        let w = smallest_eigenvalue_wide(k.as_ref(), &pts).unwrap();
        let g = Matrix::<DoubleDouble>::from_fn(7, 7, |i, j| {
            crate::kernels::eval_in::<DoubleDouble>(k.as_ref(), pts.point(i), pts.point(j))
        });
        let e = smallest_eigenpair(&g).unwrap().value.to_f64();
        assert!(((w.lambda - e) / e).abs() < 1e-12, "{} vs {e}", w.lambda);
        let lower = w.ln_certified_lower.unwrap();
        assert!(lower <= w.ln_lambda && lower > w.ln_lambda - 1e-6);
    }

    #[test]
    fn resolves_spectra_below_f64() {
        let k = KernelConfig::gaussian(1.0, 1).build().unwrap();
        let w = smallest_eigenvalue_wide(k.as_ref(), &uniform_grid(12, 1).unwrap()).unwrap();
        assert!(w.lambda > 0.0 && w.lambda < 1e-20);
        assert!(w.ln_certified_lower.is_some());
    }

    #[test]
    fn grid_cache_matches_pairwise_distances() {
        let k = KernelConfig::multiquadric(1.0, 0.5, 2).build().unwrap();
        let g = uniform_grid(3, 2).unwrap();
        let plain = PointSet::new(2, &g.iter().map(<[f64]>::to_vec).collect::<Vec<_>>()).unwrap();
        let a = smallest_eigenvalue_wide(k.as_ref(), &g).unwrap();
        let b = smallest_eigenvalue_wide(k.as_ref(), &plain).unwrap();
        // f64 coordinates of the thirds perturb entries by ~1e-16.
        assert!(((a.lambda - b.lambda) / a.lambda).abs() < 1e-9, "{} {}", a.lambda, b.lambda);
    }
}
