use crate::error::{arg, Result};
use crate::numeric::linalg::{cholesky, cholesky_solve, norm2, Matrix};
use crate::numeric::Real;

/// Smallest eigenpair of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct Eigenpair<T = f64> {
    pub value: T,
    pub vector: Vec<T>,
    /// `‖A v - λ v‖` with `‖v‖ = 1`.
    pub residual: f64,
    pub sweeps: usize,
}

const MAX_SWEEPS: usize = 100;

/// All eigenvalues (ascending) and eigenvectors (columns of the returned
/// matrix) by cyclic Jacobi rotations, stopping once the off-diagonal
/// Frobenius norm is at most `1e-12 ‖A‖_F` (`1e4` unit roundoffs in formats
/// wider than `f64`).
pub fn jacobi_eigen<T: Real>(a: &Matrix<T>) -> Result<(Vec<T>, Matrix<T>, usize)> {
    if !a.is_square() || !a.is_symmetric() {
        return arg("eigensolver needs a symmetric matrix");
    }
    let n = a.rows();
    let mut a = a.clone();
    let mut v = Matrix::<T>::identity(n);
    let fro = a.frobenius_norm();
    let tol = fro * T::from_f64(1e-12_f64.min(1e4 * T::EPSILON).max(T::EPSILON));
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        let mut off = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if (off + off).sqrt() <= tol {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (apq + apq);
                let sign = if theta < T::zero() { -T::one() } else { T::one() };
                let t = sign / (theta.abs() + (T::one() + theta * theta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok((values, vectors, sweeps))
}

pub fn smallest_eigenpair<T: Real>(a: &Matrix<T>) -> Result<Eigenpair<T>> {
    let (values, vectors, sweeps) = jacobi_eigen(a)?;
    let n = a.rows();
    if n == 0 {
        return arg("empty matrix");
    }
    let vector: Vec<T> = (0..n).map(|r| vectors[(r, 0)]).collect();
    let value = values[0];
    let av = a.mat_vec(&vector);
    let diff: Vec<T> = av.iter().zip(&vector).map(|(x, y)| *x - value * *y).collect();
    Ok(Eigenpair {
        value,
        vector,
        residual: norm2(&diff).to_f64(),
        sweeps,
    })
}

/// Smallest eigenvalue of a symmetric matrix, `f64` Jacobi.
pub fn smallest_eigenvalue(a: &Matrix<f64>) -> Result<f64> {
    smallest_eigenpair(a).map(|e| e.value)
}

/// Deterministic start vector without the symmetries of grid Gram matrices
/// (a symmetric start can be orthogonal to the wanted eigenvector).
pub(crate) fn start_component(i: usize) -> f64 {
    let h = ((i as u64 + 1).wrapping_mul(2_654_435_761)) % (1 << 32);
    h as f64 / (1u64 << 32) as f64 - 0.5
}

/// `‖A^{-1}‖_op` by inverse power iteration on a Cholesky factor; `None` if
/// the matrix is not numerically positive definite.
pub fn inverse_power_norm<T: Real>(a: &Matrix<T>, max_iter: usize, rel_tol: f64) -> Option<T> {
    let l = cholesky(a)?;
    let n = a.rows();
    let mut x: Vec<T> = (0..n).map(|i| T::from_f64(start_component(i))).collect();
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut est = T::zero();
    for _ in 0..max_iter {
        let y = cholesky_solve(&l, &x);
        let ny = norm2(&y);
        if !(ny > T::zero()) || !ny.is_finite() {
            return None;
        }
        let prev = est;
        // Rayleigh quotient of A^{-1} at the current unit vector.
        est = x.iter().zip(&y).fold(T::zero(), |acc, (a, b)| acc + *a * *b);
        x = y.into_iter().map(|v| v / ny).collect();
        if (est - prev).abs() <= est.abs() * T::from_f64(rel_tol) {
            break;
        }
    }
    Some(est)
}
