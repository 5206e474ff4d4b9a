use std::sync::Arc;

use rayon::prelude::*;

use super::RkhsFunction;
use crate::error::{arg, Error, Result};
use crate::geometry::PointSet;
use crate::kernels::{eval_in, Kernel, KernelScalar};
use crate::numeric::linalg::{cholesky, cholesky_solve, dot, forward_substitute, Matrix};
use crate::numeric::{Precision, Real};

/// Default cap on the number of interpolation nodes.
pub const DEFAULT_MAX_NODES: usize = 4096;

/// Diagonal jitter escalation: `0`, then `start · trace/N` doubling up to
/// `stop · trace/N`. The multipliers are scaled by the unit roundoff of the
/// working precision relative to `f64`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JitterPolicy {
    pub start: f64,
    pub stop: f64,
}

impl Default for JitterPolicy {
    fn default() -> Self {
        Self {
            start: 1e-12,
            stop: 1e-6,
        }
    }
}

impl JitterPolicy {
    pub fn schedule<T: Real>(&self, trace: f64, n: usize) -> Vec<f64> {
        let scale = T::EPSILON / f64::EPSILON * trace / n as f64;
        let mut out = vec![0.0];
        let mut j = self.start;
        while j <= self.stop * (1.0 + 1e-12) {
            out.push(j * scale);
            j *= 2.0;
        }
        out
    }
}

/// Gram matrix `K[t̄]` of a node set with its (possibly jittered) Cholesky
/// factor.
#[derive(Clone, Debug)]
pub struct GramSystem<T: KernelScalar = f64> {
    kernel: Arc<dyn Kernel>,
    points: PointSet,
    gram: Matrix<T>,
    factor: Matrix<T>,
    jitter_used: f64,
    condition_estimate: f64,
}

impl<T: KernelScalar> GramSystem<T> {
    pub fn build(kernel: Arc<dyn Kernel>, points: PointSet) -> Result<Self> {
        Self::build_with(kernel, points, JitterPolicy::default(), DEFAULT_MAX_NODES)
    }

    pub fn build_with(
        kernel: Arc<dyn Kernel>,
        points: PointSet,
        policy: JitterPolicy,
        max_nodes: usize,
    ) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return arg("node set is empty");
        }
        if points.dim() != kernel.dim() {
            return arg(format!(
                "node dimension {} differs from kernel dimension {}",
                points.dim(),
                kernel.dim()
            ));
        }
        if n > max_nodes {
            return Err(Error::ResourceLimit(format!("{n} nodes exceed the cap {max_nodes}")));
        }
        let gram = gram_matrix::<T>(kernel.as_ref(), &points, &points);
        let trace = gram.trace().to_f64();
        let schedule = policy.schedule::<T>(trace, n);
        for &jitter in &schedule {
            let shifted = if jitter == 0.0 {
                gram.clone()
            } else {
                gram.shifted(T::from_f64(jitter))
            };
            if let Some(factor) = cholesky(&shifted) {
                if jitter > 0.0 {
                    log::debug!("gram factorised with jitter {jitter:e} (N = {n}, {})", T::NAME);
                }
                let diag: Vec<f64> = (0..n).map(|i| factor[(i, i)].to_f64()).collect();
                let hi = diag.iter().cloned().fold(0.0, f64::max);
                let lo = diag.iter().cloned().fold(f64::INFINITY, f64::min);
                return Ok(Self {
                    kernel,
                    points,
                    gram,
                    factor,
                    jitter_used: jitter,
                    condition_estimate: (hi / lo).powi(2),
                });
            }
        }
        Err(Error::SingularGram {
            n,
            max_jitter: *schedule.last().unwrap_or(&0.0),
        })
    }

    pub fn kernel(&self) -> &Arc<dyn Kernel> {
        &self.kernel
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn gram(&self) -> &Matrix<T> {
        &self.gram
    }

    pub fn factor(&self) -> &Matrix<T> {
        &self.factor
    }

    pub fn jitter_used(&self) -> f64 {
        self.jitter_used
    }

    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    pub fn precision(&self) -> Precision {
        Precision::of::<T>()
    }

    /// `k_x = (K(t_1, x), ..., K(t_N, x))`.
    pub fn kernel_column(&self, x: &[f64]) -> Vec<T> {
        self.points
            .iter()
            .map(|t| eval_in::<T>(self.kernel.as_ref(), t, x))
            .collect()
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        cholesky_solve(&self.factor, b)
    }

    /// All nodal functions at `x`: `ψ(x) = K[t̄]^{-1} k_x`.
    pub fn nodal_values(&self, x: &[f64]) -> Vec<T> {
        self.solve(&self.kernel_column(x))
    }

    /// `ψ_i(x)`, zero-based `i`.
    pub fn nodal_eval(&self, i: usize, x: &[f64]) -> Result<f64> {
        if i >= self.len() {
            return arg(format!("nodal index {i} out of range for N = {}", self.len()));
        }
        Ok(self.nodal_values(x)[i].to_f64())
    }

    /// `Pf = Σ_j c_j K(·, t_j)` with `c = K[t̄]^{-1} f(t̄)`.
    pub fn project_t(&self, node_values: &[T]) -> Result<RkhsFunction<T>> {
        if node_values.len() != self.len() {
            return arg(format!(
                "expected {} node values, got {}",
                self.len(),
                node_values.len()
            ));
        }
        let coeffs = self.solve(node_values);
        RkhsFunction::from_point_set(self.kernel.clone(), &self.points, coeffs)
    }

    pub fn project(&self, node_values: &[f64]) -> Result<RkhsFunction<T>> {
        let v: Vec<T> = node_values.iter().map(|&x| T::from_f64(x)).collect();
        self.project_t(&v)
    }

    /// Projection of an RKHS element, with node values computed in `T`.
    pub fn interpolate(&self, f: &RkhsFunction<T>) -> Result<RkhsFunction<T>> {
        let v: Vec<T> = self.points.iter().map(|t| f.eval_t(t)).collect();
        self.project_t(&v)
    }

    /// `P(x)² = K(x,x) - k_xᵀ K[t̄]^{-1} k_x`, clamped at zero.
    pub fn power_function_sq_t(&self, x: &[f64]) -> T {
        let k = self.kernel_column(x);
        let y = forward_substitute(&self.factor, &k);
        let kxx = eval_in::<T>(self.kernel.as_ref(), x, x);
        let p2 = kxx - dot(&y, &y);
        if p2 > T::zero() {
            p2
        } else {
            T::zero()
        }
    }

    pub fn power_function(&self, x: &[f64]) -> f64 {
        self.power_function_sq_t(x).to_f64().sqrt()
    }

    /// Maximum of the power function over `eval_set`.
    pub fn power_function_sup(&self, eval_set: &PointSet) -> Result<f64> {
        if eval_set.dim() != self.points.dim() {
            return arg("evaluation set dimension differs from node dimension");
        }
        let pts: Vec<&[f64]> = eval_set.iter().collect();
        Ok(pts
            .par_iter()
            .map(|x| self.power_function(x))
            .reduce(|| 0.0, f64::max))
    }
}

/// `K[x̄, ȳ]`.
pub fn gram_matrix<T: KernelScalar>(kernel: &dyn Kernel, rows: &PointSet, cols: &PointSet) -> Matrix<T> {
    let mut g = Matrix::zeros(rows.len(), cols.len());
    let same = std::ptr::eq(rows, cols);
    for i in 0..rows.len() {
        let start = if same { i } else { 0 };
        for j in start..cols.len() {
            let v = eval_in::<T>(kernel, rows.point(i), cols.point(j));
            g[(i, j)] = v;
            if same {
                g[(j, i)] = v;
            }
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::uniform_grid;
    use crate::kernels::KernelConfig;
    use crate::numeric::DoubleDouble;

    fn gaussian(sigma: f64) -> Arc<dyn Kernel> {
        KernelConfig::gaussian(sigma, 1).build().unwrap()
    }

    #[test]
    fn small_systems() {
        let single = PointSet::new(1, &[vec![0.0]]).unwrap();
        let s = GramSystem::<f64>::build(gaussian(1.0), single).unwrap();
        assert_eq!(s.gram()[(0, 0)], 1.0);
        assert_eq!(s.factor()[(0, 0)], 1.0);
        let x = [0.7];
        assert!((s.nodal_eval(0, &x).unwrap() - (-0.49f64 / 2.0).exp()).abs() < 1e-15);
        let p = s.power_function(&[1.0]);
        assert!((p - (1.0 - (-1.0f64).exp()).sqrt()).abs() < 1e-15);
        assert!((p - 0.795_07).abs() < 1e-5);

        let two = PointSet::new(1, &[vec![0.0], vec![1.0]]).unwrap();
        let s = GramSystem::<f64>::build(gaussian(1.0), two).unwrap();
        assert_eq!(s.gram()[(0, 1)], (-0.5f64).exp());
        assert_eq!(s.gram()[(1, 0)], (-0.5f64).exp());
    }

    #[test]
    fn narrow_gaussian_on_fine_grid() {
        // Neighbouring nodes are 1/64 apart, so K(t_0, t_1) = e^{-0.0488}: the
        // matrix is far from diagonal and f64 needs the first jitter step.
        let s = GramSystem::<f64>::build(gaussian(0.05), uniform_grid(64, 1).unwrap()).unwrap();
        assert!((s.gram()[(0, 1)] - (-1.0f64 / (64.0f64 * 64.0 * 0.005)).exp()).abs() < 1e-15);
        assert!(s.jitter_used() > 0.0);
        let s = GramSystem::<DoubleDouble>::build(gaussian(0.05), uniform_grid(64, 1).unwrap()).unwrap();
        assert_eq!(s.jitter_used(), 0.0);
        // Spacing 1 between entries gives a genuinely near-diagonal matrix.
        let s = GramSystem::<f64>::build(gaussian(0.05), uniform_grid(4, 1).unwrap()).unwrap();
        assert_eq!(s.jitter_used(), 0.0);
        assert!(s.gram()[(0, 1)] < (-12.0f64).exp());
    }

    #[test]
    fn nodal_functions_are_cardinal() {
        for sigma in [0.5, 1.0] {
            let s = GramSystem::<DoubleDouble>::build(gaussian(sigma), uniform_grid(8, 1).unwrap()).unwrap();
            for i in 0..9 {
                for j in 0..9 {
                    let v = s.nodal_eval(i, s.points().point(j)).unwrap();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((v - want).abs() < 1e-8, "psi_{i}(t_{j}) = {v}");
                }
            }
        }
        let s = GramSystem::<f64>::build(gaussian(1.0), uniform_grid(2, 1).unwrap()).unwrap();
        for t in s.points().iter() {
            let sum: f64 = s.nodal_values(t).iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn factor_reproduces_jittered_gram() {
        let s = GramSystem::<f64>::build(gaussian(1.0), uniform_grid(12, 1).unwrap()).unwrap();
        let l = s.factor();
        let back = l.mat_mul(&l.transpose());
        let norm = s.gram().frobenius_norm();
        for i in 0..13 {
            for j in 0..13 {
                let want = s.gram()[(i, j)] + if i == j { s.jitter_used() } else { 0.0 };
                assert!((back[(i, j)] - want).abs() <= 1e-8 * norm);
            }
        }
    }

    #[test]
    fn projection_examples() {
        let s = GramSystem::<DoubleDouble>::build(gaussian(1.0), uniform_grid(4, 1).unwrap()).unwrap();
        let col = s.kernel_column(&[0.0]);
        let pf = s.project_t(&col).unwrap();
        for (j, c) in pf.coeffs().iter().enumerate() {
            let want = if j == 0 { 1.0 } else { 0.0 };
            assert!((c.to_f64() - want).abs() < 1e-25);
        }
        // Rounded to f64 the data carries ~1e-16 noise, amplified by ||K^-1||.
        let col: Vec<f64> = s.points().iter().map(|t| (-(t[0] * t[0]) / 2.0).exp()).collect();
        let pf = s.project(&col).unwrap();
        for (j, c) in pf.coeffs().iter().enumerate() {
            let want = if j == 0 { 1.0 } else { 0.0 };
            assert!((c.to_f64() - want).abs() < 1e-8);
        }
        let zero = s.project(&[0.0; 5]).unwrap();
        assert!(zero.coeffs().iter().all(|c| c.to_f64() == 0.0));
        assert!(s.project(&[0.0; 4]).is_err());
    }

    #[test]
    fn power_function_basics() {
        let s = GramSystem::<DoubleDouble>::build(gaussian(1.0), uniform_grid(4, 1).unwrap()).unwrap();
        for t in s.points().iter() {
            assert!(s.power_function(t) < 1e-7);
        }
        for i in 0..=100 {
            let p = s.power_function(&[i as f64 / 100.0]);
            assert!((0.0..=1.0).contains(&p));
        }
        let eval = crate::geometry::cell_centers(256, 1).unwrap();
        let s8 = GramSystem::<DoubleDouble>::build(gaussian(1.0), uniform_grid(8, 1).unwrap()).unwrap();
        assert!(s8.power_function_sup(&eval).unwrap() < s.power_function_sup(&eval).unwrap());
    }

    #[test]
    fn jitter_schedule_shape() {
        let sch = JitterPolicy::default().schedule::<f64>(10.0, 10);
        assert_eq!(sch[0], 0.0);
        assert_eq!(sch[1], 1e-12);
        assert!(*sch.last().unwrap() <= 1e-6 && *sch.last().unwrap() > 0.5e-6);
        let dd = JitterPolicy::default().schedule::<DoubleDouble>(10.0, 10);
        assert!(dd[1] < 1e-27);
    }

    #[test]
    fn singular_gram_is_reported() {
        // Two nearly coincident nodes under a very flat kernel.
        let pts = PointSet::new(1, &[vec![0.5], vec![0.5 + 1e-12]]).unwrap();
        let err = GramSystem::<f64>::build(gaussian(50.0), pts.clone());
        assert!(matches!(err, Err(Error::SingularGram { n: 2, .. })) || err.unwrap().jitter_used() > 0.0);
        let strict = JitterPolicy { start: 1e-30, stop: 1e-29 };
        let err = GramSystem::<f64>::build_with(gaussian(50.0), pts, strict, 10).unwrap_err();
        assert!(err.is_numerical());
    }
}
