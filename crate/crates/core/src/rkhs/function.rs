use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Evaluable;
use crate::error::{arg, Error, Result};
use crate::geometry::PointSet;
use crate::kernels::{eval_in, Kernel, KernelConfig, KernelScalar};
use crate::numeric::Real;

/// `f = Σ_j a_j K(·, x_j)`.
#[derive(Clone, Debug)]
pub struct RkhsFunction<T: KernelScalar = f64> {
    kernel: Arc<dyn Kernel>,
    dim: usize,
    centers: Vec<f64>,
    coeffs: Vec<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Repr {
    kernel: KernelConfig,
    centers: Vec<Vec<f64>>,
    coeffs: Vec<f64>,
}

impl Serialize for RkhsFunction<f64> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Repr {
            kernel: self.kernel.config(),
            centers: self.centers().map(<[f64]>::to_vec).collect(),
            coeffs: self.coeffs.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RkhsFunction<f64> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = Repr::deserialize(d)?;
        let kernel = r.kernel.build().map_err(serde::de::Error::custom)?;
        RkhsFunction::new(kernel, &r.centers, r.coeffs).map_err(serde::de::Error::custom)
    }
}

impl<T: KernelScalar> RkhsFunction<T> {
    pub fn new(kernel: Arc<dyn Kernel>, centers: &[Vec<f64>], coeffs: Vec<T>) -> Result<Self> {
        let dim = kernel.dim();
        if centers.is_empty() {
            return arg("an RKHS function needs at least one center");
        }
        if centers.len() != coeffs.len() {
            return arg(format!(
                "{} centers but {} coefficients",
                centers.len(),
                coeffs.len()
            ));
        }
        let mut flat = Vec::with_capacity(centers.len() * dim);
        for c in centers {
            if c.len() != dim {
                return arg(format!("center of dimension {} for a d={dim} kernel", c.len()));
            }
            flat.extend_from_slice(c);
        }
        Ok(Self {
            kernel,
            dim,
            centers: flat,
            coeffs,
        })
    }

    pub fn from_point_set(kernel: Arc<dyn Kernel>, centers: &PointSet, coeffs: Vec<T>) -> Result<Self> {
        if centers.dim() != kernel.dim() {
            return arg("center dimension differs from kernel dimension");
        }
        if centers.is_empty() || centers.len() != coeffs.len() {
            return arg("centers and coefficients must be nonempty and of equal length");
        }
        Ok(Self {
            dim: kernel.dim(),
            kernel,
            centers: centers.iter().flatten().copied().collect(),
            coeffs,
        })
    }

    /// The kernel section `K(·, x)`.
    pub fn kernel_section(kernel: Arc<dyn Kernel>, x: &[f64]) -> Result<Self> {
        Self::new(kernel, &[x.to_vec()], vec![T::one()])
    }

    pub fn kernel(&self) -> &Arc<dyn Kernel> {
        &self.kernel
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn centers(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.centers.chunks_exact(self.dim)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn eval_t(&self, x: &[f64]) -> T {
        let k = self.kernel.as_ref();
        let mut s = T::zero();
        for (c, a) in self.centers().zip(&self.coeffs) {
            s += *a * eval_in::<T>(k, c, x);
        }
        s
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return arg(format!("point of dimension {}, expected {}", x.len(), self.dim));
        }
        Ok(self.eval_t(x).to_f64())
    }

    pub fn scaled(&self, s: T) -> Self {
        let mut out = self.clone();
        for a in &mut out.coeffs {
            *a *= s;
        }
        out
    }

    /// `self - other` as a single combination.
    pub fn minus(&self, other: &Self) -> Result<Self> {
        same_kernel(self.kernel.as_ref(), other.kernel.as_ref())?;
        let mut out = self.clone();
        out.centers.extend_from_slice(&other.centers);
        out.coeffs.extend(other.coeffs.iter().map(|&a| -a));
        Ok(out)
    }

    /// `f + t·g`.
    pub fn plus_scaled(&self, other: &Self, t: T) -> Result<Self> {
        same_kernel(self.kernel.as_ref(), other.kernel.as_ref())?;
        let mut out = self.clone();
        out.centers.extend_from_slice(&other.centers);
        out.coeffs.extend(other.coeffs.iter().map(|&a| a * t));
        Ok(out)
    }

    /// `⟨f, g⟩ = aᵀ K[x̄, ȳ] b`.
    pub fn inner(&self, other: &Self) -> Result<T> {
        same_kernel(self.kernel.as_ref(), other.kernel.as_ref())?;
        let k = self.kernel.as_ref();
        let mut s = T::zero();
        for (x, a) in self.centers().zip(&self.coeffs) {
            let mut row = T::zero();
            for (y, b) in other.centers().zip(&other.coeffs) {
                row += *b * eval_in::<T>(k, x, y);
            }
            s += *a * row;
        }
        Ok(s)
    }

    pub fn norm_t(&self) -> T {
        let q = self.inner(self).expect("same kernel");
        if q > T::zero() {
            q.sqrt()
        } else {
            T::zero()
        }
    }

    pub fn cast<U: KernelScalar>(&self) -> RkhsFunction<U> {
        RkhsFunction {
            kernel: self.kernel.clone(),
            dim: self.dim,
            centers: self.centers.clone(),
            coeffs: self.coeffs.iter().map(|a| U::from_f64(a.to_f64())).collect(),
        }
    }
}

impl RkhsFunction<f64> {
    /// Exact widening to another format (f64 values embed exactly).
    pub fn widen<U: KernelScalar>(&self) -> RkhsFunction<U> {
        self.cast()
    }
}

impl<T: KernelScalar> Evaluable for RkhsFunction<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.eval_t(x).to_f64()
    }
}

fn same_kernel(a: &dyn Kernel, b: &dyn Kernel) -> Result<()> {
    if std::ptr::eq(a as *const dyn Kernel as *const u8, b as *const dyn Kernel as *const u8)
        || a.config() == b.config()
    {
        Ok(())
    } else {
        arg(format!(
            "kernel mismatch: {} vs {}",
            a.config().label(),
            b.config().label()
        ))
    }
}

pub fn rkhs_inner<T: KernelScalar>(f: &RkhsFunction<T>, g: &RkhsFunction<T>) -> Result<f64> {
    f.inner(g).map(Real::to_f64)
}

pub fn rkhs_norm<T: KernelScalar>(f: &RkhsFunction<T>) -> f64 {
    f.norm_t().to_f64()
}

/// `max_x |f(x) - g(x)|` over the evaluation set.
pub fn sup_error<T: KernelScalar>(f: &RkhsFunction<T>, g: &RkhsFunction<T>, eval_set: &PointSet) -> Result<f64> {
    same_kernel(f.kernel.as_ref(), g.kernel.as_ref())?;
    if eval_set.dim() != f.dim {
        return arg("evaluation set dimension differs from function dimension");
    }
    let pts: Vec<&[f64]> = eval_set.iter().collect();
    Ok(pts
        .par_iter()
        .map(|x| (f.eval_t(x) - g.eval_t(x)).abs().to_f64())
        .reduce(|| 0.0, f64::max))
}

/// Random element of the ball of radius `norm_target`: uniform centers,
/// standard normal coefficients, rescaled so the RKHS norm is exact.
pub fn sample_unit_ball(
    kernel: Arc<dyn Kernel>,
    n_centers: usize,
    norm_target: f64,
    seed: u64,
) -> Result<RkhsFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_unit_ball_with(&mut rng, kernel, n_centers, norm_target)
}

pub fn sample_unit_ball_with<R: Rng + ?Sized>(
    rng: &mut R,
    kernel: Arc<dyn Kernel>,
    n_centers: usize,
    norm_target: f64,
) -> Result<RkhsFunction> {
    if n_centers == 0 {
        return arg("n_centers must be >= 1");
    }
    if !(norm_target > 0.0 && norm_target <= 1.0) {
        return arg(format!("norm_target must lie in (0, 1], got {norm_target}"));
    }
    let d = kernel.dim();
    for _ in 0..8 {
        let centers: Vec<Vec<f64>> = (0..n_centers)
            .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
            .collect();
        let coeffs: Vec<f64> = (0..n_centers).map(|_| rng.sample(StandardNormal)).collect();
        let f = RkhsFunction::new(kernel.clone(), &centers, coeffs)?;
        let norm = f.norm_t();
        if norm > 1e-150 && norm.is_finite() {
            return Ok(f.scaled(norm_target / norm));
        }
    }
    Err(Error::NonFinite(
        "unit-ball sampling produced a zero-norm draw 8 times".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{cell_centers, uniform_grid};
    use crate::rkhs::GramSystem;
    use crate::numeric::DoubleDouble;

    fn gaussian() -> Arc<dyn Kernel> {
        KernelConfig::gaussian(1.0, 1).build().unwrap()
    }

    #[test]
    fn norms_and_inner_products() {
        let k = gaussian();
        let kx = RkhsFunction::<f64>::kernel_section(k.clone(), &[0.2]).unwrap();
        let ky = RkhsFunction::<f64>::kernel_section(k.clone(), &[0.9]).unwrap();
        assert_eq!(rkhs_norm(&kx), 1.0);
        assert_eq!(rkhs_inner(&kx, &ky).unwrap(), k.eval(&[0.2], &[0.9]).unwrap());
        let f = RkhsFunction::new(k, &[vec![0.0], vec![1.0]], vec![1.0, -1.0]).unwrap();
        let want = 2.0 - 2.0 * (-0.5f64).exp();
        assert!((rkhs_norm(&f).powi(2) - want).abs() < 1e-15);
        assert!((want - 0.786_94).abs() < 1e-5);
    }

    #[test]
    fn kernel_mismatch_rejected() {
        let f = RkhsFunction::<f64>::kernel_section(gaussian(), &[0.2]).unwrap();
        let other = KernelConfig::gaussian(2.0, 1).build().unwrap();
        let g = RkhsFunction::<f64>::kernel_section(other, &[0.2]).unwrap();
        assert!(rkhs_inner(&f, &g).is_err());
        let eval = uniform_grid(4, 1).unwrap();
        assert!(sup_error(&f, &g, &eval).is_err());
    }

    #[test]
    fn sampling_is_exact_and_deterministic() {
        let k = gaussian();
        for seed in 0..100 {
            let f = sample_unit_ball(k.clone(), 8, 1.0, seed).unwrap();
            assert!((rkhs_norm(&f) - 1.0).abs() < 1e-10);
            // |f(x)| <= ||f|| sqrt(K(x,x)) = 1.
            for i in 0..=50 {
                assert!(f.eval(&[i as f64 / 50.0]).unwrap().abs() <= 1.0 + 1e-12);
            }
        }
        let a = sample_unit_ball(k.clone(), 8, 0.3, 7).unwrap();
        let b = sample_unit_ball(k.clone(), 8, 0.3, 7).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(sample_unit_ball(k.clone(), 0, 1.0, 1).is_err());
        assert!(sample_unit_ball(k, 3, 1.5, 1).is_err());
    }

    #[test]
    fn sup_error_properties() {
        let k = gaussian();
        let f = sample_unit_ball(k.clone(), 8, 1.0, 3).unwrap();
        let g = sample_unit_ball(k, 8, 1.0, 4).unwrap();
        let eval = cell_centers(512, 1).unwrap();
        assert_eq!(sup_error(&f, &f, &eval).unwrap(), 0.0);
        assert_eq!(sup_error(&f, &g, &eval).unwrap(), sup_error(&g, &f, &eval).unwrap());
    }

    #[test]
    fn projection_is_orthogonal() {
        let k = gaussian();
        let sys = GramSystem::<DoubleDouble>::build(k.clone(), uniform_grid(8, 1).unwrap()).unwrap();
        let eval = cell_centers(512, 1).unwrap();
        let eps = sys.power_function_sup(&eval).unwrap();
        for seed in 0..10 {
            let f = sample_unit_ball(k.clone(), 8, 1.0, seed).unwrap().widen::<DoubleDouble>();
            let pf = sys.interpolate(&f).unwrap();
            let r = f.minus(&pf).unwrap();
            for t in sys.points().iter() {
                let kt = RkhsFunction::<DoubleDouble>::kernel_section(k.clone(), t).unwrap();
                assert!(r.inner(&kt).unwrap().to_f64().abs() < 1e-8);
            }
            let lhs = f.norm_t().sqr();
            let rhs = pf.norm_t().sqr() + r.norm_t().sqr();
            assert!(((lhs - rhs) / lhs).to_f64().abs() < 1e-6);
            assert!(sup_error(&f, &pf, &eval).unwrap() <= rkhs_norm(&f) * eps + 1e-8);
        }
    }

    #[test]
    fn json_round_trip() {
        let f = sample_unit_ball(gaussian(), 3, 1.0, 11).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.starts_with(r#"{"kernel":{"family":"gaussian""#));
        let g: RkhsFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(g.coeffs(), f.coeffs());
    }
}
