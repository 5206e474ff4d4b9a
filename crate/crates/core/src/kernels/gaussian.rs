use astro_float::BigFloat;

use super::{check_positive, HolderData, Kernel, KernelConfig, KernelFamily};
use crate::error::Result;
use crate::numeric::wide::WideCtx;
use crate::numeric::DoubleDouble;

/// `K(u, v) = exp(-|u - v|² / 2σ²)`.
#[derive(Clone, Debug)]
pub struct Gaussian {
    sigma: f64,
    dim: usize,
    inv_two_sigma2: f64,
    inv_two_sigma2_dd: DoubleDouble,
}

impl Gaussian {
    pub fn new(sigma: f64, dim: usize) -> Result<Self> {
        check_positive("sigma", sigma)?;
        let s2 = DoubleDouble::from_f64(sigma).sqr().mul_f64(2.0);
        Ok(Self {
            sigma,
            dim,
            inv_two_sigma2: 1.0 / (2.0 * sigma * sigma),
            inv_two_sigma2_dd: DoubleDouble::ONE / s2,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl Kernel for Gaussian {
    fn family(&self) -> KernelFamily {
        KernelFamily::Gaussian
    }

    fn config(&self) -> KernelConfig {
        KernelConfig::gaussian(self.sigma, self.dim)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn profile(&self, r2: f64) -> f64 {
        (-r2 * self.inv_two_sigma2).exp()
    }

    fn profile_dd(&self, r2: DoubleDouble) -> DoubleDouble {
        (-(r2 * self.inv_two_sigma2_dd)).exp()
    }

    fn profile_wide(&self, r2: &BigFloat, ctx: &mut WideCtx) -> Option<BigFloat> {
        let s = ctx.num(self.sigma);
        let den = ctx.mul(&ctx.mul(&s, &s), &ctx.int(2));
        let x = ctx.div(r2, &den);
        Some(ctx.exp(&x.neg()))
    }

    fn fourier_transform(&self, xi: &[f64]) -> Result<f64> {
        let pi = std::f64::consts::PI;
        let s2 = self.sigma * self.sigma;
        let n2: f64 = xi.iter().map(|x| x * x).sum();
        Ok((2.0 * s2 * pi).powf(self.dim as f64 / 2.0) * (-2.0 * s2 * pi * pi * n2).exp())
    }

    fn holder_data(&self) -> HolderData {
        HolderData {
            alpha: 1.0,
            c_k: (self.dim as f64).sqrt() / (self.sigma * self.sigma),
            estimated: false,
        }
    }

    fn ln_gamma_m(&self, m: usize) -> Result<f64> {
        let pi = std::f64::consts::PI;
        let s2 = self.sigma * self.sigma;
        let d = self.dim as f64;
        let m = m as f64;
        Ok(0.5 * d * (2.0 * s2 * pi).ln() - s2 * pi * pi * d * m * m / 2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::wide::to_f64;

    #[test]
    fn pointwise_values() {
        let k = Gaussian::new(1.0, 1).unwrap();
        assert_eq!(k.eval(&[0.3], &[0.3]).unwrap(), 1.0);
        assert!((k.eval(&[0.0], &[1.0]).unwrap() - (-0.5f64).exp()).abs() < 1e-16);
        assert!((k.eval(&[0.0], &[1.0]).unwrap() - 0.606_530_7).abs() < 1e-7);
    }

    #[test]
    fn fourier_and_gamma_m() {
        let k = Gaussian::new(1.0, 1).unwrap();
        let root_2pi = (2.0 * std::f64::consts::PI).sqrt();
        assert!((k.fourier_transform(&[0.0]).unwrap() - root_2pi).abs() < 1e-15);
        assert!((k.gamma_m(0).unwrap() - root_2pi).abs() < 1e-15);
        let g2 = k.gamma_m(2).unwrap();
        // Oracle: grid minimisation of the transform over [-1, 1].
        let grid_min = (0..=2000)
            .map(|i| k.fourier_transform(&[-1.0 + i as f64 / 1000.0]).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(((g2 - grid_min) / g2).abs() < 1e-12);
        let closed = root_2pi * (-2.0 * std::f64::consts::PI.powi(2)).exp();
        assert!(((g2 - closed) / closed).abs() < 1e-14);
        assert!((g2 - 6.7e-9).abs() < 0.1e-9, "{g2}");
    }

    #[test]
    fn holder_constants() {
        let h = Gaussian::new(1.0, 1).unwrap().holder_data();
        assert_eq!((h.alpha, h.c_k), (1.0, 1.0));
        assert_eq!(Gaussian::new(0.5, 1).unwrap().holder_data().c_k, 4.0);
    }

    #[test]
    fn three_formats_agree() {
        let k = Gaussian::new(0.7, 2).unwrap();
        let mut ctx = WideCtx::default();
        for &r2 in &[0.0, 0.01, 0.5, 1.7] {
            let a = k.profile(r2);
            let b = k.profile_dd(DoubleDouble::from_f64(r2)).to_f64();
            let c = to_f64(&k.profile_wide(&ctx.num(r2), &mut ctx).unwrap());
            assert!((a - b).abs() <= 2e-16 * a && (b - c).abs() <= 1e-16 * b);
        }
    }
}
