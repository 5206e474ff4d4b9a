use astro_float::BigFloat;

use super::{check_positive, HolderData, Kernel, KernelConfig, KernelFamily};
use crate::error::{Error, Result};
use crate::numeric::wide::WideCtx;
use crate::numeric::{DoubleDouble, Real};

/// `K(u, v) = (σ² + |u - v|²)^{-β}`.
#[derive(Clone, Debug)]
pub struct InverseMultiquadric {
    sigma: f64,
    beta: f64,
    dim: usize,
}

impl InverseMultiquadric {
    pub fn new(sigma: f64, beta: f64, dim: usize) -> Result<Self> {
        check_positive("sigma", sigma)?;
        check_positive("beta", beta)?;
        Ok(Self { sigma, beta, dim })
    }
}

impl Kernel for InverseMultiquadric {
    fn family(&self) -> KernelFamily {
        KernelFamily::InverseMultiquadric
    }

    fn config(&self) -> KernelConfig {
        KernelConfig::multiquadric(self.sigma, self.beta, self.dim)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn profile(&self, r2: f64) -> f64 {
        (self.sigma * self.sigma + r2).powf(-self.beta)
    }

    fn profile_dd(&self, r2: DoubleDouble) -> DoubleDouble {
        let s = DoubleDouble::from_f64(self.sigma);
        Real::powf(s.sqr() + r2, -self.beta)
    }

    fn profile_wide(&self, r2: &BigFloat, ctx: &mut WideCtx) -> Option<BigFloat> {
        let s = ctx.num(self.sigma);
        let base = ctx.add(&ctx.mul(&s, &s), r2);
        Some(ctx.powf(&base, -self.beta))
    }

    fn fourier_transform(&self, _xi: &[f64]) -> Result<f64> {
        Err(Error::Unsupported(
            "Fourier transform of the inverse multiquadric kernel is not implemented".into(),
        ))
    }

    fn holder_data(&self) -> HolderData {
        let d = self.dim as f64;
        HolderData {
            alpha: 1.0,
            c_k: 2.0 * d.sqrt() * self.beta * self.sigma.powf(-2.0 * self.beta - 2.0),
            estimated: false,
        }
    }

    fn ln_gamma_m(&self, _m: usize) -> Result<f64> {
        Err(Error::Unsupported(
            "Gamma_m needs the Fourier transform, unavailable for the inverse multiquadric kernel"
                .into(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_and_constants() {
        let k = InverseMultiquadric::new(1.0, 1.0, 1).unwrap();
        assert_eq!(k.eval(&[0.2], &[0.2]).unwrap(), 1.0);
        assert!((k.eval(&[0.0], &[1.0]).unwrap() - 0.5).abs() < 1e-16);
        let h = InverseMultiquadric::new(1.0, 1.0, 4).unwrap().holder_data();
        assert_eq!((h.alpha, h.c_k), (1.0, 4.0));
    }

    #[test]
    fn no_fourier_transform() {
        let k = InverseMultiquadric::new(1.0, 1.0, 1).unwrap();
        assert!(matches!(k.fourier_transform(&[0.0]), Err(Error::Unsupported(_))));
        assert!(matches!(k.gamma_m(2), Err(Error::Unsupported(_))));
    }

    #[test]
    fn double_double_fractional_power() {
        let k = InverseMultiquadric::new(0.8, 0.75, 1).unwrap();
        let a = k.profile(0.3);
        let b = k.profile_dd(DoubleDouble::from_f64(0.3)).to_f64();
        assert!((a - b).abs() < 4e-16 * a);
    }
}
