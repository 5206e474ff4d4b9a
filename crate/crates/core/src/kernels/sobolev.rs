use astro_float::BigFloat;
use statrs::function::gamma::gamma;

use super::{HolderData, Kernel, KernelConfig, KernelFamily};
use crate::error::{arg, Result};
use crate::numeric::special::{half_integer_coefficients, half_integer_order, scaled_bessel_k, scaled_bessel_k_half};
use crate::numeric::wide::WideCtx;
use crate::numeric::{DoubleDouble, Real};

/// Sobolev (Matérn) kernel with `φ̂(ξ) = (1 + |ξ|²)^{-r}` under the
/// `e^{2πiξx}` convention:
///
/// `φ(x) = (2π)^{d/2} 2^{1-r} / Γ(r) · z^ν K_ν(z)`, `z = 2π|x|`, `ν = r - d/2`.
///
/// For `d = 1` this is `π e^{-2π|x|}` at `r = 1` and
/// `(π/2)(1 + 2π|x|) e^{-2π|x|}` at `r = 2`.
#[derive(Clone, Debug)]
pub struct Sobolev {
    r: f64,
    dim: usize,
    nu: f64,
    half: Option<u32>,
    scale: f64,
    scale_dd: DoubleDouble,
    holder_c: f64,
}

impl Sobolev {
    pub fn new(r: f64, dim: usize) -> Result<Self> {
        let d = dim as f64;
        let nu = r - d / 2.0;
        if !(r.is_finite() && nu > 0.0) {
            return arg(format!("sobolev order r={r} must exceed d/2={}", d / 2.0));
        }
        if (nu - nu.round()).abs() < 1e-12 {
            return arg(format!("sobolev order r - d/2 = {nu} must not be an integer"));
        }
        let half = half_integer_order(nu);
        let pi = std::f64::consts::PI;
        let (scale, scale_dd) = match half {
            Some(_) => {
                let s = exact_scale(r, dim);
                (s.to_f64(), s)
            }
            None => {
                let s = (2.0 * pi).powf(d / 2.0) * 2f64.powf(1.0 - r) / gamma(r);
                (s, DoubleDouble::from_f64(s))
            }
        };
        let mut k = Self {
            r,
            dim,
            nu,
            half,
            scale,
            scale_dd,
            holder_c: 0.0,
        };
        k.holder_c = k.estimate_holder_constant();
        Ok(k)
    }

    pub fn order(&self) -> f64 {
        self.r
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    fn radial(&self, rho: f64) -> f64 {
        let z = 2.0 * std::f64::consts::PI * rho;
        self.scale * scaled_bessel_k(self.nu, z)
    }

    /// Largest Hölder ratio `|φ(a) - φ(b)| / |a - b|^α` over radius pairs in
    /// `[0, √d]`. Since `||u-v| - |u-ṽ|| ≤ |v-ṽ|`, this bounds the ratio over
    /// point triples as well. A 448-point grid (about 10⁵ pairs) is followed
    /// by local zooming around the best pair.
    fn estimate_holder_constant(&self) -> f64 {
        let alpha = self.nu.min(1.0);
        let top = (self.dim as f64).sqrt();
        let n = 448;
        let radii: Vec<f64> = (0..n).map(|i| top * i as f64 / (n - 1) as f64).collect();
        let vals: Vec<f64> = radii.iter().map(|&x| self.radial(x)).collect();
        let ratio = |a: f64, fa: f64, b: f64, fb: f64| {
            if a == b {
                0.0
            } else {
                (fa - fb).abs() / (a - b).abs().powf(alpha)
            }
        };
        let (mut best, mut ba, mut bb) = (0.0, 0.0, 0.0);
        for i in 0..n {
            for j in i + 1..n {
                let q = ratio(radii[i], vals[i], radii[j], vals[j]);
                if q > best {
                    (best, ba, bb) = (q, radii[i], radii[j]);
                }
            }
        }
        let mut w = top / (n - 1) as f64;
        let min_gap = 1e-6 * top;
        for _ in 0..8 {
            let (ca, cb) = (ba, bb);
            for i in -10..=10 {
                let a = (ca + w * i as f64 / 10.0).clamp(0.0, top);
                let fa = self.radial(a);
                for j in -10..=10 {
                    let b = (cb + w * j as f64 / 10.0).clamp(0.0, top);
                    if (a - b).abs() < min_gap {
                        continue;
                    }
                    let q = ratio(a, fa, b, self.radial(b));
                    if q > best {
                        (best, ba, bb) = (q, a, b);
                    }
                }
            }
            w *= 0.25;
        }
        best
    }
}

/// `(1 + |ξ|²)^{-r}`.
pub fn spectral_density(r: f64, xi: &[f64]) -> f64 {
    let n2: f64 = xi.iter().map(|x| x * x).sum();
    (1.0 + n2).powf(-r)
}

/// `(2π)^{d/2} 2^{1-r} / Γ(r)` in double-double, for `2r` an integer.
fn exact_scale(r: f64, dim: usize) -> DoubleDouble {
    let pi = DoubleDouble::pi();
    let two = DoubleDouble::from_f64(2.0);
    let half_pow = |base: DoubleDouble, twice: i32| {
        let p = base.powi(twice.div_euclid(2));
        if twice.rem_euclid(2) == 1 {
            p * base.sqrt()
        } else {
            p
        }
    };
    let twice_r = (2.0 * r).round() as i32;
    // Γ(r): factorial for integers, Γ(1/2) = √π recursion otherwise.
    let mut g = if twice_r % 2 == 0 { DoubleDouble::ONE } else { pi.sqrt() };
    let mut x = if twice_r % 2 == 0 { 1.0 } else { 0.5 };
    while x < r - 0.25 {
        g = g.mul_f64(x);
        x += 1.0;
    }
    half_pow(two * pi, dim as i32) * half_pow(two, 2 - twice_r) / g
}

impl Kernel for Sobolev {
    fn family(&self) -> KernelFamily {
        KernelFamily::Sobolev
    }

    fn config(&self) -> KernelConfig {
        KernelConfig::sobolev(self.r, self.dim)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn profile(&self, r2: f64) -> f64 {
        self.radial(r2.sqrt())
    }

    /// Full double-double accuracy for half-integer `ν`; other orders are
    /// only `f64`-accurate.
    fn profile_dd(&self, r2: DoubleDouble) -> DoubleDouble {
        match self.half {
            Some(n) => {
                let z = r2.sqrt() * DoubleDouble::pi().mul_f64(2.0);
                self.scale_dd * scaled_bessel_k_half(n, z)
            }
            None => DoubleDouble::from_f64(self.profile(r2.to_f64())),
        }
    }

    fn profile_wide(&self, r2: &BigFloat, ctx: &mut WideCtx) -> Option<BigFloat> {
        let n = self.half?;
        let pi = ctx.pi();
        let two_pi = ctx.mul(&pi, &ctx.int(2));
        let z = ctx.mul(&ctx.sqrt(r2), &two_pi);
        let mut poly = ctx.zero();
        for c in half_integer_coefficients(n) {
            poly = ctx.add(&ctx.mul(&poly, &z), &ctx.num(c));
        }
        let root = ctx.sqrt(&ctx.div(&pi, &ctx.int(2)));
        let e = ctx.exp(&z.neg());
        let scale = wide_scale(self.r, self.dim, ctx);
        Some(ctx.mul(&ctx.mul(&scale, &root), &ctx.mul(&e, &poly)))
    }

    fn fourier_transform(&self, xi: &[f64]) -> Result<f64> {
        Ok(spectral_density(self.r, xi))
    }

    fn holder_data(&self) -> HolderData {
        HolderData {
            alpha: self.nu.min(1.0),
            c_k: self.holder_c,
            estimated: true,
        }
    }

    fn ln_gamma_m(&self, m: usize) -> Result<f64> {
        let (d, m) = (self.dim as f64, m as f64);
        Ok(-self.r * (1.0 + d * m * m / 4.0).ln())
    }
}

fn wide_scale(r: f64, dim: usize, ctx: &mut WideCtx) -> BigFloat {
    let pi = ctx.pi();
    let two = ctx.int(2);
    let half_pow = |ctx: &mut WideCtx, base: &BigFloat, twice: i32| {
        let p = ctx.powf(base, twice.div_euclid(2) as f64);
        if twice.rem_euclid(2) == 1 {
            ctx.mul(&p, &ctx.sqrt(base))
        } else {
            p
        }
    };
    let twice_r = (2.0 * r).round() as i32;
    let mut g = if twice_r % 2 == 0 { ctx.int(1) } else { ctx.sqrt(&pi) };
    let mut x = if twice_r % 2 == 0 { 1.0 } else { 0.5 };
    while x < r - 0.25 {
        g = ctx.mul(&g, &ctx.num(x));
        x += 1.0;
    }
    let two_pi = ctx.mul(&two, &pi);
    let a = half_pow(ctx, &two_pi, dim as i32);
    let b = half_pow(ctx, &two, 2 - twice_r);
    ctx.div(&ctx.mul(&a, &b), &g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::quadrature::trapezoid;
    use crate::numeric::wide::to_f64;
    use std::f64::consts::PI;

    /// Inverse Fourier transform of `(1 + ξ²)^{-r}` in one dimension,
    /// `2 ∫_0^Ξ cos(2πξx) (1+ξ²)^{-r} dξ` plus an analytic tail bound.
    fn inverse_fourier_1d(r: f64, x: f64) -> f64 {
        let upper = 4000.0;
        let n = 4_000_000;
        2.0 * trapezoid(|s| (2.0 * PI * s * x).cos() * (1.0 + s * s).powf(-r), 0.0, upper, n)
    }

    #[test]
    fn closed_forms_d1() {
        let k1 = Sobolev::new(1.0, 1).unwrap();
        let k2 = Sobolev::new(2.0, 1).unwrap();
        for &x in &[0.0, 0.1, 0.37, 1.0] {
            let z = 2.0 * PI * x;
            let want = PI * (-z).exp();
            assert!((k1.eval(&[0.0], &[x]).unwrap() - want).abs() < 4e-15 * want);
            let want = PI / 2.0 * (1.0 + z) * (-z).exp();
            assert!((k2.eval(&[0.0], &[x]).unwrap() - want).abs() < 4e-15 * want);
        }
        assert!((k1.eval(&[0.0], &[1.0]).unwrap() - 0.005_866_7).abs() < 1e-7);
    }

    #[test]
    fn matches_inverse_fourier_quadrature() {
        let k = Sobolev::new(2.0, 1).unwrap();
        for &x in &[0.05, 0.3, 0.8] {
            let oracle = inverse_fourier_1d(2.0, x);
            assert!((k.profile(x * x) - oracle).abs() < 1e-8, "x={x}");
        }
        let k1 = Sobolev::new(1.0, 1).unwrap();
        let oracle = inverse_fourier_1d(1.0, 1.0);
        assert!((k1.profile(1.0) - oracle).abs() < 1e-6);
    }

    #[test]
    fn closed_forms_d2() {
        let a = Sobolev::new(1.5, 2).unwrap();
        let b = Sobolev::new(2.5, 2).unwrap();
        let x = 0.4f64;
        let z = 2.0 * PI * x;
        let ra = a.eval(&[0.0, 0.0], &[x, 0.0]).unwrap();
        assert!((ra - 2.0 * PI * (-z).exp()).abs() < 1e-14);
        let rb = b.eval(&[0.0, 0.0], &[0.0, x]).unwrap();
        assert!((rb - 2.0 * PI / 3.0 * (1.0 + z) * (-z).exp()).abs() < 1e-14);
    }

    #[test]
    fn non_half_integer_order_is_continuous() {
        let a = Sobolev::new(1.3, 1).unwrap();
        let b = Sobolev::new(1.3 + 1e-7, 1).unwrap();
        for &r2 in &[0.0, 0.04, 0.5] {
            assert!((a.profile(r2) - b.profile(r2)).abs() < 1e-5);
        }
        assert!(a.profile(0.0) > a.profile(0.01));
    }

    #[test]
    fn validation() {
        assert!(Sobolev::new(0.5, 1).is_err());
        assert!(Sobolev::new(1.5, 1).is_err());
        assert!(Sobolev::new(1.0, 2).is_err());
        assert!(Sobolev::new(1.5, 2).is_ok());
    }

    #[test]
    fn fourier_and_gamma() {
        let k = Sobolev::new(1.0, 1).unwrap();
        assert_eq!(k.fourier_transform(&[0.0]).unwrap(), 1.0);
        assert!((k.gamma_m(2).unwrap() - 0.5).abs() < 1e-15);
        // r=2, d=2 violates r - d/2 ∉ ℕ, so only the density itself is defined.
        assert!(Sobolev::new(2.0, 2).is_err());
        assert_eq!(spectral_density(2.0, &[1.0, 2f64.sqrt()]), 1.0 / 16.0);
    }

    #[test]
    fn scale_in_all_formats() {
        let mut ctx = WideCtx::default();
        for (r, d) in [(1.0, 1), (2.0, 1), (1.5, 2), (2.5, 2), (3.0, 3), (3.5, 4)] {
            let k = Sobolev::new(r, d).unwrap();
            let via_gamma = (2.0 * PI).powf(d as f64 / 2.0) * 2f64.powf(1.0 - r) / gamma(r);
            assert!(((k.scale - via_gamma) / k.scale).abs() < 1e-13, "r={r} d={d}");
            for &r2 in &[0.0, 0.02, 0.9] {
                let a = k.profile(r2);
                let b = k.profile_dd(DoubleDouble::from_f64(r2)).to_f64();
                let c = to_f64(&k.profile_wide(&ctx.num(r2), &mut ctx).unwrap());
                assert!((a - b).abs() < 4e-15 * a.abs(), "r={r} d={d} {a} {b}");
                assert!((b - c).abs() < 1e-16 * b.abs(), "r={r} d={d} {b} {c}");
            }
        }
    }

    #[test]
    fn holder_estimate_bounds_derivative() {
        // r=2, d=1: α = 1 and sup|φ'| = π² e^{-1}.
        let h = Sobolev::new(2.0, 1).unwrap().holder_data();
        assert_eq!(h.alpha, 1.0);
        assert!(h.estimated);
        let exact = PI * PI * (-1.0f64).exp();
        assert!((h.c_k - exact).abs() < 1e-6 * exact, "{} vs {exact}", h.c_k);
        let h1 = Sobolev::new(1.0, 1).unwrap().holder_data();
        assert_eq!(h1.alpha, 0.5);
    }
}
