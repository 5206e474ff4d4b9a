//! Thin wrapper over `astro-float` for the few computations that need more
//! than double-double precision (smallest eigenvalues of Gaussian Gram
//! matrices on fine or two-dimensional grids).

use astro_float::{BigFloat, Consts, RoundingMode, Sign};

/// Working precision in bits.
pub const WIDE_BITS: usize = 256;

pub struct WideCtx {
    prec: usize,
    rm: RoundingMode,
    consts: Consts,
}

impl std::fmt::Debug for WideCtx {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WideCtx").field("prec", &self.prec).finish()
    }
}

impl Default for WideCtx {
    fn default() -> Self {
        Self::new(WIDE_BITS)
    }
}

impl WideCtx {
    pub fn new(prec: usize) -> Self {
        Self {
            prec,
            rm: RoundingMode::ToEven,
            consts: Consts::new().expect("astro-float constant cache"),
        }
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    pub fn num(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.prec)
    }

    pub fn int(&self, x: i64) -> BigFloat {
        BigFloat::from_i64(x, self.prec)
    }

    pub fn ratio(&self, num: i64, den: i64) -> BigFloat {
        self.div(&self.int(num), &self.int(den))
    }

    pub fn zero(&self) -> BigFloat {
        self.int(0)
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.prec, self.rm)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.prec, self.rm)
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.prec, self.rm)
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.prec, self.rm)
    }

    pub fn sqrt(&self, a: &BigFloat) -> BigFloat {
        a.sqrt(self.prec, self.rm)
    }

    pub fn exp(&mut self, a: &BigFloat) -> BigFloat {
        a.exp(self.prec, self.rm, &mut self.consts)
    }

    pub fn ln(&mut self, a: &BigFloat) -> BigFloat {
        a.ln(self.prec, self.rm, &mut self.consts)
    }

    pub fn pi(&mut self) -> BigFloat {
        self.consts.pi(self.prec, self.rm)
    }

    /// `a^p` for a positive base.
    pub fn powf(&mut self, a: &BigFloat, p: f64) -> BigFloat {
        if p == p.trunc() && p.abs() < 1e6 {
            let r = a.powi(p.abs() as usize, self.prec, self.rm);
            if p < 0.0 {
                self.div(&self.int(1), &r)
            } else {
                r
            }
        } else {
            let l = self.ln(a);
            let lp = self.mul(&l, &self.num(p));
            self.exp(&lp)
        }
    }
}

/// Nearest `f64` (truncated rather than correctly rounded; the error is below
/// one f64 ulp).
pub fn to_f64(x: &BigFloat) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    if x.is_zero() {
        return 0.0;
    }
    let Some((words, _bits, sign, exponent, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    // Mantissa words are little-endian; value = 0.m * 2^exponent.
    let mut frac = 0.0f64;
    let mut scale = 1.0f64;
    for w in words.iter().rev().take(2) {
        scale /= 18_446_744_073_709_551_616.0; // 2^64
        frac += (*w as f64) * scale;
    }
    let mut v = frac;
    // Apply 2^exponent in pieces that cannot overflow individually.
    let mut e = exponent;
    while e > 0 {
        let step = e.min(1000);
        v *= 2f64.powi(step);
        e -= step;
    }
    while e < 0 {
        let step = e.max(-1000);
        v *= 2f64.powi(step);
        e -= step;
    }
    if sign == Sign::Neg {
        -v
    } else {
        v
    }
}

/// Natural logarithm as `f64`, valid far outside the `f64` exponent range.
pub fn ln_to_f64(x: &BigFloat) -> f64 {
    if !x.is_positive() || x.is_zero() {
        return f64::NAN;
    }
    let Some((words, _bits, _sign, exponent, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    let top = *words.last().unwrap_or(&0) as f64 / 18_446_744_073_709_551_616.0;
    top.ln() + exponent as f64 * std::f64::consts::LN_2
}

pub fn is_negative(x: &BigFloat) -> bool {
    x.is_negative() && !x.is_zero()
}

pub fn cmp(a: &BigFloat, b: &BigFloat) -> std::cmp::Ordering {
    match a.cmp(b) {
        Some(c) if c < 0 => std::cmp::Ordering::Less,
        Some(c) if c > 0 => std::cmp::Ordering::Greater,
        _ => std::cmp::Ordering::Equal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_round_trip() {
        let ctx = WideCtx::default();
        for &x in &[1.0, -2.5, 1e-300, 3.0e200, 0.1, -7.25e-17] {
            assert_eq!(to_f64(&ctx.num(x)), x);
        }
        let third = ctx.ratio(1, 3);
        assert!((to_f64(&third) - 1.0 / 3.0).abs() <= f64::EPSILON / 3.0);
    }

    #[test]
    fn ln_outside_f64_range() {
        let mut ctx = WideCtx::default();
        let tiny = ctx.exp(&ctx.num(-1500.0));
        assert_eq!(to_f64(&tiny), 0.0);
        assert!((ln_to_f64(&tiny) + 1500.0).abs() < 1e-9);
    }
}
