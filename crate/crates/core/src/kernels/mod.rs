//! Translation-invariant Mercer kernels on `[0,1]^d`.
//!
//! Every family is radial, `K(u, v) = φ(|u - v|²)`, so implementations only
//! supply the profile `φ` as a function of the squared distance, once per
//! scalar format.

mod gaussian;
mod multiquadric;
mod sobolev;

pub use gaussian::Gaussian;
pub use multiquadric::InverseMultiquadric;
pub use sobolev::{spectral_density as sobolev_spectral_density, Sobolev};

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::Arc;

use astro_float::BigFloat;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{arg, Error, Result};
use crate::numeric::wide::WideCtx;
use crate::numeric::{dist2, DoubleDouble, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    Gaussian,
    InverseMultiquadric,
    Sobolev,
}

impl KernelFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelFamily::Gaussian => "gaussian",
            KernelFamily::InverseMultiquadric => "inverse_multiquadric",
            KernelFamily::Sobolev => "sobolev",
        }
    }
}

/// Serializable kernel descriptor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub family: String,
    #[serde(default = "one")]
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default = "one_usize")]
    pub dim: usize,
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

impl KernelConfig {
    pub fn gaussian(sigma: f64, dim: usize) -> Self {
        Self {
            family: "gaussian".into(),
            sigma,
            beta: None,
            r: None,
            dim,
        }
    }

    pub fn multiquadric(sigma: f64, beta: f64, dim: usize) -> Self {
        Self {
            family: "inverse_multiquadric".into(),
            sigma,
            beta: Some(beta),
            r: None,
            dim,
        }
    }

    pub fn sobolev(r: f64, dim: usize) -> Self {
        Self {
            family: "sobolev".into(),
            sigma: 1.0,
            beta: None,
            r: Some(r),
            dim,
        }
    }

    /// Short human-readable label, used in table rows.
    pub fn label(&self) -> String {
        let mut s = format!("{}(sigma={}", self.family, self.sigma);
        if let Some(b) = self.beta {
            s.push_str(&format!(",beta={b}"));
        }
        if let Some(r) = self.r {
            s.push_str(&format!(",r={r}"));
        }
        s.push_str(&format!(",d={})", self.dim));
        s
    }

    pub fn build(&self) -> Result<Arc<dyn Kernel>> {
        KernelRegistry::default().build(self)
    }
}

/// Hölder exponent and constant of `v ↦ K(u, v)`, uniformly in `u`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderData {
    pub alpha: f64,
    pub c_k: f64,
    /// True when `c_k` is a numerical estimate rather than a closed form.
    pub estimated: bool,
}

pub trait Kernel: Send + Sync + Debug {
    fn family(&self) -> KernelFamily;
    fn config(&self) -> KernelConfig;
    fn dim(&self) -> usize;

    /// `φ` as a function of the squared distance.
    fn profile(&self, r2: f64) -> f64;
    fn profile_dd(&self, r2: DoubleDouble) -> DoubleDouble;
    /// 256-bit profile; `None` if the family has no wide implementation for
    /// its parameters.
    fn profile_wide(&self, r2: &BigFloat, ctx: &mut WideCtx) -> Option<BigFloat>;

    fn fourier_transform(&self, xi: &[f64]) -> Result<f64>;
    fn holder_data(&self) -> HolderData;

    /// `ln Γ_m`, where `Γ_m` is the minimum of the Fourier transform over
    /// `[-m/2, m/2]^d`.
    fn ln_gamma_m(&self, m: usize) -> Result<f64>;

    fn gamma_m(&self, m: usize) -> Result<f64> {
        self.ln_gamma_m(m).map(f64::exp)
    }

    /// `κ = sup_t sqrt(K(t, t))`.
    fn kappa(&self) -> f64 {
        self.profile(0.0).sqrt()
    }

    fn eval(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        let d = self.dim();
        if u.len() != d || v.len() != d {
            return arg(format!(
                "point dimension mismatch: kernel d={d}, got {} and {}",
                u.len(),
                v.len()
            ));
        }
        Ok(self.profile(dist2::<f64>(u, v)))
    }
}

/// Scalar formats a kernel can be evaluated in.
pub trait KernelScalar: Real {
    fn profile(kernel: &dyn Kernel, r2: Self) -> Self;
}

impl KernelScalar for f64 {
    #[inline]
    fn profile(kernel: &dyn Kernel, r2: f64) -> f64 {
        kernel.profile(r2)
    }
}

impl KernelScalar for DoubleDouble {
    #[inline]
    fn profile(kernel: &dyn Kernel, r2: DoubleDouble) -> DoubleDouble {
        kernel.profile_dd(r2)
    }
}

/// Unchecked evaluation in scalar format `T`.
#[inline]
pub fn eval_in<T: KernelScalar>(kernel: &dyn Kernel, u: &[f64], v: &[f64]) -> T {
    T::profile(kernel, dist2::<T>(u, v))
}

type Factory = fn(&KernelConfig) -> Result<Arc<dyn Kernel>>;

/// Kernel families by name.
pub struct KernelRegistry {
    factories: BTreeMap<String, Factory>,
    aliases: BTreeMap<String, String>,
}

impl Default for KernelRegistry {
    fn default() -> Self {
        let mut reg = Self {
            factories: BTreeMap::new(),
            aliases: BTreeMap::new(),
        };
        reg.register("gaussian", |c| Ok(Arc::new(Gaussian::new(c.sigma, c.dim)?)));
        reg.register("inverse_multiquadric", |c| {
            let beta = c.beta.unwrap_or(1.0);
            Ok(Arc::new(InverseMultiquadric::new(c.sigma, beta, c.dim)?))
        });
        reg.register("sobolev", |c| {
            let r = c
                .r
                .ok_or_else(|| Error::Argument("sobolev kernel requires r".into()))?;
            Ok(Arc::new(Sobolev::new(r, c.dim)?))
        });
        reg.alias("multiquadric", "inverse_multiquadric");
        reg.alias("imq", "inverse_multiquadric");
        reg.alias("matern", "sobolev");
        reg
    }
}

impl KernelRegistry {
    pub fn register(&mut self, name: &str, factory: Factory) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn alias(&mut self, alias: &str, target: &str) {
        self.aliases.insert(alias.to_string(), target.to_string());
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn resolve<'a>(&'a self, name: &'a str) -> Option<&'a str> {
        let name = self.aliases.get(name).map_or(name, String::as_str);
        self.factories.contains_key(name).then_some(name)
    }

    pub fn build(&self, config: &KernelConfig) -> Result<Arc<dyn Kernel>> {
        let name = self.resolve(&config.family).ok_or_else(|| {
            Error::Argument(format!(
                "unknown kernel family {:?}; known: {}",
                config.family,
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })?;
        if config.dim == 0 {
            return arg("kernel dimension must be >= 1");
        }
        (self.factories[name])(config)
    }
}

/// `M_d = 12 π Γ²((d+2)/2) / 9`.
///
/// The linear bound `M_d ≤ 6.38 d` holds for `d ≤ 4` only; larger `d` logs a
/// warning.
pub fn m_d_constant(d: usize) -> f64 {
    let g = gamma((d as f64 + 2.0) / 2.0);
    let md = 12.0 * std::f64::consts::PI * g * g / 9.0;
    if md > 6.38 * d as f64 {
        log::warn!("M_d = {md} exceeds 6.38 d for d = {d}");
    }
    md
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        arg(format!("{name} must be positive and finite, got {x}"))
    }
}
