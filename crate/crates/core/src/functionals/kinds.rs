use std::sync::Arc;

use crate::error::{arg, Result};
use crate::kernels::Kernel;
use crate::numeric::quadrature::simpson_with_estimate;
use crate::rkhs::Evaluable;

use super::ode::{gronwall_constant, ode_solution_map, rhs_by_name, OdeConfig};
use super::weights::{link_by_name, weight_by_name, Link, Weight};
use super::{check_points, require_dim, Evaluation, Functional, FunctionalConfig};

fn integral(f: &dyn Evaluable, w: impl Fn(f64, f64) -> f64, points: usize) -> Result<Evaluation> {
    let q = simpson_with_estimate(|t| w(t, f.value(&[t])), 0.0, 1.0, points)?;
    Ok(Evaluation {
        value: q.value,
        error_estimate: q.error_estimate,
    })
}

/// `F(f) = ∫₀¹ f(t) β(t) dt`.
#[derive(Clone, Debug)]
pub struct LinearIntegral {
    config: FunctionalConfig,
    beta: Arc<dyn Weight>,
}

impl LinearIntegral {
    pub fn from_config(config: &FunctionalConfig) -> Result<Self> {
        check_points(config.quadrature_points)?;
        let beta = weight_by_name(config.beta.as_deref().unwrap_or("one"))?;
        Ok(Self {
            config: config.clone(),
            beta,
        })
    }

    /// Arbitrary weight, e.g. an RKHS element.
    pub fn with_weight(beta: Arc<dyn Weight>, quadrature_points: usize) -> Result<Self> {
        check_points(quadrature_points)?;
        let mut config = FunctionalConfig::linear_integral(&beta.name());
        config.quadrature_points = quadrature_points;
        Ok(Self { config, beta })
    }

    pub fn weight(&self) -> &Arc<dyn Weight> {
        &self.beta
    }
}

impl Functional for LinearIntegral {
    fn config(&self) -> &FunctionalConfig {
        &self.config
    }

    fn evaluate(&self, f: &dyn Evaluable) -> Result<Evaluation> {
        require_dim(f, "linear_integral")?;
        integral(f, |t, v| v * self.beta.value(t), self.config.quadrature_points)
    }

    fn holder_constant(&self, kernel: &dyn Kernel) -> Result<f64> {
        Ok(self.beta.l2_norm() * kernel.kappa())
    }
}

/// Regression map of the generalized functional linear model,
/// `F(f) = g(∫₀¹ f β)`.
#[derive(Clone, Debug)]
pub struct Gflm {
    inner: LinearIntegral,
    link: Link,
}

impl Gflm {
    pub fn from_config(config: &FunctionalConfig) -> Result<Self> {
        let link = link_by_name(config.link.as_deref().unwrap_or("identity"))?;
        let mut inner = LinearIntegral::from_config(config)?;
        inner.config = config.clone();
        Ok(Self { inner, link })
    }

    pub fn link(&self) -> Link {
        self.link
    }
}

impl Functional for Gflm {
    fn config(&self) -> &FunctionalConfig {
        &self.inner.config
    }

    fn evaluate(&self, f: &dyn Evaluable) -> Result<Evaluation> {
        let e = self.inner.evaluate(f)?;
        Ok(Evaluation {
            value: (self.link.apply)(e.value),
            error_estimate: self.link.lipschitz * e.error_estimate,
        })
    }

    /// `C_F = Lip(g) ‖β‖_{L²} κ`.
    fn holder_constant(&self, kernel: &dyn Kernel) -> Result<f64> {
        Ok(self.link.lipschitz * self.inner.beta.l2_norm() * kernel.kappa())
    }
}

/// `F(f) = h(b)` where `h' = g(x, f(x), h)`, `h(a) = h0`.
#[derive(Clone, Debug)]
pub struct OdeMap {
    config: FunctionalConfig,
    ode: OdeConfig,
}

impl OdeMap {
    pub fn from_config(config: &FunctionalConfig) -> Result<Self> {
        let ode = config.ode.clone().unwrap_or_default();
        rhs_by_name(&ode.rhs)?;
        if ode.steps < 16 {
            return arg(format!("ODE needs at least 16 steps, got {}", ode.steps));
        }
        Ok(Self {
            config: config.clone(),
            ode,
        })
    }
}

impl Functional for OdeMap {
    fn config(&self) -> &FunctionalConfig {
        &self.config
    }

    fn evaluate(&self, f: &dyn Evaluable) -> Result<Evaluation> {
        let s = ode_solution_map(f, &self.ode)?;
        Ok(Evaluation {
            value: s.value,
            error_estimate: s.error_estimate,
        })
    }

    fn holder_constant(&self, _kernel: &dyn Kernel) -> Result<f64> {
        gronwall_constant(&self.ode)
    }
}

/// `F(f) = ∫₀¹ f(t)² dt`.
#[derive(Clone, Debug)]
pub struct L2Energy {
    config: FunctionalConfig,
}

impl L2Energy {
    pub fn from_config(config: &FunctionalConfig) -> Result<Self> {
        check_points(config.quadrature_points)?;
        Ok(Self {
            config: config.clone(),
        })
    }
}

impl Functional for L2Energy {
    fn config(&self) -> &FunctionalConfig {
        &self.config
    }

    fn evaluate(&self, f: &dyn Evaluable) -> Result<Evaluation> {
        require_dim(f, "l2_energy")?;
        integral(f, |_, v| v * v, self.config.quadrature_points)
    }

    /// `|∫f² - ∫f̃²| ≤ (‖f‖_∞ + ‖f̃‖_∞) ‖f - f̃‖_∞ ≤ 2κ ‖f - f̃‖_∞`.
    fn holder_constant(&self, kernel: &dyn Kernel) -> Result<f64> {
        Ok(2.0 * kernel.kappa())
    }
}

#[derive(Clone, Debug)]
pub struct ConstantMap {
    config: FunctionalConfig,
    value: f64,
}

impl ConstantMap {
    pub fn from_config(config: &FunctionalConfig) -> Result<Self> {
        let value = config.value.unwrap_or(0.0);
        if !value.is_finite() {
            return arg("constant functional value must be finite");
        }
        Ok(Self {
            config: config.clone(),
            value,
        })
    }
}

impl Functional for ConstantMap {
    fn config(&self) -> &FunctionalConfig {
        &self.config
    }

    fn evaluate(&self, _f: &dyn Evaluable) -> Result<Evaluation> {
        Ok(Evaluation {
            value: self.value,
            error_estimate: 0.0,
        })
    }

    fn holder_constant(&self, _kernel: &dyn Kernel) -> Result<f64> {
        Ok(0.0)
    }

    fn required_dim(&self) -> Option<usize> {
        None
    }
}
