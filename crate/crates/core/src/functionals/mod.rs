//! Target functionals on the RKHS unit ball and empirical Hölder estimation.

mod kinds;
pub mod ode;
pub mod weights;

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::geometry::{uniform_grid, PointSet};
use crate::kernels::Kernel;
use crate::rkhs::{sample_unit_ball_with, Evaluable};

pub use kinds::{ConstantMap, Gflm, L2Energy, LinearIntegral, OdeMap};
pub use ode::{gronwall_constant, ode_solution_map, rhs_by_name, OdeConfig, OdeSolution, Rhs};
pub use weights::{link_by_name, link_registry, weight_by_name, Link, Weight};

pub const DEFAULT_QUADRATURE_POINTS: usize = 257;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ode: Option<OdeConfig>,
    #[serde(default = "default_points")]
    pub quadrature_points: usize,
    /// Output of the `constant` kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

fn default_points() -> usize {
    DEFAULT_QUADRATURE_POINTS
}

impl FunctionalConfig {
    fn with_kind(kind: &str) -> Self {
        Self {
            kind: kind.into(),
            beta: None,
            link: None,
            ode: None,
            quadrature_points: DEFAULT_QUADRATURE_POINTS,
            value: None,
        }
    }

    pub fn linear_integral(beta: &str) -> Self {
        Self {
            beta: Some(beta.into()),
            ..Self::with_kind("linear_integral")
        }
    }

    pub fn gflm(beta: &str, link: &str) -> Self {
        Self {
            beta: Some(beta.into()),
            link: Some(link.into()),
            ..Self::with_kind("gflm")
        }
    }

    pub fn ode_map(ode: OdeConfig) -> Self {
        Self {
            ode: Some(ode),
            ..Self::with_kind("ode_map")
        }
    }

    pub fn l2_energy() -> Self {
        Self::with_kind("l2_energy")
    }

    pub fn constant(value: f64) -> Self {
        Self {
            value: Some(value),
            ..Self::with_kind("constant")
        }
    }

    pub fn label(&self) -> String {
        let mut s = self.kind.clone();
        for part in [&self.beta, &self.link].into_iter().flatten() {
            s.push(':');
            s.push_str(part);
        }
        if let Some(ode) = &self.ode {
            s.push_str(&format!(":{}", ode.rhs));
        }
        s
    }

    pub fn build(&self) -> Result<Arc<dyn Functional>> {
        FunctionalRegistry::default().build(self)
    }
}

/// Value of a functional with the quadrature or integrator error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub error_estimate: f64,
}

/// A functional `F` on functions over `[0,1]^d`, Hölder on the unit ball.
pub trait Functional: Send + Sync + Debug {
    fn config(&self) -> &FunctionalConfig;

    fn evaluate(&self, f: &dyn Evaluable) -> Result<Evaluation>;

    fn apply(&self, f: &dyn Evaluable) -> Result<f64> {
        Ok(self.evaluate(f)?.value)
    }

    /// Hölder exponent `s`.
    fn holder_exponent(&self) -> f64 {
        1.0
    }

    /// Hölder constant `C_F` on the unit ball of the RKHS of `kernel`.
    fn holder_constant(&self, kernel: &dyn Kernel) -> Result<f64>;

    /// Input dimension the functional accepts, if restricted.
    fn required_dim(&self) -> Option<usize> {
        Some(1)
    }
}

pub(crate) fn require_dim(f: &dyn Evaluable, functional: &str) -> Result<()> {
    if f.dim() != 1 {
        return Err(Error::Unsupported(format!(
            "{functional} is defined for d = 1 only, got d = {}",
            f.dim()
        )));
    }
    Ok(())
}

type Factory = fn(&FunctionalConfig) -> Result<Arc<dyn Functional>>;

/// Functional kinds by name.
pub struct FunctionalRegistry {
    factories: BTreeMap<String, Factory>,
}

impl Default for FunctionalRegistry {
    fn default() -> Self {
        let mut reg = Self {
            factories: BTreeMap::new(),
        };
        reg.register("linear_integral", |c| Ok(Arc::new(LinearIntegral::from_config(c)?)));
        reg.register("gflm", |c| Ok(Arc::new(Gflm::from_config(c)?)));
        reg.register("ode_map", |c| Ok(Arc::new(OdeMap::from_config(c)?)));
        reg.register("l2_energy", |c| Ok(Arc::new(L2Energy::from_config(c)?)));
        reg.register("constant", |c| Ok(Arc::new(ConstantMap::from_config(c)?)));
        reg
    }
}

impl FunctionalRegistry {
    pub fn register(&mut self, name: &str, factory: Factory) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn build(&self, config: &FunctionalConfig) -> Result<Arc<dyn Functional>> {
        let factory = self.factories.get(&config.kind).ok_or_else(|| {
            Error::Argument(format!(
                "unknown functional kind {:?}; known: {}",
                config.kind,
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })?;
        factory(config)
    }
}

pub(crate) fn check_points(points: usize) -> Result<()> {
    if points < 33 || points % 2 == 0 {
        return arg(format!("quadrature_points must be odd and >= 33, got {points}"));
    }
    Ok(())
}

/// Grid used for sup norms in [`empirical_holder`].
pub const HOLDER_GRID_M: usize = 1024;

/// Largest observed `|F(f) - F(f̃)| / ‖f - f̃‖_∞^s` over `n_pairs` random
/// pairs from the unit ball, with sup norms taken on a 1025-point grid.
/// Half the pairs are independent draws; the other half are small
/// perturbations `f̃ = f + δ g` that probe the local constant.
pub fn empirical_holder(
    functional: &dyn Functional,
    kernel: Arc<dyn Kernel>,
    n_pairs: usize,
    seed: u64,
) -> Result<f64> {
    if n_pairs < 100 {
        return arg(format!("empirical_holder needs n_pairs >= 100, got {n_pairs}"));
    }
    let grid = uniform_grid(HOLDER_GRID_M, kernel.dim())?;
    let s = functional.holder_exponent();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for i in 0..n_pairs {
        let r = 1.0 - rng.random::<f64>();
        let f = sample_unit_ball_with(&mut rng, kernel.clone(), 8, r)?;
        let g = if i % 2 == 0 {
            let r2 = 1.0 - rng.random::<f64>();
            sample_unit_ball_with(&mut rng, kernel.clone(), 8, r2)?
        } else {
            let delta = 10f64.powf(-1.0 - 3.0 * rng.random::<f64>());
            let dir = sample_unit_ball_with(&mut rng, kernel.clone(), 8, 1.0)?;
            let shift = f.plus_scaled(&dir, delta)?;
            let norm = shift.norm_t();
            if norm > 1.0 {
                shift.scaled(1.0 / norm)
            } else {
                shift
            }
        };
        let diff = sup_distance(&f, &g, &grid);
        if diff <= 0.0 {
            continue;
        }
        let num = (functional.apply(&f)? - functional.apply(&g)?).abs();
        best = best.max(num / diff.powf(s));
    }
    Ok(best)
}

fn sup_distance(f: &dyn Evaluable, g: &dyn Evaluable, grid: &PointSet) -> f64 {
    grid.iter()
        .map(|x| (f.value(x) - g.value(x)).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelConfig;

    fn gaussian() -> Arc<dyn Kernel> {
        KernelConfig::gaussian(1.0, 1).build().unwrap()
    }

    #[test]
    fn config_round_trip_and_rejection() {
        let c = FunctionalConfig::gflm("sin2pi", "tanh");
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<FunctionalConfig>(&json).unwrap(), c);
        assert!(serde_json::from_str::<FunctionalConfig>(r#"{"kind":"gflm","bogus":1}"#).is_err());
        let c: FunctionalConfig = serde_json::from_str(r#"{"kind":"l2_energy"}"#).unwrap();
        assert_eq!(c.quadrature_points, 257);
        assert!(FunctionalConfig::with_kind("entropy").build().is_err());
        let mut c = FunctionalConfig::l2_energy();
        c.quadrature_points = 32;
        assert!(c.build().is_err());
    }

    #[test]
    fn holder_identity_link_bounded_by_one() {
        let f = FunctionalConfig::gflm("one", "identity").build().unwrap();
        let k = gaussian();
        assert_eq!(f.holder_constant(k.as_ref()).unwrap(), 1.0);
        let ratio = empirical_holder(f.as_ref(), k, 200, 3).unwrap();
        assert!(ratio > 0.3 && ratio <= 1.0 + 1e-6, "{ratio}");
    }

    #[test]
    fn holder_l2_energy_bounded_by_two() {
        let f = FunctionalConfig::l2_energy().build().unwrap();
        let k = gaussian();
        assert_eq!(f.holder_constant(k.as_ref()).unwrap(), 2.0);
        let ratio = empirical_holder(f.as_ref(), k, 200, 4).unwrap();
        assert!(ratio > 0.1 && ratio <= 2.0, "{ratio}");
    }

    #[test]
    fn holder_constant_map_is_zero() {
        let f = FunctionalConfig::constant(3.0).build().unwrap();
        assert_eq!(empirical_holder(f.as_ref(), gaussian(), 100, 5).unwrap(), 0.0);
        assert!(empirical_holder(f.as_ref(), gaussian(), 10, 5).is_err());
    }

    #[test]
    fn holder_is_deterministic() {
        let f = FunctionalConfig::gflm("sin2pi", "tanh").build().unwrap();
        let a = empirical_holder(f.as_ref(), gaussian(), 100, 9).unwrap();
        let b = empirical_holder(f.as_ref(), gaussian(), 100, 9).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
