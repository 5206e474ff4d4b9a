use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::quadrature::simpson_with_estimate;
use crate::rkhs::{Evaluable, RkhsFunction};

/// Weight function `β` on `[0, 1]`.
pub trait Weight: Send + Sync + Debug {
    fn name(&self) -> String;
    fn value(&self, t: f64) -> f64;
    fn l2_norm(&self) -> f64;
}

#[derive(Clone, Copy, Debug)]
pub struct ConstantOne;

impl Weight for ConstantOne {
    fn name(&self) -> String {
        "one".into()
    }
    fn value(&self, _t: f64) -> f64 {
        1.0
    }
    fn l2_norm(&self) -> f64 {
        1.0
    }
}

/// `β(t) = sin(2πt)`, `‖β‖_{L²} = 1/√2`.
#[derive(Clone, Copy, Debug)]
pub struct Sin2Pi;

impl Weight for Sin2Pi {
    fn name(&self) -> String {
        "sin2pi".into()
    }
    fn value(&self, t: f64) -> f64 {
        (2.0 * std::f64::consts::PI * t).sin()
    }
    fn l2_norm(&self) -> f64 {
        std::f64::consts::FRAC_1_SQRT_2
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Zero;

impl Weight for Zero {
    fn name(&self) -> String {
        "zero".into()
    }
    fn value(&self, _t: f64) -> f64 {
        0.0
    }
    fn l2_norm(&self) -> f64 {
        0.0
    }
}

/// An RKHS element used as a weight; its `L²` norm is computed by Simpson's
/// rule on 2049 points.
impl Weight for RkhsFunction<f64> {
    fn name(&self) -> String {
        format!("rkhs({} centers)", self.len())
    }
    fn value(&self, t: f64) -> f64 {
        Evaluable::value(self, &[t])
    }
    fn l2_norm(&self) -> f64 {
        simpson_with_estimate(|t| Weight::value(self, t).powi(2), 0.0, 1.0, 2049)
            .map(|q| q.value.max(0.0).sqrt())
            .unwrap_or(f64::NAN)
    }
}

pub fn weight_by_name(name: &str) -> Result<Arc<dyn Weight>> {
    match name {
        "one" | "ones" | "constant" => Ok(Arc::new(ConstantOne)),
        "sin2pi" | "sin" | "sin(2pi t)" => Ok(Arc::new(Sin2Pi)),
        "zero" => Ok(Arc::new(Zero)),
        _ => Err(Error::Argument(format!(
            "unknown weight {name:?}; known: one, sin2pi, zero"
        ))),
    }
}

/// Scalar link `g` with its Lipschitz constant on the real line.
#[derive(Clone, Copy, Debug)]
pub struct Link {
    pub name: &'static str,
    pub apply: fn(f64) -> f64,
    pub lipschitz: f64,
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn link_registry() -> BTreeMap<&'static str, Link> {
    [
        Link {
            name: "identity",
            apply: |x| x,
            lipschitz: 1.0,
        },
        Link {
            name: "tanh",
            apply: f64::tanh,
            lipschitz: 1.0,
        },
        Link {
            name: "logistic",
            apply: logistic,
            lipschitz: 0.25,
        },
        Link {
            name: "sin",
            apply: f64::sin,
            lipschitz: 1.0,
        },
    ]
    .into_iter()
    .map(|l| (l.name, l))
    .collect()
}

pub fn link_by_name(name: &str) -> Result<Link> {
    let reg = link_registry();
    reg.get(name).copied().ok_or_else(|| {
        Error::Argument(format!(
            "unknown link {name:?}; known: {}",
            reg.keys().copied().collect::<Vec<_>>().join(", ")
        ))
    })
}
