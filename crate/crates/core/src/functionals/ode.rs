use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::rkhs::Evaluable;

/// Right-hand side `g(x, u, h)` of `h' = g(x, f(x), h)`.
#[derive(Clone, Copy, Debug)]
pub struct Rhs {
    pub name: &'static str,
    pub eval: fn(f64, f64, f64) -> f64,
}

pub const RHS_REGISTRY: [Rhs; 4] = [
    Rhs {
        name: "u",
        eval: |_, u, _| u,
    },
    Rhs {
        name: "h",
        eval: |_, _, h| h,
    },
    Rhs {
        name: "u_minus_h",
        eval: |_, u, h| u - h,
    },
    Rhs {
        name: "sin_u_h",
        eval: |_, u, h| u.sin() * h,
    },
];

pub fn rhs_by_name(name: &str) -> Result<Rhs> {
    let name = match name {
        "u-h" | "u - h" => "u_minus_h",
        "sin(u)*h" | "sin(u)h" => "sin_u_h",
        other => other,
    };
    RHS_REGISTRY
        .iter()
        .find(|r| r.name == name)
        .copied()
        .ok_or_else(|| {
            Error::Argument(format!(
                "unknown ODE right-hand side {name:?}; known: u, h, u_minus_h, sin_u_h"
            ))
        })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeConfig {
    pub rhs: String,
    #[serde(default)]
    pub a: f64,
    #[serde(default = "one")]
    pub b: f64,
    #[serde(default)]
    pub h0: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
}

fn one() -> f64 {
    1.0
}

fn default_steps() -> usize {
    256
}

impl Default for OdeConfig {
    fn default() -> Self {
        Self {
            rhs: "u".into(),
            a: 0.0,
            b: 1.0,
            h0: 0.0,
            steps: default_steps(),
        }
    }
}

/// `h(b)` with the step-halving Richardson estimate of the RK4 error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeSolution {
    pub value: f64,
    pub error_estimate: f64,
}

fn rk4(f: &dyn Evaluable, rhs: Rhs, cfg: &OdeConfig, steps: usize) -> Result<f64> {
    let dt = (cfg.b - cfg.a) / steps as f64;
    let g = rhs.eval;
    let mut h = cfg.h0;
    for i in 0..steps {
        let x = cfg.a + i as f64 * dt;
        let u0 = f.value(&[x]);
        let um = f.value(&[x + 0.5 * dt]);
        let u1 = f.value(&[x + dt]);
        let k1 = g(x, u0, h);
        let k2 = g(x + 0.5 * dt, um, h + 0.5 * dt * k1);
        let k3 = g(x + 0.5 * dt, um, h + 0.5 * dt * k2);
        let k4 = g(x + dt, u1, h + dt * k3);
        h += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !h.is_finite() {
            return Err(Error::Divergence(format!(
                "ODE state became non-finite at x = {x} (rhs {})",
                rhs.name
            )));
        }
    }
    Ok(h)
}

/// Classical fourth-order Runge–Kutta solution of `h' = g(x, f(x), h)` on
/// `[a, b]` with `h(a) = h0`.
pub fn ode_solution_map(f: &dyn Evaluable, cfg: &OdeConfig) -> Result<OdeSolution> {
    if cfg.steps < 16 {
        return arg(format!("ODE needs at least 16 steps, got {}", cfg.steps));
    }
    if !(cfg.b > cfg.a) || !(cfg.a >= 0.0 && cfg.b <= 1.0) {
        return arg(format!("ODE interval [{}, {}] must be inside [0, 1]", cfg.a, cfg.b));
    }
    if f.dim() != 1 {
        return Err(Error::Unsupported("ODE solution map needs d = 1".into()));
    }
    let rhs = rhs_by_name(&cfg.rhs)?;
    let coarse = rk4(f, rhs, cfg, cfg.steps)?;
    let fine = rk4(f, rhs, cfg, 2 * cfg.steps)?;
    Ok(OdeSolution {
        value: coarse,
        error_estimate: (fine - coarse).abs() * 16.0 / 15.0,
    })
}

/// Gronwall constant `C` with `|F(f) - F(f̃)| ≤ C ‖f - f̃‖_∞` for inputs
/// bounded by `kappa` in sup norm: with `L_u`, `L_h` the Lipschitz constants
/// of `g` in `u` and `h`, `C = L_u (e^{L_h (b-a)} - 1) / L_h` (or `L_u (b-a)`).
pub fn gronwall_constant(cfg: &OdeConfig) -> Result<f64> {
    let rhs = rhs_by_name(&cfg.rhs)?;
    let len = cfg.b - cfg.a;
    let (l_u, l_h) = match rhs.name {
        "u" => (1.0, 0.0),
        "h" => (0.0, 1.0),
        "u_minus_h" => (1.0, 1.0),
        // |h| <= |h0| e^{x-a} since |sin u| <= 1.
        "sin_u_h" => (cfg.h0.abs() * len.exp(), 1.0),
        _ => unreachable!(),
    };
    Ok(if l_h == 0.0 {
        l_u * len
    } else {
        l_u * ((l_h * len).exp() - 1.0) / l_h
    })
}
