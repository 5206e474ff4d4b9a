use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::functionals::Functional;
use crate::geometry::{cell_centers, halton, uniform_grid, PointSet};
use crate::kernels::Kernel;
use crate::network::{train, Dataset, TanhNetwork, TrainConfig, TrainReport};
use crate::numeric::DoubleDouble;
use crate::rkhs::{sample_unit_ball_with, Evaluable, GramSystem, RkhsFunction};
use crate::spectral::{holder_constant_g_report, HolderConstantG};

/// Where the centers of sampled unit-ball functions are placed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterMode {
    /// Uniform in `[0,1]^d`.
    #[default]
    Uniform,
    /// On the grid nodes, so that `Pf = f`.
    Nodes,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingConfig {
    pub n_centers: usize,
    pub centers: CenterMode,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            n_centers: 8,
            centers: CenterMode::Uniform,
        }
    }
}

/// Samples with inputs `f(t̄)` and targets `F(f)`; the last fifth is held
/// out.
#[derive(Clone, Debug)]
pub struct GeneratedData {
    pub nodes: PointSet,
    pub train: Dataset,
    pub heldout: Dataset,
    pub functions: Vec<RkhsFunction>,
}

impl GeneratedData {
    pub fn heldout_functions(&self) -> &[RkhsFunction] {
        &self.functions[self.train.len()..]
    }
}

/// Number of held-out rows for `n` samples.
pub fn heldout_count(n: usize) -> usize {
    n / 5
}

pub fn generate_dataset(
    kernel: &Arc<dyn Kernel>,
    functional: &dyn Functional,
    m: usize,
    n_samples: usize,
    seed: u64,
) -> Result<GeneratedData> {
    generate_dataset_with(kernel, functional, m, n_samples, seed, &SamplingConfig::default())
}

/// Sample `i` draws from its own ChaCha stream, so the rows do not depend on
/// the thread count.
pub fn generate_dataset_with(
    kernel: &Arc<dyn Kernel>,
    functional: &dyn Functional,
    m: usize,
    n_samples: usize,
    seed: u64,
    sampling: &SamplingConfig,
) -> Result<GeneratedData> {
    if let Some(d) = functional.required_dim() {
        if d != kernel.dim() {
            return Err(Error::Unsupported(format!(
                "functional {} needs d = {d}, kernel has d = {}",
                functional.config().kind,
                kernel.dim()
            )));
        }
    }
    if n_samples == 0 {
        return arg("n_samples must be positive");
    }
    let nodes = uniform_grid(m, kernel.dim())?;
    let rows: Vec<(RkhsFunction, Vec<f64>, f64)> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let radius = 1.0 - rng.random::<f64>();
            let f = match sampling.centers {
                CenterMode::Uniform => sample_unit_ball_with(&mut rng, kernel.clone(), sampling.n_centers, radius)?,
                CenterMode::Nodes => node_sample(&mut rng, kernel, &nodes, radius)?,
            };
            let x: Vec<f64> = nodes.iter().map(|t| f.value(t)).collect();
            let y = functional.apply(&f)?;
            if !y.is_finite() {
                return Err(Error::NonFinite(format!("target of sample {i} is not finite")));
            }
            Ok((f, x, y))
        })
        .collect::<Result<_>>()?;
    let n_train = n_samples - heldout_count(n_samples);
    let n = nodes.len();
    let mut functions = Vec::with_capacity(n_samples);
    let (mut tx, mut ty, mut hx, mut hy) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (i, (f, x, y)) in rows.into_iter().enumerate() {
        if i < n_train {
            tx.extend(x);
            ty.push(y);
        } else {
            hx.extend(x);
            hy.push(y);
        }
        functions.push(f);
    }
    Ok(GeneratedData {
        train: Dataset::new(n, tx, ty)?,
        heldout: Dataset::new(n, hx, hy)?,
        nodes,
        functions,
    })
}

fn node_sample(rng: &mut ChaCha8Rng, kernel: &Arc<dyn Kernel>, nodes: &PointSet, radius: f64) -> Result<RkhsFunction> {
    use rand_distr::StandardNormal;
    let centers: Vec<Vec<f64>> = nodes.iter().map(|p| p.to_vec()).collect();
    let coeffs: Vec<f64> = (0..centers.len()).map(|_| rng.sample(StandardNormal)).collect();
    let f = RkhsFunction::new(kernel.clone(), &centers, coeffs)?;
    let norm = f.norm_t();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::NonFinite("node-centered sample has zero norm".into()));
    }
    Ok(f.scaled(radius / norm))
}

/// Points on which sup norms over `[0,1]^d` are approximated.
pub fn evaluation_set(d: usize, resolution: usize) -> Result<PointSet> {
    if d == 1 {
        cell_centers(resolution, 1)
    } else {
        halton(resolution, d)
    }
}

/// `G(f(t̄)) = F(Pf)` with the projection solved in double-double.
pub struct ProjectedTarget<'a> {
    pub system: GramSystem<DoubleDouble>,
    pub functional: &'a dyn Functional,
}

impl<'a> ProjectedTarget<'a> {
    pub fn new(kernel: Arc<dyn Kernel>, nodes: PointSet, functional: &'a dyn Functional) -> Result<Self> {
        Ok(Self {
            system: GramSystem::build(kernel, nodes)?,
            functional,
        })
    }

    /// `Pf` interpolating `f` at the nodes.
    pub fn project(&self, f: &RkhsFunction) -> Result<RkhsFunction<DoubleDouble>> {
        self.system.interpolate(&f.widen())
    }

    pub fn value(&self, f: &RkhsFunction) -> Result<f64> {
        self.functional.apply(&self.project(f)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Decomposition {
    pub m: usize,
    pub n_nodes: usize,
    pub widths: (usize, usize),
    pub n_heldout: usize,
    /// `max |F(f) - F(Pf)|` over held-out samples.
    pub term_i: f64,
    /// `max |F(Pf) - Ĝ(f(t̄))|`.
    pub term_ii: f64,
    /// `max |F(f) - Ĝ(f(t̄))|`.
    pub total: f64,
    pub triangle_holds: bool,
    pub epsilon: f64,
    pub jitter: f64,
    pub c_f: f64,
    pub s: f64,
    pub term_i_bound: f64,
    pub term_i_bound_holds: bool,
    pub c_g: HolderConstantG,
    pub baseline_mean_abs: f64,
    pub baseline_sup: f64,
    pub train: TrainReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecompositionConfig {
    pub m: usize,
    pub n_samples: usize,
    pub widths: (usize, usize),
    pub seed: u64,
    pub eval_resolution: usize,
    pub sampling: SamplingConfig,
    pub train: TrainConfig,
}

impl Default for DecompositionConfig {
    fn default() -> Self {
        Self {
            m: 8,
            n_samples: 1000,
            widths: (64, 64),
            seed: 0,
            eval_resolution: 2048,
            sampling: SamplingConfig::default(),
            train: TrainConfig::default(),
        }
    }
}

/// Splits the uniform error into the projection term and the network term on
/// the held-out samples and checks `total ≤ I + II` and
/// `I ≤ C_F ε^s (1 + 10⁻³)`.
pub fn error_decomposition(
    kernel: &Arc<dyn Kernel>,
    functional: &dyn Functional,
    config: &DecompositionConfig,
) -> Result<(Decomposition, TanhNetwork, GeneratedData)> {
    let data = generate_dataset_with(
        kernel,
        functional,
        config.m,
        config.n_samples,
        config.seed,
        &config.sampling,
    )?;
    let target = ProjectedTarget::new(kernel.clone(), data.nodes.clone(), functional)?;
    let mut net = TanhNetwork::init(data.nodes.len(), config.widths, config.seed)?;
    let report = train(&mut net, &data.train, &data.heldout, &config.train)?;

    let per_sample: Vec<(f64, f64, f64)> = data
        .heldout_functions()
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            let (x, y) = data.heldout.row(i);
            let g = target.value(f)?;
            let net_out = net.forward(x)?;
            Ok(((y - g).abs(), (g - net_out).abs(), (y - net_out).abs()))
        })
        .collect::<Result<_>>()?;
    let max = |k: fn(&(f64, f64, f64)) -> f64| per_sample.iter().map(k).fold(0.0, f64::max);
    let (term_i, term_ii, total) = (max(|t| t.0), max(|t| t.1), max(|t| t.2));

    let eval = evaluation_set(kernel.dim(), config.eval_resolution)?;
    let epsilon = target.system.power_function_sup(&eval)?;
    let s = functional.holder_exponent();
    let c_f = functional.holder_constant(kernel.as_ref())?;
    let bound = c_f * epsilon.powf(s);
    let mean_y = data.train.target_mean();
    let base: Vec<f64> = data.heldout.targets.iter().map(|y| (y - mean_y).abs()).collect();
    let decomposition = Decomposition {
        m: config.m,
        n_nodes: data.nodes.len(),
        widths: config.widths,
        n_heldout: data.heldout.len(),
        term_i,
        term_ii,
        total,
        triangle_holds: total <= term_i + term_ii + 1e-10,
        epsilon,
        jitter: target.system.jitter_used(),
        c_f,
        s,
        term_i_bound: bound,
        term_i_bound_holds: term_i <= bound * (1.0 + 1e-3),
        c_g: holder_constant_g_report(&target.system, s, c_f)?,
        baseline_mean_abs: base.iter().sum::<f64>() / base.len().max(1) as f64,
        baseline_sup: base.iter().copied().fold(0.0, f64::max),
        train: report,
    };
    Ok((decomposition, net, data))
}
