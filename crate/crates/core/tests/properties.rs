use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rfl_core::experiments::generate_dataset;
use rfl_core::functionals::{empirical_holder, FunctionalConfig};
use rfl_core::geometry::{cell_centers, fill_distance, separation_radius, uniform_grid, PointSet};
use rfl_core::kernels::{Kernel, KernelConfig};
use rfl_core::network::{train, Dataset, TanhNetwork, TrainConfig};
use rfl_core::numeric::linalg::Matrix;
use rfl_core::numeric::quadrature::trapezoid;
use rfl_core::numeric::DoubleDouble;
use rfl_core::rkhs::{sample_unit_ball, GramSystem, RkhsFunction};
use rfl_core::spectral::jacobi::jacobi_eigen;

fn kernels_d1() -> Vec<Arc<dyn Kernel>> {
    [
        KernelConfig::gaussian(0.5, 1),
        KernelConfig::gaussian(1.0, 1),
        KernelConfig::sobolev(1.0, 1),
        KernelConfig::sobolev(2.0, 1),
        KernelConfig::multiquadric(1.0, 1.0, 1),
    ]
    .iter()
    .map(|c| c.build().unwrap())
    .collect()
}

fn kernel_strategy() -> impl Strategy<Value = KernelConfig> {
    (0.3f64..2.0, 0.5f64..2.0, 1usize..=2, 0usize..3).prop_map(|(sigma, beta, d, fam)| match fam {
        0 => KernelConfig::gaussian(sigma, d),
        1 => KernelConfig::multiquadric(sigma, beta, d),
        _ => KernelConfig::sobolev(if d == 1 { 2.0 } else { 2.5 }, d),
    })
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kernel_is_symmetric_bit_exactly(kc in kernel_strategy(), seed in any::<u64>()) {
        let k = kc.build().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..1000 {
            let p = random_points(&mut rng, 2, kc.dim);
            prop_assert_eq!(k.eval(&p[0], &p[1]).unwrap().to_bits(), k.eval(&p[1], &p[0]).unwrap().to_bits());
        }
    }

    #[test]
    fn gram_matrix_is_psd(kc in kernel_strategy(), n in 2usize..=12, seed in any::<u64>()) {
        let k = kc.build().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = random_points(&mut rng, n, kc.dim);
        let g = Matrix::from_fn(n, n, |i, j| k.eval(&pts[i], &pts[j]).unwrap());
        let (eig, _, _) = jacobi_eigen(&g).unwrap();
        let floor = -1e-10 * g.trace();
        prop_assert!(eig.iter().all(|&l| l >= floor), "{eig:?}");
    }

    #[test]
    fn holder_witness(kc in kernel_strategy(), seed in any::<u64>()) {
        let k = kc.build().unwrap();
        let h = k.holder_data();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10_000 {
            let p = random_points(&mut rng, 3, kc.dim);
            let dv: f64 = p[1].iter().zip(&p[2]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let lhs = (k.eval(&p[0], &p[1]).unwrap() - k.eval(&p[0], &p[2]).unwrap()).abs();
            prop_assert!(lhs <= h.c_k * dv.powf(h.alpha) * (1.0 + 1e-12) + 1e-15);
        }
    }

    #[test]
    fn probe_fill_distance_brackets_exact(m in 1usize..=12, d in 1usize..=2, res in 8usize..=40) {
        let grid = uniform_grid(m, d).unwrap();
        let raw: Vec<Vec<f64>> = grid.iter().map(<[f64]>::to_vec).collect();
        let unlabelled = PointSet::new(d, &raw).unwrap();
        let probe = cell_centers(res, d).unwrap();
        let exact = fill_distance(&grid, None).unwrap();
        let est = fill_distance(&unlabelled, Some(&probe)).unwrap();
        // Cell centers are within √d/(2 res) of any point of the cube.
        let probe_res = (d as f64).sqrt() / (2.0 * res as f64);
        prop_assert!(est <= exact + 1e-12);
        prop_assert!(est >= exact - probe_res - 1e-12);
        let q = separation_radius(&unlabelled).unwrap();
        prop_assert!((q - separation_radius(&grid).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn projection_invariants(kidx in 0usize..5, m in prop::sample::select(vec![2usize, 4, 8]), seed in any::<u64>()) {
        let k = kernels_d1()[kidx].clone();
        let system = GramSystem::<DoubleDouble>::build(k.clone(), uniform_grid(m, 1).unwrap()).unwrap();
        let f = sample_unit_ball(k.clone(), 8, 1.0, seed).unwrap();
        let fd: RkhsFunction<DoubleDouble> = f.widen();
        let pf = system.interpolate(&fd).unwrap();
        let r = fd.minus(&pf).unwrap();
        for t in system.points().iter() {
            prop_assert!((pf.eval(t).unwrap() - f.eval(t).unwrap()).abs() <= 1e-8);
            let kt = RkhsFunction::<DoubleDouble>::kernel_section(k.clone(), t).unwrap();
            prop_assert!(r.inner(&kt).unwrap().to_f64().abs() <= 1e-8);
        }
        let (nf, np, nr) = (fd.norm_t().to_f64(), pf.norm_t().to_f64(), r.norm_t().to_f64());
        prop_assert!((nf * nf - np * np - nr * nr).abs() <= 1e-6 * nf * nf);
        for x in cell_centers(256, 1).unwrap().iter() {
            let err = (f.eval(x).unwrap() - pf.eval(x).unwrap()).abs();
            prop_assert!(err <= nf * system.power_function(x) * (1.0 + 1e-6) + 1e-14);
        }
    }

    #[test]
    fn unit_ball_samples_bounded_by_kappa(seed in any::<u64>()) {
        let k = KernelConfig::gaussian(1.0, 1).build().unwrap();
        let f = sample_unit_ball(k, 8, 1.0, seed).unwrap();
        for x in cell_centers(200, 1).unwrap().iter() {
            prop_assert!(f.eval(x).unwrap().abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn network_output_bounded_by_outer_l1(
        input_dim in 1usize..6, w1 in 1usize..10, w2 in 1usize..10, seed in any::<u64>(),
        x in prop::collection::vec(-50.0f64..50.0, 6),
    ) {
        let mut net = TanhNetwork::init(input_dim, (w1, w2), seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in net.params_mut() {
            *p = rng.random_range(-3.0..3.0);
        }
        let l1: f64 = net.outer_weights().iter().map(|a| a.abs()).sum();
        prop_assert!(net.forward(&x[..input_dim]).unwrap().abs() <= l1 * (1.0 + 1e-12));
    }

    #[test]
    fn parallel_gradient_matches_serial(seed in any::<u64>(), rows in 1usize..70) {
        let net = TanhNetwork::init(3, (5, 4), seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let inputs: Vec<f64> = (0..rows * 3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let targets: Vec<f64> = (0..rows).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a = net.gradient(&inputs, &targets).unwrap();
        let b = net.gradient_parallel(&inputs, &targets, 16).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn dataset_and_training_are_seed_deterministic(seed in any::<u64>()) {
        let k = KernelConfig::gaussian(1.0, 1).build().unwrap();
        let f = FunctionalConfig::gflm("sin2pi", "tanh").build().unwrap();
        let a = generate_dataset(&k, f.as_ref(), 4, 50, seed).unwrap();
        let b = generate_dataset(&k, f.as_ref(), 4, 50, seed).unwrap();
        prop_assert_eq!(&a.train, &b.train);
        prop_assert_eq!(&a.heldout, &b.heldout);
        let cfg = TrainConfig { epochs: 5, seed, ..Default::default() };
        let run = |data: &Dataset, held: &Dataset| {
            let mut net = TanhNetwork::init(data.input_dim, (6, 6), seed).unwrap();
            let r = train(&mut net, data, held, &cfg).unwrap();
            (r, net.to_json().unwrap())
        };
        let (ra, na) = run(&a.train, &a.heldout);
        let (rb, nb) = run(&b.train, &b.heldout);
        prop_assert!(ra.loss_curve.iter().all(|l| l.is_finite()));
        prop_assert!(ra.heldout_sup_error >= ra.heldout_mean_abs && ra.heldout_mean_abs >= 0.0);
        prop_assert_eq!(ra, rb);
        prop_assert_eq!(na, nb);
    }

    #[test]
    fn gflm_empirical_holder_within_analytic(seed in any::<u64>(), link in prop::sample::select(vec!["identity", "tanh", "logistic", "sin"])) {
        let k = KernelConfig::gaussian(1.0, 1).build().unwrap();
        let f = FunctionalConfig::gflm("sin2pi", link).build().unwrap();
        let emp = empirical_holder(f.as_ref(), k.clone(), 100, seed).unwrap();
        prop_assert!(emp <= f.holder_constant(k.as_ref()).unwrap());
    }
}

#[test]
fn gamma_m_nonincreasing() {
    for kc in [
        KernelConfig::gaussian(0.5, 1),
        KernelConfig::gaussian(1.0, 2),
        KernelConfig::sobolev(1.0, 1),
        KernelConfig::sobolev(2.0, 1),
        KernelConfig::sobolev(1.5, 2),
    ] {
        let k = kc.build().unwrap();
        let g: Vec<f64> = (1..=40).map(|m| k.ln_gamma_m(m).unwrap()).collect();
        assert!(g.windows(2).all(|w| w[1] <= w[0]), "{}", kc.label());
    }
}

/// `∫ φ̂(ξ) e^{2πiξx} dξ = 2 ∫_0^Ξ φ̂(ξ) cos(2πξx) dξ` by the trapezoid rule.
fn inverse_fourier(k: &dyn Kernel, x: f64, upper: f64, n: usize) -> f64 {
    let pi2 = 2.0 * std::f64::consts::PI;
    2.0 * trapezoid(|s| k.fourier_transform(&[s]).unwrap() * (pi2 * s * x).cos(), 0.0, upper, n)
}

#[test]
fn fourier_transform_reproduces_kernel() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let xs: Vec<f64> = (0..20).map(|_| rng.random_range(0.05..1.0)).collect();
    let g = KernelConfig::gaussian(1.0, 1).build().unwrap();
    let s1 = KernelConfig::sobolev(1.0, 1).build().unwrap();
    let s2 = KernelConfig::sobolev(2.0, 1).build().unwrap();
    for &x in &xs {
        let want = g.eval(&[0.0], &[x]).unwrap();
        assert!((inverse_fourier(g.as_ref(), x, 8.0, 8000) - want).abs() < 1e-6, "gaussian x={x}");
        let want = s2.eval(&[0.0], &[x]).unwrap();
        assert!((inverse_fourier(s2.as_ref(), x, 400.0, 400_000) - want).abs() < 1e-6, "sobolev r=2 x={x}");
        // The r = 1 tail ∫_Ξ^∞ cos(2πξx)/ξ² dξ is O(1/(x Ξ²)).
        let want = s1.eval(&[0.0], &[x]).unwrap();
        assert!((inverse_fourier(s1.as_ref(), x, 4000.0, 4_000_000) - want).abs() < 1e-6, "sobolev r=1 x={x}");
    }
}
