use axb_riesz::group_geometry::{GridSpec, SampledFunction};
use axb_riesz::multiplier_ops::model::{model_kernels, model_operator};
use axb_riesz::multiplier_ops::operator::{
    build_multiplier_operator, domination_ratio, schur_bound, schur_bound_with_test, scaling_covariance_check,
    weighted_opnorm, IntegralOperator1D, MultiplierSpec, UGrid,
};
use axb_riesz::multiplier_ops::representation::{partial_ft_operator, representation_apply};
use axb_riesz::multiplier_ops::symbol::{fitted_epsilon, symbol};
use axb_riesz::multiplier_ops::weights::{a2_characteristic, weight_families, MuckenhouptWeight, WeightKind};
use axb_riesz::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `K_ν(x) = ∫₀^∞ e^{−x cosh t} cosh(νt) dt` by a plain trapezoid rule.
fn bessel_k(nu: f64, x: f64) -> f64 {
    let h: f64 = 1e-3;
    let mut acc = 0.5 * (-x).exp();
    let mut t = h;
    loop {
        let v = (-x * t.cosh()).exp() * (nu * t).cosh();
        acc += v;
        if v < 1e-300 || t > 40.0 {
            break;
        }
        t += h;
    }
    acc * h
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn bessel_oracle_is_sane() {
    // K_{1/2}(x) = √(π/(2x)) e^{−x}
    for x in [0.3, 1.0, 4.0] {
        let want = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x as f64).exp();
        assert!((bessel_k(0.5, x) - want).abs() < 1e-10 * want.max(1.0));
    }
}

#[test]
fn one_dimensional_symbols_match_bessel_transforms() {
    let s0 = symbol(1, &[0], 0).unwrap();
    let s1 = symbol(1, &[0], 1).unwrap();
    for xi in [0.25f64, 0.5, 1.0, 2.0, 4.0, 8.0] {
        let want0 = 2.0 * xi * bessel_k(1.0, xi);
        let got0 = s0.eval(&[xi]).unwrap();
        assert!((got0 - c(want0)).norm() < 1e-4, "xi {xi}: {got0} vs {want0}");
        let want1 = Complex64::new(0.0, -2.0 * xi * bessel_k(0.0, xi));
        let got1 = s1.eval(&[xi]).unwrap();
        assert!((got1 - want1).norm() < 1e-4, "xi {xi}: {got1} vs {want1}");
    }
}

#[test]
fn zero_frequency_and_band() {
    assert!((symbol(1, &[0], 0).unwrap().eval(&[0.0]).unwrap() - c(2.0)).norm() < 1e-6);
    for n in 1..=2 {
        for j in 1..=n {
            let s = symbol(n, &vec![0; n], j).unwrap();
            assert!(s.eval(&vec![0.0; n]).unwrap().norm() < 1e-8);
        }
    }
    let s = symbol(1, &[1], 1).unwrap();
    let beyond = s.band() * 1.01;
    assert!(matches!(s.eval(&[beyond]), Err(Error::OutOfBand(..))));
    assert!(s.edge_level() <= 1e-4 * s.peak());
    assert_eq!(s.eval_extended(&[beyond]).unwrap(), c(0.0));
}

#[test]
fn fitted_decay_exponent_is_positive() {
    for (alpha, j) in [(vec![0u8], 0usize), (vec![0], 1), (vec![1], 0), (vec![1], 1)] {
        let s = symbol(1, &alpha, j).unwrap();
        let eps = fitted_epsilon(&s).unwrap();
        assert!(eps >= 0.3, "α {alpha:?} j {j}: ε = {eps}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symbols_are_conjugate_symmetric(xi in -20.0f64..20.0, alpha in 0u8..2, j in 0usize..2) {
        let s = symbol(1, &[alpha], j).unwrap();
        let a = s.eval(&[xi]).unwrap();
        let b = s.eval(&[-xi]).unwrap();
        prop_assert!((a - b.conj()).norm() < 1e-10);
    }

    #[test]
    fn a2_is_at_least_one_and_scale_free(seed in 0u64..1000, scale in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<f64> = (0..64).map(|_| rng.gen_range(0.1..10.0)).collect();
        let a = a2_characteristic(&w);
        prop_assert!(a >= 1.0);
        let scaled: Vec<f64> = w.iter().map(|v| v * scale).collect();
        prop_assert!((a2_characteristic(&scaled) - a).abs() < 1e-10 * a);
    }
}

#[test]
fn multiplier_support_and_spot_entry() {
    let g = UGrid::new(-4.0, 4.0, 81).unwrap();
    let kj = build_multiplier_operator(&MultiplierSpec::new("Kj", 1, 1, &[0]).unwrap(), &[1.0], g).unwrap();
    let k0 = build_multiplier_operator(&MultiplierSpec::new("K0", 1, 0, &[0]).unwrap(), &[1.0], g).unwrap();
    let kt = build_multiplier_operator(&MultiplierSpec::new("K0_tilde", 1, 0, &[0]).unwrap(), &[1.0], g).unwrap();
    let u = g.coords();
    for i in 0..81 {
        for k in 0..81 {
            let d = u[i] - u[k];
            if d > -1.0 + 1e-9 {
                assert_eq!(kj.kernel()[(i, k)].norm(), 0.0);
            }
            if d.abs() < 1.0 - 1e-9 {
                assert_eq!(k0.kernel()[(i, k)].norm(), 0.0);
                assert_eq!(kt.kernel()[(i, k)].norm(), 0.0);
            }
        }
    }
    let s = symbol(1, &[0], 1).unwrap().eval(&[1.0]).unwrap();
    let entry = kj.kernel()[(20, 40)];
    assert!((u[20] + 2.0).abs() < 1e-12 && u[40].abs() < 1e-12);
    assert!((entry - s / -2.0).norm() < 1e-12);
}

#[test]
fn spec_rejects_bad_indices() {
    assert!(MultiplierSpec::new("Kj", 1, 0, &[0]).is_err());
    assert!(MultiplierSpec::new("K0", 1, 1, &[0]).is_err());
    assert!(MultiplierSpec::new("K0", 2, 0, &[0]).is_err());
    assert!(matches!(MultiplierSpec::new("K9", 1, 0, &[0]), Err(Error::UnknownEntry(_))));
}

#[test]
fn a2_examples() {
    let g = UGrid::new(-10.0, 10.0, 400).unwrap();
    let one = MuckenhouptWeight::on_grid(WeightKind::Constant, &g).unwrap();
    assert_eq!(one.a2_estimate, 1.0);
    let coarse = MuckenhouptWeight::on_grid(WeightKind::Power(0.5), &g).unwrap().a2_estimate;
    let fine = MuckenhouptWeight::on_grid(WeightKind::Power(0.5), &UGrid::new(-10.0, 10.0, 800).unwrap())
        .unwrap()
        .a2_estimate;
    assert!((fine / coarse - 1.0).abs() < 0.05, "{coarse} vs {fine}");
    assert!(MuckenhouptWeight::on_grid(WeightKind::Power(1.0), &g).is_err());

    // |u| is not in A₂: with a fixed spacing the estimate keeps growing with the extent.
    let h = 0.01;
    let mut last = 0.0;
    for half in [10.0, 20.0, 40.0, 80.0] {
        let m = (half / h) as usize;
        let samples: Vec<f64> = (0..2 * m).map(|i| ((i as f64 - m as f64) + 0.5).abs() * h).collect();
        let a = a2_characteristic(&samples);
        assert!(a > last * 1.02, "{a} after {last}");
        last = a;
    }
}

#[test]
fn weight_registry() {
    assert_eq!(weight_families().list(), vec!["abs_u_pow_half", "abs_u_pow_neg_half", "one"]);
    let g = UGrid::new(-5.0, 5.0, 100).unwrap();
    let w = MuckenhouptWeight::on_grid(weight_families().get("abs_u_pow_half").unwrap().kind(), &g).unwrap();
    let inv = w.inverse();
    for (a, b) in w.samples.iter().zip(&inv.samples) {
        assert!((a * b - 1.0).abs() < 1e-14);
    }
}

#[test]
fn identity_and_rank_one_norms() {
    let g = UGrid::new(-3.0, 3.0, 60).unwrap();
    let q = g.weights();
    let u = g.coords();
    let id = IntegralOperator1D::new(g, DMatrix::from_fn(60, 60, |i, k| c(if i == k { 1.0 / q[k] } else { 0.0 })))
        .unwrap();
    let w = MuckenhouptWeight::on_grid(WeightKind::Power(-0.5), &g).unwrap();
    assert!((weighted_opnorm(&id, &w).unwrap() - 1.0).abs() < 1e-9);

    // Kernel g(u)h(u') has norm ‖g‖_{L²(w)}·‖h‖_{L²(1/w)} in the quadrature inner product.
    let gf = |t: f64| (-t * t).exp();
    let hf = |t: f64| 1.0 / (1.0 + t * t);
    let op = IntegralOperator1D::from_real_fn(g, |a, b| gf(a) * hf(b)).unwrap();
    let ng: f64 = (0..60).map(|i| gf(u[i]).powi(2) * w.samples[i] * q[i]).sum::<f64>().sqrt();
    let nh: f64 = (0..60).map(|i| hf(u[i]).powi(2) / w.samples[i] * q[i]).sum::<f64>().sqrt();
    let got = weighted_opnorm(&op, &w).unwrap();
    assert!((got - ng * nh).abs() < 1e-6 * ng * nh, "{got} vs {}", ng * nh);
}

#[test]
fn kj_norm_is_stable_under_refinement() {
    let spec = MultiplierSpec::new("Kj", 1, 1, &[0]).unwrap();
    let norm = |nu: usize| {
        let g = UGrid::new(-20.0, 20.0, nu).unwrap();
        let op = build_multiplier_operator(&spec, &[1.0], g).unwrap();
        weighted_opnorm(&op, &MuckenhouptWeight::on_grid(WeightKind::Constant, &g).unwrap()).unwrap()
    };
    let (a, b) = (norm(400), norm(800));
    assert!((a / b - 1.0).abs() < 0.05, "{a} vs {b}");
}

#[test]
fn model_kernels_and_bounds() {
    assert_eq!(model_kernels().list(), vec!["W", "Zeps", "ZepsStar"]);
    assert!(model_operator("Zeps", 0.0, UGrid::new(-1.0, 1.0, 3).unwrap()).is_err());

    let g = UGrid::new(-30.0, 30.0, 600).unwrap();
    let one = MuckenhouptWeight::on_grid(WeightKind::Constant, &g).unwrap();
    let z = model_operator("Zeps", 0.5, g).unwrap();
    assert!(weighted_opnorm(&z, &one).unwrap() <= schur_bound(&z) * (1.0 + 1e-9));

    // Zε* is the transpose of Zε, so its L²(1/w) norm equals the L²(w) norm of Zε.
    let zs = model_operator("ZepsStar", 0.5, g).unwrap();
    let w = MuckenhouptWeight::on_grid(WeightKind::Power(0.5), &g).unwrap();
    let a = weighted_opnorm(&z, &w).unwrap();
    let b = weighted_opnorm(&zs, &w.inverse()).unwrap();
    assert!((a - b).abs() < 1e-8 * a, "{a} vs {b}");

    // W is bounded by the Schur test with p(t) = |t|^{−1/2}.
    let mut norms = Vec::new();
    for nu in [400, 800] {
        let g = UGrid::new(-20.0, 20.0, nu).unwrap();
        let op = model_operator("W", 0.0, g).unwrap();
        let p: Vec<f64> = g.coords().iter().map(|t| t.abs().powf(-0.5)).collect();
        let n = weighted_opnorm(&op, &MuckenhouptWeight::on_grid(WeightKind::Constant, &g).unwrap()).unwrap();
        assert!(n <= schur_bound_with_test(&op, &p) * (1.0 + 1e-9));
        norms.push(n);
    }
    assert!((norms[1] / norms[0] - 1.0).abs() < 0.05, "{norms:?}");
}

fn kernel_grid(x_half: f64, nx: usize, u_half: f64, nu: usize) -> GridSpec {
    GridSpec::cube(1, x_half, nx, -u_half, u_half, nu).unwrap()
}

fn smooth_input(grid: &UGrid) -> Vec<Complex64> {
    grid.coords().iter().map(|s| Complex64::from_polar((-s * s / 4.0).exp(), 0.3 * s)).collect()
}

#[test]
fn representation_of_x_transform_times_delta() {
    // K = e^{−x²} δ(u) ⇒ σ(K)φ(s) = √π e^{−(e^s ξ)²/4} φ(s).
    let s_grid = UGrid::new(-6.0, 2.0, 81).unwrap();
    let kg = kernel_grid(8.0, 321, 0.1, 3);
    let k = SampledFunction::from_fn(kg.clone(), |x, u| if u.abs() < 1e-12 { (-x[0] * x[0]).exp() / kg.u_weight(1) } else { 0.0 });
    let phi = smooth_input(&s_grid);
    let xi = 0.7;
    let out = representation_apply(&k, &[xi], &phi, &s_grid).unwrap();
    for (i, s) in s_grid.coords().iter().enumerate() {
        let eta = s.exp() * xi;
        let want = phi[i] * (std::f64::consts::PI.sqrt() * (-eta * eta / 4.0).exp());
        assert!((out[i] - want).norm() < 1e-10, "s {s}: {} vs {want}", out[i]);
    }
}

#[test]
fn representation_routes_agree() {
    let s_grid = UGrid::new(-6.0, 6.0, 121).unwrap();
    let k = SampledFunction::from_fn(kernel_grid(6.0, 241, 2.0, 41), |x, u| (-x[0] * x[0] - 4.0 * u * u).exp());
    let phi = smooth_input(&s_grid);
    let a = representation_apply(&k, &[1.3], &phi, &s_grid).unwrap();
    let b = partial_ft_operator(&k, &[1.3], s_grid).unwrap().apply(&phi).unwrap();
    let num: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    assert!(num <= 1e-6 * den, "{num} vs {den}");
}

#[test]
fn representation_of_approximate_identity() {
    let (a, b) = (0.05, 0.1);
    let s_grid = UGrid::new(-6.0, 6.0, 121).unwrap();
    let k = SampledFunction::from_fn(kernel_grid(0.5, 201, 0.3, 7), |x, u| {
        (-(x[0] / a).powi(2) - (u / b).powi(2)).exp() / (std::f64::consts::PI * a * b)
    });
    let phi = smooth_input(&s_grid);
    let out = representation_apply(&k, &[1.0], &phi, &s_grid).unwrap();
    for (i, s) in s_grid.coords().iter().enumerate() {
        if (-3.0..=1.0).contains(s) {
            assert!((out[i] - phi[i]).norm() < 2e-2, "s {s}: {} vs {}", out[i], phi[i]);
        }
    }
}

#[test]
fn representation_rejects_bad_kernels() {
    let s_grid = UGrid::new(-6.0, 6.0, 121).unwrap();
    let phi = smooth_input(&s_grid);
    let wide = SampledFunction::from_fn(kernel_grid(2.0, 81, 1.0, 21), |x, _| (-x[0] * x[0] / 4.0).exp());
    assert!(matches!(representation_apply(&wide, &[1.0], &phi, &s_grid), Err(Error::Divergent(_))));
    let off = SampledFunction::from_fn(kernel_grid(6.0, 241, 0.25, 3), |x, u| (-x[0] * x[0] - 200.0 * u * u).exp());
    assert!(matches!(representation_apply(&off, &[1.0], &phi, &s_grid), Err(Error::GridMismatch(_))));
}

#[test]
fn scaling_covariance() {
    let g = UGrid::new(-10.0, 10.0, 201).unwrap();
    let kj = MultiplierSpec::new("Kj", 1, 1, &[0]).unwrap();
    let k0 = MultiplierSpec::new("K0", 1, 0, &[1]).unwrap();
    assert_eq!(scaling_covariance_check(&kj, &[1.0], 0.0, g).unwrap(), 0.0);
    assert!(scaling_covariance_check(&kj, &[1.0], 1.0, g).unwrap() < 1e-10);
    assert!(scaling_covariance_check(&k0, &[0.5], 2.0, g).unwrap() < 1e-10);
    assert!(matches!(scaling_covariance_check(&k0, &[0.5], 0.05, g), Err(Error::GridMismatch(_))));
}

#[test]
fn k0_is_dominated_by_the_model_kernels() {
    let g = UGrid::new(-10.0, 10.0, 200).unwrap();
    for alpha in [0u8, 1] {
        let spec = MultiplierSpec::new("K0", 1, 0, &[alpha]).unwrap();
        let eps = fitted_epsilon(&symbol(1, &[alpha], 0).unwrap()).unwrap();
        let r = domination_ratio(&spec, &[1.0], eps, g).unwrap();
        assert!(r <= 1.0, "α {alpha}: ratio {r}");
    }
}
