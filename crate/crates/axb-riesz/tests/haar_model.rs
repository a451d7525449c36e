use std::collections::BTreeMap;

use axb_riesz::group_geometry::{GridSpec, SampledFunction};
use axb_riesz::haar_model::basis::{
    coefficient, envelope_ratio, fit_envelope_constant, kappa_tail, psi, reconstruction_l1_error,
};
use axb_riesz::haar_model::key_sum::{finite_sum_trial, random_piecewise, PiecewiseConstant};
use axb_riesz::haar_model::*;
use axb_riesz::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn kappa_examples() {
    let fam = DyadicFamily::new(0.5, 1.0).unwrap();
    assert!((fam.kappa(0, 0) - 2f64.powf(-2.5)).abs() < 1e-15);
    assert!((fam.kappa(1, 3) - 2f64.sqrt() * 6f64.powf(-2.5)).abs() < 1e-15);
    assert!((fam.kappa(-2, -1) - 0.5 * 2.25f64.powf(-2.5)).abs() < 1e-15);
    assert!(DyadicFamily::new(0.0, 1.0).is_err());
}

#[test]
fn kappa_rows_match_brute_force() {
    let fam = DyadicFamily::new(0.5, 3.0).unwrap();
    for (m, delta) in [(0, 1.0), (3, 0.75), (-4, 0.75)] {
        let k_max = 2_000_000i64;
        let mut brute: f64 = (-k_max..=k_max).map(|k| fam.kappa(m, k).powf(delta)).sum();
        // Tail of Σ (a + k)^{−p} by its integral.
        let a = 1.0 + 2f64.powi(m);
        let p = 2.5 * delta;
        brute += 2.0 * (3.0 * 2f64.powf(0.5 * m as f64)).powf(delta) * (a + k_max as f64 + 0.5).powf(1.0 - p) / (p - 1.0);
        let got = fam.kappa_power_row(m, delta);
        assert!((got / brute - 1.0).abs() < 1e-7, "m {m}: {got} vs {brute}");
    }
}

#[test]
fn summability_partial_sums_converge() {
    let fam = DyadicFamily::new(0.5, 1.0).unwrap();
    let sums = fam.summability_partial_sums(0.75, 2, 80);
    assert!(sums.windows(2).all(|w| w[1] >= w[0]));
    let last = sums[80];
    assert!(sums[80] - sums[60] < 1e-4 * last);
    assert!(sums[80] - sums[60] < 1e-2 * (sums[40] - sums[20]));
}

#[test]
fn haar_pairings() {
    assert!((haar_pairing((0.0, 1.0), (0.0, 1.0)) - 1.0).abs() < 1e-15);
    let (a, b) = DyadicFamily::interval(3, -2);
    assert!((haar_pairing((a, b), (a, b)) - 1.0).abs() < 1e-15);
    // ψ_J is constant on a half of J, so a nested ψ_I pairs to zero.
    assert_eq!(haar_pairing((0.0, 0.5), (0.0, 2.0)), 0.0);
    assert_eq!(haar_pairing((3.0, 4.0), (0.0, 2.0)), 0.0);
    // Shifted by a quarter: three quarter-length overlaps, two of them positive.
    assert!((haar_pairing((0.25, 1.25), (0.0, 1.0)) - 0.25).abs() < 1e-15);
    assert!((haar_pairing((0.5, 1.5), (0.0, 1.0)) + 0.5).abs() < 1e-15);
}

#[test]
fn coefficient_routes_agree() {
    for name in test_profiles().list() {
        let rho = test_profiles().get(&name).unwrap();
        for (a, b) in [(-0.3, 0.6), (0.1, 1.1), (-2.0, -1.2)] {
            let closed = 2.0 * rho.primitive(0.5 * (a + b)) - rho.primitive(a) - rho.primitive(b);
            assert!((coefficient(rho, a, b) - closed).abs() < 1e-12, "{name} on [{a}, {b})");
        }
    }
}

#[test]
fn envelope_and_reconstruction() {
    let eps = 0.5;
    let profiles: Vec<_> = test_profiles().list().into_iter().map(|n| test_profiles().get(&n).unwrap()).collect();
    let coeffs: Vec<_> = profiles.iter().map(|r| haar_coefficients(*r, 4)).collect();
    let c_eps = fit_envelope_constant(eps, &coeffs.iter().collect::<Vec<_>>());
    let fam = DyadicFamily::new(eps, c_eps).unwrap();
    for (rho, c4) in profiles.iter().zip(&coeffs) {
        assert!(envelope_ratio(&fam, c4) <= 1.0 + 1e-12);
        let mut last = f64::INFINITY;
        for m in [4, 6, 8] {
            let c = haar_coefficients(*rho, m);
            let err = reconstruction_l1_error(*rho, &c, m, 8.0);
            assert!(err < last, "{} at {m}: {err}", rho.name());
            last = err;
        }
        let c8 = haar_coefficients(*rho, 8);
        assert!(reconstruction_l1_error(*rho, &c8, 8, 8.0) <= kappa_tail(&fam, 8));
    }
}

#[test]
fn haar_like_function_basics() {
    let part = HaarPartition::new(2.0, 5.0).unwrap();
    assert_eq!(part.offset, 1.0);
    let f = HaarLikeFunction::new(part, [(0, 3.0), (2, -1.0)].into_iter().collect());
    assert_eq!(f.eval(1.5), 1.5);
    assert_eq!(f.eval(2.5), -1.5);
    assert_eq!(f.eval(5.5), -0.5);
    assert_eq!(f.eval(3.5), 0.0);
    assert_eq!(f.l1_norm(), 4.0);
    assert!(HaarPartition::new(0.0, 0.0).is_err());
}

#[test]
fn key_sum_matches_direct_evaluation() {
    let beta = 0.5;
    let fam = random_haar_family(7, 4, 3, beta).unwrap();
    let s = key_sum(&fam, beta).unwrap();
    // On a fine grid aligned with every breakpoint, ∫|S(·,k)| is an exact midpoint sum.
    let step = beta / 64.0;
    let span = 2.0 * 3.0 * beta * 8.0 * 2.0;
    for k in [-5i64, -1, 0, 2] {
        let direct: f64 = (0..(2.0 * span / step) as i64)
            .map(|i| {
                let t = -span + (i as f64 + 0.5) * step;
                fam.iter().filter(|(h, _)| **h > k).map(|(h, d)| d.eval(t) / (h - k) as f64).sum::<f64>().abs() * step
            })
            .sum();
        let flow: f64 = s.slice(k).iter().zip(s.measures()).map(|(v, m)| v.abs() * m).sum();
        assert!((direct - flow).abs() < 1e-12 * direct.max(1.0), "k {k}: {direct} vs {flow}");
    }
    assert_eq!(key_sum(&BTreeMap::new(), 1.0).unwrap().cells(), 0);
}

#[test]
fn weak_norm_of_dyadic_reciprocal() {
    // 1/t sampled as 2^i on [2^{−i−1}, 2^{−i}): the weak norm is 1 − 2^{−N}.
    let big_n = 12;
    let values: Vec<f64> = (0..big_n).map(|i| 2f64.powi(i)).collect();
    let measures: Vec<f64> = (0..big_n).map(|i| 2f64.powi(-i - 1)).collect();
    let g = StepFunction::new(values, measures).unwrap();
    let exact = weak_norm_exact(&g);
    assert!((exact - (1.0 - 2f64.powi(-big_n))).abs() < 1e-14);
    assert!((g.l1_norm() - big_n as f64 / 2.0).abs() < 1e-12);
    let r = weak_ratio(&g, 1.0).unwrap();
    assert!(r <= exact && r >= exact / 10f64.powf(6.0 / 59.0), "{r} vs {exact}");
    assert!(weak_ratio(&g, 0.0).is_err());
}

#[test]
fn finite_sums_obey_the_log_bound() {
    for seed in 0..50 {
        let one = finite_sum_trial(seed, 1).unwrap();
        assert!((one.sum_norm - one.norm_sum).abs() < 1e-12 * one.norm_sum);
        for count in [2, 4, 8, 16] {
            let t = finite_sum_trial(seed, count).unwrap();
            assert!(t.holds(), "seed {seed} N {count}: {} > {} · {}", t.sum_norm, t.bound, t.norm_sum);
        }
    }
    assert!(finite_sum_trial(0, 0).is_err());
}

fn small_grid() -> GridSpec {
    GridSpec::cube(1, 16.0, 2049, 2.0, 4.0, 17).unwrap()
}

#[test]
fn discrete_flow_is_linear_and_mass_invariant() {
    let f = atom(small_grid(), 1.0, 2.5, 1.0).unwrap();
    assert!((l1_mass(&f) - 1.0).abs() < 1e-12);
    let t1 = discrete_t(1, &f).unwrap();
    let f3 = SampledFunction::new(f.grid.clone(), f.values.iter().map(|v| 3.0 * v).collect()).unwrap();
    let t3 = discrete_t(1, &f3).unwrap();
    for k in [-3i64, 0, 2] {
        for (a, b) in t1.slice(k).iter().zip(t3.slice(k)) {
            assert!((3.0 * a - b).abs() < 1e-12 * (1.0 + b.abs()));
        }
    }
    let r1 = weak_ratio(&t1, l1_mass(&f)).unwrap();
    let r3 = weak_ratio(&t3, l1_mass(&f3)).unwrap();
    assert!((r1 - r3).abs() < 1e-9 * r1);
}

#[test]
fn discrete_flow_ratio_is_stable_under_narrowing() {
    let ratio = |w: f64| {
        let f = atom(small_grid(), w, 2.5, 1.0).unwrap();
        weak_ratio(&discrete_t(1, &f).unwrap(), l1_mass(&f)).unwrap()
    };
    let (wide, narrow) = (ratio(1.0), ratio(0.25));
    assert!(wide > 0.0 && (narrow / wide - 1.0).abs() < 0.15, "{wide} vs {narrow}");
}

#[test]
fn discrete_flow_rejects_bad_input() {
    let g = small_grid();
    let wide = SampledFunction::from_fn(g.clone(), |x, u| if x[0].abs() < 12.0 && (2.5..3.5).contains(&u) { 1.0 } else { 0.0 });
    assert!(matches!(discrete_t(1, &wide), Err(Error::Domain(_))));
    let f = atom(g, 1.0, 2.5, 1.0).unwrap();
    assert!(discrete_t(0, &f).is_err());
    assert!(discrete_t(2, &f).is_err());
    let g3 = GridSpec::cube(3, 4.0, 9, 0.0, 1.0, 3).unwrap();
    assert!(matches!(discrete_t(1, &SampledFunction::zeros(g3)), Err(Error::Unsupported(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn psi_has_mean_zero_and_unit_l1(a in -10.0f64..10.0, len in 0.01f64..10.0) {
        let b = a + len;
        let mid = 0.5 * (a + b);
        let h = len / 2.0;
        // Each half carries ±1/len over length len/2.
        prop_assert!((psi(a, b, a + 0.25 * len) * h + psi(a, b, mid + 0.25 * len) * h).abs() < 1e-12);
        prop_assert!((psi(a, b, a + 0.25 * len).abs() * len - 1.0).abs() < 1e-12);
        prop_assert_eq!(psi(a, b, b), 0.0);
    }

    #[test]
    fn dyadic_intervals_nest(t in -100.0f64..100.0, m in -8i32..8) {
        let (a, b) = DyadicFamily::interval(m, DyadicFamily::index_of(m, t));
        prop_assert!(a <= t && t < b);
        prop_assert!((b - a - DyadicFamily::length(m)).abs() < 1e-12 * (b - a));
        let (c, d) = DyadicFamily::interval(m + 1, DyadicFamily::index_of(m + 1, t));
        prop_assert!(a <= c + 1e-12 && d <= b + 1e-12);
    }

    #[test]
    fn weak_norm_is_homogeneous_and_quasi_subadditive(seed in 0u64..10_000, c in -50.0f64..50.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_piecewise(&mut rng);
        let g = random_piecewise(&mut rng);
        let nf = weak_norm_exact(&f.to_step().unwrap());
        let ng = weak_norm_exact(&g.to_step().unwrap());
        let scaled = PiecewiseConstant { breaks: f.breaks.clone(), values: f.values.iter().map(|v| c * v).collect() };
        prop_assert!((weak_norm_exact(&scaled.to_step().unwrap()) - c.abs() * nf).abs() <= 1e-12 * (1.0 + c.abs() * nf));
        let sum = weak_norm_exact(&PiecewiseConstant::sum(&[f, g]).to_step().unwrap());
        prop_assert!(sum <= 2.0 * (nf + ng) * (1.0 + 1e-12));
    }
}
