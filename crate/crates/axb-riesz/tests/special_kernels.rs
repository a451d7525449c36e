use std::f64::consts::PI;

use axb_riesz::group_geometry::integrate_radial;
use axb_riesz::special_kernels::*;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn legendre_examples() {
    assert!((legendre_q(0.5, 2.0).unwrap() - 0.5 * 3f64.ln()).abs() < 1e-12);
    assert!((0.5 * 3f64.ln() - 0.549306).abs() < 1e-6);
    let z = 1f64.cosh();
    assert!(rel(legendre_q(1.0, z).unwrap(), legendre_q_cosh(1.0, z).unwrap()) < 1e-8);
    for z in [1.5, 3.0, 10.0] {
        assert!(legendre_q(2.0, z).unwrap() < legendre_q(1.0, z).unwrap());
    }
    assert!(legendre_q(0.0, 2.0).is_err());
    assert!(legendre_q(1.0, 1.0).is_err());
}

#[test]
fn legendre_routes_agree_on_lattice() {
    for lambda in [0.25, 0.5, 1.0, 2.5, 6.0] {
        for z in [1.001, 1.2, 2.0, 10.0, 300.0] {
            let (a, b) = (legendre_q(lambda, z).unwrap(), legendre_q_cosh(lambda, z).unwrap());
            assert!(rel(a, b) < 1e-8, "λ={lambda} z={z}: {a} {b}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn legendre_decreases_in_lambda_and_z(lambda in 0.2..4.0f64, z in 1.05..20.0f64) {
        let q = legendre_q(lambda, z).unwrap();
        prop_assert!(q > 0.0);
        prop_assert!(legendre_q(lambda * 1.1, z).unwrap() < q);
        prop_assert!(legendre_q(lambda, z * 1.1).unwrap() < q);
    }

    #[test]
    fn profile_signs_alternate(n in 1usize..=4, k in 0usize..=2, t in -6.0..20.0f64) {
        let xm1 = t.exp();
        let v = phi_xm1(n, k, xm1).unwrap();
        prop_assert!(if k % 2 == 0 { v > 0.0 } else { v < 0.0 }, "n={} k={} X-1={} v={}", n, k, xm1, v);
    }
}

#[test]
fn psi0_examples() {
    assert!((psi0(0, 1f64.cosh()).unwrap() - 1.0 / 1f64.sinh()).abs() < 1e-14);
    assert!((1.0 / 1f64.sinh() - 0.850918).abs() < 1e-6);
    let h = 1e-5;
    let fd = (psi0(0, 3.0 + h).unwrap() - psi0(0, 3.0 - h).unwrap()) / (2.0 * h);
    assert!(rel(psi0(1, 3.0).unwrap(), fd) < 1e-6);
    let x = 30f64.exp();
    assert!((psi0(0, x).unwrap() * x * x.ln() - 1.0).abs() <= 0.05);
    assert!(psi0(0, 1.0).is_err());
}

#[test]
fn psi1_examples() {
    let sp = PI.sqrt();
    let x = 30f64.exp();
    assert!((psi1(0, x).unwrap() * x.sqrt() * x.ln() - sp).abs() <= 0.1 * sp);
    let xm1 = 1e-4;
    assert!((psi1_xm1(0, xm1).unwrap() * 2.0 * xm1.sqrt() - sp).abs() <= 0.05 * sp);
    let h = 1e-5;
    let fd = (psi1(0, 2.0 + h).unwrap() - psi1(0, 2.0 - h).unwrap()) / (2.0 * h);
    assert!(rel(psi1(1, 2.0).unwrap(), fd) < 1e-5);
}

#[test]
fn leading_coefficients_are_gamma_values() {
    for k in 0..=4 {
        let want = statrs::function::gamma::gamma(k as f64 + 0.5) / PI.sqrt();
        assert!(rel(c_coeffs(k)[0], want) < 1e-13);
        assert_eq!(c_coeffs(k).len(), k + 1);
    }
}

#[test]
fn phi_reduces_to_psi() {
    for x in [1.01, 2.0, 50.0] {
        assert_eq!(phi(2, 0, x).unwrap(), psi0(0, x).unwrap());
        assert_eq!(phi(1, 0, x).unwrap(), psi1(0, x).unwrap());
    }
    let h = 1e-5;
    let fd = (psi0(0, 2.0 + h).unwrap() - psi0(0, 2.0 - h).unwrap()) / (2.0 * h);
    assert!(rel(phi(4, 0, 2.0).unwrap(), -fd) < 1e-6);
    assert!(phi(7, 0, 2.0).is_err());
}

#[test]
fn leading_term_examples() {
    assert!((asymptotic_leading(2, 0, std::f64::consts::E, Regime::Infinity) - (-1f64).exp()).abs() < 1e-15);
    assert!((asymptotic_leading(2, 1, 2.0, Regime::Local) + 0.5).abs() < 1e-15);
    assert!((asymptotic_leading(1, 0, 1.0001, Regime::Local) - PI.sqrt() / 0.02).abs() < 1e-9);
    assert!((PI.sqrt() / 0.02 - 88.623).abs() < 1e-3);
}

#[test]
fn asymptotic_envelopes() {
    for n in 1..=4 {
        for k in 0..=2 {
            for l in [10.0f64, 20.0, 30.0] {
                let x = l.exp();
                let r = phi(n, k, x).unwrap() / asymptotic_leading(n, k, x, Regime::Infinity);
                assert!((r - 1.0).abs() <= 3.0 / l, "n={n} k={k} log X={l} ratio {r}");
            }
            for xm1 in [1e-2, 1e-3, 1e-4] {
                let r = phi_xm1(n, k, xm1).unwrap() / asymptotic_leading(n, k, 1.0 + xm1, Regime::Local);
                assert!((r - 1.0).abs() <= 5.0 * xm1.powf(local_delta(n, k)), "n={n} k={k} X-1={xm1} ratio {r}");
            }
        }
    }
}

#[test]
fn heat_kernel_examples() {
    let want = 1.0 / (2.0 * PI) / (2.0 * 1f64.sinh()) / (4.0 * PI).sqrt() * (-0.25f64).exp();
    assert!(rel(heat_kernel(2, 1.0, 1.0).unwrap(), want) < 1e-12);
    assert!((want - 0.014877).abs() < 1e-6);
    for n in 1..=3 {
        for t in [0.1, 1.0, 10.0] {
            for r in [0.1, 1.0, 5.0] {
                assert!(heat_kernel(n, t, r).unwrap() > 0.0, "n={n} t={t} R={r}");
            }
        }
    }
    assert!(heat_kernel(1, 0.0, 1.0).is_err());
}

#[test]
fn heat_kernel_has_unit_mass() {
    for t in [0.25, 0.5, 1.0] {
        let m = integrate_radial(1, |r| heat_kernel(1, t, r).unwrap_or(0.0)).unwrap();
        assert!((m - 1.0).abs() <= 1e-4, "t={t}: {m}");
    }
}

#[test]
fn sqrt_inverse_examples_and_modes() {
    let want = 1.0 / (2.0 * PI * PI) / 1f64.sinh();
    assert!(rel(sqrt_inv_kernel(2, 1.0, SqrtInvMode::ClosedForm).unwrap(), want) < 1e-12);
    assert!((want - 0.043108).abs() < 1e-6);
    for n in 1..=3 {
        for r in [0.5, 1.0, 2.0, 5.0] {
            let a = sqrt_inv_kernel(n, r, SqrtInvMode::ClosedForm).unwrap();
            let b = sqrt_inv_kernel(n, r, SqrtInvMode::Subordination).unwrap();
            assert!(a > 0.0 && rel(a, b) <= 1e-6, "n={n} R={r}: {a} {b}");
        }
        assert!(sqrt_inv_kernel(n, 0.1, SqrtInvMode::ClosedForm).unwrap() > 0.0);
    }
}

#[test]
fn differentiation_under_the_abel_integral() {
    let g = |x: f64| (-x * x).exp();
    let dg = |x: f64| -2.0 * x * (-x * x).exp();
    let outer = |r: f64| abel_integral(r, 1.0, |x| x.sinh() * g(x)).unwrap();
    for r in [0.5f64, 1.0, 2.0] {
        let h = 1e-4;
        let lhs = (outer(r + h) - outer(r - h)) / (2.0 * h) / r.sinh();
        let rhs = abel_integral(r, 1.0, dg).unwrap();
        assert!(rel(lhs, rhs) < 1e-6, "R={r}: {lhs} {rhs}");
    }
}

#[test]
fn phi_sources_agree() {
    let reg = phi_sources();
    assert_eq!(reg.list(), vec!["direct".to_string(), "tabulated".to_string()]);
    let (a, b) = (reg.get("direct").unwrap(), reg.get("tabulated").unwrap());
    for n in 1..=3 {
        for xm1 in [1e-5, 0.1, 3.0, 1e4] {
            for k in 0..=2 {
                let (p, q) = (a.phi_xm1(n, k, xm1).unwrap(), b.phi_xm1(n, k, xm1).unwrap());
                assert!(rel(q, p) < 1e-8, "n={n} k={k} X-1={xm1}");
            }
        }
    }
    assert!(reg.get("missing").is_err());
}

#[test]
fn evaluator_matches_free_functions() {
    let ev = ProfileEvaluator::new(3).unwrap();
    assert_eq!(ev.phi(1, 2.5).unwrap(), phi(3, 1, 2.5).unwrap());
    assert_eq!(ev.heat_kernel(0.5, 1.0).unwrap(), heat_kernel(3, 0.5, 1.0).unwrap());
    assert!(ProfileEvaluator::new(0).is_err());
    assert!(ProfileEvaluator::new(7).is_err());
}
