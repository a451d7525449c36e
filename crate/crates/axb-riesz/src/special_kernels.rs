//! Legendre functions, the profiles Ψ₀, Ψ₁, Φₙ, the heat kernel and the
//! kernel of the inverse square root of the Laplacian.

use std::f64::consts::PI;
use std::sync::OnceLock;

use statrs::function::gamma::gamma;

use crate::autodiff::{Jet, JET_MAX};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_graded_to_zero, integrate_to_infinity, GaussLegendre, QuadratureConfig};
use crate::registry::{Named, Registry};

/// Largest argument accepted by the profile evaluators.
pub const X_CAP: f64 = 1e300;

/// Q⁰_{λ−1/2}(z) on the compact interval route.
pub fn legendre_q(lambda: f64, z: f64) -> Result<f64> {
    check_legendre(lambda, z)?;
    let zm1 = z - 1.0;
    let gl = GaussLegendre::of(20);
    // s = 1 − w² and s = −1 + w²
    let right = |w: f64| {
        let w2 = w * w;
        2.0 * w.powf(2.0 * lambda) * (2.0 - w2).powf(lambda - 0.5) * (zm1 + w2).powf(-lambda - 0.5)
    };
    let left = |w: f64| {
        let w2 = w * w;
        2.0 * w.powf(2.0 * lambda) * (2.0 - w2).powf(lambda - 0.5) * (zm1 + 2.0 - w2).powf(-lambda - 0.5)
    };
    let s = integrate_graded_to_zero(right, 1.0, 1e-16, gl) + integrate_graded_to_zero(left, 1.0, 1e-16, gl);
    Ok(2f64.powf(-lambda - 0.5) * s)
}

/// Q⁰_{λ−1/2}(z) on the exponential route over (arccosh z, ∞).
pub fn legendre_q_cosh(lambda: f64, z: f64) -> Result<f64> {
    check_legendre(lambda, z)?;
    let r = z.acosh();
    let v = abel_integral(r, 1.0, |x| (-lambda * x).exp())?;
    Ok(v / 2f64.sqrt())
}

fn check_legendre(lambda: f64, z: f64) -> Result<()> {
    if !(lambda > 0.0) || !(z > 1.0) {
        return Err(Error::Domain(format!("legendre_q needs λ > 0 and z > 1, got ({lambda}, {z})")));
    }
    Ok(())
}

/// `∫_R^∞ (cosh x − cosh R)^{−1/2} F(x) dx` via `x = R + v²`.
///
/// `scale` is the x-length over which `F` varies near `R`.
pub fn abel_integral<F: Fn(f64) -> f64>(r: f64, scale: f64, f: F) -> Result<f64> {
    let gl = GaussLegendre::of(20);
    let g = |v: f64| {
        if v == 0.0 {
            return 2.0 * f(r) / r.sinh().max(f64::MIN_POSITIVE).sqrt();
        }
        let h = 0.5 * v * v;
        let gap = 2.0 * (r + h).sinh() * h.sinh();
        2.0 * v * f(r + v * v) / gap.sqrt()
    };
    let v1 = scale.sqrt().min(1.0);
    let head = integrate_graded_to_zero(&g, v1, 1e-10 * v1, gl);
    let tail = integrate_to_infinity(&g, v1, 0.5 * v1, 1e-17, gl)?;
    Ok(head + tail)
}

/// Ψ₀^{(k)} at `X = 1 + xm1`.
pub fn psi0_xm1(k: usize, xm1: f64) -> Result<f64> {
    if !(xm1 > 0.0) {
        return Err(Error::Domain(format!("X must exceed 1, got 1 + {xm1}")));
    }
    if k > JET_MAX {
        return Err(Error::Unsupported(format!("derivative order {k} above {JET_MAX}")));
    }
    let xm1 = xm1.min(X_CAP);
    let e = Jet::var(xm1, k);
    let v = if xm1 < 1.0 {
        let q = e * e.add_const(2.0);
        let sq = q.sqrt();
        (sq * (e + sq).ln_1p()).recip()
    } else {
        let x = e.add_const(1.0);
        let a = x.recip();
        let root = (a * a).scale(-1.0).add_const(1.0).sqrt();
        let l = x.ln() + root.add_const(1.0).ln();
        (x * root * l).recip()
    };
    Ok(v.derivative(k))
}

pub fn psi0(k: usize, x: f64) -> Result<f64> {
    psi0_xm1(k, x - 1.0)
}

/// Coefficients of λ^ℓ in ∏_{i<k}(λ + 1/2 + i), for k ≤ 8.
pub fn c_coeffs(k: usize) -> Vec<f64> {
    assert!(k <= JET_MAX);
    let mut c = vec![1.0];
    for i in 0..k {
        let a = 0.5 + i as f64;
        let mut next = vec![0.0; c.len() + 1];
        for (l, v) in c.iter().enumerate() {
            next[l] += a * v;
            next[l + 1] += v;
        }
        c = next;
    }
    c
}

/// Ψ₁^{(k)} at `X = 1 + xm1`.
pub fn psi1_xm1(k: usize, xm1: f64) -> Result<f64> {
    if !(xm1 > 0.0) {
        return Err(Error::Domain(format!("X must exceed 1, got 1 + {xm1}")));
    }
    if k > JET_MAX {
        return Err(Error::Unsupported(format!("derivative order {k} above {JET_MAX}")));
    }
    let e = xm1.min(X_CAP);
    let c = c_coeffs(k);
    let weights: Vec<f64> = c.iter().enumerate().map(|(l, v)| crate::autodiff::factorial(l) * v).collect();
    let series = |lg: f64| {
        let inv = 1.0 / lg;
        let mut p = inv;
        let mut s = 0.0;
        for w in &weights {
            s += w * p;
            p *= inv;
        }
        s
    };
    let ex = -0.5 - k as f64;
    let right = |w: f64| {
        let w2 = w * w;
        let den = w2 * (2.0 - w2);
        let lg = ((2.0 * e + w2 * w2) / den).ln_1p();
        2.0 / (2.0 - w2).sqrt() * (e + w2).powf(ex) * series(lg)
    };
    let left = |w: f64| {
        let w2 = w * w;
        let den = w2 * (2.0 - w2);
        let lg = (((2.0 - w2) * (2.0 - w2) + 2.0 * e) / den).ln_1p();
        2.0 / (2.0 - w2).sqrt() * (e + 2.0 - w2).powf(ex) * series(lg)
    };
    let gl = GaussLegendre::of(20);
    let s = integrate_graded_to_zero(right, 1.0, 1e-13, gl) + integrate_graded_to_zero(left, 1.0, 1e-13, gl);
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * s / PI.sqrt())
}

pub fn psi1(k: usize, x: f64) -> Result<f64> {
    psi1_xm1(k, x - 1.0)
}

fn check_n(n: usize) -> Result<()> {
    if !(1..=6).contains(&n) {
        return Err(Error::Unsupported(format!("n out of supported range 1..6 (got {n})")));
    }
    Ok(())
}

/// Φₙ^{(k)} at `X = 1 + xm1`.
pub fn phi_xm1(n: usize, k: usize, xm1: f64) -> Result<f64> {
    check_n(n)?;
    let big_n = (n - 1) / 2;
    let sign = if big_n % 2 == 0 { 1.0 } else { -1.0 };
    let v = if n % 2 == 0 { psi0_xm1(big_n + k, xm1)? } else { psi1_xm1(big_n + k, xm1)? };
    Ok(sign * v)
}

pub fn phi(n: usize, k: usize, x: f64) -> Result<f64> {
    phi_xm1(n, k, x - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Infinity,
    Local,
}

/// Leading term of Φₙ^{(k)} at infinity or as X → 1⁺.
pub fn asymptotic_leading(n: usize, k: usize, x: f64, regime: Regime) -> f64 {
    let a = k as f64 + n as f64 / 2.0;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    match regime {
        Regime::Infinity => sign * gamma(a) / (x.powf(a) * x.ln()),
        Regime::Local => sign * gamma(a) / (2.0 * (x - 1.0).powf(a)),
    }
}

/// Exponent δ of the local error term.
pub fn local_delta(n: usize, k: usize) -> f64 {
    if n == 1 && k == 0 {
        0.5
    } else {
        1.0
    }
}

/// Configured evaluator bundling dimension and quadrature settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileEvaluator {
    pub n: usize,
    pub quad: QuadratureConfig,
    pub derivative_max: usize,
}

impl ProfileEvaluator {
    pub fn new(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(Self { n, quad: QuadratureConfig::default(), derivative_max: 4 })
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k > self.derivative_max {
            return Err(Error::Domain(format!("k = {k} above derivative_max {}", self.derivative_max)));
        }
        Ok(())
    }

    pub fn psi0(&self, k: usize, x: f64) -> Result<f64> {
        self.check_k(k)?;
        psi0(k, x)
    }

    pub fn psi1(&self, k: usize, x: f64) -> Result<f64> {
        self.check_k(k)?;
        psi1(k, x)
    }

    pub fn phi(&self, k: usize, x: f64) -> Result<f64> {
        if k + (self.n - 1) / 2 > self.derivative_max + 2 {
            return Err(Error::Domain(format!("k = {k} too large for n = {}", self.n)));
        }
        phi(self.n, k, x)
    }

    pub fn heat_kernel(&self, t: f64, r: f64) -> Result<f64> {
        heat_kernel(self.n, t, r)
    }

    pub fn sqrt_inv_kernel(&self, r: f64, mode: SqrtInvMode) -> Result<f64> {
        sqrt_inv_kernel(self.n, r, mode)
    }
}

/// `(m^{−1/2} h_t)(R)`.
pub fn heat_kernel(n: usize, t: f64, r: f64) -> Result<f64> {
    check_n(n)?;
    if !(t > 0.0) || !(r > 0.0) {
        return Err(Error::Domain(format!("heat kernel needs t > 0 and R > 0, got ({t}, {r})")));
    }
    let line = |x: Jet| (x * x).scale(-0.25 / t).exp().scale((4.0 * PI * t).powf(-0.5));
    if n % 2 == 0 {
        let m = n / 2;
        let v = descend(r, m, line);
        Ok((2.0 * PI).powf(-(n as f64) / 2.0) * v)
    } else {
        let m = n.div_ceil(2);
        let scale = (2.0 * t / r).min(t.sqrt()).min(1.0);
        let integral = abel_integral(r, scale, |x| x.sinh() * descend(x, m, line))?;
        Ok(integral / (PI.sqrt() * (2.0 * PI).powf(n as f64 / 2.0)))
    }
}

/// `(−(1/sinh x)∂_x)^m g` at `x`.
fn descend<G: Fn(Jet) -> Jet>(x: f64, m: usize, g: G) -> f64 {
    let xj = Jet::var(x, m);
    let (sh, _) = xj.sinh_cosh();
    let mut cur = g(xj);
    for _ in 0..m {
        cur = -(cur.differentiate() / sh);
    }
    cur.value()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqrtInvMode {
    ClosedForm,
    Subordination,
}

/// `(m^{−1/2} k_{L^{−1/2}})(R)`.
pub fn sqrt_inv_kernel(n: usize, r: f64, mode: SqrtInvMode) -> Result<f64> {
    check_n(n)?;
    if !(r > 0.0) {
        return Err(Error::Domain(format!("R must be positive, got {r}")));
    }
    match mode {
        SqrtInvMode::ClosedForm => {
            let xm1 = 2.0 * (0.5 * r).sinh().powi(2);
            Ok(phi_xm1(n, 0, xm1)? / (PI * (2.0 * PI).powf(n as f64 / 2.0)))
        }
        SqrtInvMode::Subordination => {
            let gl = GaussLegendre::of(20);
            let err = std::cell::Cell::new(None);
            let body = |s: f64| {
                let t = s.exp();
                match heat_kernel(n, t, r) {
                    Ok(v) => v * (0.5 * s).exp(),
                    Err(e) => {
                        err.set(Some(e));
                        0.0
                    }
                }
            };
            let s0 = (0.25 * r * r).ln();
            let right = integrate_to_infinity(&body, s0, 0.25, 1e-17, gl)?;
            let left = integrate_to_infinity(|q| body(s0 - q), 0.0, 0.25, 1e-17, gl)?;
            if let Some(e) = err.take() {
                return Err(e);
            }
            Ok((left + right) / PI.sqrt())
        }
    }
}

/// Source of Φₙ^{(k)} values as a function of `X − 1`.
pub trait PhiSource: Named + Send + Sync {
    fn phi_xm1(&self, n: usize, k: usize, xm1: f64) -> Result<f64>;
}

/// Direct quadrature / differentiation.
pub struct DirectPhi;

impl Named for DirectPhi {
    fn name(&self) -> &str {
        "direct"
    }
}

impl PhiSource for DirectPhi {
    fn phi_xm1(&self, n: usize, k: usize, xm1: f64) -> Result<f64> {
        phi_xm1(n, k, xm1)
    }
}

const CHEB_NODES: usize = 16;
const TABLE_T_LO: f64 = -28.0;
const TABLE_T_HI: f64 = 64.0;
const TABLE_PANEL: f64 = 0.5;

/// Piecewise Chebyshev interpolation of `log|Φₙ^{(k)}|` in `ln(X − 1)`.
///
/// Falls back to direct evaluation outside the tabulated range.
pub struct TabulatedPhi {
    tables: Vec<Vec<OnceLock<Vec<[f64; CHEB_NODES]>>>>,
    kmax: usize,
}

impl Default for TabulatedPhi {
    fn default() -> Self {
        Self::new(2)
    }
}

impl TabulatedPhi {
    pub fn new(kmax: usize) -> Self {
        let tables = (0..=6).map(|_| (0..=kmax).map(|_| OnceLock::new()).collect()).collect();
        Self { tables, kmax }
    }

    fn panels() -> usize {
        ((TABLE_T_HI - TABLE_T_LO) / TABLE_PANEL).round() as usize
    }

    fn build(n: usize, k: usize) -> Result<Vec<[f64; CHEB_NODES]>> {
        use rayon::prelude::*;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        (0..Self::panels())
            .into_par_iter()
            .map(|p| {
                let a = TABLE_T_LO + p as f64 * TABLE_PANEL;
                let mut vals = [0.0; CHEB_NODES];
                for (i, v) in vals.iter_mut().enumerate() {
                    let t = a + 0.5 * TABLE_PANEL * (1.0 + cheb_node(i));
                    let f = phi_xm1(n, k, t.exp())?;
                    if !(sign * f > 0.0) {
                        return Err(Error::Domain(format!("Φ_{n}^({k}) has unexpected sign at ln(X−1) = {t}")));
                    }
                    *v = (sign * f).ln();
                }
                Ok(cheb_coeffs(&vals))
            })
            .collect()
    }
}

fn cheb_node(i: usize) -> f64 {
    (PI * (i as f64 + 0.5) / CHEB_NODES as f64).cos()
}

fn cheb_coeffs(vals: &[f64; CHEB_NODES]) -> [f64; CHEB_NODES] {
    let m = CHEB_NODES as f64;
    let mut c = [0.0; CHEB_NODES];
    for (j, cj) in c.iter_mut().enumerate() {
        let mut s = 0.0;
        for (i, v) in vals.iter().enumerate() {
            s += v * (PI * j as f64 * (i as f64 + 0.5) / m).cos();
        }
        *cj = 2.0 * s / m;
    }
    c[0] *= 0.5;
    c
}

fn cheb_eval(c: &[f64; CHEB_NODES], y: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for cj in c.iter().skip(1).rev() {
        let b0 = 2.0 * y * b1 - b2 + cj;
        b2 = b1;
        b1 = b0;
    }
    y * b1 - b2 + c[0]
}

impl Named for TabulatedPhi {
    fn name(&self) -> &str {
        "tabulated"
    }
}

impl PhiSource for TabulatedPhi {
    fn phi_xm1(&self, n: usize, k: usize, xm1: f64) -> Result<f64> {
        check_n(n)?;
        if !(xm1 > 0.0) {
            return Err(Error::Domain(format!("X must exceed 1, got 1 + {xm1}")));
        }
        let t = xm1.ln();
        if k > self.kmax || !(t >= TABLE_T_LO && t < TABLE_T_HI) {
            return phi_xm1(n, k, xm1);
        }
        let slot = &self.tables[n][k];
        let table = match slot.get() {
            Some(t) => t,
            None => {
                let built = Self::build(n, k)?;
                let _ = slot.set(built);
                slot.get().expect("table just stored")
            }
        };
        let p = (((t - TABLE_T_LO) / TABLE_PANEL) as usize).min(table.len() - 1);
        let a = TABLE_T_LO + p as f64 * TABLE_PANEL;
        let y = 2.0 * (t - a) / TABLE_PANEL - 1.0;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        Ok(sign * cheb_eval(&table[p], y).exp())
    }
}

pub fn phi_sources() -> Registry<dyn PhiSource> {
    let mut r: Registry<dyn PhiSource> = Registry::new();
    r.register(Box::new(DirectPhi));
    r.register(Box::new(TabulatedPhi::default()));
    r
}

/// Radial function sampled on `[0, r_max]` with four-point interpolation.
#[derive(Debug, Clone)]
pub struct RadialTable {
    h: f64,
    values: Vec<f64>,
}

impl RadialTable {
    pub fn build<F: Fn(f64) -> Result<f64> + Sync>(f: F, r_max: f64, h: f64) -> Result<Self> {
        use rayon::prelude::*;
        let count = (r_max / h).ceil() as usize + 3;
        let mut values = (0..count.max(5))
            .into_par_iter()
            .map(|i| if i == 0 { Ok(0.0) } else { f(i as f64 * h) })
            .collect::<Result<Vec<f64>>>()?;
        // origin by cubic extrapolation, so profiles singular only at 0 are accepted
        values[0] = 4.0 * values[1] - 6.0 * values[2] + 4.0 * values[3] - values[4];
        Ok(Self { h, values })
    }

    pub fn r_max(&self) -> f64 {
        (self.values.len() - 3) as f64 * self.h
    }

    /// Interpolated value; zero beyond the table.
    pub fn eval(&self, r: f64) -> f64 {
        let t = r / self.h;
        let i = t.floor() as isize;
        if i < 0 || i as usize + 2 >= self.values.len() {
            return 0.0;
        }
        let i = (i as usize).max(1);
        let s = t - i as f64;
        let (p0, p1, p2, p3) = (self.values[i - 1], self.values[i], self.values[i + 1], self.values[i + 2]);
        let l0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
        let l1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
        let l2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
        let l3 = (s + 1.0) * s * (s - 1.0) / 6.0;
        l0 * p0 + l1 * p1 + l2 * p2 + l3 * p3
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_closed_form() {
        let v = legendre_q(0.5, 2.0).unwrap();
        assert!((v - 0.5 * 3f64.ln()).abs() < 1e-12, "{v}");
        let w = legendre_q_cosh(0.5, 2.0).unwrap();
        assert!((w - 0.5 * 3f64.ln()).abs() < 1e-10, "{w}");
    }

    #[test]
    fn coefficients() {
        assert_eq!(c_coeffs(0), vec![1.0]);
        assert_eq!(c_coeffs(2), vec![0.75, 2.0, 1.0]);
        for k in 0..=8 {
            let want = gamma(k as f64 + 0.5) / PI.sqrt();
            assert!((c_coeffs(k)[0] - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn psi0_at_cosh_one() {
        let v = psi0(0, 1f64.cosh()).unwrap();
        assert!((v - 1.0 / 1f64.sinh()).abs() < 1e-14);
    }

    #[test]
    fn table_matches_direct() {
        let tab = TabulatedPhi::new(1);
        for &xm1 in &[1e-6, 0.3, 2.0, 40.0, 1e9] {
            for k in 0..=1 {
                let a = tab.phi_xm1(1, k, xm1).unwrap();
                let b = phi_xm1(1, k, xm1).unwrap();
                assert!(((a - b) / b).abs() < 1e-9, "k={k} xm1={xm1} {a} {b}");
            }
        }
    }

    #[test]
    fn radial_table_interpolates_smooth_profiles() {
        let t = RadialTable::build(|r| Ok((-r * r).exp()), 4.0, 1e-3).unwrap();
        for &r in &[0.0005, 0.7, 2.3337] {
            assert!((t.eval(r) - (-r * r).exp()).abs() < 1e-11);
        }
        assert_eq!(t.eval(10.0), 0.0);
    }
}
