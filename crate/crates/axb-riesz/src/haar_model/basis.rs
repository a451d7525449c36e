//! Scale partitions, Haar-like functions, the dyadic family and its envelope.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::registry::{Named, Registry};

/// Half-open intervals `[offset + kλ, offset + (k+1)λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HaarPartition {
    pub scale: f64,
    pub offset: f64,
}

impl HaarPartition {
    pub fn new(scale: f64, offset: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::Domain(format!("partition scale must be positive (got {scale})")));
        }
        Ok(Self { scale, offset: offset.rem_euclid(scale) })
    }

    pub fn interval(&self, k: i64) -> (f64, f64) {
        let a = self.offset + k as f64 * self.scale;
        (a, a + self.scale)
    }

    pub fn index_of(&self, t: f64) -> i64 {
        ((t - self.offset) / self.scale).floor() as i64
    }
}

/// `ψ_I = |I|^{−1}(χ_{I⁻} − χ_{I⁺})` on `[a, b)`.
pub fn psi(a: f64, b: f64, t: f64) -> f64 {
    let mid = 0.5 * (a + b);
    if t < a || t >= b {
        0.0
    } else if t < mid {
        1.0 / (b - a)
    } else {
        -1.0 / (b - a)
    }
}

/// `Σ a_I ψ_I` over finitely many intervals of one partition.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarLikeFunction {
    pub partition: HaarPartition,
    pub coeffs: BTreeMap<i64, f64>,
}

impl HaarLikeFunction {
    pub fn new(partition: HaarPartition, coeffs: BTreeMap<i64, f64>) -> Self {
        Self { partition, coeffs }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = self.partition.index_of(t);
        match self.coeffs.get(&k) {
            Some(a) => {
                let (lo, hi) = self.partition.interval(k);
                a * psi(lo, hi, t)
            }
            None => 0.0,
        }
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|a| a.abs()).sum()
    }

    /// Endpoints and midpoints of the intervals carrying a nonzero coefficient.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (k, a) in &self.coeffs {
            if *a != 0.0 {
                let (lo, hi) = self.partition.interval(*k);
                out.extend([lo, 0.5 * (lo + hi), hi]);
            }
        }
        out
    }
}

/// Nested intervals `D_{mk}` of length `2^{−m}`, shifted by a third of a
/// cell with alternating sign so that no point is near a boundary at every scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicFamily {
    pub eps: f64,
    pub c_eps: f64,
}

impl DyadicFamily {
    pub fn new(eps: f64, c_eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !(c_eps > 0.0) {
            return Err(Error::Domain("ε and C(ε) must be positive".into()));
        }
        Ok(Self { eps, c_eps })
    }

    pub fn length(m: i32) -> f64 {
        2f64.powi(-m)
    }

    pub fn interval(m: i32, k: i64) -> (f64, f64) {
        let len = Self::length(m);
        let shift = if m.rem_euclid(2) == 0 { 1.0 / 3.0 } else { -1.0 / 3.0 };
        let a = len * (k as f64 + shift);
        (a, a + len)
    }

    pub fn index_of(m: i32, t: f64) -> i64 {
        let shift = if m.rem_euclid(2) == 0 { 1.0 / 3.0 } else { -1.0 / 3.0 };
        (t / Self::length(m) - shift).floor() as i64
    }

    /// `C(ε) 2^{εm} (1 + 2^m + |k|)^{−2−ε}`.
    pub fn kappa(&self, m: i32, k: i64) -> f64 {
        self.c_eps * 2f64.powf(self.eps * m as f64) * (1.0 + 2f64.powi(m) + k.unsigned_abs() as f64).powf(-2.0 - self.eps)
    }

    /// `Σ_k κ(m,k)^δ` over all `k ∈ ℤ`.
    pub fn kappa_power_row(&self, m: i32, delta: f64) -> f64 {
        let a = 1.0 + 2f64.powi(m);
        let p = (2.0 + self.eps) * delta;
        let scale = (self.c_eps * 2f64.powf(self.eps * m as f64)).powf(delta);
        let cut = 4096usize;
        let mut s = a.powf(-p);
        for k in 1..=cut {
            s += 2.0 * (a + k as f64).powf(-p);
        }
        s += 2.0 * (a + cut as f64 + 0.5).powf(1.0 - p) / (p - 1.0);
        scale * s
    }

    /// Partial sums over `|m| ≤ M` of `Σ_I (1 + log₊|I|)^N κ(I)^δ`, for `M = 0..=cutoff`.
    pub fn summability_partial_sums(&self, delta: f64, power: i32, cutoff: i32) -> Vec<f64> {
        let weight = |m: i32| (1.0 + (-(m as f64) * std::f64::consts::LN_2).max(0.0)).powi(power);
        let mut out = Vec::with_capacity(cutoff as usize + 1);
        let mut acc = weight(0) * self.kappa_power_row(0, delta);
        out.push(acc);
        for m in 1..=cutoff {
            acc += weight(m) * self.kappa_power_row(m, delta) + weight(-m) * self.kappa_power_row(-m, delta);
            out.push(acc);
        }
        out
    }
}

/// A smooth mean-zero test density `ρ = g'` with known primitive `g`.
pub trait TestProfile: Named + Send + Sync {
    fn value(&self, t: f64) -> f64;
    fn primitive(&self, t: f64) -> f64;
}

struct GaussianDerivative;
struct CauchyDerivative;

impl Named for GaussianDerivative {
    fn name(&self) -> &str {
        "gaussian_derivative"
    }
}

impl TestProfile for GaussianDerivative {
    fn value(&self, t: f64) -> f64 {
        -2.0 * t * (-t * t).exp()
    }
    fn primitive(&self, t: f64) -> f64 {
        (-t * t).exp()
    }
}

impl Named for CauchyDerivative {
    fn name(&self) -> &str {
        "cauchy_derivative"
    }
}

impl TestProfile for CauchyDerivative {
    fn value(&self, t: f64) -> f64 {
        -2.0 * t / (1.0 + t * t).powi(2)
    }
    fn primitive(&self, t: f64) -> f64 {
        1.0 / (1.0 + t * t)
    }
}

pub fn test_profiles() -> &'static Registry<dyn TestProfile> {
    static REG: OnceLock<Registry<dyn TestProfile>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut r: Registry<dyn TestProfile> = Registry::new();
        r.register(Box::new(GaussianDerivative));
        r.register(Box::new(CauchyDerivative));
        r
    })
}

/// `c_I(ρ) = |I| ∫ ψ_I ρ = ∫_{I⁻} ρ − ∫_{I⁺} ρ`.
pub fn coefficient(rho: &dyn TestProfile, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    if b - a <= 1.0 {
        let gl = GaussLegendre::of(16);
        gl.integrate(|t| rho.value(t), a, mid) - gl.integrate(|t| rho.value(t), mid, b)
    } else {
        2.0 * rho.primitive(mid) - rho.primitive(a) - rho.primitive(b)
    }
}

/// `c_I(ψ_J) = |I| ∫ ψ_I ψ_J`, exact from the overlaps of the halves.
pub fn haar_pairing(i: (f64, f64), j: (f64, f64)) -> f64 {
    let halves = |(a, b): (f64, f64)| {
        let m = 0.5 * (a + b);
        [(a, m, 1.0), (m, b, -1.0)]
    };
    let mut acc = 0.0;
    for (a1, b1, s1) in halves(i) {
        for (a2, b2, s2) in halves(j) {
            let overlap = (b1.min(b2) - a1.max(a2)).max(0.0);
            acc += s1 * s2 * overlap;
        }
    }
    acc / (j.1 - j.0)
}

pub type CoefficientMap = BTreeMap<(i32, i64), f64>;

/// All `c_I` with `|m| ≤ M` and `|k| 2^{−|m|} ≤ M`.
pub fn haar_coefficients(rho: &dyn TestProfile, truncation: i32) -> CoefficientMap {
    let mut out = BTreeMap::new();
    for m in -truncation..=truncation {
        let kmax = (truncation as f64 * 2f64.powi(m.abs())) as i64;
        for k in -kmax..=kmax {
            let (a, b) = DyadicFamily::interval(m, k);
            out.insert((m, k), coefficient(rho, a, b));
        }
    }
    out
}

/// Smallest `C(ε)` with `|c_I| ≤ κ_ε(I)` over the given coefficients.
pub fn fit_envelope_constant(eps: f64, coeffs: &[&CoefficientMap]) -> f64 {
    let unit = DyadicFamily { eps, c_eps: 1.0 };
    coeffs
        .iter()
        .flat_map(|c| c.iter())
        .map(|((m, k), v)| v.abs() / unit.kappa(*m, *k))
        .fold(0.0, f64::max)
}

/// Largest `|c_I| / κ_ε(I)`; at most 1 when the envelope holds.
pub fn envelope_ratio(family: &DyadicFamily, coeffs: &CoefficientMap) -> f64 {
    coeffs.iter().map(|((m, k), v)| v.abs() / family.kappa(*m, *k)).fold(0.0, f64::max)
}

/// `∫|ρ − Σ c_I ψ_I|` over `[−T, T]` plus `∫_{|t|>T}|ρ|`, for the series with `|m| ≤ M`.
pub fn reconstruction_l1_error(rho: &dyn TestProfile, coeffs: &CoefficientMap, truncation: i32, window: f64) -> f64 {
    let fine = truncation + 1;
    let lo = DyadicFamily::index_of(fine, -window);
    let hi = DyadicFamily::index_of(fine, window);
    let gl = GaussLegendre::of(8);
    let mut err = 0.0;
    for c in lo..=hi {
        let (a, b) = DyadicFamily::interval(fine, c);
        let mid = 0.5 * (a + b);
        let mut approx = 0.0;
        for m in -truncation..=truncation {
            let k = DyadicFamily::index_of(m, mid);
            if let Some(v) = coeffs.get(&(m, k)) {
                let (ia, ib) = DyadicFamily::interval(m, k);
                approx += v * psi(ia, ib, mid);
            }
        }
        err += gl.integrate(|t| (rho.value(t) - approx).abs(), a, b);
    }
    let (a0, _) = DyadicFamily::interval(fine, lo);
    let (_, b0) = DyadicFamily::interval(fine, hi);
    err + tail_mass(rho, a0, b0)
}

// ρ = g' keeps one sign on each side of 0 and g vanishes at ±∞.
fn tail_mass(rho: &dyn TestProfile, a: f64, b: f64) -> f64 {
    (rho.primitive(a) - rho.primitive(f64::NEG_INFINITY)).abs() + (rho.primitive(b) - rho.primitive(f64::INFINITY)).abs()
}

/// `Σ_{|m|>M} Σ_k κ(m,k)`.
pub fn kappa_tail(family: &DyadicFamily, truncation: i32) -> f64 {
    (truncation + 1..truncation + 200)
        .map(|m| family.kappa_power_row(m, 1.0) + family.kappa_power_row(-m, 1.0))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_is_nested_and_tiles() {
        for m in -4..4 {
            for k in -5..5 {
                let (a, b) = DyadicFamily::interval(m, k);
                assert!(((b - a) / DyadicFamily::length(m) - 1.0).abs() < 1e-12);
                let kc = DyadicFamily::index_of(m + 1, a + 1e-12);
                let (ca, cb) = DyadicFamily::interval(m + 1, kc);
                assert!((ca - a).abs() < 1e-12, "m={m} k={k}");
                let (da, db) = DyadicFamily::interval(m + 1, kc + 1);
                assert!((da - cb).abs() < 1e-12 && (db - b).abs() < 1e-12);
                assert_eq!(DyadicFamily::index_of(m, 0.5 * (a + b)), k);
            }
        }
    }

    #[test]
    fn self_pairing_is_one() {
        for m in -3..6 {
            let j = DyadicFamily::interval(m, 5);
            assert_eq!(haar_pairing(j, j), 1.0);
            assert_eq!(haar_pairing(DyadicFamily::interval(m, 7), j), 0.0);
        }
    }

    #[test]
    fn kappa_substitution() {
        let f = DyadicFamily::new(1.0, 1.0).unwrap();
        assert!((f.kappa(0, 0) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn partition_normalizes_offset() {
        let p = HaarPartition::new(2.0, 5.0).unwrap();
        assert_eq!(p.offset, 1.0);
        assert_eq!(p.index_of(1.0), 0);
        assert_eq!(p.index_of(0.999), -1);
    }
}
