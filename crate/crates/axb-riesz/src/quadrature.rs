//! Gauss–Legendre rules and panel integrators.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const MAX_ORDER: usize = 64;

/// Quadrature settings shared by the profile evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub panels: usize,
    pub nodes_per_panel: usize,
    /// Integrand level, relative to its running maximum, below which tails are dropped.
    pub tail_cutoff: f64,
    pub singularity_substitution: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { panels: 1, nodes_per_panel: 20, tail_cutoff: 1e-16, singularity_substitution: true }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.panels == 0 {
            return Err(Error::Domain("panels must be at least 1".into()));
        }
        if !(2..=MAX_ORDER).contains(&self.nodes_per_panel) {
            return Err(Error::Domain(format!(
                "nodes_per_panel {} outside [2, {MAX_ORDER}]",
                self.nodes_per_panel
            )));
        }
        Ok(())
    }

    pub fn rule(&self) -> &'static GaussLegendre {
        GaussLegendre::of(self.nodes_per_panel)
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared rule of the given order (cached).
    pub fn of(order: usize) -> &'static GaussLegendre {
        static CACHE: [OnceLock<GaussLegendre>; MAX_ORDER + 1] =
            [const { OnceLock::new() }; MAX_ORDER + 1];
        assert!((1..=MAX_ORDER).contains(&order), "order {order} unsupported");
        CACHE[order].get_or_init(|| GaussLegendre::new(order))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + r * x);
        }
        s * r
    }

    /// Nodes and weights mapped onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (c + r * x, w * r))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite rule with `panels` equal panels on [a, b].
pub fn integrate_panels<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    panels: usize,
    rule: &GaussLegendre,
) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| rule.integrate(&mut f, a + i as f64 * h, a + (i + 1) as f64 * h))
        .sum()
}

/// Integrates over (0, b] with panels shrinking geometrically by half toward 0.
pub fn integrate_graded_to_zero<F: FnMut(f64) -> f64>(
    mut f: F,
    b: f64,
    floor: f64,
    rule: &GaussLegendre,
) -> f64 {
    let mut s = 0.0;
    let mut hi = b;
    while hi > floor {
        let lo = 0.5 * hi;
        s += rule.integrate(&mut f, lo, hi);
        hi = lo;
    }
    s + rule.integrate(&mut f, 0.0, hi)
}

/// Integrates over [a, ∞) with panels growing geometrically from width `w0`.
///
/// Stops once a whole panel stays below `cutoff` times the running maximum of
/// |f|. If the panel budget runs out the start width is doubled once before
/// giving up.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    w0: f64,
    cutoff: f64,
    rule: &GaussLegendre,
) -> Result<f64> {
    match tail_pass(&mut f, a, w0, cutoff, rule) {
        Some(v) => Ok(v),
        None => tail_pass(&mut f, a, 2.0 * w0, cutoff, rule)
            .ok_or_else(|| Error::Quadrature(format!("tail from {a} not below cutoff"))),
    }
}

fn tail_pass<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    w0: f64,
    cutoff: f64,
    rule: &GaussLegendre,
) -> Option<f64> {
    const BUDGET: usize = 4000;
    const GROWTH: f64 = 1.15;
    let mut total = 0.0;
    let mut running_max: f64 = 0.0;
    let mut lo = a;
    let mut w = w0;
    for _ in 0..BUDGET {
        let hi = lo + w;
        let mut panel_max: f64 = 0.0;
        let mut s = 0.0;
        for (x, wt) in rule.mapped(lo, hi) {
            let v = f(x);
            if !v.is_finite() {
                return None;
            }
            panel_max = panel_max.max(v.abs());
            s += wt * v;
        }
        total += s;
        running_max = running_max.max(panel_max);
        if running_max > 0.0 && panel_max <= cutoff * running_max {
            return Some(total);
        }
        if running_max == 0.0 && lo - a > 1e3 * w0.max(1.0) {
            return Some(0.0);
        }
        lo = hi;
        w *= GROWTH;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        for n in [2usize, 5, 16, 33, 64] {
            let g = GaussLegendre::of(n);
            let wsum: f64 = g.weights.iter().sum();
            assert!((wsum - 2.0).abs() < 1e-13, "n={n}");
            let deg = 2 * n - 1;
            let v = g.integrate(|x| x.powi(deg as i32 - 1), -1.0, 1.0);
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((v - exact).abs() < 1e-12, "n={n} v={v}");
        }
    }

    #[test]
    fn tail_integral_of_exponential() {
        let g = GaussLegendre::of(20);
        let v = integrate_to_infinity(|x| (-x).exp(), 0.0, 0.5, 1e-17, g).unwrap();
        assert!((v - 1.0).abs() < 1e-13);
    }

    #[test]
    fn graded_handles_log_singularity() {
        let g = GaussLegendre::of(20);
        let v = integrate_graded_to_zero(|x| x.ln(), 1.0, 1e-14, g);
        assert!((v + 1.0).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let mut c = QuadratureConfig::default();
        assert!(c.validate().is_ok());
        c.nodes_per_panel = 65;
        assert!(c.validate().is_err());
    }
}
