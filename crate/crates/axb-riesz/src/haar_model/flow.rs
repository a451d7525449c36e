//! Weak-L¹ quasi-norms of step functions and of flow sums on cells × ℤ.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// A function with computable superlevel-set measures.
pub trait Superlevel: Sync {
    fn max_abs(&self) -> f64;
    /// `μ{|g| > α}`.
    fn superlevel_measure(&self, alpha: f64) -> f64;
}

/// Values on cells with given measures.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    pub values: Vec<f64>,
    pub measures: Vec<f64>,
}

impl StepFunction {
    pub fn new(values: Vec<f64>, measures: Vec<f64>) -> Result<Self> {
        if values.len() != measures.len() {
            return Err(Error::DimensionMismatch(values.len(), measures.len()));
        }
        if measures.iter().any(|m| !(*m >= 0.0)) {
            return Err(Error::Domain("cell measures must be nonnegative".into()));
        }
        Ok(Self { values, measures })
    }

    /// Piecewise-constant function on consecutive breakpoints.
    pub fn from_breakpoints(breaks: &[f64], values: Vec<f64>) -> Result<Self> {
        if breaks.len() != values.len() + 1 {
            return Err(Error::DimensionMismatch(breaks.len(), values.len() + 1));
        }
        Self::new(values, breaks.windows(2).map(|w| w[1] - w[0]).collect())
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().zip(&self.measures).map(|(v, m)| v.abs() * m).sum()
    }
}

impl Superlevel for StepFunction {
    fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
    fn superlevel_measure(&self, alpha: f64) -> f64 {
        self.values.iter().zip(&self.measures).filter(|(v, _)| v.abs() > alpha).map(|(_, m)| m).sum()
    }
}

/// `sup_v v·μ{|g| ≥ v}`, exact for step functions.
pub fn weak_norm_exact(g: &StepFunction) -> f64 {
    let mut pairs: Vec<(f64, f64)> = g.values.iter().map(|v| v.abs()).zip(g.measures.iter().copied()).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut acc = 0.0;
    let mut best: f64 = 0.0;
    for (v, m) in pairs {
        acc += m;
        best = best.max(v * acc);
    }
    best
}

pub const ALPHA_POINTS: usize = 60;

/// `max·(1 − 10⁻⁹)·10^{−6i/59}`, `i = 0..60`.
pub fn alpha_grid(max: f64) -> Vec<f64> {
    (0..ALPHA_POINTS).map(|i| max * (1.0 - 1e-9) * 10f64.powf(-6.0 * i as f64 / (ALPHA_POINTS - 1) as f64)).collect()
}

/// `sup_α α·μ{|g| > α} / norm1` over [`alpha_grid`]; a lower bound for the quasi-norm ratio.
pub fn weak_ratio<G: Superlevel + ?Sized>(g: &G, norm1: f64) -> Result<f64> {
    if !(norm1 > 0.0) {
        return Err(Error::Domain(format!("norm1 must be positive (got {norm1})")));
    }
    let max = g.max_abs();
    if max == 0.0 {
        return Ok(0.0);
    }
    let best = alpha_grid(max).par_iter().map(|&a| a * g.superlevel_measure(a)).reduce(|| 0.0, f64::max);
    Ok(best / norm1)
}

/// `S(c, k) = Σ_{h ≥ k+1} v_h(c)/(h − k)` on cells `c` with measures, times ℤ
/// with counting measure.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSum {
    measures: Vec<f64>,
    heights: Vec<i64>,
    /// `values[c * heights.len() + i]` is `v_{heights[i]}(c)`.
    values: Vec<f64>,
    window: i64,
    /// Sorted `|S|` over the exact window, with suffix sums of measure.
    sorted: Vec<f64>,
    suffix: Vec<f64>,
}

impl FlowSum {
    /// `window` levels below the lowest height are evaluated exactly; deeper
    /// levels are counted assuming `|S|` decreases with depth there.
    pub fn new(measures: Vec<f64>, heights: Vec<i64>, values: Vec<f64>, window: i64) -> Result<Self> {
        if values.len() != measures.len() * heights.len() {
            return Err(Error::DimensionMismatch(values.len(), measures.len() * heights.len()));
        }
        if heights.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("heights must be strictly increasing".into()));
        }
        let mut out = Self { measures, heights, values, window: window.max(1), sorted: Vec::new(), suffix: Vec::new() };
        out.index_window();
        Ok(out)
    }

    pub fn zero() -> Self {
        Self { measures: vec![], heights: vec![], values: vec![], window: 1, sorted: vec![], suffix: vec![0.0] }
    }

    pub fn cells(&self) -> usize {
        self.measures.len()
    }

    pub fn heights(&self) -> &[i64] {
        &self.heights
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    fn lowest_exact(&self) -> i64 {
        self.heights.first().map_or(0, |h| h - self.window)
    }

    pub fn value(&self, cell: usize, k: i64) -> f64 {
        let nh = self.heights.len();
        let row = &self.values[cell * nh..(cell + 1) * nh];
        self.heights.iter().zip(row).filter(|(h, _)| **h > k).map(|(h, v)| v / (h - k) as f64).sum()
    }

    /// `S(·, k)` for every cell.
    pub fn slice(&self, k: i64) -> Vec<f64> {
        (0..self.cells()).map(|c| self.value(c, k)).collect()
    }

    fn index_window(&mut self) {
        let Some(&top) = self.heights.last() else {
            self.suffix = vec![0.0];
            return;
        };
        let lo = self.lowest_exact();
        let mut pairs: Vec<(f64, f64)> = (0..self.cells())
            .into_par_iter()
            .flat_map_iter(|c| (lo..top).map(move |k| (c, k)))
            .map(|(c, k)| (self.value(c, k).abs(), self.measures[c]))
            .filter(|(v, m)| *v > 0.0 && *m > 0.0)
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut suffix = vec![0.0; pairs.len() + 1];
        for i in (0..pairs.len()).rev() {
            suffix[i] = suffix[i + 1] + pairs[i].1;
        }
        self.sorted = pairs.into_iter().map(|p| p.0).collect();
        self.suffix = suffix;
    }

    /// Number of levels `k < lowest_exact` with `|S(c,k)| > α`.
    fn tail_count(&self, cell: usize, alpha: f64) -> f64 {
        let start = self.lowest_exact() - 1;
        let above = |d: i64| self.value(cell, start - d).abs() > alpha;
        if !above(0) {
            return 0.0;
        }
        let mut hi = 1i64;
        while above(hi) {
            hi *= 2;
            if hi > 1 << 52 {
                return f64::INFINITY;
            }
        }
        let mut lo = hi / 2;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if above(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo + 1) as f64
    }
}

impl Superlevel for FlowSum {
    fn max_abs(&self) -> f64 {
        self.sorted.last().copied().unwrap_or(0.0)
    }

    fn superlevel_measure(&self, alpha: f64) -> f64 {
        let idx = self.sorted.partition_point(|v| *v <= alpha);
        let exact = self.suffix[idx];
        let tail: f64 = (0..self.cells())
            .filter(|c| self.measures[*c] > 0.0)
            .map(|c| self.measures[c] * self.tail_count(c, alpha))
            .sum();
        exact + tail
    }
}
