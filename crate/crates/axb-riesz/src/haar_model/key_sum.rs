//! The key estimate: flow sums of Haar-like functions, and finite-sum weak norms.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::basis::{HaarLikeFunction, HaarPartition};
use super::flow::{weak_norm_exact, weak_ratio, FlowSum, StepFunction};
use crate::error::{Error, Result};

pub const KEY_WINDOW: i64 = 256;

/// `S(t, k) = Σ_{h ≥ k+1} Δ_h(t)/(h − k)`, exact on the cells cut by the breakpoints of all `Δ_h`.
pub fn key_sum(deltas: &BTreeMap<i64, HaarLikeFunction>, beta: f64) -> Result<FlowSum> {
    for (h, d) in deltas {
        let want = beta * 2f64.powi(*h as i32);
        if (d.partition.scale - want).abs() > 1e-12 * want {
            return Err(Error::GridMismatch(format!("Δ_{h} has scale {} instead of {want}", d.partition.scale)));
        }
    }
    let used: Vec<(&i64, &HaarLikeFunction)> = deltas.iter().filter(|(_, d)| d.l1_norm() > 0.0).collect();
    if used.is_empty() {
        return Ok(FlowSum::zero());
    }
    let mut breaks: Vec<f64> = used.iter().flat_map(|(_, d)| d.breakpoints()).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let heights: Vec<i64> = used.iter().map(|(h, _)| **h).collect();
    let mut measures = Vec::new();
    let mut values = Vec::new();
    for w in breaks.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let row: Vec<f64> = used.iter().map(|(_, d)| d.eval(mid)).collect();
        if row.iter().any(|v| *v != 0.0) {
            measures.push(w[1] - w[0]);
            values.extend(row);
        }
    }
    FlowSum::new(measures, heights, values, KEY_WINDOW)
}

/// Seeded family: `scales` consecutive heights from 0, each with `per_scale`
/// coefficients uniform in `[−1, 1]` on distinct random intervals.
pub fn random_haar_family(seed: u64, scales: usize, per_scale: usize, beta: f64) -> Result<BTreeMap<i64, HaarLikeFunction>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = BTreeMap::new();
    for h in 0..scales as i64 {
        let part = HaarPartition::new(beta * 2f64.powi(h as i32), 0.0)?;
        let mut slots: Vec<i64> = (-2 * per_scale as i64..2 * per_scale as i64).collect();
        slots.shuffle(&mut rng);
        let coeffs: BTreeMap<i64, f64> = slots[..per_scale].iter().map(|k| (*k, rng.gen_range(-1.0..1.0))).collect();
        out.insert(h, HaarLikeFunction::new(part, coeffs));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeyTrial {
    pub seed: u64,
    pub scales: usize,
    pub total_l1: f64,
    pub ratio: f64,
}

pub fn key_trial(seed: u64, scales: usize, per_scale: usize, beta: f64) -> Result<KeyTrial> {
    let fam = random_haar_family(seed, scales, per_scale, beta)?;
    let total_l1: f64 = fam.values().map(|d| d.l1_norm()).sum();
    let s = key_sum(&fam, beta)?;
    Ok(KeyTrial { seed, scales, total_l1, ratio: weak_ratio(&s, total_l1)? })
}

pub fn key_trials(seeds: std::ops::Range<u64>, scales: usize, per_scale: usize, beta: f64) -> Result<Vec<KeyTrial>> {
    seeds.into_par_iter().map(|s| key_trial(s, scales, per_scale, beta)).collect()
}

/// Largest ratio over the trials.
pub fn empirical_constant(trials: &[KeyTrial]) -> f64 {
    trials.iter().map(|t| t.ratio).fold(0.0, f64::max)
}

/// Piecewise-constant function on `[breaks[i], breaks[i+1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstant {
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
}

impl PiecewiseConstant {
    pub fn eval(&self, t: f64) -> f64 {
        let i = self.breaks.partition_point(|b| *b <= t);
        if i == 0 || i == self.breaks.len() {
            0.0
        } else {
            self.values[i - 1]
        }
    }

    pub fn to_step(&self) -> Result<StepFunction> {
        StepFunction::from_breakpoints(&self.breaks, self.values.clone())
    }

    /// Sum on the common refinement.
    pub fn sum(parts: &[PiecewiseConstant]) -> Self {
        let mut breaks: Vec<f64> = parts.iter().flat_map(|p| p.breaks.iter().copied()).collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let values = breaks
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                parts.iter().map(|p| p.eval(mid)).sum()
            })
            .collect();
        Self { breaks, values }
    }
}

/// A sum of 1 to 5 boxes with log-uniform heights and lengths.
pub fn random_piecewise(rng: &mut ChaCha8Rng) -> PiecewiseConstant {
    let boxes = rng.gen_range(1..=5);
    let parts: Vec<PiecewiseConstant> = (0..boxes)
        .map(|_| {
            let a = rng.gen_range(-10.0..10.0);
            let len = 10f64.powf(rng.gen_range(-2.0..1.0));
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let height = sign * 10f64.powf(rng.gen_range(-2.0..2.0));
            PiecewiseConstant { breaks: vec![a, a + len], values: vec![height] }
        })
        .collect();
    PiecewiseConstant::sum(&parts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSumTrial {
    pub seed: u64,
    pub count: usize,
    pub sum_norm: f64,
    pub norm_sum: f64,
    pub bound: f64,
}

impl FiniteSumTrial {
    pub fn holds(&self) -> bool {
        self.sum_norm <= self.bound * self.norm_sum
    }
}

/// `‖Σ f_i‖_{L^{1,∞}}` against `4(1 + log N) Σ ‖f_i‖_{L^{1,∞}}` for `N` random step functions.
pub fn finite_sum_trial(seed: u64, count: usize) -> Result<FiniteSumTrial> {
    if count == 0 {
        return Err(Error::Domain("need at least one function".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fs: Vec<PiecewiseConstant> = (0..count).map(|_| random_piecewise(&mut rng)).collect();
    let norm_sum = fs.iter().map(|f| f.to_step().map(|s| weak_norm_exact(&s))).sum::<Result<f64>>()?;
    let sum_norm = weak_norm_exact(&PiecewiseConstant::sum(&fs).to_step()?);
    Ok(FiniteSumTrial { seed, count, sum_norm, norm_sum, bound: 4.0 * (1.0 + (count as f64).ln()) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar_model::flow::Superlevel;

    #[test]
    fn single_term_sum() {
        let part = HaarPartition::new(4.0, 0.0).unwrap();
        let d = HaarLikeFunction::new(part, [(1, 1.0)].into_iter().collect());
        let s = key_sum(&[(2, d)].into_iter().collect(), 1.0).unwrap();
        assert_eq!(s.cells(), 2);
        assert!((s.value(0, 0) - 0.25 / 2.0).abs() < 1e-15);
        assert!((s.value(1, -1) + 0.25 / 3.0).abs() < 1e-15);
        assert_eq!(s.value(0, 2), 0.0);
        // |S| = 1/4 at k = 1 on both cells of width 2, and below that elsewhere.
        assert!((s.superlevel_measure(0.2) - 4.0).abs() < 1e-12);
        assert_eq!(s.superlevel_measure(0.3), 0.0);
    }

    #[test]
    fn scale_mismatch_is_refused() {
        let part = HaarPartition::new(3.0, 0.0).unwrap();
        let d = HaarLikeFunction::new(part, [(0, 1.0)].into_iter().collect());
        assert!(key_sum(&[(1, d)].into_iter().collect(), 1.0).is_err());
    }
}
