//! Muckenhoupt weights on a u-grid.

use std::sync::OnceLock;

use super::operator::UGrid;
use crate::error::{Error, Result};
use crate::registry::{Named, Registry};

#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    Constant,
    /// `|u|^a` with `a ∈ (−1, 1)`.
    Power(f64),
    Samples,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MuckenhouptWeight {
    pub kind: WeightKind,
    pub samples: Vec<f64>,
    pub a2_estimate: f64,
}

impl MuckenhouptWeight {
    pub fn on_grid(kind: WeightKind, grid: &UGrid) -> Result<Self> {
        let samples = match kind {
            WeightKind::Constant => vec![1.0; grid.nu],
            WeightKind::Power(a) => {
                if !(a > -1.0 && a < 1.0) {
                    return Err(Error::Domain(format!("power {a} outside (−1, 1)")));
                }
                grid.coords().iter().map(|u| u.abs().powf(a)).collect()
            }
            WeightKind::Samples => return Err(Error::Domain("use from_samples for sampled weights".into())),
        };
        Self::build(kind, samples)
    }

    pub fn from_samples(samples: Vec<f64>) -> Result<Self> {
        Self::build(WeightKind::Samples, samples)
    }

    fn build(kind: WeightKind, samples: Vec<f64>) -> Result<Self> {
        if samples.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Domain("weight samples must be positive and finite".into()));
        }
        let a2_estimate = a2_characteristic(&samples);
        Ok(Self { kind, samples, a2_estimate })
    }

    /// `1/w`, the dual weight.
    pub fn inverse(&self) -> Self {
        let samples: Vec<f64> = self.samples.iter().map(|v| 1.0 / v).collect();
        Self { kind: WeightKind::Samples, a2_estimate: a2_characteristic(&samples), samples }
    }
}

/// Sup over dyadic-aligned runs of grid points of `avg(w)·avg(1/w)`.
pub fn a2_characteristic(samples: &[f64]) -> f64 {
    let n = samples.len();
    let mut best: f64 = 1.0;
    let mut len = 1usize;
    while len <= n {
        let mut start = 0;
        while start + len <= n {
            let run = &samples[start..start + len];
            let a: f64 = run.iter().sum::<f64>() / len as f64;
            let b: f64 = run.iter().map(|v| 1.0 / v).sum::<f64>() / len as f64;
            best = best.max(a * b);
            start += len;
        }
        len *= 2;
    }
    best
}

/// A named weight profile `u ↦ w(u)`.
pub trait WeightFamily: Named + Send + Sync {
    fn kind(&self) -> WeightKind;
}

struct Family {
    label: &'static str,
    kind: WeightKind,
}

impl Named for Family {
    fn name(&self) -> &str {
        self.label
    }
}

impl WeightFamily for Family {
    fn kind(&self) -> WeightKind {
        self.kind.clone()
    }
}

/// The weights used in the uniformity sweeps: `1`, `|u|^{1/2}`, `|u|^{−1/2}`.
pub fn weight_families() -> &'static Registry<dyn WeightFamily> {
    static REG: OnceLock<Registry<dyn WeightFamily>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut r: Registry<dyn WeightFamily> = Registry::new();
        r.register(Box::new(Family { label: "one", kind: WeightKind::Constant }));
        r.register(Box::new(Family { label: "abs_u_pow_half", kind: WeightKind::Power(0.5) }));
        r.register(Box::new(Family { label: "abs_u_pow_neg_half", kind: WeightKind::Power(-0.5) }));
        r
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_weight_is_exactly_one() {
        assert_eq!(a2_characteristic(&[3.0; 64]), 1.0);
    }

    #[test]
    fn nonconstant_weight_exceeds_one() {
        assert!(a2_characteristic(&[1.0, 2.0, 1.0, 2.0]) > 1.0);
    }

    #[test]
    fn rejects_nonpositive_samples() {
        assert!(MuckenhouptWeight::from_samples(vec![1.0, 0.0]).is_err());
    }
}
