//! Model kernels bounding the multiplier kernels pointwise.

use std::sync::OnceLock;

use super::operator::{weighted_opnorm, IntegralOperator1D, UGrid};
use super::weights::MuckenhouptWeight;
use crate::error::{Error, Result};
use crate::registry::{Named, Registry};

pub trait ModelKernel: Named + Send + Sync {
    fn needs_epsilon(&self) -> bool;
    fn value(&self, eps: f64, u: f64, v: f64) -> f64;
}

struct Homogeneous;
struct DecayLeft;
struct DecayRight;

impl Named for Homogeneous {
    fn name(&self) -> &str {
        "W"
    }
}
impl Named for DecayLeft {
    fn name(&self) -> &str {
        "Zeps"
    }
}
impl Named for DecayRight {
    fn name(&self) -> &str {
        "ZepsStar"
    }
}

fn far(u: f64, v: f64) -> Option<f64> {
    let d = (u - v).abs();
    (d >= 1.0 - 1e-9).then_some(d)
}

impl ModelKernel for Homogeneous {
    fn needs_epsilon(&self) -> bool {
        false
    }
    // The integrable singularity at the origin is dropped.
    fn value(&self, _: f64, u: f64, v: f64) -> f64 {
        let r = (u * u + v * v).sqrt();
        if r == 0.0 {
            0.0
        } else {
            1.0 / r
        }
    }
}

impl ModelKernel for DecayLeft {
    fn needs_epsilon(&self) -> bool {
        true
    }
    fn value(&self, eps: f64, u: f64, v: f64) -> f64 {
        far(u, v).map_or(0.0, |d| (-eps * u.abs()).exp() / d)
    }
}

impl ModelKernel for DecayRight {
    fn needs_epsilon(&self) -> bool {
        true
    }
    fn value(&self, eps: f64, u: f64, v: f64) -> f64 {
        far(u, v).map_or(0.0, |d| (-eps * v.abs()).exp() / d)
    }
}

pub fn model_kernels() -> &'static Registry<dyn ModelKernel> {
    static REG: OnceLock<Registry<dyn ModelKernel>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut r: Registry<dyn ModelKernel> = Registry::new();
        r.register(Box::new(Homogeneous));
        r.register(Box::new(DecayLeft));
        r.register(Box::new(DecayRight));
        r
    })
}

pub fn model_operator(kind: &str, eps: f64, grid: UGrid) -> Result<IntegralOperator1D> {
    let k = model_kernels().get(kind)?;
    if k.needs_epsilon() && !(eps > 0.0) {
        return Err(Error::Domain(format!("{kind} needs ε > 0 (got {eps})")));
    }
    IntegralOperator1D::from_real_fn(grid, |u, v| k.value(eps, u, v))
}

/// `‖K‖_{L²(w) → L²(w)}` for the named model kernel on `grid`.
pub fn model_kernel_opnorm(kind: &str, eps: f64, w: &MuckenhouptWeight, grid: UGrid) -> Result<f64> {
    weighted_opnorm(&model_operator(kind, eps, grid)?, w)
}
