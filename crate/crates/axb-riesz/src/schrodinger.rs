//! Finite-difference model of `−∂_s² + ξ² e^{2s}` and its Riesz transforms.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub const POTENTIAL_CAP: f64 = 1e12;
pub const CONDITION_CAP: f64 = 1e14;

/// Interior nodes `s_i = s_min + (i+1)h`, `h = (s_max − s_min)/(ns + 1)`, Dirichlet at both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchrodingerGrid {
    pub s_min: f64,
    pub s_max: f64,
    pub ns: usize,
    pub xi: f64,
}

impl SchrodingerGrid {
    pub fn new(s_min: f64, s_max: f64, ns: usize, xi: f64) -> Result<Self> {
        if ns < 16 {
            return Err(Error::Domain(format!("need at least 16 nodes (got {ns})")));
        }
        if !(s_max > s_min) {
            return Err(Error::GridMismatch(format!("empty interval [{s_min}, {s_max}]")));
        }
        if !xi.is_finite() {
            return Err(Error::Domain("ξ must be finite".into()));
        }
        let g = Self { s_min, s_max, ns, xi };
        let top = xi * xi * (2.0 * s_max).exp();
        if !(top <= POTENTIAL_CAP) {
            return Err(Error::Domain(format!("potential {top:e} at s_max exceeds {POTENTIAL_CAP:e}")));
        }
        Ok(g)
    }

    pub fn spacing(&self) -> f64 {
        (self.s_max - self.s_min) / (self.ns + 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.s_min + (i + 1) as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.ns).map(|i| self.node(i)).collect()
    }

    pub fn potential(&self) -> Vec<f64> {
        self.nodes().iter().map(|s| self.xi * self.xi * (2.0 * s).exp()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    matrix: DMatrix<f64>,
    symmetric: bool,
    eigen: OnceLock<SymmetricEigen<f64, nalgebra::Dyn>>,
}

impl DiscreteOperator {
    pub fn new(matrix: DMatrix<f64>) -> Self {
        let symmetric = matrix.is_square() && matrix == matrix.transpose();
        Self { matrix, symmetric, eigen: OnceLock::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::new(&self.matrix * c)
    }

    pub fn eigen(&self) -> Result<&SymmetricEigen<f64, nalgebra::Dyn>> {
        if !self.symmetric {
            return Err(Error::Unsupported("eigendecomposition needs a symmetric matrix".into()));
        }
        Ok(self.eigen.get_or_init(|| SymmetricEigen::new(self.matrix.clone())))
    }

    /// Eigenvalues in increasing order.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        let mut v: Vec<f64> = self.eigen()?.eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        Ok(v)
    }

    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.matrix.ncols() {
            return Err(Error::DimensionMismatch(self.matrix.ncols(), f.len()));
        }
        Ok((&self.matrix * DVector::from_column_slice(f)).iter().copied().collect())
    }

    /// Largest singular value.
    pub fn norm2(&self) -> f64 {
        self.matrix.clone().svd(false, false).singular_values.max()
    }
}

/// `(ns+1) × ns` forward difference with zero boundary values.
pub fn forward_difference(ns: usize) -> DMatrix<f64> {
    DMatrix::from_fn(ns + 1, ns, |r, c| {
        if r == c {
            1.0
        } else if r == c + 1 {
            -1.0
        } else {
            0.0
        }
    })
}

/// `H = DᵀD/h² + diag(ξ² e^{2s})`.
pub fn build_h(grid: &SchrodingerGrid) -> DiscreteOperator {
    let h = grid.spacing();
    let d = forward_difference(grid.ns);
    let mut m = d.transpose() * &d / (h * h);
    for (i, v) in grid.potential().iter().enumerate() {
        m[(i, i)] += v;
    }
    DiscreteOperator::new(m)
}

/// `(∂_s H^{−1/2}, V^{1/2} H^{−1/2})` with `∂_s = D/h`.
pub fn riesz_operators(grid: &SchrodingerGrid, h_op: &DiscreteOperator) -> Result<(DiscreteOperator, DiscreteOperator)> {
    let eig = h_op.eigen()?;
    let lo = eig.eigenvalues.min();
    let hi = eig.eigenvalues.max();
    if !(lo > 0.0) || hi / lo > CONDITION_CAP {
        return Err(Error::Domain(format!("H is near-singular (eigenvalues {lo:e}..{hi:e})")));
    }
    let q = &eig.eigenvectors;
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    let h_inv_sqrt = q * inv_sqrt * q.transpose();
    let deriv = forward_difference(grid.ns) * &h_inv_sqrt / grid.spacing();
    let sqrt_v = DMatrix::from_diagonal(&DVector::from_iterator(grid.ns, grid.potential().into_iter().map(f64::sqrt)));
    Ok((DiscreteOperator::new(deriv), DiscreteOperator::new(sqrt_v * h_inv_sqrt)))
}

/// `|‖R_d f‖² + ‖R_p f‖² − ‖f‖²| / ‖f‖²`.
pub fn pythagoras_residual(rd: &DiscreteOperator, rp: &DiscreteOperator, f: &[f64]) -> Result<f64> {
    let a: f64 = rd.apply(f)?.iter().map(|v| v * v).sum();
    let b: f64 = rp.apply(f)?.iter().map(|v| v * v).sum();
    let c: f64 = f.iter().map(|v| v * v).sum();
    Ok((a + b - c).abs() / c)
}

/// `(h Σ|f_i|^p)^{1/p}`.
pub fn lp_norm(f: &[f64], p: f64, h: f64) -> f64 {
    (h * f.iter().map(|v| v.abs().powf(p)).sum::<f64>()).powf(1.0 / p)
}

/// Continuum support of the probe inputs.
pub const PROBE_SUPPORT: (f64, f64) = (-2.0, 2.0);

/// One to three hats or smooth bumps with random centres, widths in `[0.25, 1]` and signs.
pub fn probe_input(rng: &mut ChaCha8Rng, nodes: &[f64]) -> Vec<f64> {
    let pieces = rng.gen_range(1..=3);
    let mut f = vec![0.0; nodes.len()];
    for _ in 0..pieces {
        let width: f64 = 10f64.powf(rng.gen_range(-0.6..0.0));
        let centre = rng.gen_range(PROBE_SUPPORT.0 + width..PROBE_SUPPORT.1 - width);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let spike = rng.gen_bool(0.5);
        for (v, s) in f.iter_mut().zip(nodes) {
            let t = (s - centre) / width;
            if t.abs() < 1.0 {
                *v += sign * if spike { 1.0 - t.abs() } else { (1.0 - t * t).powi(2) };
            }
        }
    }
    f
}

/// Largest `‖op f‖_p / ‖f‖_p` over `trials` seeded probe inputs; a lower bound on the norm.
pub fn lp_norm_probe(op: &DiscreteOperator, grid: &SchrodingerGrid, p: f64, trials: usize, seed: u64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("p must lie in (1, ∞) (got {p})")));
    }
    let nodes = grid.nodes();
    if grid.s_min > PROBE_SUPPORT.0 - 10.0 || grid.s_max < PROBE_SUPPORT.1 {
        return Err(Error::Domain("grid must reach 10 below and past the probe support".into()));
    }
    let h = grid.spacing();
    let best = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(t));
            let f = probe_input(&mut rng, &nodes);
            let den = lp_norm(&f, p, h);
            if den == 0.0 {
                return Ok(0.0);
            }
            Ok(lp_norm(&op.apply(&f)?, p, h) / den)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(best.into_iter().fold(0.0, f64::max))
}

/// Probe grid with `s_max = 4` and `s_min = 4 − extent`.
pub fn probe_grid(extent: f64, ns: usize, xi: f64) -> Result<SchrodingerGrid> {
    SchrodingerGrid::new(4.0 - extent, 4.0, ns, xi)
}
