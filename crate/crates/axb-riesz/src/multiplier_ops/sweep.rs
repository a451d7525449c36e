//! Weighted norms of multiplier operators across a ξ-sweep.

use rayon::prelude::*;

use super::operator::{build_multiplier_operator, weighted_opnorm, MultiplierSpec, UGrid};
use super::weights::{weight_families, MuckenhouptWeight, WeightKind};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub variant: String,
    pub j: usize,
    pub alpha: Vec<u8>,
    pub weight: String,
    pub direction: usize,
    pub xi: Vec<f64>,
    pub norm: f64,
}

/// `{2^{−3}, …, 2^{3}}`.
pub fn dyadic_xi_magnitudes() -> Vec<f64> {
    (-3..=3).map(|k| 2f64.powi(k)).collect()
}

/// `±e_a` for each axis, then the normalized diagonal when `n > 1`.
pub fn unit_directions(n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for a in 0..n {
        for sign in [1.0, -1.0] {
            out.push((0..n).map(|b| if a == b { sign } else { 0.0 }).collect());
        }
    }
    if n > 1 {
        out.push(vec![1.0 / (n as f64).sqrt(); n]);
    }
    out
}

pub fn all_alphas(n: usize) -> Vec<Vec<u8>> {
    (0..1usize << n).map(|m| (0..n).map(|a| (m >> a & 1) as u8).collect()).collect()
}

/// Grid of `nu` points on `c ± half` with `c = −ln|ξ|`, so that the operator
/// matrix is the same along each ray; the weight sees the physical u.
pub fn aligned_grid(xi: &[f64], half: f64, nu: usize) -> Result<UGrid> {
    let mag = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    UGrid::centered(-mag.ln(), half, nu)
}

/// Where the weight is sampled on an aligned grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightFrame {
    /// `w(u − c)`: the weight travels with the grid, which keeps `[w]_{A₂}`
    /// and makes the norm constant along each ray.
    Aligned,
    /// `w(u)` at the physical coordinate.
    Physical,
}

pub fn weight_on(kind: &WeightKind, grid: &UGrid, frame: WeightFrame) -> Result<MuckenhouptWeight> {
    match frame {
        WeightFrame::Physical => MuckenhouptWeight::on_grid(kind.clone(), grid),
        WeightFrame::Aligned => {
            let c = 0.5 * (grid.u_min + grid.u_max);
            let local = UGrid::new(grid.u_min - c, grid.u_max - c, grid.nu)?;
            MuckenhouptWeight::on_grid(kind.clone(), &local)
        }
    }
}

/// Every combination of α, registered weight, direction and |ξ| for one spec.
pub fn opnorm_sweep(
    variant: &str,
    n: usize,
    j: usize,
    directions: &[Vec<f64>],
    magnitudes: &[f64],
    half: f64,
    nu: usize,
    frame: WeightFrame,
) -> Result<Vec<SweepRow>> {
    let mut jobs = Vec::new();
    for alpha in all_alphas(n) {
        for wname in weight_families().list() {
            for (d, dir) in directions.iter().enumerate() {
                for &mag in magnitudes {
                    jobs.push((alpha.clone(), wname.clone(), d, dir.iter().map(|v| v * mag).collect::<Vec<f64>>()));
                }
            }
        }
    }
    jobs.into_par_iter()
        .map(|(alpha, wname, direction, xi)| {
            let spec = MultiplierSpec::new(variant, n, j, &alpha)?;
            let grid = aligned_grid(&xi, half, nu)?;
            let w = weight_on(&weight_families().get(&wname)?.kind(), &grid, frame)?;
            let op = build_multiplier_operator(&spec, &xi, grid)?;
            let norm = weighted_opnorm(&op, &w)?;
            Ok(SweepRow { variant: variant.to_string(), j, alpha, weight: wname, direction, xi, norm })
        })
        .collect()
}

/// Largest max/min ratio of the norm within each (α, weight) group, over all
/// directions and magnitudes.
pub fn worst_band_ratio(rows: &[SweepRow]) -> f64 {
    worst_ratio(rows, false)
}

/// Largest max/min ratio along single rays.
pub fn worst_ray_ratio(rows: &[SweepRow]) -> f64 {
    worst_ratio(rows, true)
}

fn worst_ratio(rows: &[SweepRow], per_ray: bool) -> f64 {
    let mut worst: f64 = 1.0;
    for r in rows {
        let group: Vec<f64> = rows
            .iter()
            .filter(|s| s.alpha == r.alpha && s.weight == r.weight && s.j == r.j && (!per_ray || s.direction == r.direction))
            .map(|s| s.norm)
            .collect();
        let hi = group.iter().cloned().fold(f64::MIN, f64::max);
        let lo = group.iter().cloned().fold(f64::MAX, f64::min);
        worst = worst.max(hi / lo);
    }
    worst
}
