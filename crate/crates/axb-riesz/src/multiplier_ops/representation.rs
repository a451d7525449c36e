//! The representations acting on functions of u, applied to kernels on G.

use num_complex::Complex64;
use rayon::prelude::*;

use super::operator::{IntegralOperator1D, UGrid};
use crate::error::{Error, Result};
use crate::group_geometry::SampledFunction;

/// Offsets of the kernel's u-nodes in units of the s-spacing.
fn aligned_offsets(k: &SampledFunction, grid: &UGrid) -> Result<Vec<i64>> {
    let h = grid.spacing();
    (0..k.grid.nu)
        .map(|iu| {
            let t = k.grid.u_coord(iu) / h;
            let r = t.round();
            if (t - r).abs() > 1e-6 {
                Err(Error::GridMismatch("kernel u-nodes are not multiples of the s-spacing".into()))
            } else {
                Ok(r as i64)
            }
        })
        .collect()
}

fn check_kernel(k: &SampledFunction, xi: &[f64], phi_len: usize, grid: &UGrid) -> Result<()> {
    let n = k.grid.n();
    if !(1..=2).contains(&n) {
        return Err(Error::Unsupported(format!("representation needs n ∈ {{1, 2}} (got {n})")));
    }
    if xi.len() != n {
        return Err(Error::DimensionMismatch(n, xi.len()));
    }
    if phi_len != grid.nu {
        return Err(Error::GridMismatch("φ length differs from the s-grid".into()));
    }
    let peak = k.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !peak.is_finite() || peak == 0.0 {
        return Err(Error::Divergent("kernel is zero or non-finite".into()));
    }
    let g = &k.grid;
    let mut edge: f64 = 0.0;
    for iu in 0..g.nu {
        for fx in 0..g.x_count() {
            let on_u_edge = iu == 0 || iu + 1 == g.nu;
            let mut on_x_edge = false;
            let mut rest = fx;
            for a in 0..n {
                let i = rest % g.nx[a];
                rest /= g.nx[a];
                on_x_edge |= i == 0 || i + 1 == g.nx[a];
            }
            if on_u_edge || on_x_edge {
                edge = edge.max(k.at(fx, iu).abs());
            }
        }
    }
    if edge > 1e-3 * peak {
        return Err(Error::Divergent(format!("kernel not resolved inside its grid (edge/peak = {:e})", edge / peak)));
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `(σ^ξ(K)φ)(s) = ∫ K(x,u) e^{−i e^{s−u} ξ·x} φ(s−u) dx du` by direct quadrature.
pub fn representation_apply(k: &SampledFunction, xi: &[f64], phi: &[Complex64], grid: &UGrid) -> Result<Vec<Complex64>> {
    check_kernel(k, xi, phi.len(), grid)?;
    let off = aligned_offsets(k, grid)?;
    let g = &k.grid;
    let xs: Vec<Vec<f64>> = (0..g.x_count()).map(|f| g.x_point(f)).collect();
    let xw: Vec<f64> = (0..g.x_count()).map(|f| g.x_weight(f)).collect();
    let s = grid.coords();
    let out = (0..grid.nu)
        .into_par_iter()
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for iu in 0..g.nu {
                let src = i as i64 - off[iu];
                if src < 0 || src >= grid.nu as i64 {
                    continue;
                }
                let scale = (s[i] - g.u_coord(iu)).exp();
                let mut inner = Complex64::new(0.0, 0.0);
                for (f, x) in xs.iter().enumerate() {
                    let v = k.at(f, iu);
                    if v != 0.0 {
                        inner += v * xw[f] * Complex64::from_polar(1.0, -scale * dot(xi, x));
                    }
                }
                acc += inner * g.u_weight(iu) * phi[src as usize];
            }
            acc
        })
        .collect();
    Ok(out)
}

/// Operator with kernel `(s, s') ↦ (𝓕_x K)(e^{s'} ξ, s − s')`, the partial Fourier
/// transform in x evaluated on the kernel's own nodes.
pub fn partial_ft_operator(k: &SampledFunction, xi: &[f64], grid: UGrid) -> Result<IntegralOperator1D> {
    check_kernel(k, xi, grid.nu, &grid)?;
    let off = aligned_offsets(k, &grid)?;
    let g = &k.grid;
    let xs: Vec<Vec<f64>> = (0..g.x_count()).map(|f| g.x_point(f)).collect();
    let xw: Vec<f64> = (0..g.x_count()).map(|f| g.x_weight(f)).collect();
    let q = grid.weights();
    let ft = |eta_scale: f64, iu: usize| -> Complex64 {
        xs.iter()
            .enumerate()
            .map(|(f, x)| k.at(f, iu) * xw[f] * Complex64::from_polar(1.0, -eta_scale * dot(xi, x)))
            .sum()
    };
    let h = grid.spacing();
    let col = |b: f64| (((b - grid.u_min) / h).round() as usize).min(grid.nu - 1);
    IntegralOperator1D::from_fn(grid, |a, b| {
        let gap = ((a - b) / h).round() as i64;
        match off.iter().position(|o| *o == gap) {
            // Reweight so the operator's s'-quadrature reproduces the kernel's u-quadrature.
            Some(iu) => ft(b.exp(), iu) * (g.u_weight(iu) / q[col(b)]),
            None => Complex64::new(0.0, 0.0),
        }
    })
}
