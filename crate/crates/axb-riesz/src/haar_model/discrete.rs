//! The discrete flow operator `T_j` on `ℝⁿ × ℤ`.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::flow::FlowSum;
use crate::error::{Error, Result};
use crate::group_geometry::{GridSpec, SampledFunction};
use crate::quadrature::GaussLegendre;

pub const FLOW_WINDOW: i64 = 64;
const S_NODES: usize = 8;

/// `∫_cell (r_j)_{(λ)}` for the cell centred at `offset·dx` (cell units per axis).
fn cell_kernel(n: usize, j: usize, lambda: f64, offset: &[i64], dx: &[f64]) -> f64 {
    let lo: Vec<f64> = (0..n).map(|a| (offset[a] as f64 - 0.5) * dx[a] / lambda).collect();
    let hi: Vec<f64> = (0..n).map(|a| (offset[a] as f64 + 0.5) * dx[a] / lambda).collect();
    match n {
        1 => {
            let (a, b) = (lo[0], hi[0]);
            let (ra, rb) = ((1.0 + a * a).sqrt(), (1.0 + b * b).sqrt());
            (b - a) * (b + a) / (ra * rb * (ra + rb))
        }
        _ => {
            let o = 1 - (j - 1);
            let (a, b) = (lo[j - 1], hi[j - 1]);
            let (c, d) = (lo[o], hi[o]);
            let f = |big: f64| {
                let s = big.sqrt();
                ((d / s).atan() - (c / s).atan()) / s
            };
            0.5 * (f(1.0 + a * a) - f(1.0 + b * b))
        }
    }
}

fn fft2(data: &mut [Complex64], shape: (usize, usize), inverse: bool) {
    let (l0, l1) = shape;
    let mut planner = FftPlanner::<f64>::new();
    let p1 = if inverse { planner.plan_fft_inverse(l1) } else { planner.plan_fft_forward(l1) };
    data.par_chunks_mut(l1).for_each(|row| p1.process(row));
    if l0 > 1 {
        let p0 = if inverse { planner.plan_fft_inverse(l0) } else { planner.plan_fft_forward(l0) };
        let cols: Vec<Vec<Complex64>> = (0..l1)
            .into_par_iter()
            .map(|c| {
                let mut col: Vec<Complex64> = (0..l0).map(|r| data[r * l1 + c]).collect();
                p0.process(&mut col);
                col
            })
            .collect();
        for (c, col) in cols.into_iter().enumerate() {
            for (r, v) in col.into_iter().enumerate() {
                data[r * l1 + c] = v;
            }
        }
    }
}

struct Layout {
    n: usize,
    nx: Vec<usize>,
    dx: Vec<f64>,
    shape: (usize, usize),
}

impl Layout {
    fn new(g: &GridSpec) -> Self {
        let n = g.n();
        let nx = g.nx.clone();
        let dx: Vec<f64> = (0..n).map(|a| g.dx(a)).collect();
        let pad = |m: usize| (2 * m - 1).next_power_of_two();
        let shape = if n == 1 { (1, pad(nx[0])) } else { (pad(nx[0]), pad(nx[1])) };
        Self { n, nx, dx, shape }
    }

    fn len(&self) -> usize {
        self.shape.0 * self.shape.1
    }

    // Grid flat index uses axis 0 fastest; padded arrays are row-major with the last axis fastest.
    fn padded_index(&self, flat: usize) -> usize {
        if self.n == 1 {
            flat
        } else {
            let (i0, i1) = (flat % self.nx[0], flat / self.nx[0]);
            i0 * self.shape.1 + i1
        }
    }

    fn kernel(&self, j: usize, lambda: f64) -> Vec<Complex64> {
        let (l0, l1) = self.shape;
        let signed = |i: usize, l: usize| if i < l / 2 { i as i64 } else { i as i64 - l as i64 };
        let mut k: Vec<Complex64> = (0..self.len())
            .into_par_iter()
            .map(|p| {
                let off = if self.n == 1 { vec![signed(p, l1)] } else { vec![signed(p / l1, l0), signed(p % l1, l1)] };
                Complex64::new(cell_kernel(self.n, j, lambda, &off, &self.dx), 0.0)
            })
            .collect();
        fft2(&mut k, self.shape, false);
        k
    }
}

fn slice_at(f: &SampledFunction, u: f64) -> Option<Vec<f64>> {
    let g = &f.grid;
    if u < g.u_min || u > g.u_max {
        return None;
    }
    let t = ((u - g.u_min) / g.du()).min((g.nu - 1) as f64);
    let i = (t.floor() as usize).min(g.nu - 2);
    let w = t - i as f64;
    let row: Vec<f64> = (0..g.x_count()).map(|fx| (1.0 - w) * f.at(fx, i) + w * f.at(fx, i + 1)).collect();
    row.iter().any(|v| *v != 0.0).then_some(row)
}

fn check_support(f: &SampledFunction) -> Result<()> {
    let g = &f.grid;
    for iu in 0..g.nu {
        for fx in 0..g.x_count() {
            if f.at(fx, iu) == 0.0 {
                continue;
            }
            let x = g.x_point(fx);
            for (a, xa) in x.iter().enumerate() {
                let c = 0.5 * (g.x_min[a] + g.x_max[a]);
                let half = 0.5 * (g.x_max[a] - g.x_min[a]);
                if (xa - c).abs() > 0.5 * half {
                    return Err(Error::Domain("support overflow: f must vanish on the outer half of its x-grid".into()));
                }
            }
        }
    }
    Ok(())
}

/// `T_j f(·,k) = Σ_{h ≥ k+1} (h − k)^{−1} ∫_0^1 f(·,h+s) ∗ (r_j)_{(2^{h+s})} ds` on the x-grid of `f`.
pub fn discrete_t(j: usize, f: &SampledFunction) -> Result<FlowSum> {
    let n = f.grid.n();
    if !(1..=2).contains(&n) {
        return Err(Error::Unsupported(format!("discrete operator needs n ∈ {{1, 2}} (got {n})")));
    }
    if j == 0 || j > n {
        return Err(Error::Domain(format!("j must lie in 1..={n} (got {j})")));
    }
    check_support(f)?;
    let lay = Layout::new(&f.grid);
    let gl: Vec<(f64, f64)> = GaussLegendre::of(S_NODES).mapped(0.0, 1.0).collect();
    let h_lo = f.grid.u_min.floor() as i64;
    let h_hi = f.grid.u_max.floor() as i64;
    let cells = f.grid.x_count();
    let mut heights = Vec::new();
    let mut per_height: Vec<Vec<f64>> = Vec::new();
    for h in h_lo..=h_hi {
        let mut acc = vec![Complex64::new(0.0, 0.0); lay.len()];
        let mut any = false;
        for &(s, w) in &gl {
            let Some(row) = slice_at(f, h as f64 + s) else { continue };
            any = true;
            let mut data = vec![Complex64::new(0.0, 0.0); lay.len()];
            for (fx, v) in row.iter().enumerate() {
                data[lay.padded_index(fx)] = Complex64::new(*v, 0.0);
            }
            fft2(&mut data, lay.shape, false);
            let kern = lay.kernel(j, 2f64.powf(h as f64 + s));
            acc.par_iter_mut().zip(data.par_iter().zip(kern.par_iter())).for_each(|(a, (d, k))| *a += d * k * w);
        }
        if !any {
            continue;
        }
        fft2(&mut acc, lay.shape, true);
        let norm = lay.len() as f64;
        heights.push(h);
        per_height.push((0..cells).map(|fx| acc[lay.padded_index(fx)].re / norm).collect());
    }
    if heights.is_empty() {
        return Ok(FlowSum::zero());
    }
    let cell_measure: f64 = lay.dx.iter().product();
    let mut values = Vec::with_capacity(cells * heights.len());
    for c in 0..cells {
        for row in &per_height {
            values.push(row[c]);
        }
    }
    FlowSum::new(vec![cell_measure; cells], heights, values, FLOW_WINDOW)
}

/// `‖f‖₁` with the same cell measure in x as [`discrete_t`] and trapezoid weights in u.
pub fn l1_mass(f: &SampledFunction) -> f64 {
    let g = &f.grid;
    let cell: f64 = (0..g.n()).map(|a| g.dx(a)).product();
    (0..g.nu).map(|iu| g.u_weight(iu) * (0..g.x_count()).map(|fx| f.at(fx, iu).abs()).sum::<f64>() * cell).sum()
}

/// Smooth bump of x-width `width` centred at 0 times a smooth bump on `[h0, h0 + 1]`,
/// scaled so that [`l1_mass`] equals `mass`.
pub fn atom(grid: GridSpec, width: f64, h0: f64, mass: f64) -> Result<SampledFunction> {
    let bump = |t: f64| if t.abs() < 1.0 { (1.0 - t * t).powi(3) } else { 0.0 };
    let f = SampledFunction::from_fn(grid, |x, u| {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt() / width;
        bump(r) * bump(2.0 * (u - h0) - 1.0)
    });
    let m = l1_mass(&f);
    if m == 0.0 {
        return Err(Error::Domain("atom is not resolved by the grid".into()));
    }
    let values = f.values.iter().map(|v| v * mass / m).collect();
    SampledFunction::new(f.grid, values)
}
