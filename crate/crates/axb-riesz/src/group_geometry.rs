//! The group ℝⁿ⋊ℝ: products, inverses, distance, modular function, and
//! gridded functions with involution and convolution.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_to_infinity, GaussLegendre};

#[derive(Debug, Clone, PartialEq)]
pub struct GroupPoint {
    pub x: Vec<f64>,
    pub u: f64,
}

impl GroupPoint {
    pub fn new(x: Vec<f64>, u: f64) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        Ok(Self { x, u })
    }

    pub fn identity(n: usize) -> Self {
        Self { x: vec![0.0; n], u: 0.0 }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.x.iter().map(|v| v * v).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.u == 0.0 && self.x.iter().all(|v| *v == 0.0)
    }
}

pub fn multiply(p: &GroupPoint, q: &GroupPoint) -> Result<GroupPoint> {
    if p.n() != q.n() {
        return Err(Error::DimensionMismatch(p.n(), q.n()));
    }
    let s = p.u.exp();
    let x = p.x.iter().zip(&q.x).map(|(a, b)| a + s * b).collect();
    Ok(GroupPoint { x, u: p.u + q.u })
}

pub fn invert(p: &GroupPoint) -> GroupPoint {
    let s = (-p.u).exp();
    GroupPoint { x: p.x.iter().map(|v| -s * v).collect(), u: -p.u }
}

/// `cosh d(p, e) − 1`, computed without cancellation.
pub fn cosh_distance_minus_one(p: &GroupPoint) -> f64 {
    let sh = (0.5 * p.u).sinh();
    2.0 * sh * sh + 0.5 * (-p.u).exp() * p.norm_sq()
}

pub fn distance(p: &GroupPoint) -> f64 {
    arccosh_1p(cosh_distance_minus_one(p))
}

/// `arccosh(1 + e)` for `e ≥ 0`.
pub fn arccosh_1p(e: f64) -> f64 {
    if e > 1e8 {
        return (1.0 + e).ln() + std::f64::consts::LN_2;
    }
    (e + (e * (e + 2.0)).sqrt()).ln_1p()
}

pub fn modular(p: &GroupPoint) -> f64 {
    (-(p.n() as f64) * p.u).exp()
}

/// Uniform tensor grid over x-axes and u.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub x_min: Vec<f64>,
    pub x_max: Vec<f64>,
    pub nx: Vec<usize>,
    pub u_min: f64,
    pub u_max: f64,
    pub nu: usize,
}

impl GridSpec {
    pub fn new(
        x_min: Vec<f64>,
        x_max: Vec<f64>,
        nx: Vec<usize>,
        u_min: f64,
        u_max: f64,
        nu: usize,
    ) -> Result<Self> {
        let n = x_min.len();
        if n == 0 || x_max.len() != n || nx.len() != n {
            return Err(Error::GridMismatch("axis arrays must share a nonzero length".into()));
        }
        for a in 0..n {
            if !(x_max[a] > x_min[a]) || nx[a] < 2 {
                return Err(Error::GridMismatch(format!("bad x-axis {a}")));
            }
        }
        if !(u_max > u_min) || nu < 2 {
            return Err(Error::GridMismatch("bad u-axis".into()));
        }
        Ok(Self { x_min, x_max, nx, u_min, u_max, nu })
    }

    /// Same symmetric range on every x-axis.
    pub fn cube(n: usize, x_half: f64, nx: usize, u_min: f64, u_max: f64, nu: usize) -> Result<Self> {
        Self::new(vec![-x_half; n], vec![x_half; n], vec![nx; n], u_min, u_max, nu)
    }

    pub fn n(&self) -> usize {
        self.nx.len()
    }

    pub fn dx(&self, axis: usize) -> f64 {
        (self.x_max[axis] - self.x_min[axis]) / (self.nx[axis] - 1) as f64
    }

    pub fn du(&self) -> f64 {
        (self.u_max - self.u_min) / (self.nu - 1) as f64
    }

    pub fn x_coord(&self, axis: usize, i: usize) -> f64 {
        self.x_min[axis] + i as f64 * self.dx(axis)
    }

    pub fn u_coord(&self, i: usize) -> f64 {
        self.u_min + i as f64 * self.du()
    }

    pub fn x_count(&self) -> usize {
        self.nx.iter().product()
    }

    pub fn len(&self) -> usize {
        self.x_count() * self.nu
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates of the flat x-index (axis 0 varies slowest).
    pub fn x_point(&self, mut flat: usize) -> Vec<f64> {
        let n = self.n();
        let mut x = vec![0.0; n];
        for a in (0..n).rev() {
            x[a] = self.x_coord(a, flat % self.nx[a]);
            flat /= self.nx[a];
        }
        x
    }

    /// Trapezoid weight of the flat x-index.
    pub fn x_weight(&self, mut flat: usize) -> f64 {
        let mut w = 1.0;
        for a in (0..self.n()).rev() {
            let i = flat % self.nx[a];
            flat /= self.nx[a];
            let edge = i == 0 || i + 1 == self.nx[a];
            w *= if edge { 0.5 * self.dx(a) } else { self.dx(a) };
        }
        w
    }

    pub fn u_weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.nu {
            0.5 * self.du()
        } else {
            self.du()
        }
    }

    fn header_json(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",");
        let counts = self.nx.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",");
        format!(
            "{{\"x_min\":[{}],\"x_max\":[{}],\"nx\":[{}],\"u_min\":{},\"u_max\":{},\"nu\":{}}}",
            list(&self.x_min),
            list(&self.x_max),
            counts,
            self.u_min,
            self.u_max,
            self.nu
        )
    }
}

/// Real samples on a [`GridSpec`], stored u-slice by u-slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} grid points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F: Fn(&[f64], f64) -> f64 + Sync>(grid: GridSpec, f: F) -> Self {
        let nxc = grid.x_count();
        let values: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let x = grid.x_point(idx % nxc);
                f(&x, grid.u_coord(idx / nxc))
            })
            .collect();
        Self { grid, values }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let len = grid.len();
        Self { grid, values: vec![0.0; len] }
    }

    pub fn at(&self, flat_x: usize, iu: usize) -> f64 {
        self.values[iu * self.grid.x_count() + flat_x]
    }

    /// Multilinear interpolation, zero outside the grid.
    pub fn interpolate(&self, x: &[f64], u: f64) -> f64 {
        let g = &self.grid;
        let n = g.n();
        let (iu, fu) = match locate(u, g.u_min, g.du(), g.nu) {
            Some(v) => v,
            None => return 0.0,
        };
        let mut base = [0usize; 3];
        let mut frac = [0f64; 3];
        assert!(n <= 3, "interpolation supports n ≤ 3");
        for a in 0..n {
            match locate(x[a], g.x_min[a], g.dx(a), g.nx[a]) {
                Some((i, f)) => {
                    base[a] = i;
                    frac[a] = f;
                }
                None => return 0.0,
            }
        }
        let nxc = g.x_count();
        let mut s = 0.0;
        for corner in 0..(1usize << (n + 1)) {
            let mut w = 1.0;
            let mut flat = 0usize;
            for a in 0..n {
                let bit = (corner >> a) & 1;
                w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
                flat = flat * g.nx[a] + (base[a] + bit).min(g.nx[a] - 1);
            }
            let ub = (corner >> n) & 1;
            w *= if ub == 1 { fu } else { 1.0 - fu };
            if w == 0.0 {
                continue;
            }
            let ui = (iu + ub).min(g.nu - 1);
            s += w * self.values[ui * nxc + flat];
        }
        s
    }

    /// Trapezoid integral against dx du.
    pub fn integral(&self) -> f64 {
        self.weighted_sum(|v| v)
    }

    pub fn l1_norm(&self) -> f64 {
        self.weighted_sum(f64::abs)
    }

    fn weighted_sum(&self, map: impl Fn(f64) -> f64) -> f64 {
        let g = &self.grid;
        let nxc = g.x_count();
        let xw: Vec<f64> = (0..nxc).map(|i| g.x_weight(i)).collect();
        (0..g.nu)
            .map(|iu| {
                let row = &self.values[iu * nxc..(iu + 1) * nxc];
                g.u_weight(iu) * row.iter().zip(&xw).map(|(v, w)| map(*v) * w).sum::<f64>()
            })
            .sum()
    }

    /// Serializes as a JSON grid header line followed by `x1..xn,u,value` rows.
    pub fn to_csv(&self) -> String {
        let g = &self.grid;
        let mut out = g.header_json();
        out.push('\n');
        let cols: Vec<String> = (1..=g.n()).map(|i| format!("x{i}")).collect();
        out.push_str(&format!("{},u,value\n", cols.join(",")));
        let nxc = g.x_count();
        for iu in 0..g.nu {
            for fx in 0..nxc {
                for v in g.x_point(fx) {
                    out.push_str(&format!("{v},"));
                }
                out.push_str(&format!("{},{}\n", g.u_coord(iu), self.values[iu * nxc + fx]));
            }
        }
        out
    }
}

fn locate(v: f64, lo: f64, h: f64, count: usize) -> Option<(usize, f64)> {
    let t = (v - lo) / h;
    let last = (count - 1) as f64;
    if !(t >= -1e-12 && t <= last + 1e-12) {
        return None;
    }
    let t = t.clamp(0.0, last);
    let i = (t.floor() as usize).min(count - 2);
    Some((i, t - i as f64))
}

/// `f*(x, u) = e^{-nu} f(-e^{-u} x, -u)` resampled on the same grid.
pub fn involute(f: &SampledFunction) -> SampledFunction {
    let n = f.grid.n() as f64;
    SampledFunction::from_fn(f.grid.clone(), |x, u| {
        let s = (-u).exp();
        let y: Vec<f64> = x.iter().map(|v| -s * v).collect();
        (-n * u).exp() * f.interpolate(&y, -u)
    })
}

/// `(f ∗ g)(p)` with `f` given pointwise and `g` sampled; trapezoid in (x', u').
pub fn convolve_at<F: Fn(&[f64], f64) -> f64 + Sync>(f: F, g: &SampledFunction, p: &GroupPoint) -> f64 {
    let gr = &g.grid;
    let nxc = gr.x_count();
    let pts: Vec<(Vec<f64>, f64)> = (0..nxc).map(|i| (gr.x_point(i), gr.x_weight(i))).collect();
    (0..gr.nu)
        .into_par_iter()
        .map(|iu| {
            let up = gr.u_coord(iu);
            let s = (p.u - up).exp();
            let mut acc = 0.0;
            let mut y = vec![0.0; p.n()];
            for (fx, (xp, w)) in pts.iter().enumerate() {
                let gv = g.values[iu * nxc + fx];
                if gv == 0.0 {
                    continue;
                }
                for a in 0..y.len() {
                    y[a] = p.x[a] - s * xp[a];
                }
                acc += w * gv * f(&y, p.u - up);
            }
            acc * gr.u_weight(iu)
        })
        .sum()
}

/// Full-grid convolution with `f` interpolated at scaled translates.
pub fn convolve(f: &SampledFunction, g: &SampledFunction) -> Result<SampledFunction> {
    if f.grid != g.grid {
        return Err(Error::GridMismatch("convolution operands on different grids".into()));
    }
    let grid = f.grid.clone();
    let nxc = grid.x_count();
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let p = GroupPoint { x: grid.x_point(idx % nxc), u: grid.u_coord(idx / nxc) };
            convolve_serial(f, g, &p)
        })
        .collect();
    Ok(SampledFunction { grid, values })
}

fn convolve_serial(f: &SampledFunction, g: &SampledFunction, p: &GroupPoint) -> f64 {
    let gr = &g.grid;
    let nxc = gr.x_count();
    let mut total = 0.0;
    let mut y = vec![0.0; p.n()];
    for iu in 0..gr.nu {
        let up = gr.u_coord(iu);
        let s = (p.u - up).exp();
        let mut acc = 0.0;
        for fx in 0..nxc {
            let gv = g.values[iu * nxc + fx];
            if gv == 0.0 {
                continue;
            }
            let xp = gr.x_point(fx);
            for a in 0..y.len() {
                y[a] = p.x[a] - s * xp[a];
            }
            acc += gr.x_weight(fx) * gv * f.interpolate(&y, p.u - up);
        }
        total += acc * gr.u_weight(iu);
    }
    total
}

/// Area of the unit sphere in ℝⁿ (`2` for n = 1).
pub fn sphere_area(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(h) / statrs::function::gamma::gamma(h)
}

/// Radial density of `∫ |x|^N w(u) e^{-nu/2} F(R) dx du` in R:
/// `c·sinh r ∫_{-r}^{r} w(u) e^{Nu/2} (cosh r − cosh u)^{(n+N)/2−1} du`.
///
/// `breaks` lists interior points where `w` is not smooth.
pub fn radial_density<W: Fn(f64) -> f64>(n: usize, big_n: usize, w: W, breaks: &[f64], r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let p = (n + big_n) as f64 / 2.0 - 1.0;
    let half_n = big_n as f64 / 2.0;
    let c = sphere_area(n) * 2f64.powf((n + big_n) as f64 / 2.0 - 1.0);
    let gl = GaussLegendre::of(24);
    let gap = |u: f64| 2.0 * (0.5 * (r + u)).sinh() * (0.5 * (r - u)).sinh();
    let mut cuts = vec![-r];
    for &b in breaks {
        if b > -r && b < r {
            cuts.push(b);
        }
    }
    cuts.push(r);
    let mid = 0.0f64;
    if mid > -r && mid < r && !cuts.contains(&mid) {
        cuts.push(mid);
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let body = |u: f64, g: f64| w(u) * (half_n * u).exp() * g.powf(p);
    let mut s = 0.0;
    for win in cuts.windows(2) {
        let (a, b) = (win[0], win[1]);
        if b == r {
            // u = r − v², removes the endpoint singularity
            let vmax = (r - a).sqrt();
            s += gl.integrate(
                |v| {
                    let u = r - v * v;
                    let g = 2.0 * (r - 0.5 * v * v).sinh() * (0.5 * v * v).sinh();
                    2.0 * v * body(u, g)
                },
                0.0,
                vmax,
            );
        } else if a == -r {
            let vmax = (b + r).sqrt();
            s += gl.integrate(
                |v| {
                    let u = -r + v * v;
                    let g = 2.0 * (0.5 * v * v).sinh() * (r - 0.5 * v * v).sinh();
                    2.0 * v * body(u, g)
                },
                0.0,
                vmax,
            );
        } else {
            s += gl.integrate(|u| body(u, gap(u)), a, b);
        }
    }
    c * r.sinh() * s
}

/// `∫_G m^{1/2}(p) F(d(p)) dx du` for a radial profile `F`.
pub fn integrate_radial<F: Fn(f64) -> f64>(n: usize, f: F) -> Result<f64> {
    let gl = GaussLegendre::of(24);
    let dens = |r: f64| f(r) * radial_density(n, 0, |_| 1.0, &[], r);
    let head = crate::quadrature::integrate_panels(&dens, 0.0, 1.0, 8, gl);
    Ok(head + integrate_to_infinity(&dens, 1.0, 0.25, 1e-16, gl)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: &[f64], u: f64) -> GroupPoint {
        GroupPoint::new(x.to_vec(), u).unwrap()
    }

    #[test]
    fn products_and_inverses() {
        let p = multiply(&pt(&[1.0], 0.0), &pt(&[2.0], 0.0)).unwrap();
        assert_eq!(p, pt(&[3.0], 0.0));
        let p = multiply(&pt(&[0.0], 2f64.ln()), &pt(&[1.0], 0.0)).unwrap();
        assert!((p.x[0] - 2.0).abs() < 1e-15);
        let q = invert(&pt(&[1.0], 2f64.ln()));
        assert!((q.x[0] + 0.5).abs() < 1e-15 && (q.u + 2f64.ln()).abs() < 1e-15);
        assert!(multiply(&pt(&[1.0], 0.0), &pt(&[1.0, 2.0], 0.0)).is_err());
    }

    #[test]
    fn distance_values() {
        assert!((distance(&pt(&[0.0], -1.3)) - 1.3).abs() < 1e-14);
        assert_eq!(distance(&pt(&[0.0, 0.0], 0.0)), 0.0);
        assert!((distance(&pt(&[3.0], 0.0)) - 5.5f64.acosh()).abs() < 1e-13);
        assert!((modular(&pt(&[0.0; 3], 1.0)) - (-3.0f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((sphere_area(2) - 2.0 * std::f64::consts::PI).abs() < 1e-13);
        assert!((sphere_area(3) - 4.0 * std::f64::consts::PI).abs() < 1e-13);
    }

    #[test]
    fn interpolation_is_exact_on_nodes_and_zero_outside() {
        let g = GridSpec::cube(1, 1.0, 5, -1.0, 1.0, 5).unwrap();
        let f = SampledFunction::from_fn(g, |x, u| x[0] + 2.0 * u);
        assert!((f.interpolate(&[0.5], 0.5) - 1.5).abs() < 1e-15);
        assert!((f.interpolate(&[0.3], -0.1) - 0.1).abs() < 1e-14);
        assert_eq!(f.interpolate(&[1.5], 0.0), 0.0);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let g = GridSpec::cube(1, 1.0, 2, 0.0, 1.0, 2).unwrap();
        let f = SampledFunction::zeros(g);
        let csv = f.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with('{'));
        assert_eq!(lines[1], "x1,u,value");
        assert_eq!(lines.len(), 6);
    }
}
