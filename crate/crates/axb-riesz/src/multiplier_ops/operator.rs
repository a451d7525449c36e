//! Discretized integral operators on a u-grid and the multiplier kernels.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::symbol::symbol;
use super::weights::MuckenhouptWeight;
use crate::error::{Error, Result};
use crate::registry::{Named, Registry};

/// Uniform grid on `[u_min, u_max]` with trapezoid weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UGrid {
    pub u_min: f64,
    pub u_max: f64,
    pub nu: usize,
}

impl UGrid {
    pub fn new(u_min: f64, u_max: f64, nu: usize) -> Result<Self> {
        if !(u_max > u_min) || nu < 2 {
            return Err(Error::GridMismatch(format!("bad u-grid [{u_min}, {u_max}] with {nu} points")));
        }
        Ok(Self { u_min, u_max, nu })
    }

    /// Grid of `nu` points on `[c − half, c + half]`.
    pub fn centered(c: f64, half: f64, nu: usize) -> Result<Self> {
        Self::new(c - half, c + half, nu)
    }

    pub fn spacing(&self) -> f64 {
        (self.u_max - self.u_min) / (self.nu - 1) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.u_min + i as f64 * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.nu).map(|i| self.coord(i)).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.nu).map(|i| if i == 0 || i + 1 == self.nu { 0.5 * h } else { h }).collect()
    }

    pub fn extent(&self) -> f64 {
        self.u_max - self.u_min
    }
}

/// Kernel matrix with quadrature weights: `(Mφ)_i = Σ_k K_ik q_k φ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralOperator1D {
    grid: UGrid,
    kernel: DMatrix<Complex64>,
    weights: Vec<f64>,
    real: bool,
}

impl IntegralOperator1D {
    pub fn new(grid: UGrid, kernel: DMatrix<Complex64>) -> Result<Self> {
        if kernel.nrows() != grid.nu || kernel.ncols() != grid.nu {
            return Err(Error::GridMismatch("kernel matrix does not match grid".into()));
        }
        if kernel.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("kernel matrix has non-finite entries".into()));
        }
        let real = kernel.iter().all(|z| z.im == 0.0);
        let weights = grid.weights();
        Ok(Self { grid, kernel, weights, real })
    }

    pub fn from_fn<F: Fn(f64, f64) -> Complex64 + Sync>(grid: UGrid, f: F) -> Result<Self> {
        let u = grid.coords();
        let n = grid.nu;
        let rows: Vec<Vec<Complex64>> = (0..n).into_par_iter().map(|i| (0..n).map(|k| f(u[i], u[k])).collect()).collect();
        let kernel = DMatrix::from_fn(n, n, |i, k| rows[i][k]);
        Self::new(grid, kernel)
    }

    pub fn from_real_fn<F: Fn(f64, f64) -> f64 + Sync>(grid: UGrid, f: F) -> Result<Self> {
        Self::from_fn(grid, |a, b| Complex64::new(f(a, b), 0.0))
    }

    pub fn grid(&self) -> &UGrid {
        &self.grid
    }

    pub fn kernel(&self) -> &DMatrix<Complex64> {
        &self.kernel
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn apply(&self, phi: &[Complex64]) -> Result<Vec<Complex64>> {
        if phi.len() != self.grid.nu {
            return Err(Error::GridMismatch("input length differs from grid".into()));
        }
        let v = DVector::from_iterator(phi.len(), phi.iter().zip(&self.weights).map(|(p, q)| p * q));
        Ok((&self.kernel * v).iter().copied().collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerConfig {
    pub tol: f64,
    pub budget: usize,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self { tol: 1e-10, budget: 100_000 }
    }
}

/// Discrete `L²(w) → L²(w)` norm of `op`.
pub fn weighted_opnorm(op: &IntegralOperator1D, w: &MuckenhouptWeight) -> Result<f64> {
    weighted_opnorm_with(op, w, PowerConfig::default())
}

pub fn weighted_opnorm_with(op: &IntegralOperator1D, w: &MuckenhouptWeight, cfg: PowerConfig) -> Result<f64> {
    let n = op.grid.nu;
    if w.samples.len() != n {
        return Err(Error::GridMismatch("weight samples differ from operator grid".into()));
    }
    let d: Vec<f64> = w.samples.iter().zip(&op.weights).map(|(a, q)| (a * q).sqrt()).collect();
    let q = &op.weights;
    if op.real {
        let a = DMatrix::from_fn(n, n, |i, k| d[i] * op.kernel[(i, k)].re * q[k] / d[k]);
        power_iteration(&a, cfg)
    } else {
        let a = DMatrix::from_fn(n, n, |i, k| op.kernel[(i, k)] * (d[i] * q[k] / d[k]));
        power_iteration(&a, cfg)
    }
}

trait Scalar: nalgebra::ComplexField<RealField = f64> + Copy {}
impl Scalar for f64 {}
impl Scalar for Complex64 {}

/// Largest singular value by power iteration on `AᴴA`.
fn power_iteration<T: Scalar>(a: &DMatrix<T>, cfg: PowerConfig) -> Result<f64> {
    let n = a.ncols();
    let ah = a.adjoint();
    let mut x = DVector::from_fn(n, |i, _| T::from_real(1.0 + 0.25 * ((i as f64) * 0.7).sin()));
    x /= T::from_real(x.norm());
    let mut prev = f64::NAN;
    for _ in 0..cfg.budget {
        let y = a * &x;
        let s2 = y.norm_squared();
        let z = &ah * y;
        let zn = z.norm();
        if zn == 0.0 {
            return Ok(0.0);
        }
        x = z / T::from_real(zn);
        if (s2 - prev).abs() <= cfg.tol * s2 {
            return Ok(s2.sqrt());
        }
        prev = s2;
    }
    Err(Error::NoConvergence(cfg.budget))
}

/// One multiplier form: the kernel entry in terms of the symbol values
/// `s_u = S(e^u ξ)` and `s_v = S(e^{u'} ξ)`.
pub trait MultiplierForm: Named + Send + Sync {
    /// Profile index used by the symbol (0 for the `r₀` forms).
    fn profile_index(&self, j: usize) -> usize;
    fn entry(&self, s_u: Complex64, s_v: Complex64, gap_steps: i64, du: f64) -> Complex64;
}

fn reach(gap_steps: i64, du: f64) -> bool {
    (gap_steps as f64) * du >= 1.0 - 1e-9
}

struct K0Form;
struct KjForm;
struct K0TildeForm;

impl Named for K0Form {
    fn name(&self) -> &str {
        "K0"
    }
}
impl Named for KjForm {
    fn name(&self) -> &str {
        "Kj"
    }
}
impl Named for K0TildeForm {
    fn name(&self) -> &str {
        "K0_tilde"
    }
}

impl MultiplierForm for K0Form {
    fn profile_index(&self, _: usize) -> usize {
        0
    }
    fn entry(&self, s_u: Complex64, s_v: Complex64, gap: i64, du: f64) -> Complex64 {
        if reach(gap, du) {
            (s_u - s_v) / (gap as f64 * du)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }
}

impl MultiplierForm for KjForm {
    fn profile_index(&self, j: usize) -> usize {
        j
    }
    fn entry(&self, _: Complex64, s_v: Complex64, gap: i64, du: f64) -> Complex64 {
        if reach(-gap, du) {
            s_v / (gap as f64 * du)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }
}

impl MultiplierForm for K0TildeForm {
    fn profile_index(&self, _: usize) -> usize {
        0
    }
    fn entry(&self, _: Complex64, s_v: Complex64, gap: i64, du: f64) -> Complex64 {
        if reach(gap.abs(), du) {
            s_v / (gap as f64 * du)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }
}

pub fn multiplier_forms() -> &'static Registry<dyn MultiplierForm> {
    static REG: OnceLock<Registry<dyn MultiplierForm>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut r: Registry<dyn MultiplierForm> = Registry::new();
        r.register(Box::new(K0Form));
        r.register(Box::new(KjForm));
        r.register(Box::new(K0TildeForm));
        r
    })
}

/// Identifies one operator family `M_K(ξ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierSpec {
    pub variant: String,
    pub n: usize,
    pub j: usize,
    pub alpha: Vec<u8>,
}

impl MultiplierSpec {
    pub fn new(variant: &str, n: usize, j: usize, alpha: &[u8]) -> Result<Self> {
        multiplier_forms().get(variant)?;
        let bad = match variant {
            "Kj" => j == 0 || j > n,
            _ => j != 0,
        };
        if bad {
            return Err(Error::Domain(format!("variant {variant} incompatible with j = {j}")));
        }
        if alpha.len() != n {
            return Err(Error::Domain("α length must equal n".into()));
        }
        Ok(Self { variant: variant.to_string(), n, j, alpha: alpha.to_vec() })
    }
}

/// Kernel matrix `H(u, u') = (𝓕K)(e^{u'}ξ, u − u')` in its closed symbol form.
pub fn build_multiplier_operator(spec: &MultiplierSpec, xi: &[f64], grid: UGrid) -> Result<IntegralOperator1D> {
    if xi.len() != spec.n {
        return Err(Error::DimensionMismatch(spec.n, xi.len()));
    }
    if xi.iter().all(|v| *v == 0.0) {
        return Err(Error::Domain("ξ must be nonzero".into()));
    }
    let form = multiplier_forms().get(&spec.variant)?;
    let sym = symbol(spec.n, &spec.alpha, form.profile_index(spec.j))?;
    let u = grid.coords();
    let s: Vec<Complex64> = u
        .iter()
        .map(|&ui| {
            let e = ui.exp();
            let arg: Vec<f64> = xi.iter().map(|v| v * e).collect();
            sym.eval_extended(&arg)
        })
        .collect::<Result<_>>()?;
    let du = grid.spacing();
    let n = grid.nu;
    let kernel = DMatrix::from_fn(n, n, |i, k| form.entry(s[i], s[k], i as i64 - k as i64, du));
    IntegralOperator1D::new(grid, kernel)
}

/// Max entry difference between `M(e^v ξ)` and `τ_{−v} M(ξ) τ_v` on the shared interior.
pub fn scaling_covariance_check(spec: &MultiplierSpec, xi: &[f64], v: f64, grid: UGrid) -> Result<f64> {
    let steps_f = v / grid.spacing();
    let steps = steps_f.round();
    if (steps_f - steps).abs() > 1e-9 {
        return Err(Error::GridMismatch(format!("shift {v} is not a multiple of the spacing")));
    }
    let m = steps as i64;
    let ev = v.exp();
    let scaled: Vec<f64> = xi.iter().map(|a| a * ev).collect();
    let a = build_multiplier_operator(spec, &scaled, grid)?;
    let b = build_multiplier_operator(spec, xi, grid)?;
    let n = grid.nu as i64;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for k in 0..n {
            let (bi, bk) = (i + m, k + m);
            if bi < 0 || bk < 0 || bi >= n || bk >= n {
                continue;
            }
            let d = a.kernel[(i as usize, k as usize)] - b.kernel[(bi as usize, bk as usize)];
            worst = worst.max(d.norm());
        }
    }
    Ok(worst)
}

/// `√(max row sum · max column sum)` of `|K|·q`: a bound on the unweighted norm.
pub fn schur_bound(op: &IntegralOperator1D) -> f64 {
    let n = op.grid.nu;
    let q = &op.weights;
    let mut row: f64 = 0.0;
    let mut col: f64 = 0.0;
    for i in 0..n {
        let r: f64 = (0..n).map(|k| op.kernel[(i, k)].norm() * q[k]).sum();
        let c: f64 = (0..n).map(|k| op.kernel[(k, i)].norm() * q[k]).sum();
        row = row.max(r);
        col = col.max(c);
    }
    (row * col).sqrt()
}

/// Schur test with positive test function `p` for a symmetric nonnegative
/// kernel: `max_i Σ_k |K_ik| q_k p_k / p_i`.
pub fn schur_bound_with_test(op: &IntegralOperator1D, p: &[f64]) -> f64 {
    let n = op.grid.nu;
    let q = &op.weights;
    (0..n)
        .map(|i| (0..n).map(|k| op.kernel[(i, k)].norm() * q[k] * p[k]).sum::<f64>() / p[i])
        .fold(0.0, f64::max)
}

/// Largest ratio of `|K0 entry|` to
/// `(e^{−ε|u|} + e^{−ε|u'|}) χ_{|u−u'|≥1}/|u−u'| + 2/√(u² + u'²)`.
pub fn domination_ratio(spec: &MultiplierSpec, xi: &[f64], eps: f64, grid: UGrid) -> Result<f64> {
    let op = build_multiplier_operator(spec, xi, grid)?;
    let u = grid.coords();
    let du = grid.spacing();
    let mut worst: f64 = 0.0;
    for i in 0..grid.nu {
        for k in 0..grid.nu {
            let v = op.kernel[(i, k)].norm();
            if v == 0.0 {
                continue;
            }
            let gap = (i as f64 - k as f64).abs() * du;
            let far = if gap >= 1.0 - 1e-9 { ((-eps * u[i].abs()).exp() + (-eps * u[k].abs()).exp()) / gap } else { 0.0 };
            let bound = far + 2.0 / (u[i] * u[i] + u[k] * u[k]).sqrt();
            worst = worst.max(v / bound);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiplier_ops::weights::{MuckenhouptWeight, WeightKind};

    #[test]
    fn identity_like_operator_has_unit_norm() {
        let g = UGrid::new(-1.0, 1.0, 20).unwrap();
        let q = g.weights();
        let op = IntegralOperator1D::new(
            g,
            DMatrix::from_fn(20, 20, |i, k| Complex64::new(if i == k { 1.0 / q[k] } else { 0.0 }, 0.0)),
        )
        .unwrap();
        for kind in [WeightKind::Constant, WeightKind::Power(0.5)] {
            let w = MuckenhouptWeight::on_grid(kind, &g).unwrap();
            assert!((weighted_opnorm(&op, &w).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn support_patterns() {
        let g = UGrid::new(-4.0, 4.0, 81).unwrap();
        let kj = build_multiplier_operator(&MultiplierSpec::new("Kj", 1, 1, &[0]).unwrap(), &[1.0], g).unwrap();
        let k0 = build_multiplier_operator(&MultiplierSpec::new("K0", 1, 0, &[0]).unwrap(), &[1.0], g).unwrap();
        let u = g.coords();
        for i in 0..81 {
            for k in 0..81 {
                if u[i] > u[k] - 1.0 + 1e-9 {
                    assert_eq!(kj.kernel()[(i, k)].norm(), 0.0);
                }
                if (u[i] - u[k]).abs() < 1.0 - 1e-9 {
                    assert_eq!(k0.kernel()[(i, k)].norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn spec_validation() {
        assert!(MultiplierSpec::new("Kj", 1, 0, &[0]).is_err());
        assert!(MultiplierSpec::new("K0", 1, 1, &[0]).is_err());
        assert!(MultiplierSpec::new("Kx", 1, 0, &[0]).is_err());
    }
}
