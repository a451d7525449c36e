//! Fourier symbols `S_{α,j} = r̂_{α,j}` of the differentiated profiles.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::autodiff::HyperDual;
use crate::error::{Error, Result};

/// Out-of-band values count as zero only if the band edge is this far below the peak.
pub const EDGE_RELATIVE: f64 = 1e-4;

/// Sampling used for the transform in dimension `n`: (points per axis, spacing).
pub fn sampling(n: usize) -> Result<(usize, f64)> {
    match n {
        1 => Ok((1 << 18, 1.0 / 64.0)),
        2 => Ok((2048, 1.0 / 16.0)),
        3 => Ok((128, 0.5)),
        _ => Err(Error::Unsupported(format!("symbols implemented for n ≤ 3, got {n}"))),
    }
}

/// `r_{α,j}(x) = (−1)^{|α|} ∂^α (x^α r_j(x))`.
pub fn differentiated_profile(j: usize, alpha: &[u8], x: &[f64]) -> f64 {
    let n = x.len();
    let vars: Vec<HyperDual> = (0..n)
        .map(|i| HyperDual::var(x[i], if alpha[i] == 1 { Some(i) } else { None }))
        .collect();
    let mut q = HyperDual::constant(1.0);
    for v in &vars {
        q = q + *v * *v;
    }
    let mut f = q.powf(-1.0 - n as f64 / 2.0);
    if j >= 1 {
        f = f * vars[j - 1];
    }
    let mut mask = 0usize;
    for i in 0..n {
        if alpha[i] == 1 {
            f = f * vars[i];
            mask |= 1 << i;
        }
    }
    let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    sign * f.part(mask)
}

/// Gridded transform of `r_{α,j}` with cubic interpolation in ξ.
#[derive(Debug, Clone)]
pub struct SymbolFunction {
    pub n: usize,
    pub j: usize,
    pub alpha: Vec<u8>,
    m: usize,
    h: f64,
    data: Vec<Complex64>,
    peak: f64,
    edge: f64,
}

impl SymbolFunction {
    pub fn build(n: usize, alpha: &[u8], j: usize) -> Result<Self> {
        let (m, h) = sampling(n)?;
        if alpha.len() != n || alpha.iter().any(|a| *a > 1) {
            return Err(Error::Domain("α must be a 0/1 multi-index of length n".into()));
        }
        if j > n {
            return Err(Error::Domain(format!("j = {j} exceeds n = {n}")));
        }
        let total = m.pow(n as u32);
        let coord = |k: usize| (k as f64 - (m / 2) as f64) * h;
        let mut data: Vec<Complex64> = (0..total)
            .into_par_iter()
            .map(|flat| {
                let mut x = [0.0; 3];
                let mut edges = Vec::new();
                let mut rest = flat;
                for a in (0..n).rev() {
                    let k = rest % m;
                    x[a] = coord(k);
                    if k == 0 {
                        edges.push(a);
                    }
                    rest /= m;
                }
                // The unpaired node at −L stands for both ends of the period.
                let mut acc = 0.0;
                for subset in 0..1usize << edges.len() {
                    let mut y = x;
                    for (b, a) in edges.iter().enumerate() {
                        if subset >> b & 1 == 1 {
                            y[*a] = -y[*a];
                        }
                    }
                    acc += differentiated_profile(j, alpha, &y[..n]);
                }
                Complex64::new(acc / (1usize << edges.len()) as f64, 0.0)
            })
            .collect();
        fft_nd(&mut data, n, m);
        let vol = h.powi(n as i32);
        let mut peak: f64 = 0.0;
        let mut edge: f64 = 0.0;
        let q = m / 4;
        for (flat, v) in data.iter_mut().enumerate() {
            let mut rest = flat;
            let mut parity = 0usize;
            let mut outer = false;
            for _ in 0..n {
                let k = rest % m;
                rest /= m;
                let signed = if k >= m / 2 { k as isize - m as isize } else { k as isize };
                parity += signed.unsigned_abs();
                let a = signed.unsigned_abs();
                outer |= a >= 3 * q / 4 && a <= q;
            }
            let sgn = if parity % 2 == 0 { 1.0 } else { -1.0 };
            *v *= sgn * vol;
            peak = peak.max(v.norm());
            if outer {
                edge = edge.max(v.norm());
            }
        }
        Ok(Self { n, j, alpha: alpha.to_vec(), m, h, data, peak, edge })
    }

    /// Largest resolved |ξ_i|: half the Nyquist frequency.
    pub fn band(&self) -> f64 {
        std::f64::consts::PI / (2.0 * self.h)
    }

    pub fn peak(&self) -> f64 {
        self.peak
    }

    /// Largest |S| over the outer quarter of the resolved band.
    pub fn edge_level(&self) -> f64 {
        self.edge
    }

    /// Strict evaluation; refuses frequencies outside the resolved band.
    pub fn eval(&self, xi: &[f64]) -> Result<Complex64> {
        if xi.len() != self.n {
            return Err(Error::DimensionMismatch(self.n, xi.len()));
        }
        let b = self.band();
        if let Some(v) = xi.iter().find(|v| v.abs() > b) {
            return Err(Error::OutOfBand(*v, b));
        }
        Ok(self.interp(xi))
    }

    /// Like [`eval`](Self::eval), but returns 0 beyond the band when the
    /// spectrum has already decayed there; errors otherwise.
    pub fn eval_extended(&self, xi: &[f64]) -> Result<Complex64> {
        let b = self.band();
        if xi.iter().all(|v| v.abs() <= b) {
            return self.eval(xi);
        }
        if self.edge <= EDGE_RELATIVE * self.peak {
            Ok(Complex64::new(0.0, 0.0))
        } else {
            let v = xi.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            Err(Error::OutOfBand(v, b))
        }
    }

    fn interp(&self, xi: &[f64]) -> Complex64 {
        let m = self.m;
        let dxi = 2.0 * std::f64::consts::PI / (m as f64 * self.h);
        let n = self.n;
        let mut base = [0isize; 3];
        let mut wts = [[0.0; 4]; 3];
        for a in 0..n {
            let t = xi[a] / dxi;
            let i = t.floor();
            let s = t - i;
            base[a] = i as isize - 1;
            wts[a] = [
                -s * (s - 1.0) * (s - 2.0) / 6.0,
                (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
                -(s + 1.0) * s * (s - 2.0) / 2.0,
                (s + 1.0) * s * (s - 1.0) / 6.0,
            ];
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for corner in 0..4usize.pow(n as u32) {
            let mut c = corner;
            let mut w = 1.0;
            let mut flat = 0usize;
            for a in 0..n {
                let o = c % 4;
                c /= 4;
                w *= wts[a][o];
                let k = (base[a] + o as isize).rem_euclid(m as isize) as usize;
                flat = flat * m + k;
            }
            acc += self.data[flat] * w;
        }
        acc
    }
}

fn fft_nd(data: &mut [Complex64], n: usize, m: usize) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(m);
    let total = data.len();
    for axis in 0..n {
        let stride = m.pow((n - 1 - axis) as u32);
        let lines: Vec<usize> = (0..total)
            .filter(|flat| (flat / stride) % m == 0)
            .collect();
        let results: Vec<(usize, Vec<Complex64>)> = lines
            .par_iter()
            .map(|&start| {
                let mut buf: Vec<Complex64> = (0..m).map(|k| data[start + k * stride]).collect();
                fft.process(&mut buf);
                (start, buf)
            })
            .collect();
        for (start, buf) in results {
            for (k, v) in buf.into_iter().enumerate() {
                data[start + k * stride] = v;
            }
        }
    }
}

type SymbolKey = (usize, Vec<u8>, usize);

/// Shared, lazily built symbol for `(n, α, j)`.
pub fn symbol(n: usize, alpha: &[u8], j: usize) -> Result<Arc<SymbolFunction>> {
    static CACHE: OnceLock<Mutex<HashMap<SymbolKey, Arc<SymbolFunction>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (n, alpha.to_vec(), j);
    if let Some(s) = cache.lock().expect("symbol cache poisoned").get(&key) {
        return Ok(s.clone());
    }
    let built = Arc::new(SymbolFunction::build(n, alpha, j)?);
    cache.lock().expect("symbol cache poisoned").insert(key, built.clone());
    Ok(built)
}

/// `S_{α,j}(ξ)`.
pub fn symbol_s(n: usize, alpha: &[u8], j: usize, xi: &[f64]) -> Result<Complex64> {
    symbol(n, alpha, j)?.eval(xi)
}

/// Least-squares slope of `log|S(t) − offset|` against `log t` along `direction`.
pub fn decay_slope(
    s: &SymbolFunction,
    direction: &[f64],
    t_lo: f64,
    t_hi: f64,
    points: usize,
    offset: Complex64,
) -> Result<f64> {
    let mut xs = Vec::with_capacity(points);
    let mut ys = Vec::with_capacity(points);
    for i in 0..points {
        let t = t_lo * (t_hi / t_lo).powf(i as f64 / (points - 1) as f64);
        let xi: Vec<f64> = direction.iter().map(|d| d * t).collect();
        xs.push(t.ln());
        ys.push((s.eval(&xi)? - offset).norm().max(1e-300).ln());
    }
    Ok(crate::report::linear_fit(&xs, &ys).slope)
}

/// Empirical ε: the weaker of the Hölder rate of `S − S(0)` near 0 and the
/// decay rate at ∞.
pub fn fitted_epsilon(s: &SymbolFunction) -> Result<f64> {
    let mut dir = vec![0.0; s.n];
    dir[0] = 1.0;
    let at_zero = s.eval(&vec![0.0; s.n])?;
    let near = decay_slope(s, &dir, 2f64.powi(-6), 2f64.powi(-2), 17, at_zero)?;
    let far = decay_slope(s, &dir, 4.0, 64.0, 17, Complex64::new(0.0, 0.0))?;
    Ok(near.min(-far))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_derivatives() {
        // n = 1, j = 1, α = 1: −d/dx (x² (1+x²)^{−3/2}) = −(2x(1+x²)^{−3/2} − 3x³(1+x²)^{−5/2})
        let x = 0.7f64;
        let want = -(2.0 * x * (1.0 + x * x).powf(-1.5) - 3.0 * x.powi(3) * (1.0 + x * x).powf(-2.5));
        assert!((differentiated_profile(1, &[1], &[x]) - want).abs() < 1e-14);
        assert!((differentiated_profile(0, &[0], &[x]) - (1.0 + x * x).powf(-1.5)).abs() < 1e-15);
    }

    #[test]
    fn zero_frequency_values() {
        let s0 = symbol(1, &[0], 0).unwrap();
        assert!((s0.eval(&[0.0]).unwrap().re - 2.0).abs() < 1e-6);
        let s1 = symbol(1, &[0], 1).unwrap();
        assert!(s1.eval(&[0.0]).unwrap().norm() < 1e-10);
        assert!(matches!(s1.eval(&[500.0]), Err(Error::OutOfBand(..))));
    }
}
