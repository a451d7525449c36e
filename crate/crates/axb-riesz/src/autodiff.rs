//! Forward-mode differentiation: univariate Taylor jets and first-order
//! multivariate hyper-dual numbers.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Highest derivative order a [`Jet`] can carry.
pub const JET_MAX: usize = 8;
const LEN: usize = JET_MAX + 1;

/// Truncated Taylor series `c[i] = f^{(i)}(x0) / i!`, valid up to `deg`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    c: [f64; LEN],
    deg: usize,
}

impl Jet {
    pub fn constant(v: f64, deg: usize) -> Self {
        assert!(deg <= JET_MAX);
        let mut c = [0.0; LEN];
        c[0] = v;
        Self { c, deg }
    }

    /// The independent variable `x0 + t`.
    pub fn var(x0: f64, deg: usize) -> Self {
        let mut j = Self::constant(x0, deg);
        if deg >= 1 {
            j.c[1] = 1.0;
        }
        j
    }

    pub fn deg(&self) -> usize {
        self.deg
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// k-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        assert!(k <= self.deg, "derivative {k} beyond jet degree {}", self.deg);
        self.c[k] * factorial(k)
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.c[k]
    }

    /// Jet of the derivative; degree drops by one.
    pub fn differentiate(&self) -> Self {
        assert!(self.deg >= 1);
        let mut c = [0.0; LEN];
        for i in 0..self.deg {
            c[i] = (i + 1) as f64 * self.c[i + 1];
        }
        Self { c, deg: self.deg - 1 }
    }

    fn with_deg(&self, deg: usize) -> Self {
        let mut c = self.c;
        for v in c.iter_mut().skip(deg + 1) {
            *v = 0.0;
        }
        Self { c, deg }
    }

    fn common(a: &Self, b: &Self) -> usize {
        a.deg.min(b.deg)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut r = *self;
        for v in r.c.iter_mut() {
            *v *= s;
        }
        r
    }

    pub fn add_const(&self, s: f64) -> Self {
        let mut r = *self;
        r.c[0] += s;
        r
    }

    pub fn recip(&self) -> Self {
        let d = self.deg;
        let mut r = [0.0; LEN];
        r[0] = 1.0 / self.c[0];
        for k in 1..=d {
            let mut s = 0.0;
            for j in 1..=k {
                s += self.c[j] * r[k - j];
            }
            r[k] = -s * r[0];
        }
        Self { c: r, deg: d }
    }

    pub fn exp(&self) -> Self {
        let d = self.deg;
        let mut e = [0.0; LEN];
        e[0] = self.c[0].exp();
        for k in 1..=d {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * self.c[j] * e[k - j];
            }
            e[k] = s / k as f64;
        }
        Self { c: e, deg: d }
    }

    fn log_from(&self, v0: f64, base0: f64) -> Self {
        // log of a series whose constant term is base0, value log = v0
        let d = self.deg;
        let mut l = [0.0; LEN];
        l[0] = v0;
        for k in 1..=d {
            let mut s = 0.0;
            for j in 1..k {
                s += j as f64 * l[j] * self.c[k - j];
            }
            l[k] = (self.c[k] - s / k as f64) / base0;
        }
        Self { c: l, deg: d }
    }

    pub fn ln(&self) -> Self {
        self.log_from(self.c[0].ln(), self.c[0])
    }

    /// `ln(1 + self)`, accurate when the value is tiny.
    pub fn ln_1p(&self) -> Self {
        let b = self.add_const(1.0);
        b.log_from(self.c[0].ln_1p(), b.c[0])
    }

    pub fn powf(&self, p: f64) -> Self {
        let d = self.deg;
        let a0 = self.c[0];
        let mut y = [0.0; LEN];
        y[0] = a0.powf(p);
        for k in 1..=d {
            let mut s = 0.0;
            for j in 1..=k {
                s += (p * j as f64 - (k - j) as f64) * self.c[j] * y[k - j];
            }
            y[k] = s / (k as f64 * a0);
        }
        Self { c: y, deg: d }
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    /// Simultaneous `(sinh, cosh)`.
    pub fn sinh_cosh(&self) -> (Self, Self) {
        let d = self.deg;
        let mut s = [0.0; LEN];
        let mut c = [0.0; LEN];
        s[0] = self.c[0].sinh();
        c[0] = self.c[0].cosh();
        for k in 1..=d {
            let mut ss = 0.0;
            let mut cc = 0.0;
            for j in 1..=k {
                ss += j as f64 * self.c[j] * c[k - j];
                cc += j as f64 * self.c[j] * s[k - j];
            }
            s[k] = ss / k as f64;
            c[k] = cc / k as f64;
        }
        (Self { c: s, deg: d }, Self { c, deg: d })
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let d = Jet::common(&self, &o);
        let mut r = self.with_deg(d);
        for i in 0..=d {
            r.c[i] += o.c[i];
        }
        r
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let d = Jet::common(&self, &o);
        let mut c = [0.0; LEN];
        for k in 0..=d {
            let mut s = 0.0;
            for j in 0..=k {
                s += self.c[j] * o.c[k - j];
            }
            c[k] = s;
        }
        Jet { c, deg: d }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let d = Jet::common(&self, &o);
        let a = self.with_deg(d);
        let b = o.with_deg(d);
        let mut q = [0.0; LEN];
        for k in 0..=d {
            let mut s = a.c[k];
            for j in 1..=k {
                s -= b.c[j] * q[k - j];
            }
            q[k] = s / b.c[0];
        }
        Jet { c: q, deg: d }
    }
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Number of hyper-dual directions supported.
pub const HD_DIRS: usize = 3;
const HD_LEN: usize = 1 << HD_DIRS;

/// Element of ℝ[ε₁, ε₂, ε₃]/(εᵢ²); component `mask` multiplies ∏_{i∈mask} εᵢ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperDual {
    c: [f64; HD_LEN],
}

impl HyperDual {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; HD_LEN];
        c[0] = v;
        Self { c }
    }

    /// `x0 + ε_dir`, or a constant when `dir` is `None`.
    pub fn var(x0: f64, dir: Option<usize>) -> Self {
        let mut h = Self::constant(x0);
        if let Some(d) = dir {
            h.c[1 << d] = 1.0;
        }
        h
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Mixed partial over the directions in `mask`.
    pub fn part(&self, mask: usize) -> f64 {
        self.c[mask]
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut r = *self;
        for v in r.c.iter_mut() {
            *v *= s;
        }
        r
    }

    /// Applies a scalar function given its derivatives `d[k] = f^{(k)}(value)`, k = 0..=3.
    pub fn apply(&self, d: &[f64; HD_DIRS + 1]) -> Self {
        let mut nil = *self;
        nil.c[0] = 0.0;
        let mut out = Self::constant(d[0]);
        let mut power = Self::constant(1.0);
        let mut fact = 1.0;
        for (k, dk) in d.iter().enumerate().skip(1) {
            power = power * nil;
            fact *= k as f64;
            for m in 0..HD_LEN {
                out.c[m] += dk / fact * power.c[m];
            }
        }
        out
    }

    pub fn powf(&self, p: f64) -> Self {
        let x = self.c[0];
        let mut d = [0.0; HD_DIRS + 1];
        let mut coef = 1.0;
        for (k, dk) in d.iter_mut().enumerate() {
            *dk = coef * x.powf(p - k as f64);
            coef *= p - k as f64;
        }
        self.apply(&d)
    }
}

impl Add for HyperDual {
    type Output = HyperDual;
    fn add(self, o: HyperDual) -> HyperDual {
        let mut r = self;
        for m in 0..HD_LEN {
            r.c[m] += o.c[m];
        }
        r
    }
}

impl Mul for HyperDual {
    type Output = HyperDual;
    fn mul(self, o: HyperDual) -> HyperDual {
        let mut c = [0.0; HD_LEN];
        for a in 0..HD_LEN {
            if self.c[a] == 0.0 {
                continue;
            }
            for b in 0..HD_LEN {
                if a & b == 0 {
                    c[a | b] += self.c[a] * o.c[b];
                }
            }
        }
        HyperDual { c }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_exp_log_roundtrip() {
        let x = Jet::var(0.7, 6);
        let y = x.exp().ln();
        for k in 0..=6 {
            let want = if k == 0 { 0.7 } else if k == 1 { 1.0 } else { 0.0 };
            assert!((y.derivative(k) - want).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn jet_powf_matches_closed_form() {
        let x = Jet::var(2.0, 5);
        let y = x.powf(-1.5);
        let mut c = 1.0;
        for k in 0..=5 {
            let want = c * 2f64.powf(-1.5 - k as f64);
            assert!((y.derivative(k) - want).abs() < 1e-12 * want.abs().max(1.0));
            c *= -1.5 - k as f64;
        }
    }

    #[test]
    fn jet_sinh_cosh_and_division() {
        let x = Jet::var(0.3, 4);
        let (s, c) = x.sinh_cosh();
        let t = s / c;
        let th = 0.3f64.tanh();
        assert!((t.derivative(1) - (1.0 - th * th)).abs() < 1e-14);
        assert!((t.derivative(2) - (-2.0 * th * (1.0 - th * th))).abs() < 1e-13);
    }

    #[test]
    fn jet_ln1p_small_value() {
        let x = Jet::var(1e-12, 3);
        let y = x.ln_1p();
        assert!((y.value() - 1e-12).abs() < 1e-24);
        assert!((y.derivative(1) - 1.0).abs() < 1e-11);
        assert!((y.derivative(2) + 1.0).abs() < 1e-11);
    }

    #[test]
    fn differentiate_lowers_degree() {
        let x = Jet::var(1.0, 3);
        let y = (x * x * x).differentiate();
        assert_eq!(y.deg(), 2);
        assert!((y.value() - 3.0).abs() < 1e-15);
        assert!((y.derivative(1) - 6.0).abs() < 1e-15);
    }

    #[test]
    fn hyperdual_mixed_partial() {
        // f(x, y) = (x y)^2 ; ∂x∂y f = 4xy
        let x = HyperDual::var(1.5, Some(0));
        let y = HyperDual::var(-0.5, Some(1));
        let f = (x * y).powf(2.0);
        assert!((f.part(0b11) - 4.0 * 1.5 * -0.5).abs() < 1e-13);
        assert!((f.part(0b01) - 2.0 * 1.5 * 0.25).abs() < 1e-13);
    }
}
