//! Truncated bivariate Taylor arithmetic.
//!
//! A [`Jet2`] holds the Taylor coefficients of a real function of `(x, y)`
//! up to total degree four around a base point. Arithmetic and elementary
//! functions propagate the coefficients, which gives exact partial
//! derivatives of explicit formulas without finite differencing.

use num_complex::Complex64;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub const ORDER: usize = 4;
const LEN: usize = 15;

#[inline]
const fn idx(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

const FACT: [f64; 5] = [1.0, 1.0, 2.0, 6.0, 24.0];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    c: [f64; LEN],
}

impl Jet2 {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; LEN];
        c[0] = v;
        Jet2 { c }
    }

    /// The coordinate function `x` expanded at `x0`.
    pub fn var_x(x0: f64) -> Self {
        let mut j = Self::constant(x0);
        j.c[idx(1, 0)] = 1.0;
        j
    }

    /// The coordinate function `y` expanded at `y0`.
    pub fn var_y(y0: f64) -> Self {
        let mut j = Self::constant(y0);
        j.c[idx(0, 1)] = 1.0;
        j
    }

    /// Both coordinates at a complex base point.
    pub fn coords(z: Complex64) -> (Self, Self) {
        (Self::var_x(z.re), Self::var_y(z.im))
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Taylor coefficient of `dx^a dy^b`.
    pub fn coeff(&self, a: usize, b: usize) -> f64 {
        if a + b > ORDER {
            return 0.0;
        }
        self.c[idx(a, b)]
    }

    /// Partial derivative `∂x^a ∂y^b` at the base point.
    pub fn partial(&self, a: usize, b: usize) -> f64 {
        if a + b > ORDER {
            return f64::NAN;
        }
        self.c[idx(a, b)] * FACT[a] * FACT[b]
    }

    /// Wirtinger derivative `∂_z^p ∂_{z̄}^q` at the base point.
    pub fn wirtinger(&self, p: usize, q: usize) -> Complex64 {
        assert!(p + q <= ORDER, "jet order exceeded");
        let i = Complex64::i();
        let mut acc = Complex64::new(0.0, 0.0);
        for al in 0..=p {
            for be in 0..=q {
                let coef = binom(p, al) * binom(q, be);
                let ph = (-i).powu(al as u32) * i.powu(be as u32);
                let a = p + q - al - be;
                let b = al + be;
                acc += ph * coef * self.partial(a, b);
            }
        }
        acc / 2f64.powi((p + q) as i32)
    }

    /// `f ∘ self`, where `d[k]` is the k-th derivative of `f` at `self.value()`.
    pub fn compose(&self, d: [f64; 5]) -> Self {
        let mut delta = *self;
        delta.c[0] = 0.0;
        let mut out = Self::constant(d[0]);
        let mut pow = delta;
        for (k, dk) in d.iter().enumerate().skip(1) {
            let s = dk / FACT[k];
            for n in 1..LEN {
                out.c[n] += s * pow.c[n];
            }
            if k < ORDER {
                pow = pow * delta;
            }
        }
        out
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose([e; 5])
    }

    pub fn ln(&self) -> Self {
        let v = self.value();
        let r = 1.0 / v;
        self.compose([v.ln(), r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }

    pub fn powf(&self, p: f64) -> Self {
        let v = self.value();
        let mut d = [0.0; 5];
        let mut coef = 1.0;
        for (k, dk) in d.iter_mut().enumerate() {
            *dk = coef * v.powf(p - k as f64);
            coef *= p - k as f64;
        }
        self.compose(d)
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn recip(&self) -> Self {
        self.powf(-1.0)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose([s, c, -s, -c, s])
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose([c, -s, -c, s, c])
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut o = *self;
        for v in o.c.iter_mut() {
            *v *= k;
        }
        o
    }
}

fn binom(n: usize, k: usize) -> f64 {
    FACT[n] / (FACT[k] * FACT[n - k])
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(mut self, o: Jet2) -> Jet2 {
        for (a, b) in self.c.iter_mut().zip(o.c.iter()) {
            *a += b;
        }
        self
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(mut self, o: Jet2) -> Jet2 {
        for (a, b) in self.c.iter_mut().zip(o.c.iter()) {
            *a -= b;
        }
        self
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        let mut c = [0.0; LEN];
        for d1 in 0..=ORDER {
            for b1 in 0..=d1 {
                let u = self.c[idx(d1 - b1, b1)];
                if u == 0.0 {
                    continue;
                }
                for d2 in 0..=(ORDER - d1) {
                    for b2 in 0..=d2 {
                        c[idx(d1 - b1 + d2 - b2, b1 + b2)] += u * o.c[idx(d2 - b2, b2)];
                    }
                }
            }
        }
        Jet2 { c }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet2) -> Jet2 {
        self * o.recip()
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(mut self, k: f64) -> Jet2 {
        self.c[0] += k;
        self
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(mut self, k: f64) -> Jet2 {
        self.c[0] -= k;
        self
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, k: f64) -> Jet2 {
        self.scale(k)
    }
}

impl Mul<Jet2> for f64 {
    type Output = Jet2;
    fn mul(self, j: Jet2) -> Jet2 {
        j.scale(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_partials() {
        let (x, y) = Jet2::coords(Complex64::new(0.3, -0.7));
        let f = x * x * y + y * y * y * y;
        assert!((f.partial(2, 1) - 2.0).abs() < 1e-14);
        assert!((f.partial(0, 4) - 24.0).abs() < 1e-12);
        assert!((f.partial(1, 1) - 2.0 * 0.3).abs() < 1e-14);
    }

    #[test]
    fn wirtinger_of_modulus_squared() {
        let (x, y) = Jet2::coords(Complex64::new(0.4, 0.1));
        let s = x * x + y * y;
        assert!((s.wirtinger(1, 1).re - 1.0).abs() < 1e-14);
        let w = s.wirtinger(1, 0);
        assert!((w - Complex64::new(0.4, -0.1)).norm() < 1e-14);
        let s2 = s * s;
        // ∂²∂̄² |z|⁴ = 4
        assert!((s2.wirtinger(2, 2).re - 4.0).abs() < 1e-12);
    }

    #[test]
    fn elementary_functions_match_closed_forms() {
        let (x, _) = Jet2::coords(Complex64::new(0.5, 0.0));
        let e = x.exp();
        for k in 0..=4 {
            assert!((e.partial(k, 0) - 0.5f64.exp()).abs() < 1e-13);
        }
        let l = x.ln();
        assert!((l.partial(3, 0) - 2.0 / 0.125).abs() < 1e-11);
        let s = x.sin();
        assert!((s.partial(4, 0) - 0.5f64.sin()).abs() < 1e-13);
        let q = (x * x).sqrt();
        assert!((q.partial(1, 0) - 1.0).abs() < 1e-13);
        assert!(q.partial(2, 0).abs() < 1e-12);
    }
}
