//! Second-order forward-mode differentiation in one variable.
//!
//! Profile generators are written once as `Fn(Jet) -> Jet` and the knots of a
//! [`RadialProfile`](crate::profile::RadialProfile) receive exact first and
//! second derivatives from the same expression.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Truncated Taylor jet `(f, f', f'')` of a scalar function at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const fn new(v: f64, d1: f64, d2: f64) -> Self {
        Self { v, d1, d2 }
    }

    /// The independent variable at `x`.
    pub const fn var(x: f64) -> Self {
        Self::new(x, 1.0, 0.0)
    }

    pub const fn constant(c: f64) -> Self {
        Self::new(c, 0.0, 0.0)
    }

    /// Apply a scalar function given its value and first two derivatives at `self.v`.
    #[inline]
    pub fn chain(self, f: f64, df: f64, d2f: f64) -> Self {
        Self::new(f, df * self.d1, d2f * self.d1 * self.d1 + df * self.d2)
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Self {
        let x = self.v;
        self.chain(x.ln(), 1.0 / x, -1.0 / (x * x))
    }

    pub fn powf(self, p: f64) -> Self {
        let x = self.v;
        if p == 0.0 {
            return Self::constant(1.0);
        }
        let xp = x.powf(p);
        let d1 = if p == 1.0 { 1.0 } else { p * x.powf(p - 1.0) };
        let d2 = if p == 1.0 || p == 2.0 { p * (p - 1.0) } else { p * (p - 1.0) * x.powf(p - 2.0) };
        self.chain(xp, d1, d2)
    }

    pub fn powi(self, k: i32) -> Self {
        let x = self.v;
        let kf = k as f64;
        let d1 = if k == 0 { 0.0 } else { kf * x.powi(k - 1) };
        let d2 = if k == 0 || k == 1 { 0.0 } else { kf * (kf - 1.0) * x.powi(k - 2) };
        self.chain(x.powi(k), d1, d2)
    }

    pub fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * self.v))
    }

    pub fn sinh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(s, c, s)
    }

    pub fn cosh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(c, s, c)
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn tanh(self) -> Self {
        let t = self.v.tanh();
        let sech2 = 1.0 - t * t;
        self.chain(t, sech2, -2.0 * t * sech2)
    }

    pub fn abs(self) -> Self {
        if self.v < 0.0 {
            -self
        } else {
            self
        }
    }
}

impl From<f64> for Jet {
    fn from(c: f64) -> Self {
        Jet::constant(c)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.v + o.v, self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.v - o.v, self.d1 - o.d1, self.d2 - o.d2)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet::new(
            self.v * o.v,
            self.d1 * o.v + self.v * o.d1,
            self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        )
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let inv = 1.0 / o.v;
        let q = self.v * inv;
        let d1 = (self.d1 - q * o.d1) * inv;
        let d2 = (self.d2 - 2.0 * d1 * o.d1 - q * o.d2) * inv;
        Jet::new(q, d1, d2)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::new(-self.v, -self.d1, -self.d2)
    }
}

macro_rules! scalar_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<f64> for Jet {
            type Output = Jet;
            fn $m(self, c: f64) -> Jet { $tr::$m(self, Jet::constant(c)) }
        }
        impl $tr<Jet> for f64 {
            type Output = Jet;
            fn $m(self, j: Jet) -> Jet { $tr::$m(Jet::constant(self), j) }
        }
    )*};
}

scalar_ops!(Add add, Sub sub, Mul mul, Div div);

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: impl Fn(f64) -> f64, x: f64) -> (f64, f64) {
        let h = 1e-4 * x.abs().max(1.0);
        let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
        let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        (d1, d2)
    }

    #[test]
    fn matches_finite_differences() {
        let g = |x: Jet| (x.sinh() * x.powf(1.7) + 3.0).ln() / (1.0 + x * x).sqrt() - x.tanh().exp();
        let gf = |x: f64| (x.sinh() * x.powf(1.7) + 3.0).ln() / (1.0 + x * x).sqrt() - x.tanh().exp();
        for &x in &[0.3, 1.1, 2.5] {
            let j = g(Jet::var(x));
            let (d1, d2) = fd(gf, x);
            assert!((j.v - gf(x)).abs() < 1e-14);
            assert!((j.d1 - d1).abs() < 1e-6, "{} vs {}", j.d1, d1);
            assert!((j.d2 - d2).abs() < 1e-5, "{} vs {}", j.d2, d2);
        }
    }

    #[test]
    fn integer_powers() {
        let j = Jet::var(2.0).powi(3);
        assert_eq!(j, Jet::new(8.0, 12.0, 12.0));
        let j = Jet::var(2.0).powf(2.0);
        assert_eq!(j, Jet::new(4.0, 4.0, 2.0));
    }
}
