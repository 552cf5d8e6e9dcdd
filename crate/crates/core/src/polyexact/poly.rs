//! Dense polynomials with arbitrary-precision rational coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub fn q(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

pub fn frac(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

/// `Σ c_i x^i` in one variable; trailing zeros are trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct RationalPoly {
    coeffs: Vec<BigRational>,
}

impl RationalPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| q(x)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    /// The variable `x`.
    pub fn x() -> Self {
        Self::from_ints(&[0, 1])
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(i, a)| a * q(i as i64)).collect())
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut r = Self::constant(BigRational::one());
        for _ in 0..k {
            r = &r * self;
        }
        r
    }

    /// `p(a + x)`.
    pub fn shift(&self, a: &BigRational) -> Self {
        let lin = Self::new(vec![a.clone(), BigRational::one()]);
        let mut acc = Self::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &lin) + &Self::constant(c.clone());
        }
        acc
    }

    /// Display with a chosen variable name.
    pub fn display_in(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            if mono.is_empty() {
                out.push_str(&mag.to_string());
            } else if mag.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{mag}*{mono}"));
            }
        }
        out
    }
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_in("x"))
    }
}

impl Add for &RationalPoly {
    type Output = RationalPoly;
    fn add(self, o: &RationalPoly) -> RationalPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        RationalPoly::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }
}

impl Sub for &RationalPoly {
    type Output = RationalPoly;
    fn sub(self, o: &RationalPoly) -> RationalPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        RationalPoly::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }
}

impl Mul for &RationalPoly {
    type Output = RationalPoly;
    fn mul(self, o: &RationalPoly) -> RationalPoly {
        if self.is_zero() || o.is_zero() {
            return RationalPoly::zero();
        }
        let mut c = vec![BigRational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        RationalPoly::new(c)
    }
}

impl Neg for &RationalPoly {
    type Output = RationalPoly;
    fn neg(self) -> RationalPoly {
        RationalPoly::new(self.coeffs.iter().map(|a| -a).collect())
    }
}

/// `Σ c_{ij} n^i s^j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BivarRationalPoly {
    /// Indexed by power of `n`; each row is a polynomial in `s`.
    rows: Vec<RationalPoly>,
}

impl BivarRationalPoly {
    fn from_rows(mut rows: Vec<RationalPoly>) -> Self {
        while rows.last().is_some_and(RationalPoly::is_zero) {
            rows.pop();
        }
        Self { rows }
    }

    pub fn zero() -> Self {
        Self { rows: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_rows(vec![RationalPoly::constant(c)])
    }

    pub fn int(c: i64) -> Self {
        Self::constant(q(c))
    }

    pub fn n() -> Self {
        Self::from_rows(vec![RationalPoly::zero(), RationalPoly::from_ints(&[1])])
    }

    pub fn s() -> Self {
        Self::from_rows(vec![RationalPoly::x()])
    }

    /// A polynomial in `n` alone.
    pub fn from_n_poly(p: &RationalPoly) -> Self {
        Self::from_rows(p.coeffs().iter().map(|c| RationalPoly::constant(c.clone())).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn coeff(&self, i: usize, j: usize) -> BigRational {
        self.rows.get(i).map(|r| r.coeff(j)).unwrap_or_else(BigRational::zero)
    }

    pub fn degree_s(&self) -> Option<usize> {
        self.rows.iter().filter_map(RationalPoly::degree).max()
    }

    pub fn degree_n(&self) -> Option<usize> {
        self.rows.len().checked_sub(1)
    }

    /// Coefficient of `s^j` as a polynomial in `n`.
    pub fn coeff_s(&self, j: usize) -> RationalPoly {
        RationalPoly::new(self.rows.iter().map(|r| r.coeff(j)).collect())
    }

    /// Substitute a value for `n`.
    pub fn eval_n(&self, n: &BigRational) -> RationalPoly {
        let mut acc = RationalPoly::zero();
        for r in self.rows.iter().rev() {
            acc = &acc.scale(n) + r;
        }
        acc
    }

    pub fn eval(&self, n: &BigRational, s: &BigRational) -> BigRational {
        self.eval_n(n).eval(s)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::from_rows(self.rows.iter().map(|r| r.scale(c)).collect())
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut r = Self::int(1);
        for _ in 0..k {
            r = &r * self;
        }
        r
    }

    /// `∂/∂s`.
    pub fn derivative_s(&self) -> Self {
        Self::from_rows(self.rows.iter().map(RationalPoly::derivative).collect())
    }

    /// Substitute `n = a + m`; the result uses `m` in place of `n`.
    pub fn shift_n(&self, a: &BigRational) -> Self {
        let deg = self.degree_s().map_or(0, |d| d + 1);
        let cols: Vec<RationalPoly> = (0..deg).map(|j| self.coeff_s(j).shift(a)).collect();
        let rows = cols.iter().map(|c| c.coeffs().len()).max().unwrap_or(0);
        Self::from_rows(
            (0..rows).map(|i| RationalPoly::new(cols.iter().map(|c| c.coeff(i)).collect())).collect(),
        )
    }

    pub fn display_in(&self, nv: &str, sv: &str) -> String {
        let mut terms = Vec::new();
        let deg = self.degree_s().map_or(0, |d| d + 1);
        for j in (0..deg).rev() {
            let c = self.coeff_s(j);
            if c.is_zero() {
                continue;
            }
            let mono = match j {
                0 => String::new(),
                1 => format!("*{sv}"),
                _ => format!("*{sv}^{j}"),
            };
            terms.push(format!("({}){mono}", c.display_in(nv)));
        }
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }
}

impl fmt::Display for BivarRationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_in("n", "s"))
    }
}

impl Add for &BivarRationalPoly {
    type Output = BivarRationalPoly;
    fn add(self, o: &BivarRationalPoly) -> BivarRationalPoly {
        let n = self.rows.len().max(o.rows.len());
        let z = RationalPoly::zero();
        BivarRationalPoly::from_rows(
            (0..n).map(|i| self.rows.get(i).unwrap_or(&z) + o.rows.get(i).unwrap_or(&z)).collect(),
        )
    }
}

impl Sub for &BivarRationalPoly {
    type Output = BivarRationalPoly;
    fn sub(self, o: &BivarRationalPoly) -> BivarRationalPoly {
        let n = self.rows.len().max(o.rows.len());
        let z = RationalPoly::zero();
        BivarRationalPoly::from_rows(
            (0..n).map(|i| self.rows.get(i).unwrap_or(&z) - o.rows.get(i).unwrap_or(&z)).collect(),
        )
    }
}

impl Mul for &BivarRationalPoly {
    type Output = BivarRationalPoly;
    fn mul(self, o: &BivarRationalPoly) -> BivarRationalPoly {
        if self.is_zero() || o.is_zero() {
            return BivarRationalPoly::zero();
        }
        let mut rows = vec![RationalPoly::zero(); self.rows.len() + o.rows.len() - 1];
        for (i, a) in self.rows.iter().enumerate() {
            for (j, b) in o.rows.iter().enumerate() {
                rows[i + j] = &rows[i + j] + &(a * b);
            }
        }
        BivarRationalPoly::from_rows(rows)
    }
}

impl Neg for &BivarRationalPoly {
    type Output = BivarRationalPoly;
    fn neg(self) -> BivarRationalPoly {
        BivarRationalPoly::from_rows(self.rows.iter().map(|r| -r).collect())
    }
}

macro_rules! owned_ops {
    ($t:ty) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, o: $t) -> $t {
                &self + &o
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, o: $t) -> $t {
                &self - &o
            }
        }
        impl Mul for $t {
            type Output = $t;
            fn mul(self, o: $t) -> $t {
                &self * &o
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                -&self
            }
        }
    };
}

owned_ops!(RationalPoly);
owned_ops!(BivarRationalPoly);

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat() -> impl Strategy<Value = BigRational> {
        (-50i64..50, 1i64..20).prop_map(|(a, b)| frac(a, b))
    }

    fn poly() -> impl Strategy<Value = RationalPoly> {
        prop::collection::vec(rat(), 0..7).prop_map(RationalPoly::new)
    }

    #[test]
    fn basics() {
        let one_plus = RationalPoly::from_ints(&[1, 1]);
        let one_minus = RationalPoly::from_ints(&[1, -1]);
        assert_eq!(&one_plus * &one_minus, RationalPoly::from_ints(&[1, 0, -1]));
        assert_eq!(RationalPoly::from_ints(&[0, 0, 0, 1]).derivative(), RationalPoly::from_ints(&[0, 0, 3]));
        let n = RationalPoly::x();
        let f = &(&n.scale(&q(2)) - &RationalPoly::from_ints(&[3])) * &(&n.scale(&q(3)) - &RationalPoly::from_ints(&[5]));
        assert_eq!(f.eval(&q(4)), q(35));
        assert_eq!(RationalPoly::from_ints(&[1, 2, 0, 0]).degree(), Some(1));
        assert!(RationalPoly::from_ints(&[0, 0]).is_zero());
        assert_eq!(RationalPoly::from_ints(&[1, -2, 1]).display_in("m"), "m^2 - 2*m + 1");
    }

    #[test]
    fn shift_is_substitution() {
        // (x-4)^2 at x = 4 + m is m^2
        let p = RationalPoly::from_ints(&[16, -8, 1]);
        assert_eq!(p.shift(&q(4)), RationalPoly::from_ints(&[0, 0, 1]));
    }

    #[test]
    fn bivariate_ring() {
        let n = BivarRationalPoly::n();
        let s = BivarRationalPoly::s();
        let p = &(&n * &s) + &BivarRationalPoly::int(1);
        assert_eq!(p.eval(&q(3), &q(2)), q(7));
        assert_eq!((&p * &p).coeff(2, 2), q(1));
        assert_eq!(p.coeff_s(1), RationalPoly::from_ints(&[0, 1]));
        let shifted = p.shift_n(&q(4));
        // (4 + m) s + 1
        assert_eq!(shifted.coeff_s(1), RationalPoly::from_ints(&[4, 1]));
        assert_eq!((&(&s * &s) * &n).derivative_s(), (&(&s * &n) * &BivarRationalPoly::int(2)));
    }

    proptest! {
        #[test]
        fn ring_laws(p in poly(), r in poly(), xs in prop::collection::vec(rat(), 20)) {
            prop_assert_eq!(&(&p + &r) - &r, p.clone());
            let pr = &p * &r;
            for x in &xs {
                prop_assert_eq!(pr.eval(x), p.eval(x) * r.eval(x));
            }
            prop_assert_eq!(p.shift(&q(3)).shift(&q(-3)), p);
        }
    }
}
