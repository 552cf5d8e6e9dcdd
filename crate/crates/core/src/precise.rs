//! Multi-precision evaluation of the sign functions behind the key estimate.
//!
//! `G_n`, `H_n`, `J_n`, `K_n`, the key-estimate margin and the pointwise
//! transfer bound all involve cancellation between terms of size
//! `sinh(t)^{4(n-1)}` whose difference is exponentially smaller (large `t`)
//! or polynomially smaller (small `t`). Everything here runs in binary
//! floating point with `320 + n·max(0, -log2 t)` bits and only the final,
//! normalized quantity is rounded to `f64`.

use astro_float::{BigFloat, Consts, RoundingMode};

use crate::error::{Error, Result};

const RM: RoundingMode = RoundingMode::ToEven;

/// Working precision in bits for argument `t`.
pub fn precision_bits(n: u32, t: f64) -> usize {
    let loss = if t > 0.0 { (-t.log2()).max(0.0) } else { 0.0 };
    320 + (n as f64 * loss).ceil() as usize
}

/// Round a big float to the nearest `f64` (via its top mantissa word).
pub fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    match x.as_raw_parts() {
        Some((words, _, sign, e, _)) => {
            let top = *words.last().expect("nonzero mantissa");
            let frac = top as f64 / 18_446_744_073_709_551_616.0;
            let v = if e > 1100 {
                f64::INFINITY
            } else if e < -1200 {
                0.0
            } else {
                frac * 2f64.powi(e)
            };
            if sign == astro_float::Sign::Neg {
                -v
            } else {
                v
            }
        }
        None => f64::NAN,
    }
}

struct Hp {
    p: usize,
    cc: Consts,
}

impl Hp {
    fn new(p: usize) -> Result<Self> {
        let cc = Consts::new().map_err(|e| Error::Domain(format!("multi-precision constants: {e:?}")))?;
        Ok(Self { p, cc })
    }

    fn f(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.p)
    }

    fn i(&self, x: i64) -> BigFloat {
        BigFloat::from_i64(x, self.p)
    }

    fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.p, RM)
    }

    fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.p, RM)
    }

    fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.p, RM)
    }

    fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.p, RM)
    }

    fn pw(&self, a: &BigFloat, k: usize) -> BigFloat {
        a.powi(k, self.p, RM)
    }

    fn exp(&mut self, a: &BigFloat) -> BigFloat {
        a.exp(self.p, RM, &mut self.cc)
    }

    /// `Σ c_i x^i` with integer coefficients.
    fn poly(&self, c: &[i64], x: &BigFloat) -> BigFloat {
        let mut acc = self.i(0);
        for &ci in c.iter().rev() {
            acc = self.add(&self.mul(&acc, x), &self.i(ci));
        }
        acc
    }

    fn sigma(&mut self, n: u32) -> BigFloat {
        let pi = self.cc.pi(self.p, RM);
        let (mut v, mut k) = if n % 2 == 0 { (self.i(1), 2) } else { (self.i(2), 3) };
        while k <= n {
            v = self.div(&self.mul(&v, &self.mul(&self.i(2), &pi)), &self.i(k as i64));
            k += 2;
        }
        v
    }
}

/// `sinh t`, `cosh t` and `Φ_n(t)` in multi-precision.
struct Point {
    sh: BigFloat,
    ch: BigFloat,
    phi: BigFloat,
}

fn point(hp: &mut Hp, n: u32, t: &BigFloat) -> Point {
    let et = hp.exp(t);
    let one = hp.i(1);
    let emt = hp.div(&one, &et);
    let two = hp.i(2);
    let sh = hp.div(&hp.sub(&et, &emt), &two);
    let ch = hp.div(&hp.add(&et, &emt), &two);
    // sinh^m = 2^{-m} Σ_k C(m,k) (-1)^k e^{(m-2k)t}
    let m = n as i64 - 1;
    let mut sum = hp.i(0);
    let mut binom: i64 = 1;
    for k in 0..=m {
        let d = m - 2 * k;
        let term = if d == 0 {
            t.clone()
        } else {
            let e = if d > 0 { hp.pw(&et, d as usize) } else { hp.pw(&emt, (-d) as usize) };
            hp.div(&hp.sub(&e, &one), &hp.i(d))
        };
        let term = hp.mul(&term, &hp.i(binom));
        sum = if k % 2 == 0 { hp.add(&sum, &term) } else { hp.sub(&sum, &term) };
        binom = binom * (m - k) / (k + 1);
    }
    let phi = hp.div(&hp.mul(&sum, &hp.i(n as i64)), &hp.pw(&two, m as usize));
    Point { sh, ch, phi }
}

fn ni(n: u32) -> i64 {
    n as i64
}

/// `(n^2 D_J, numerator pieces)` where
/// `D_J = (n-1)^3 (n^2+6n-12)/n^2 s^2 + (n-2)(2n^2-7n+7) s + (n-2)^2(n-4)`.
fn dj_times_n2(n: i64) -> [i64; 3] {
    [
        n * n * (n - 2) * (n - 2) * (n - 4),
        n * n * (n - 2) * (2 * n * n - 7 * n + 7),
        (n - 1).pow(3) * (n * n + 6 * n - 12),
    ]
}

fn g_raw(hp: &Hp, n: u32, q: &Point) -> BigFloat {
    let nn = ni(n);
    let (sh, ch, phi) = (&q.sh, &q.ch, &q.phi);
    let phi2 = hp.pw(phi, 2);
    let c4 = hp.div(&hp.i((nn - 1).pow(3) * (nn - 2)), &hp.i(2 * nn.pow(4)));
    let t1 = hp.mul(&c4, &hp.pw(phi, 4));
    let a = hp.mul(&hp.i(nn - 1), &hp.pw(sh, 2 * (n as usize - 1)));
    let b = hp.mul(&hp.i(nn - 2), &hp.pw(sh, 2 * n as usize - 4));
    let t2 = hp.div(&hp.mul(&hp.add(&a, &b), &phi2), &hp.i(2));
    let t3 = hp.mul(&hp.mul(&hp.i(2 * (nn - 1)), &hp.pw(sh, 3 * n as usize - 4)), &hp.mul(ch, phi));
    let t4 = hp.div(&hp.mul(&hp.i(3 * nn - 2), &hp.pw(sh, 4 * (n as usize - 1))), &hp.i(2));
    hp.add(&hp.sub(&hp.add(&t1, &t2), &t3), &t4)
}

fn h_raw(hp: &Hp, n: u32, q: &Point) -> BigFloat {
    let nn = ni(n);
    let nu = n as usize;
    let (sh, ch, phi) = (&q.sh, &q.ch, &q.phi);
    let t1 = hp.div(&hp.mul(&hp.i(2 * (nn - 1).pow(3) * (nn - 2)), &hp.pw(phi, 3)), &hp.i(nn.pow(3)));
    // sinh^{n-4} may be a negative power only for n < 4, excluded by callers
    let a = hp.mul(&hp.i((nn - 1).pow(2)), &hp.pw(sh, nu - 2));
    let b = hp.mul(&hp.i((nn - 2).pow(2)), &hp.pw(sh, nu - 4));
    let t2 = hp.mul(&hp.mul(&hp.add(&a, &b), ch), &hp.pw(phi, 2));
    let c = hp.mul(&hp.i((nn - 1) * (5 * nn - 6)), &hp.pw(sh, 2 * nu - 2));
    let d = hp.mul(&hp.i(5 * nn * nn - 12 * nn + 8), &hp.pw(sh, 2 * nu - 4));
    let t3 = hp.mul(&hp.add(&c, &d), phi);
    let t4 = hp.mul(&hp.mul(&hp.i(4 * (nn - 1).pow(2)), &hp.pw(sh, 3 * nu - 4)), ch);
    hp.add(&hp.sub(&hp.add(&t1, &t2), &t3), &t4)
}

fn j_raw(hp: &Hp, n: u32, q: &Point) -> BigFloat {
    let nn = ni(n);
    let nu = n as usize;
    let (sh, ch, phi) = (&q.sh, &q.ch, &q.phi);
    let s = hp.pw(sh, 2);
    let n2 = hp.i(nn * nn);
    let dj = hp.div(&hp.poly(&dj_times_n2(nn), &s), &n2);
    if dj.is_zero() {
        // only at t = 0 for n = 4, where both fractions tend to 0
        return hp.pw(phi, 2);
    }
    let num1 = hp.poly(&[7 * nn.pow(3) - 28 * nn * nn + 36 * nn - 16, (nn - 1) * (7 * nn * nn - 18 * nn + 12)], &s);
    let t2 = hp.div(&hp.mul(&num1, &hp.pw(sh, 2 * nu)), &dj);
    let num2 = hp.poly(&[4 * (nn - 2) * (2 * nn * nn - 5 * nn + 4), 4 * (nn - 1).pow(2) * (2 * nn - 3)], &s);
    let t3 = hp.div(&hp.mul(&hp.mul(&num2, &hp.pw(sh, nu)), &hp.mul(ch, phi)), &dj);
    hp.sub(&hp.add(&hp.pw(phi, 2), &t2), &t3)
}

fn k_raw(hp: &Hp, n: u32, q: &Point) -> BigFloat {
    let nn = ni(n);
    let s = hp.pw(&q.sh, 2);
    let qn = hp.poly(&[nn + 2, nn - 3], &s);
    let d = hp.poly(&[nn * (nn + 2), 2 * nn * (nn - 1), (nn - 1) * (nn - 3)], &s);
    let bound = hp.div(&hp.mul(&hp.mul(&hp.pw(&q.sh, n as usize), &q.ch), &qn), &d);
    hp.sub(&hp.div(&q.phi, &hp.i(nn)), &bound)
}

/// Printed scaled polynomials: `n^3 A(s)` and `n^2 B(s)`, coefficients in
/// ascending powers of `s`.
pub fn a_scaled_coefficients(n: i64) -> [i128; 5] {
    let n = n as i128;
    [
        n.pow(3) * 2 * n * n * (n - 2).pow(3) * (3 * n - 4) * (n - 4),
        n.pow(3) * (n - 2).pow(2) * (24 * n.pow(5) - 156 * n.pow(4) + 316 * n.pow(3) - 224 * n * n + 32 * n),
        n * (n - 2)
            * (36 * n.pow(8) - 252 * n.pow(7) + 506 * n.pow(6) + 392 * n.pow(5) - 3386 * n.pow(4) + 6504 * n.pow(3)
                - 6480 * n * n
                + 3456 * n
                - 768),
        n * (n - 1).pow(2)
            * (24 * n.pow(7) - 116 * n.pow(6) - 88 * n.pow(5) + 1732 * n.pow(4) - 4920 * n.pow(3) + 6744 * n * n
                - 4800 * n
                + 1440),
        6 * (n - 1).pow(6) * (n - 2).pow(2) * (n * n + 6 * n - 12),
    ]
}

pub fn b_scaled_coefficients(n: i64) -> [i128; 4] {
    let n = n as i128;
    [
        n * n * 2 * n * n * (n - 2).pow(3) * (n - 4) * (3 * n - 4),
        n * n * 2 * (n - 2).pow(2) * (9 * n.pow(5) - 59 * n.pow(4) + 131 * n.pow(3) - 123 * n * n + 46 * n - 8),
        2 * (n - 1)
            * (n - 2)
            * (9 * n.pow(7) - 43 * n.pow(6) - 24 * n.pow(5) + 502 * n.pow(4) - 1242 * n.pow(3) + 1424 * n * n - 816 * n
                + 192),
        6 * (n - 1).pow(5) * (n * n + 6 * n - 12) * (n - 2).pow(2),
    ]
}

fn poly128(hp: &Hp, c: &[i128], x: &BigFloat) -> BigFloat {
    let mut acc = hp.i(0);
    for &ci in c.iter().rev() {
        let hi = (ci >> 62) as i64;
        let lo = (ci - ((hi as i128) << 62)) as i64;
        let big = hp.add(&hp.mul(&hp.i(hi), &hp.pw(&hp.i(2), 62)), &hp.i(lo));
        acc = hp.add(&hp.mul(&acc, x), &big);
    }
    acc
}

/// Closed form `J_n'(t) = -(A Φ - B sinh^n cosh) sinh^{n-1} / D_J^2`.
fn j_prime_closed(hp: &Hp, n: u32, q: &Point) -> BigFloat {
    let nn = ni(n);
    let s = hp.pw(&q.sh, 2);
    let a = hp.div(&poly128(hp, &a_scaled_coefficients(nn), &s), &hp.i(nn.pow(3)));
    let b = hp.div(&poly128(hp, &b_scaled_coefficients(nn), &s), &hp.i(nn * nn));
    let dj = hp.div(&hp.poly(&dj_times_n2(nn), &s), &hp.i(nn * nn));
    let num = hp.sub(&hp.mul(&a, &q.phi), &hp.mul(&b, &hp.mul(&hp.pw(&q.sh, n as usize), &q.ch)));
    let r = hp.div(&hp.mul(&num, &hp.pw(&q.sh, n as usize - 1)), &hp.pw(&dj, 2));
    r.neg()
}

/// Sign-preserving normalized values of the four proof functions at one `t`.
///
/// `G/sinh^{4n-4}`, `H/(sinh^{3n-4} cosh)`, `J·cosh²/sinh^{2n}`, `K·cosh/sinh^n`;
/// all defined as 0 at `t = 0`, where the raw functions vanish.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProofValues {
    pub t: f64,
    pub g: f64,
    pub h: f64,
    pub j: f64,
    pub k: f64,
}

fn check(n: u32, t: f64) -> Result<()> {
    if n < 4 {
        return Err(Error::Domain(format!("proof functions need n >= 4, got {n}")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("proof functions need finite t >= 0, got {t}")));
    }
    Ok(())
}

pub fn proof_values(n: u32, t: f64) -> Result<ProofValues> {
    check(n, t)?;
    if t == 0.0 {
        return Ok(ProofValues { t, g: 0.0, h: 0.0, j: 0.0, k: 0.0 });
    }
    let mut hp = Hp::new(precision_bits(n, t))?;
    let tb = hp.f(t);
    let q = point(&mut hp, n, &tb);
    let nu = n as usize;
    let g = hp.div(&g_raw(&hp, n, &q), &hp.pw(&q.sh, 4 * nu - 4));
    let h = hp.div(&h_raw(&hp, n, &q), &hp.mul(&hp.pw(&q.sh, 3 * nu - 4), &q.ch));
    let j = hp.div(&hp.mul(&j_raw(&hp, n, &q), &hp.pw(&q.ch, 2)), &hp.pw(&q.sh, 2 * nu));
    let k = hp.div(&hp.mul(&k_raw(&hp, n, &q), &q.ch), &hp.pw(&q.sh, nu));
    Ok(ProofValues { t, g: to_f64(&g), h: to_f64(&h), j: to_f64(&j), k: to_f64(&k) })
}

/// Raw `(G, H, J, K)` at `t`, evaluated from their formulas also at `t = 0`.
pub fn proof_values_raw(n: u32, t: f64) -> Result<[f64; 4]> {
    check(n, t)?;
    let mut hp = Hp::new(precision_bits(n, t))?;
    let tb = hp.f(t);
    let q = point(&mut hp, n, &tb);
    Ok([
        to_f64(&g_raw(&hp, n, &q)),
        to_f64(&h_raw(&hp, n, &q)),
        to_f64(&j_raw(&hp, n, &q)),
        to_f64(&k_raw(&hp, n, &q)),
    ])
}

/// Closed-form `J_n'` against a central difference of `J_n` with step
/// `h = 1e-6·min(t, 1)`; returns `(closed, difference)` normalized by the same factor.
pub fn j_prime_check(n: u32, t: f64) -> Result<(f64, f64)> {
    check(n, t)?;
    if t == 0.0 {
        return Err(Error::Domain("derivative check needs t > 0".into()));
    }
    let step = 1e-6 * t.min(1.0);
    let mut hp = Hp::new(precision_bits(n, t - step) + 64)?;
    let tb = hp.f(t);
    let hb = hp.f(step);
    let q = point(&mut hp, n, &tb);
    let tp = hp.add(&tb, &hb);
    let tm = hp.sub(&tb, &hb);
    let qp = point(&mut hp, n, &tp);
    let qm = point(&mut hp, n, &tm);
    let fd = hp.div(&hp.sub(&j_raw(&hp, n, &qp), &j_raw(&hp, n, &qm)), &hp.mul(&hp.i(2), &hb));
    let closed = j_prime_closed(&hp, n, &q);
    let scale = hp.div(&hp.pw(&q.ch, 2), &hp.pw(&q.sh, 2 * n as usize));
    Ok((to_f64(&hp.mul(&closed, &scale)), to_f64(&hp.mul(&fd, &scale))))
}

/// `Φ_n(t)/n` minus its rational lower bound, unnormalized.
pub fn kn_residual(n: u32, t: f64) -> Result<f64> {
    check(n, t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let mut hp = Hp::new(precision_bits(n, t))?;
    let tb = hp.f(t);
    let q = point(&mut hp, n, &tb);
    Ok(to_f64(&k_raw(&hp, n, &q)))
}

/// The key estimate at volume `s = σ_n Φ_n(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyMargin {
    pub t: f64,
    /// `s = σ_n Φ_n(t)` rounded to `f64`.
    pub s: f64,
    /// Left side (bracketed weight) minus right side, divided by the right side.
    pub relative: f64,
    /// The same quantity obtained from `-G_n(t)/(σ_n² Φ_n(t)²)`.
    pub relative_from_g: f64,
}

pub fn keyestimate_margin(n: u32, t: f64) -> Result<KeyMargin> {
    check(n, t)?;
    if t == 0.0 {
        return Err(Error::Domain("key estimate margin needs t > 0".into()));
    }
    let mut hp = Hp::new(precision_bits(n, t))?;
    let tb = hp.f(t);
    let q = point(&mut hp, n, &tb);
    let sigma = hp.sigma(n);
    let nn = ni(n);
    let nu = n as usize;
    let s = hp.mul(&sigma, &q.phi);
    let sig2 = hp.pw(&sigma, 2);
    let sh = &q.sh;
    let w1 = hp.div(
        &hp.mul(&hp.i(2 * (nn - 1)), &q.ch),
        &hp.mul(&hp.mul(&s, &sigma), &hp.pw(sh, nu)),
    );
    let w2 = hp.div(&hp.i(nn - 1), &hp.mul(&hp.mul(&hp.i(2), &sig2), &hp.pw(sh, 2 * nu - 2)));
    let w3 = hp.div(&hp.i(nn - 2), &hp.mul(&hp.mul(&hp.i(2), &sig2), &hp.pw(sh, 2 * nu)));
    let w4 = hp.div(&hp.i(3 * nn - 2), &hp.mul(&hp.i(2), &hp.pw(&s, 2)));
    let bracket = hp.sub(&hp.sub(&hp.sub(&w1, &w2), &w3), &w4);
    let lhs = hp.mul(&bracket, &hp.pw(sh, 4 * nu - 4));
    let rhs = hp.div(
        &hp.mul(&hp.i((nn - 1).pow(3) * (nn - 2)), &hp.pw(&s, 2)),
        &hp.mul(&hp.i(2 * nn.pow(4)), &hp.pw(&sig2, 2)),
    );
    let rel = hp.div(&hp.sub(&lhs, &rhs), &rhs);
    let from_g = hp.div(&g_raw(&hp, n, &q).neg(), &hp.mul(&sig2, &hp.pw(&q.phi, 2)));
    let rel_g = hp.div(&from_g, &rhs);
    Ok(KeyMargin { t, s: to_f64(&s), relative: to_f64(&rel), relative_from_g: to_f64(&rel_g) })
}

/// `sinh^{4(n-1)} - Φ^{4(n-1)/n} - ((n-1)/n)^4 Φ^4` at `t`, divided by
/// `((n-1)/n)^4 Φ^4`. Returns `(s, relative residual)`.
pub fn transfer_residual(n: u32, t: f64) -> Result<(f64, f64)> {
    check(n, t)?;
    if t == 0.0 {
        return Err(Error::Domain("transfer residual needs t > 0".into()));
    }
    let mut hp = Hp::new(precision_bits(n, t))?;
    let tb = hp.f(t);
    let q = point(&mut hp, n, &tb);
    let sigma = hp.sigma(n);
    let nn = ni(n);
    let exponent = hp.div(&hp.i(4 * (nn - 1)), &hp.i(nn));
    let p = hp.p;
    let mid = q.phi.pow(&exponent, p, RM, &mut hp.cc);
    let c = hp.div(&hp.i((nn - 1).pow(4)), &hp.i(nn.pow(4)));
    let last = hp.mul(&c, &hp.pw(&q.phi, 4));
    let r = hp.sub(&hp.sub(&hp.pw(&q.sh, 4 * (n as usize - 1)), &mid), &last);
    Ok((to_f64(&hp.mul(&sigma, &q.phi)), to_f64(&hp.div(&r, &last))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversion_to_f64() {
        for x in [1.0, -2.5, 1e-300, 3.7e250, std::f64::consts::PI] {
            let b = BigFloat::from_f64(x, 256);
            assert_eq!(to_f64(&b), x);
        }
        assert_eq!(to_f64(&BigFloat::from_i64(0, 128)), 0.0);
    }

    #[test]
    fn phi_matches_double_precision() {
        let ctx = crate::hypgeo::GeometryContext::new(6).unwrap();
        for t in [0.01, 0.5, 3.0, 17.0] {
            let mut hp = Hp::new(precision_bits(6, t)).unwrap();
            let tb = hp.f(t);
            let q = point(&mut hp, 6, &tb);
            let a = to_f64(&q.phi);
            let b = ctx.phi(t).unwrap();
            assert!((a / b - 1.0).abs() < 1e-13, "{t}: {a} {b}");
        }
    }

    #[test]
    fn sigma_matches() {
        for n in 4..=12u32 {
            let mut hp = Hp::new(256).unwrap();
            let a = to_f64(&hp.sigma(n));
            let b = crate::hypgeo::unit_ball_volume(n as i64).unwrap();
            assert!((a / b - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn margins_agree() {
        for n in [4u32, 5, 8] {
            for t in [0.05, 1.0, 6.0, 20.0] {
                let m = keyestimate_margin(n, t).unwrap();
                assert!(m.relative > 0.0);
                assert!((m.relative / m.relative_from_g - 1.0).abs() < 1e-30f64.max(1e-12));
            }
        }
    }

    #[test]
    fn coefficient_spot_values() {
        // n = 5, s = 0: constant terms coincide
        let a = a_scaled_coefficients(5);
        let b = b_scaled_coefficients(5);
        assert_eq!(a[0] / 125, 14850);
        assert_eq!(b[0] / 25, 14850);
        assert_eq!(b[3], 6 * 1024 * 43 * 9);
        assert_eq!(a_scaled_coefficients(4)[0], 0);
    }
}
