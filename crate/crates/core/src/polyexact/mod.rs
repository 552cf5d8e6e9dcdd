//! Exact certificates for the polynomial algebra behind the key estimate.
//!
//! `A(s)` and `B(s)` carry the denominators `n³` and `n²`; they are stored as
//! `n³A` and `n²B` with integer coefficients, and `P` as `n²P`. Coefficients
//! `a_i(n)` are therefore compared in the form `n² a_i(n)`.

mod poly;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use poly::{frac, q, BivarRationalPoly, RationalPoly};

/// `num / n^n_pow`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scaled {
    pub num: BivarRationalPoly,
    pub n_pow: u32,
}

impl Scaled {
    /// Value at an integer or rational `n` as a polynomial in `s`.
    pub fn at(&self, n: &BigRational) -> RationalPoly {
        self.num.eval_n(n).scale(&(BigRational::one() / n.pow(self.n_pow as i32)))
    }

    /// Add `c · n^i s^j` to the numerator (fixtures for negative controls).
    pub fn perturbed(&self, i: u32, j: u32, c: i64) -> Self {
        let n = BivarRationalPoly::n().pow(i);
        let s = BivarRationalPoly::s().pow(j);
        let t = (&n * &s).scale(&q(c));
        Self { num: &self.num + &t, n_pow: self.n_pow }
    }
}

fn np(c: &[i64]) -> BivarRationalPoly {
    BivarRationalPoly::from_n_poly(&RationalPoly::from_ints(c))
}

fn nlin(a: i64, b: i64) -> BivarRationalPoly {
    // a n + b
    np(&[b, a])
}

fn prod(fs: &[BivarRationalPoly]) -> BivarRationalPoly {
    fs.iter().fold(BivarRationalPoly::int(1), |acc, f| &acc * f)
}

fn spow(k: u32) -> BivarRationalPoly {
    BivarRationalPoly::s().pow(k)
}

fn n_() -> BivarRationalPoly {
    BivarRationalPoly::n()
}

/// `n³ A(s)`.
pub fn build_a_symbolic() -> Scaled {
    let n1 = nlin(1, -1);
    let n2 = nlin(1, -2);
    let k = np(&[-12, 6, 1]);
    let c4 = prod(&[BivarRationalPoly::int(6), n1.pow(6), n2.pow(2), k.clone()]);
    let c3 = prod(&[n_(), n1.pow(2), np(&[1440, -4800, 6744, -4920, 1732, -88, -116, 24])]);
    let c2 = prod(&[n_(), n2.clone(), np(&[-768, 3456, -6480, 6504, -3386, 392, 506, -252, 36])]);
    let c1 = prod(&[n_().pow(3), n2.pow(2), np(&[0, 32, -224, 316, -156, 24])]);
    let c0 = prod(&[BivarRationalPoly::int(2), n_().pow(5), n2.pow(3), nlin(3, -4), nlin(1, -4)]);
    let num = [c0, c1, c2, c3, c4]
        .iter()
        .enumerate()
        .fold(BivarRationalPoly::zero(), |acc, (j, c)| &acc + &(c * &spow(j as u32)));
    Scaled { num, n_pow: 3 }
}

/// `n² B(s)`.
pub fn build_b_symbolic() -> Scaled {
    let n1 = nlin(1, -1);
    let n2 = nlin(1, -2);
    let k = np(&[-12, 6, 1]);
    let c3 = prod(&[BivarRationalPoly::int(6), n1.pow(5), k, n2.pow(2)]);
    let c2 = prod(&[BivarRationalPoly::int(2), n1, n2.clone(), np(&[192, -816, 1424, -1242, 502, -24, -43, 9])]);
    let c1 = prod(&[BivarRationalPoly::int(2), n_().pow(2), n2.pow(2), np(&[-8, 46, -123, 131, -59, 9])]);
    let c0 = prod(&[BivarRationalPoly::int(2), n_().pow(4), n2.pow(3), nlin(1, -4), nlin(3, -4)]);
    let num = [c0, c1, c2, c3]
        .iter()
        .enumerate()
        .fold(BivarRationalPoly::zero(), |acc, (j, c)| &acc + &(c * &spow(j as u32)));
    Scaled { num, n_pow: 2 }
}

/// `A(s)` at an integer `n`.
pub fn build_a(n: i64) -> RationalPoly {
    build_a_symbolic().at(&q(n))
}

pub fn build_b(n: i64) -> RationalPoly {
    build_b_symbolic().at(&q(n))
}

/// `(n-3)s + n + 2`.
fn qn() -> BivarRationalPoly {
    &(&nlin(1, -3) * &BivarRationalPoly::s()) + &nlin(1, 2)
}

/// `(n-1)(n-3)s² + 2n(n-1)s + n(n+2)`.
fn dn() -> BivarRationalPoly {
    let s = BivarRationalPoly::s();
    let a = &(&nlin(1, -1) * &nlin(1, -3)) * &s.pow(2);
    let b = prod(&[BivarRationalPoly::int(2), n_(), nlin(1, -1), s]);
    let c = &n_() * &nlin(1, 2);
    &(&a + &b) + &c
}

/// `n² P(s) = ((n-3)s+n+2) · n³A − D · n²B`, from given `A`, `B`.
pub fn build_p_from(a: &Scaled, b: &Scaled) -> Scaled {
    assert_eq!((a.n_pow, b.n_pow), (3, 2), "A and B must be stored as n³A and n²B");
    let left = &qn() * &a.num;
    let right = &dn() * &b.num;
    Scaled { num: &left - &right, n_pow: 2 }
}

pub fn build_p_symbolic() -> Scaled {
    build_p_from(&build_a_symbolic(), &build_b_symbolic())
}

/// `P(s)` at an integer `n`.
pub fn build_p(n: i64) -> RationalPoly {
    build_p_symbolic().at(&q(n))
}

/// Closed forms of `n² a_i(n)`, `i = 0..5`.
pub fn printed_coefficients() -> [RationalPoly; 6] {
    let n = RationalPoly::x();
    let lin = |a: i64, b: i64| RationalPoly::from_ints(&[b, a]);
    let p = |c: &[i64]| RationalPoly::from_ints(c);
    let m = |fs: &[RationalPoly]| fs.iter().fold(p(&[1]), |acc, f| &acc * f);
    let a4 = m(&[
        p(&[2]),
        lin(1, -1).pow(2),
        lin(1, -2),
        lin(2, -3),
        lin(3, -5),
        p(&[-12, 6, 1]),
        p(&[-4, 6, -5, 1]),
    ]);
    let a3 = m(&[p(&[2]), n.clone(), lin(1, -2), p(&[192, -888, 1656, -1926, 1677, -1087, 485, -135, 18])]);
    let a2 = m(&[p(&[2]), n.clone(), lin(1, -2).pow(2), p(&[192, -528, 360, 258, -551, 370, -123, 18])]);
    let a1 = m(&[p(&[2]), n.pow(3), lin(1, -2).pow(3), lin(1, -4), p(&[2, -5, -1, 6])]);
    [RationalPoly::zero(), a1, a2, a3, a4, RationalPoly::zero()]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CertStatus {
    Pass,
    Fail,
}

/// Machine-readable outcome of one exact check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub lemma: String,
    pub status: CertStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub difference_poly: Option<String>,
}

impl Certificate {
    fn new(lemma: impl Into<String>, ok: bool) -> Self {
        Self {
            lemma: lemma.into(),
            status: if ok { CertStatus::Pass } else { CertStatus::Fail },
            witness: None,
            difference_poly: None,
        }
    }

    fn with_witness(mut self, w: serde_json::Value) -> Self {
        self.witness = Some(w);
        self
    }

    pub fn passed(&self) -> bool {
        self.status == CertStatus::Pass
    }
}

fn strs(p: &RationalPoly) -> Vec<String> {
    p.coeffs().iter().map(ToString::to_string).collect()
}

/// Compare the expanded `n² a_i(n)` of `P` (built from `a`, `b`) with the closed forms.
pub fn verify_coefficients_with(a: &Scaled, b: &Scaled) -> Vec<Certificate> {
    let p = build_p_from(a, b);
    let printed = printed_coefficients();
    let mut out = Vec::new();
    let deg = p.num.degree_s().unwrap_or(0);
    for (i, want) in printed.iter().enumerate() {
        let got = p.num.coeff_s(i);
        let diff = &got - want;
        let mut c = Certificate::new(format!("coefficient a_{i}"), diff.is_zero())
            .with_witness(serde_json::json!({ "expanded": got.display_in("n"), "scale": "n^2" }));
        if !diff.is_zero() {
            c.difference_poly = Some(diff.display_in("n"));
        }
        out.push(c);
    }
    let extra = (6..=deg).find(|&j| !p.num.coeff_s(j).is_zero());
    out.push(Certificate::new("degree of P at most 5", extra.is_none()).with_witness(serde_json::json!({ "degree": deg })));
    out
}

pub fn verify_coefficients() -> Vec<Certificate> {
    verify_coefficients_with(&build_a_symbolic(), &build_b_symbolic())
}

/// Cauchy bound: every real root of `p` is below `1 + max |c_i / c_d|`.
fn root_bound(p: &RationalPoly) -> BigRational {
    let d = p.degree().unwrap_or(0);
    let lc = p.coeff(d);
    let m = (0..d).map(|i| (p.coeff(i) / &lc).abs()).max().unwrap_or_else(BigRational::zero);
    m + BigRational::one()
}

/// Nonnegativity of `p(n)` for integers `n ≥ n_min`.
///
/// First tries the shift expansion `p(n_min + m)`; if a coefficient in `m` is
/// negative the certificate says so and falls back to exact evaluation on
/// `n_min..=n_min+200` together with the Cauchy root bound.
pub fn certify_nonneg(lemma: &str, p: &RationalPoly, n_min: i64) -> Certificate {
    if p.is_zero() {
        return Certificate::new(lemma, true).with_witness(serde_json::json!({ "method": "zero polynomial" }));
    }
    let shifted = p.shift(&q(n_min));
    let zeros_at_min = shifted.coeff(0).is_zero();
    let negative: Vec<usize> = (0..shifted.coeffs().len()).filter(|&i| shifted.coeff(i).is_negative()).collect();
    if negative.is_empty() {
        return Certificate::new(lemma, true).with_witness(serde_json::json!({
            "method": "shift expansion",
            "n_min": n_min,
            "coefficients_in_m": strs(&shifted),
            "vanishes_at_n_min": zeros_at_min,
        }));
    }
    let hi = n_min + 200;
    let bad: Vec<i64> = (n_min..=hi).filter(|&n| p.eval(&q(n)).is_negative()).collect();
    let lc_pos = p.coeff(p.degree().unwrap_or(0)).is_positive();
    let bound = root_bound(p);
    let covered = lc_pos && bound <= q(hi);
    Certificate::new(lemma, bad.is_empty() && covered).with_witness(serde_json::json!({
        "method": "exact evaluation with root bound",
        "negative_shift_coefficients": negative,
        "n_min": n_min,
        "n_max_evaluated": hi,
        "negative_values_at": bad,
        "root_bound": bound.to_string(),
        "vanishes_at_n_min": zeros_at_min,
    }))
}

/// Nonnegativity of `n² a_i(n)` for `n ≥ 4`, `i = 1..4`, from the expansion of `P`.
pub fn certify_coefficients(n_min: i64) -> Vec<Certificate> {
    let p = build_p_symbolic();
    (1..=4).map(|i| certify_nonneg(&format!("a_{i}(n) >= 0 for n >= {n_min}"), &p.num.coeff_s(i), n_min)).collect()
}

/// `P(s) > 0` for `s > 0` at one integer `n`: all of `a_1..a_4` nonnegative
/// with at least one positive, and `a_0 = a_5 = 0`.
pub fn claimkey_check(n: i64) -> Certificate {
    let p = build_p(n);
    let a: Vec<BigRational> = (0..=5).map(|i| p.coeff(i)).collect();
    let ok = n >= 4
        && a[0].is_zero()
        && a[5].is_zero()
        && a[1..5].iter().all(|c| !c.is_negative())
        && a[1..5].iter().any(Signed::is_positive);
    Certificate::new(format!("P(s) > 0 for s > 0 at n = {n}"), ok)
        .with_witness(serde_json::json!({ "coefficients": a.iter().map(ToString::to_string).collect::<Vec<_>>() }))
}

/// The simplification of `K_n'(t)/sinh^{n-1}(t)` to `24s²/D²`, `s = sinh² t`.
///
/// The derivative is formed from scratch (`d/dt sinh^n cosh = sinh^{n-1}((n+1)s + n)`,
/// `ds/dt = 2 sinh cosh`), cleared by `D²` and compared with `24 s²`; the
/// intermediate three-term display is checked the same way.
pub struct KnIdentity {
    /// `D² · K'/sinh^{n-1}` from differentiating `K_n`.
    pub derived: BivarRationalPoly,
    /// `D² · K'/sinh^{n-1}` from the three-term intermediate form.
    pub displayed: BivarRationalPoly,
    pub target: BivarRationalPoly,
}

pub fn kn_numerators() -> KnIdentity {
    let s = BivarRationalPoly::s();
    let one = BivarRationalPoly::int(1);
    let (qq, d) = (qn(), dn());
    let (dq, dd) = (qq.derivative_s(), d.derivative_s());
    let lead = &(&nlin(1, 1) * &s) + &n_(); // (n+1)s + n
    let s1 = &s * &(&s + &one); // s(s+1) = sinh² cosh²
    let d2 = d.pow(2);
    let derived = {
        let t1 = prod(&[lead.clone(), qq.clone(), d.clone()]);
        let t2 = prod(&[BivarRationalPoly::int(2), s1.clone(), &(&dq * &d) - &(&qq * &dd)]);
        &(&d2 - &t1) - &t2
    };
    let displayed = {
        let n1 = &(&lead * &qq) + &prod(&[BivarRationalPoly::int(2), nlin(1, -3), s1.clone()]);
        let t3 = prod(&[BivarRationalPoly::int(4), nlin(1, -1), s1, qq.clone(), &(&nlin(1, -3) * &s) + &n_()]);
        &(&d2 - &(&n1 * &d)) + &t3
    };
    KnIdentity { derived, displayed, target: (&s * &s).scale(&q(24)) }
}

/// Exact identity plus spot values at `points` seeded rational `(n, s)`.
pub fn kn_identity(points: usize, seed: u64) -> Certificate {
    let k = kn_numerators();
    let d1 = &k.derived - &k.target;
    let d2 = &k.displayed - &k.target;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spots = Vec::new();
    let mut spots_ok = true;
    let d = dn();
    for _ in 0..points {
        let n = frac(rng.random_range(4..200), rng.random_range(1..7)) + q(4);
        let s = frac(rng.random_range(1..10_000), rng.random_range(1..1000));
        let dv = d.eval(&n, &s);
        let lhs = k.derived.eval(&n, &s) / (&dv * &dv);
        let rhs = q(24) * &s * &s / (&dv * &dv);
        spots_ok &= lhs == rhs;
        spots.push(serde_json::json!({ "n": n.to_string(), "s": s.to_string(), "value": lhs.to_string() }));
    }
    let ok = d1.is_zero() && d2.is_zero() && spots_ok;
    let mut c = Certificate::new("K_n'/sinh^{n-1} = 24 s^2 / D^2", ok).with_witness(serde_json::json!({ "spot_values": spots }));
    if !d1.is_zero() {
        c.difference_poly = Some(d1.to_string());
    } else if !d2.is_zero() {
        c.difference_poly = Some(d2.to_string());
    }
    c
}

/// Every certificate of the default run.
pub fn all_certificates(n_max: i64, seed: u64) -> Vec<Certificate> {
    let mut out = verify_coefficients();
    out.extend(certify_coefficients(4));
    out.push(kn_identity(10, seed));
    out.extend((4..=n_max).map(claimkey_check));
    out
}

/// Exact rational from an `f64` (every finite double is a dyadic rational).
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

/// Integer big rational helper for callers outside this module.
pub fn int(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}
