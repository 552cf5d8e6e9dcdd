//! Radial geometry of hyperbolic space in the volume coordinate.
//!
//! `Φ_n(t) = n ∫_0^t sinh^{n-1}` is the volume of the geodesic ball of
//! radius `t` divided by `σ_n`, and `F_n` inverts `s = σ_n Φ_n(t)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::jet::Jet;

/// Volume of the unit ball of `R^n`, `π^{n/2} / Γ(n/2 + 1)`.
pub fn unit_ball_volume(n: i64) -> Result<f64> {
    if n <= 0 {
        return Err(Error::Domain(format!("unit ball volume needs n >= 1, got {n}")));
    }
    // V_0 = 1, V_1 = 2, V_k = 2π/k · V_{k-2}
    let mut v = if n % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if n % 2 == 0 { 2 } else { 3 };
    while k <= n {
        v *= 2.0 * PI / k as f64;
        k += 2;
    }
    Ok(v)
}

/// Dimension, unit-ball volume and accuracy controls shared by every
/// radial computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryContext {
    n: u32,
    sigma_n: f64,
    pub tol_root: f64,
    pub tol_quad: f64,
}

/// Geodesic radius and its hyperbolic functions at one volume coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialPoint {
    pub s: f64,
    pub rho: f64,
    pub sinh: f64,
    pub cosh: f64,
}

impl RadialPoint {
    /// `n σ_n sinh(ρ)^{n-1} = ds/dρ`.
    #[inline]
    pub fn area(&self, ctx: &GeometryContext) -> f64 {
        ctx.n as f64 * ctx.sigma_n * self.sinh.powi(ctx.n as i32 - 1)
    }
}

impl GeometryContext {
    pub const DEFAULT_TOL_ROOT: f64 = 1e-12;
    pub const DEFAULT_TOL_QUAD: f64 = 1e-10;

    pub fn new(n: u32) -> Result<Self> {
        Self::with_tolerances(n, Self::DEFAULT_TOL_ROOT, Self::DEFAULT_TOL_QUAD)
    }

    pub fn with_tolerances(n: u32, tol_root: f64, tol_quad: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("dimension must be >= 2, got {n}")));
        }
        if !(tol_root > 0.0 && tol_quad > 0.0) {
            return Err(Error::Domain("tolerances must be positive".into()));
        }
        Ok(Self { n, sigma_n: unit_ball_volume(n as i64)?, tol_root, tol_quad })
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    #[inline]
    pub fn sigma_n(&self) -> f64 {
        self.sigma_n
    }

    pub fn phi_pair(&self) -> PhiPair<'_> {
        PhiPair { ctx: self }
    }

    /// `Φ_n(t)`, exact closed form (no quadrature).
    pub fn phi(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("phi needs t >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(self.ln_phi_unchecked(t).exp())
    }

    /// `ln Φ_n(t)` for `t > 0`; finite far beyond the overflow point of `Φ_n`.
    pub fn ln_phi(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("ln_phi needs t > 0, got {t}")));
        }
        Ok(self.ln_phi_unchecked(t))
    }

    fn ln_phi_unchecked(&self, t: f64) -> f64 {
        let m = self.n as i32 - 1;
        let w = t.sinh();
        if w <= 0.9 {
            // ∫_0^t sinh^m = ∫_0^w x^m (1+x²)^{-1/2} dx, binomial series
            let w2 = w * w;
            let mut c = 1.0;
            let mut pw = 1.0;
            let mut sum = 0.0;
            for k in 0..2000 {
                let term = c * pw / (m + 2 * k + 1) as f64;
                sum += term;
                if term.abs() <= 1e-17 * sum.abs() {
                    break;
                }
                let kk = (k + 1) as f64;
                c *= -(2.0 * kk - 1.0) / (2.0 * kk);
                pw *= w2;
            }
            return self.nf().ln() + (m + 1) as f64 * w.ln() + sum.ln();
        }
        // sinh^m = 2^{-m} Σ_k C(m,k) (-1)^k e^{(m-2k)t}; factor out e^{mt}
        let emt = (-(m as f64) * t).exp();
        let mut binom = 1.0;
        let mut sum = 0.0;
        for k in 0..=m {
            let d = m - 2 * k;
            let term = if d == 0 {
                t * emt
            } else {
                ((-2.0 * k as f64 * t).exp() - emt) / d as f64
            };
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * binom * term;
            binom = binom * (m - k) as f64 / (k + 1) as f64;
        }
        self.nf().ln() + m as f64 * (t - std::f64::consts::LN_2) + sum.ln()
    }

    /// `F_n(s)`: the geodesic radius whose ball has volume `s`.
    pub fn phi_inverse(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::Domain(format!("phi_inverse needs s >= 0, got {s}")));
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        if !s.is_finite() {
            return Err(Error::Domain("phi_inverse of an infinite volume".into()));
        }
        let n = self.nf();
        let target = (s / self.sigma_n).ln();
        let mut t = if s <= self.sigma_n {
            (s / self.sigma_n).powf(1.0 / n).asinh()
        } else {
            ((n - 1.0) * s / (n * self.sigma_n)).powf(1.0 / (n - 1.0)).asinh()
        };
        let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
        let max_iter = 200;
        for _ in 0..max_iter {
            let lp = self.ln_phi_unchecked(t);
            let h = lp - target;
            if h == 0.0 {
                return Ok(t);
            }
            if h > 0.0 {
                hi = hi.min(t);
            } else {
                lo = lo.max(t);
            }
            // d/dt ln Φ = n sinh^{n-1} / Φ
            let dlp = (n.ln() + (n - 1.0) * t.sinh().ln() - lp).exp();
            let mut next = t - h / dlp;
            if !(next >= lo && next <= hi) || !next.is_finite() {
                next = if hi.is_finite() {
                    if lo > 0.0 {
                        (lo * hi).sqrt()
                    } else {
                        0.5 * hi
                    }
                } else {
                    2.0 * t.max(1.0)
                };
            }
            let step = (next - t).abs();
            t = next;
            if step <= 4.0 * f64::EPSILON * t || h.abs() <= 4.0 * f64::EPSILON * target.abs().max(1.0) {
                return Ok(t);
            }
            if hi.is_finite() && (hi - lo) <= 16.0 * f64::EPSILON * hi {
                return Ok(t);
            }
        }
        Err(Error::NonConvergence {
            iterations: max_iter,
            detail: format!("phi_inverse(s = {s:e}) stalled at t = {t:e}, bracket [{lo:e}, {hi:e}]"),
        })
    }

    /// Geodesic data at volume coordinate `s`.
    pub fn point(&self, s: f64) -> Result<RadialPoint> {
        let rho = self.phi_inverse(s)?;
        Ok(RadialPoint { s, rho, sinh: rho.sinh(), cosh: rho.cosh() })
    }

    /// `F_n` lifted to jets: `F' = 1/(nσ sinh^{n-1} F)`, `F'' = -(n-1) cosh F / (sinh F · (nσ sinh^{n-1} F)²)`.
    pub fn phi_inverse_jet(&self, s: Jet) -> Result<Jet> {
        let p = self.point(s.v)?;
        let area = p.area(self);
        let d1 = 1.0 / area;
        let d2 = -(self.nf() - 1.0) * p.cosh / (p.sinh * area * area);
        Ok(s.chain(p.rho, d1, d2))
    }

    /// Hyperbolic volume of the geodesic ball of radius `r`.
    pub fn ball_volume(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::Domain(format!("ball_volume needs r >= 0, got {r}")));
        }
        Ok(self.sigma_n * self.phi(r)?)
    }

    /// `Φ_n(t)/n` minus its rational lower bound in `sinh t`; nonnegative for `n >= 4`.
    pub fn phi_lower_bound_residual(&self, t: f64) -> Result<f64> {
        if self.n < 4 {
            return Err(Error::Domain(format!("lower bound stated for n >= 4, got {}", self.n)));
        }
        if !(t > 0.0) {
            return Err(Error::Domain(format!("residual needs t > 0, got {t}")));
        }
        if t > 1.0 {
            // the relative margin decays like e^{-3t}
            return crate::precise::kn_residual(self.n, t);
        }
        let n = self.nf();
        let ln_i = self.ln_phi_unchecked(t) - n.ln();
        let (sh, ch) = (t.sinh(), t.cosh());
        let s2 = sh * sh;
        let q = (n - 3.0) * s2 + n + 2.0;
        let d = (n - 1.0) * (n - 3.0) * s2 * s2 + 2.0 * n * (n - 1.0) * s2 + n * (n + 2.0);
        let ln_b = n * sh.ln() + ch.ln() + q.ln() - d.ln();
        Ok(-(ln_b - ln_i).exp_m1() * ln_i.exp())
    }

    /// Closed form of `K_n'(t)/sinh(t)^{n-1}` in terms of `s = sinh² t`.
    pub fn kn_prime_ratio(&self, t: f64) -> f64 {
        let n = self.nf();
        let s = t.sinh().powi(2);
        let d = (n - 1.0) * (n - 3.0) * s * s + 2.0 * n * (n - 1.0) * s + n * (n + 2.0);
        24.0 * s * s / (d * d)
    }
}

/// Borrowed view of the monotone pair `(Φ_n, F_n)`.
#[derive(Debug, Clone, Copy)]
pub struct PhiPair<'a> {
    ctx: &'a GeometryContext,
}

impl PhiPair<'_> {
    pub fn phi(&self, t: f64) -> Result<f64> {
        self.ctx.phi(t)
    }

    pub fn phi_inv(&self, s: f64) -> Result<f64> {
        self.ctx.phi_inverse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use proptest::prelude::*;

    fn ctx(n: u32) -> GeometryContext {
        GeometryContext::new(n).unwrap()
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(2).unwrap() - PI).abs() < 1e-15);
        assert!((unit_ball_volume(4).unwrap() - PI * PI / 2.0).abs() < 1e-14);
        assert!((unit_ball_volume(5).unwrap() - 8.0 * PI * PI / 15.0).abs() < 1e-14);
        assert!(unit_ball_volume(0).is_err());
        assert!(unit_ball_volume(-3).is_err());
        // against Γ
        for n in 1..=12 {
            let g = statrs::function::gamma::gamma(n as f64 / 2.0 + 1.0);
            let v = PI.powf(n as f64 / 2.0) / g;
            assert!((unit_ball_volume(n).unwrap() / v - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn phi_closed_forms() {
        let c2 = ctx(2);
        let e = 2.0 * (1f64.cosh() - 1.0);
        assert!((c2.phi(1.0).unwrap() - e).abs() < 1e-14);
        assert!((e - 1.086_161_2).abs() < 1e-7);
        let c4 = ctx(4);
        assert_eq!(c4.phi(0.0).unwrap(), 0.0);
        let ch = 1f64.cosh();
        let e4 = 4.0 / 3.0 * ch.powi(3) - 4.0 * ch + 8.0 / 3.0;
        assert!((c4.phi(1.0).unwrap() / e4 - 1.0).abs() < 1e-13);
        assert!(c4.phi(-1.0).is_err());
    }

    #[test]
    fn phi_matches_quadrature() {
        for n in 2..=12u32 {
            let c = ctx(n);
            for &t in &[1e-3, 0.3, 0.8, 0.9, 1.5, 4.0, 12.0] {
                let q = quad::integrate(|x: f64| x.sinh().powi(n as i32 - 1), 0.0, t, 0.0, 1e-14);
                let exact = n as f64 * q.value;
                let got = c.phi(t).unwrap();
                assert!((got / exact - 1.0).abs() < 1e-12, "n={n} t={t}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn phi_log_space_beyond_overflow() {
        let c = ctx(12);
        let lp = c.ln_phi(100.0).unwrap();
        // Φ ~ n/(n-1) sinh^{n-1}
        let asym = (12.0f64 / 11.0).ln() + 11.0 * (100.0 - std::f64::consts::LN_2);
        assert!((lp - asym).abs() < 1e-12);
        assert!(c.phi(100.0).unwrap().is_infinite());
    }

    #[test]
    fn inverse_at_tiny_volumes() {
        for n in 4..=12u32 {
            let c = ctx(n);
            for e in (-120..=-20).step_by(7) {
                let s = 10f64.powi(e) * 5.11;
                let t = c.phi_inverse(s).unwrap();
                assert!((c.sigma_n() * c.phi(t).unwrap() / s - 1.0).abs() < 1e-13, "n={n} s={s:e}");
            }
        }
    }

    #[test]
    fn inverse_examples() {
        let c4 = ctx(4);
        assert_eq!(c4.phi_inverse(0.0).unwrap(), 0.0);
        let s = c4.sigma_n() * c4.phi(1.0).unwrap();
        assert!((c4.phi_inverse(s).unwrap() - 1.0).abs() < 1e-13);
        let c5 = ctx(5);
        let f = c5.phi_inverse(10.0).unwrap();
        assert!((c5.sigma_n() * c5.phi(f).unwrap() / 10.0 - 1.0).abs() < 1e-12);
        assert!(c5.phi_inverse(-1.0).is_err());
    }

    #[test]
    fn ball_volume_examples() {
        let c2 = ctx(2);
        assert_eq!(c2.ball_volume(0.0).unwrap(), 0.0);
        let v = c2.ball_volume(1.0).unwrap();
        assert!((v - 2.0 * PI * (1f64.cosh() - 1.0)).abs() < 1e-13);
        let c4 = ctx(4);
        assert!((c4.ball_volume(1.0).unwrap() - c4.sigma_n() * c4.phi(1.0).unwrap()).abs() < 1e-15);
        assert!(c4.ball_volume(-0.1).is_err());
    }

    #[test]
    fn asymptotics_at_both_ends() {
        for n in 2..=12u32 {
            let c = ctx(n);
            let t = 1e-4;
            let r = c.phi(t).unwrap() / t.sinh().powi(n as i32);
            assert!((r - 1.0).abs() < 1e-3);
            let t = 30.0;
            let nf = n as f64;
            let r = (c.ln_phi(t).unwrap() - (nf / (nf - 1.0)).ln() - (nf - 1.0) * t.sinh().ln()).exp();
            assert!((r - 1.0).abs() < 1e-6, "n={n}: {r}");
        }
    }

    #[test]
    fn lower_bound_residual() {
        assert!(ctx(3).phi_lower_bound_residual(1.0).is_err());
        let c4 = ctx(4);
        assert!(c4.phi_lower_bound_residual(1e-3).unwrap().abs() < 1e-15);
        assert!(c4.phi_lower_bound_residual(1.0).unwrap() > 0.0);
        assert!(ctx(6).phi_lower_bound_residual(10.0).unwrap() > 0.0);
        for n in 4..=12u32 {
            let c = ctx(n);
            for i in 0..2000 {
                let t = 1e-2 * (2000f64).powf(i as f64 / 1999.0);
                let r = c.phi_lower_bound_residual(t).unwrap();
                let scale = c.phi(t).unwrap() / n as f64;
                assert!(r >= -c.tol_quad * scale, "n={n} t={t} r={r}");
            }
        }
    }

    #[test]
    fn kn_prime_matches_finite_difference() {
        for n in 4..=9u32 {
            let c = ctx(n);
            let k = |t: f64| {
                let nf = n as f64;
                let (sh, ch) = (t.sinh(), t.cosh());
                let s2 = sh * sh;
                let b = sh.powi(n as i32) * ch * ((nf - 3.0) * s2 + nf + 2.0)
                    / ((nf - 1.0) * (nf - 3.0) * s2 * s2 + 2.0 * nf * (nf - 1.0) * s2 + nf * (nf + 2.0));
                c.phi(t).unwrap() / nf - b
            };
            for &t in &[0.4, 0.8, 1.3] {
                let h = 1e-4;
                let fd = (k(t + h) - k(t - h)) / (2.0 * h);
                let exact = c.kn_prime_ratio(t) * t.sinh().powi(n as i32 - 1);
                assert!((fd / exact - 1.0).abs() < 1e-4, "n={n} t={t}: {fd} vs {exact}");
            }
        }
    }

    #[test]
    fn jet_derivatives_of_inverse() {
        let c = ctx(5);
        let s = 3.7;
        let j = c.phi_inverse_jet(Jet::var(s)).unwrap();
        let h = 1e-4;
        let f = |x: f64| c.phi_inverse(x).unwrap();
        let d1 = (f(s + h) - f(s - h)) / (2.0 * h);
        let d2 = (f(s + h) - 2.0 * f(s) + f(s - h)) / (h * h);
        assert!((j.d1 / d1 - 1.0).abs() < 1e-8);
        assert!((j.d2 / d2 - 1.0).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn round_trip_and_monotone(n in 2u32..=12, e1 in -8.0f64..8.0, e2 in -8.0f64..8.0) {
            let c = ctx(n);
            let (s1, s2) = (10f64.powf(e1.min(e2)), 10f64.powf(e1.max(e2)));
            let t1 = c.phi_inverse(s1).unwrap();
            let t2 = c.phi_inverse(s2).unwrap();
            if s1 < s2 {
                prop_assert!(t1 < t2);
                prop_assert!(c.phi(t1).unwrap() < c.phi(t2).unwrap());
            }
            let back = c.phi(t1).unwrap();
            let y = s1 / c.sigma_n();
            prop_assert!((back - y).abs() <= c.tol_root * (1.0 + y));
        }
    }
}
