//! Exponential integrability at the `L²`-shifted critical level in `H^4`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::profile::{DecayClass, Eval, Integrand, RadialProfile};
use crate::report::DeficitReport;

pub const ADAMS_EXPONENT: f64 = 32.0 * PI * PI;

/// `(n-1)^4/16` at `n = 4`.
pub const ADAMS_THRESHOLD: f64 = 81.0 / 16.0;

/// Slack allowed on the normalization `≤ 1`.
const CONSTRAINT_SLACK: f64 = 1e-8;

/// `e^x - 1` for `x ≥ 0`; the two-term series below `1e-8`.
fn expm1_pos(x: f64) -> f64 {
    if x < 1e-8 {
        x + 0.5 * x * x
    } else {
        x.exp_m1()
    }
}

/// `(e^x - 1)/(1+a)^p` through logarithms once `e^x` is large.
fn damped(x: f64, a: f64, p: f64) -> f64 {
    if x <= 1.0 {
        return expm1_pos(x) / (1.0 + a).powf(p);
    }
    (x + (-(-x).exp_m1()).ln() - p * a.ln_1p()).exp()
}

fn need4(p: &RadialProfile) -> Result<()> {
    if p.n() != 4 {
        return Err(Error::Domain(format!("Adams functionals live on H^4, got n = {}", p.n())));
    }
    Ok(())
}

fn integrate_exp(p: &RadialProfile, pow: f64) -> Result<f64> {
    let vmax = p.max_abs();
    if ADAMS_EXPONENT * vmax * vmax > 700.0 {
        return Err(Error::Integrability(format!("exponential overflows at amplitude {vmax}")));
    }
    let f = move |e: &Eval| damped(ADAMS_EXPONENT * e.v * e.v, e.v.abs(), pow);
    let v1 = p.values()[0];
    let head = damped(ADAMS_EXPONENT * v1 * v1, v1.abs(), pow) * p.grid().first();
    if let DecayClass::PolynomialDecay { rate } = p.decay() {
        if !(2.0 * rate > 1.0) {
            return Err(Error::Integrability(format!("exponential functional diverges for tail rate {rate}")));
        }
    }
    let r = p.integrate(&Integrand { label: "adams", f: &f, head, tail_power: &|a| 2.0 * a, needs_smooth: false })?;
    Ok(r.value)
}

/// `∫_{H^4} (e^{32π² u²} - 1) dV_g`, without any constraint check.
pub fn adams_integral(p: &RadialProfile) -> Result<f64> {
    need4(p)?;
    integrate_exp(p, 0.0)
}

/// Checks `∫(Δ_g u)² - λ∫u² ≤ 1` for `λ < 81/16`, then reports the
/// Euclidean normalization `∫(Δu_e)² + (81/16 - λ)∫u_e² ≤ 1` with the
/// exponential integral in `params["adams_integral"]`.
pub fn adams_functional(p: &RadialProfile, lam: f64) -> Result<DeficitReport> {
    need4(p)?;
    if !(lam < ADAMS_THRESHOLD) {
        return Err(Error::Domain(format!("lambda must be below 81/16, got {lam}")));
    }
    let e = p.energy_hyp()?;
    let l2 = p.l2_squared()?;
    let constraint = e.value - lam * l2.value;
    if constraint > 1.0 + CONSTRAINT_SLACK {
        return Err(Error::Constraint(format!("∫(Δu)² - λ∫u² = {constraint} > 1")));
    }
    let integral = integrate_exp(p, 0.0)?;
    let ee = p.energy_euc()?;
    let euc = ee.value + (ADAMS_THRESHOLD - lam) * l2.value;
    Ok(DeficitReport::new("adams", 1.0, euc, ee.error + l2.error)
        .with_param("n", 4.0)
        .with_param("lambda", lam)
        .with_param("constraint", constraint)
        .with_param("adams_integral", integral))
}

/// The normalized exact-growth quotient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamsRatio {
    pub ratio: f64,
    pub integral: f64,
    pub l2: f64,
    pub constraint: f64,
    /// Set for `u ≡ 0`, where the ratio is 0 by convention.
    pub degenerate: bool,
}

/// `(1/‖u‖²) ∫ (e^{32π²u²} - 1)/(1+|u|)^pow dV_g` under
/// `∫(Δ_g u)² - 81/16 ∫u² ≤ 1`.
pub fn adams_exact_ratio(p: &RadialProfile, pow: f64) -> Result<AdamsRatio> {
    need4(p)?;
    if !(pow >= 0.0 && pow.is_finite()) {
        return Err(Error::Domain(format!("power must be >= 0, got {pow}")));
    }
    let e = p.energy_hyp()?;
    let l2 = p.l2_squared()?.value;
    let constraint = e.value - ADAMS_THRESHOLD * l2;
    if constraint > 1.0 + CONSTRAINT_SLACK {
        return Err(Error::Constraint(format!("∫(Δu)² - 81/16∫u² = {constraint} > 1")));
    }
    if l2 == 0.0 {
        return Ok(AdamsRatio { ratio: 0.0, integral: 0.0, l2, constraint, degenerate: true });
    }
    let integral = integrate_exp(p, pow)?;
    Ok(AdamsRatio { ratio: integral / l2, integral, l2, constraint, degenerate: false })
}
