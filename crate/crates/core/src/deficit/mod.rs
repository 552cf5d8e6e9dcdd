//! Inequality functionals on radial profiles and numeric checks of the
//! proof steps behind them.
//!
//! Every check returns a [`DeficitReport`] with `gap = lhs - rhs`, expected
//! nonnegative. Identities are reported as residuals and classified against
//! their own relative tolerance.

mod adams;
mod pointwise;

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

pub use adams::{adams_exact_ratio, adams_functional, adams_integral, AdamsRatio, ADAMS_EXPONENT, ADAMS_THRESHOLD};
pub use pointwise::{
    keyestimate_check, log_grid, pointwise_transfer_bound, proof_function_signs, proof_functions_at_zero,
};

use crate::error::{Error, Result};
use crate::profile::{Eval, Integrand, RadialProfile};
use crate::report::{DeficitReport, Status};

/// Relative tolerance for the quadrature-only identities.
pub const IDENTITY_TOL: f64 = 1e-6;

/// Named constants of the inequalities, per dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharpConstants {
    pub n: u32,
}

impl SharpConstants {
    pub fn new(n: u32) -> Result<Self> {
        if n < 4 {
            return Err(Error::Domain(format!("constants are defined for n >= 4, got {n}")));
        }
        Ok(Self { n })
    }

    /// `(n-1)^4/16`, the square of the bottom of the spectrum.
    pub fn poincare2(&self) -> f64 {
        let m = self.n as f64 - 1.0;
        m.powi(4) / 16.0
    }

    /// `n²(n-4)²/16`.
    pub fn rellich(&self) -> f64 {
        let n = self.n as f64;
        n * n * (n - 4.0).powi(2) / 16.0
    }

    /// `S_2(n,2)`, from the bubble quotient; needs `n ≥ 5`.
    pub fn sobolev2(&self) -> Result<f64> {
        sobolev_sharp_constant(self.n)
    }

    pub fn adams_exponent(&self) -> f64 {
        ADAMS_EXPONENT
    }

    pub fn adams_threshold(&self) -> f64 {
        ADAMS_THRESHOLD
    }

    /// `5 S_2(n,2)/(n-1)²`.
    pub fn gjms_factor(&self) -> Result<f64> {
        let m = self.n as f64 - 1.0;
        Ok(5.0 * self.sobolev2()? / (m * m))
    }
}

/// Euclidean Rayleigh quotient `∫(Δu_e)² / ‖u_e‖²_{2n/(n-4)}`.
pub fn euclidean_sobolev_quotient(p: &RadialProfile) -> Result<f64> {
    let n = p.n() as f64;
    if p.n() < 5 {
        return Err(Error::Domain("Sobolev quotient needs n >= 5".into()));
    }
    let e = p.energy_euc()?.value;
    let l = p.lp_norm(2.0 * n / (n - 4.0))?.value;
    if l == 0.0 {
        return Err(Error::Domain("Sobolev quotient of the zero profile".into()));
    }
    Ok(e / (l * l))
}

/// `S_2(n,2)` as the quotient at the unit bubble, cached per dimension.
pub fn sobolev_sharp_constant(n: u32) -> Result<f64> {
    static CACHE: OnceLock<Mutex<HashMap<u32, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().expect("constant cache").get(&n) {
        return Ok(*v);
    }
    let b = crate::extremal::make_bubble(n, 1.0)?;
    let v = euclidean_sobolev_quotient(&b)?;
    cache.lock().expect("constant cache").insert(n, v);
    Ok(v)
}

fn need(p: &RadialProfile, min_n: u32, what: &str) -> Result<()> {
    if p.n() < min_n {
        return Err(Error::Domain(format!("{what} needs n >= {min_n}, got {}", p.n())));
    }
    Ok(())
}

fn base(kind: &str, p: &RadialProfile, lhs: f64, rhs: f64, err: f64) -> DeficitReport {
    DeficitReport::new(kind, lhs, rhs, err).with_param("n", p.n() as f64)
}

/// Status of an identity: the gap must vanish to `tol` relative to `scale`.
fn identity_status(r: DeficitReport, residual: f64, tol: f64) -> DeficitReport {
    let r = r.with_param("residual", residual);
    if residual.is_finite() && residual <= tol {
        DeficitReport { status: Status::Pass, ..r }
    } else {
        r.fail(format!("identity residual {residual:e} exceeds {tol:e}"))
    }
}

/// `∫(Δ_g u)² - (n-1)^4/16 ∫u²` with its error estimate.
fn keytool_lhs(p: &RadialProfile) -> Result<(f64, f64, f64)> {
    let c = SharpConstants::new(p.n())?;
    let e = p.energy_hyp()?;
    let l = p.l2_squared()?;
    Ok((e.value - c.poincare2() * l.value, e.error + c.poincare2() * l.error, l.value))
}

/// `∫(Δ_g u)² - (n-1)^4/16 ∫u²  ≥  ∫(Δu_e)²`.
pub fn keytool_gap(p: &RadialProfile) -> Result<DeficitReport> {
    need(p, 4, "keytool_gap")?;
    let (lhs, err, _) = keytool_lhs(p)?;
    let e = p.energy_euc()?;
    Ok(base("keytool", p, lhs, e.value, err + e.error))
}

/// Keytool left side `≥ n²(n-4)²/16 ∫ u²/ρ_e^4`.
pub fn rellich_remainder(p: &RadialProfile) -> Result<DeficitReport> {
    need(p, 5, "rellich_remainder")?;
    let n = p.n() as f64;
    let (lhs, err, _) = keytool_lhs(p)?;
    let w = p.weighted_l2(4.0 / n)?;
    let c = SharpConstants::new(p.n())?.rellich();
    Ok(base("rellich", p, lhs, c * w.value, err + c * w.error))
}

/// Keytool left side `≥ S_2(n,2) ‖u‖²_{2n/(n-4)}`.
pub fn sobolev_remainder(p: &RadialProfile) -> Result<DeficitReport> {
    need(p, 5, "sobolev_remainder")?;
    let n = p.n() as f64;
    let (lhs, err, _) = keytool_lhs(p)?;
    let l = p.lp_norm(2.0 * n / (n - 4.0))?;
    let c = sobolev_sharp_constant(p.n())?;
    Ok(base("sobolev", p, lhs, c * l.value * l.value, err + 2.0 * c * l.value * l.error))
}

/// Keytool left side `≥ C (∫ |u|^{2(n-t)/(n-4)} ρ_e^{-t})^{(n-4)/(n-t)}` for
/// a caller-supplied constant `C` and `0 ≤ t ≤ 4`.
pub fn rellich_sobolev_remainder(p: &RadialProfile, t: f64, constant: f64) -> Result<DeficitReport> {
    need(p, 5, "rellich_sobolev_remainder")?;
    if !(0.0..=4.0).contains(&t) || !(constant >= 0.0) {
        return Err(Error::Domain(format!("bad Rellich-Sobolev parameters t = {t}, C = {constant}")));
    }
    let n = p.n() as f64;
    let sigma = p.ctx().sigma_n();
    let q = 2.0 * (n - t) / (n - 4.0);
    let (lhs, err, _) = keytool_lhs(p)?;
    let f = move |e: &Eval| e.v.abs().powf(q) * (e.s / sigma).powf(-t / n);
    let (v1, s1) = (p.values()[0], p.grid().first());
    let a = t / n;
    let head = if v1 == 0.0 { 0.0 } else { v1.abs().powf(q) * sigma.powf(a) * s1.powf(1.0 - a) / (1.0 - a) };
    let i = p.integrate(&Integrand {
        label: "rellich_sobolev",
        f: &f,
        head,
        tail_power: &|r| r * q + a,
        needs_smooth: false,
    })?;
    let rhs = constant * i.value.max(0.0).powf((n - 4.0) / (n - t));
    Ok(base("rellich_sobolev", p, lhs, rhs, err).with_param("t", t).with_param("constant", constant))
}

/// The fourth-order GJMS operator `P_2` on `H^n`: checks the algebraic
/// identity relating `∫(P_2u)u - 9/16‖u‖²` to the keytool left side, then
/// reports `∫(P_2u)u - 9/16‖u‖² ≥ 5S_2/(n-1)² ‖u‖²_{2n/(n-4)}`.
pub fn gjms_p2_check(p: &RadialProfile) -> Result<DeficitReport> {
    need(p, 5, "gjms_p2_check")?;
    let ctx = *p.ctx();
    let n = ctx.nf();
    let m = n * (n - 2.0);
    let c = (n - 1.0).powi(2) / 4.0;
    let e = p.energy_hyp()?;
    let ip = p.inner_product_laplace()?;
    let l2 = p.l2_squared()?;
    // ∫(P_2 u)u from the expansion in ∫(Δu)², ∫(Δu)u, ∫u²
    let q_expanded = e.value + (m / 2.0 - 2.0) * ip.value + (m * m - 8.0 * m) / 16.0 * l2.value;
    // ∫(P_1 u)² + 2∫(P_1 u)u with P_1 = -Δ - n(n-2)/4, directly
    let qf = move |x: &Eval| {
        let p1 = x.lap_hyp(&ctx) - m / 4.0 * x.v;
        p1 * p1 + 2.0 * p1 * x.v
    };
    let q_direct = p.integrate(&Integrand {
        label: "gjms_quadratic_form",
        f: &qf,
        head: 0.0,
        tail_power: &|a| 2.0 * a,
        needs_smooth: true,
    })?;
    let sq = move |x: &Eval| {
        let r = -x.lap_hyp(&ctx) + c * x.v;
        r * r
    };
    let square = p.integrate(&Integrand {
        label: "gjms_square",
        f: &sq,
        head: 0.0,
        tail_power: &|a| 2.0 * a,
        needs_smooth: true,
    })?;
    let sc = SharpConstants::new(p.n())?;
    let keyl = e.value - sc.poincare2() * l2.value;
    let id_lhs = q_expanded - 9.0 / 16.0 * l2.value - 5.0 / (n - 1.0).powi(2) * keyl;
    let id_rhs = (m - 4.0) / (n - 1.0).powi(2) * square.value;
    let scale = (e.value.abs() + sc.poincare2() * l2.value).max(f64::MIN_POSITIVE);
    let id_res = (id_lhs - id_rhs).abs() / scale;
    let ex_res = (q_expanded - q_direct.value).abs() / scale;

    let lq = p.lp_norm(2.0 * n / (n - 4.0))?;
    let lhs = q_expanded - 9.0 / 16.0 * l2.value;
    let rhs = sc.gjms_factor()? * lq.value * lq.value;
    let r = base("gjms_p2", p, lhs, rhs, e.error + q_direct.error + square.error)
        .with_param("identity_residual", id_res)
        .with_param("expansion_residual", ex_res);
    let worst = id_res.max(ex_res);
    if !(worst <= IDENTITY_TOL) {
        return Ok(r.fail(format!("P_2 identity residual {worst:e} exceeds {IDENTITY_TOL:e}")));
    }
    Ok(r)
}

/// `bracket · sinh^{4(n-1)}`, the weight of `v'²` in the energy difference.
pub(crate) fn vprime_weight(n: f64, sigma: f64, s: f64, sh: f64, ch: f64) -> f64 {
    let ni = n as i32;
    2.0 * (n - 1.0) * ch * sh.powi(3 * ni - 4) / (s * sigma)
        - (n - 1.0) * sh.powi(2 * ni - 2) / (2.0 * sigma * sigma)
        - (n - 2.0) * sh.powi(2 * ni - 4) / (2.0 * sigma * sigma)
        - (3.0 * n - 2.0) * sh.powi(4 * ni - 4) / (2.0 * s * s)
}

/// Integration-by-parts form of `(∫(Δ_g u)² - ∫(Δu_e)²)/(nσ_n)^4` as a
/// weighted integral of `(v'' + 2(n-1)v'/(ns))²` plus one of `v'²`.
pub fn lemma31_check(p: &RadialProfile) -> Result<DeficitReport> {
    need(p, 4, "lemma31_check")?;
    let n = p.ctx().nf();
    let sigma = p.ctx().sigma_n();
    let eh = p.energy_hyp()?;
    let ee = p.energy_euc()?;
    let norm = (n * sigma).powi(4);
    let lhs = (eh.value - ee.value) / norm;
    let ni = p.n() as i32;
    let e1 = 4.0 * (n - 1.0) / n;
    let f1 = move |x: &Eval| {
        let a = x.d2 + 2.0 * (n - 1.0) * x.d1 / (n * x.s);
        a * a * (x.point.sinh.powi(4 * ni - 4) - (x.s / sigma).powf(e1))
    };
    let f2 = move |x: &Eval| x.d1 * x.d1 * vprime_weight(n, sigma, x.s, x.point.sinh, x.point.cosh);
    let i1 = p.integrate(&Integrand { label: "lemma31_first", f: &f1, head: 0.0, tail_power: &|a| 2.0 * a, needs_smooth: true })?;
    let i2 = p.integrate(&Integrand { label: "lemma31_second", f: &f2, head: 0.0, tail_power: &|a| 2.0 * a, needs_smooth: true })?;
    let rhs = i1.value + 4.0 * (n - 1.0) / (n * n) * i2.value;
    let scale = (eh.value.abs() + ee.value.abs()) / norm;
    let residual = if scale == 0.0 { (lhs - rhs).abs() } else { (lhs - rhs).abs() / scale };
    let r = base("lemma31", p, lhs, rhs, (eh.error + ee.error) / norm + i1.error + i2.error);
    Ok(identity_status(r, residual, IDENTITY_TOL))
}

/// Weighted Euclidean Rellich `∫(Δu_e)²|y|⁴ ≥ n²(n-4)²/16 ∫u_e²` and Hardy
/// `∫|∇u_e|²|y|² ≥ n²/4 ∫u_e²`.
pub fn euclidean_weighted_checks(p: &RadialProfile) -> Result<Vec<DeficitReport>> {
    need(p, 4, "euclidean_weighted_checks")?;
    let n = p.ctx().nf();
    let l2 = p.l2_squared()?;
    let (r, h) = weighted_terms(p)?;
    let c = SharpConstants::new(p.n())?.rellich();
    Ok(vec![
        base("weighted_rellich", p, r.0, c * l2.value, r.1 + c * l2.error),
        base("weighted_hardy", p, h.0, n * n / 4.0 * l2.value, h.1 + n * n / 4.0 * l2.error),
    ])
}

/// `(∫(Δu_e)²|y|⁴, err)` and `(∫|∇u_e|²|y|², err)`.
fn weighted_terms(p: &RadialProfile) -> Result<((f64, f64), (f64, f64))> {
    let ctx = *p.ctx();
    let n = ctx.nf();
    let sigma = ctx.sigma_n();
    let fr = move |x: &Eval| {
        let l = x.lap_euc(&ctx);
        l * l * (x.s / sigma).powf(4.0 / n)
    };
    let fh = move |x: &Eval| {
        let r = x.euclidean_radius(&ctx);
        let w = n * sigma * r.powi(ctx.n() as i32 - 1);
        x.d1 * x.d1 * w * w * r * r
    };
    let r = p.integrate(&Integrand { label: "weighted_rellich", f: &fr, head: 0.0, tail_power: &|a| 2.0 * a, needs_smooth: true })?;
    let h = p.integrate(&Integrand { label: "weighted_hardy", f: &fh, head: 0.0, tail_power: &|a| 2.0 * a, needs_smooth: true })?;
    Ok(((r.value, r.error), (h.value, h.error)))
}

/// The closing chain of the keytool argument, termwise:
/// `∫(Δ_g u)² - ∫(Δu_e)² ≥ ((n-1)/n)^4 [∫(Δu_e)²|y|⁴ + 2(n-2)∫|∇u_e|²|y|²] ≥ (n-1)^4/16 ∫u²`.
pub fn tofinish_chain(p: &RadialProfile) -> Result<Vec<DeficitReport>> {
    need(p, 4, "tofinish_chain")?;
    let n = p.ctx().nf();
    let eh = p.energy_hyp()?;
    let ee = p.energy_euc()?;
    let l2 = p.l2_squared()?;
    let (r, h) = weighted_terms(p)?;
    let k = ((n - 1.0) / n).powi(4);
    let mid = k * (r.0 + 2.0 * (n - 2.0) * h.0);
    let mid_err = k * (r.1 + 2.0 * (n - 2.0) * h.1);
    let c = SharpConstants::new(p.n())?.poincare2();
    Ok(vec![
        base("tofinish_transfer", p, eh.value - ee.value, mid, eh.error + ee.error + mid_err),
        base("tofinish_weighted", p, mid, c * l2.value, mid_err + c * l2.error),
    ])
}
