//! Sign and margin checks for the one-variable functions behind the key
//! estimate, all evaluated in multi-precision and parallel over the grid.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hypgeo::GeometryContext;
use crate::precise;
use crate::report::{DeficitReport, Status};

/// Agreement required between the closed-form `J_n'` and its difference quotient.
pub const J_PRIME_TOL: f64 = 1e-4;

/// `m` log-spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    if m == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..m).map(|i| (a + (b - a) * i as f64 / (m - 1) as f64).exp()).collect()
}

fn need(n: u32, grid: &[f64], positive: bool) -> Result<()> {
    if n < 4 {
        return Err(Error::Domain(format!("needs n >= 4, got {n}")));
    }
    if grid.is_empty() {
        return Err(Error::Domain("empty grid".into()));
    }
    if let Some(x) = grid.iter().find(|&&x| !(x.is_finite() && (x > 0.0 || !positive && x == 0.0))) {
        return Err(Error::Domain(format!("grid point {x} out of range")));
    }
    Ok(())
}

/// Normalized report `lhs = 1 + margin`, `rhs = 1` at the worst point.
fn margin_report(kind: &str, n: u32, worst: f64, at: f64, at_name: &str) -> DeficitReport {
    DeficitReport::new(kind, 1.0 + worst, 1.0, 0.0)
        .with_param("n", n as f64)
        .with_param("margin", worst)
        .with_param(at_name, at)
}

/// The `v'²` weight of the energy difference against
/// `(n-1)³(n-2)/(2n⁴) s²/σ_n⁴`, as relative margins on an `s`-grid; also
/// requires `G_n(F_n(s)) < 0` and agreement of the two margin formulas.
pub fn keyestimate_check(n: u32, s_grid: &[f64]) -> Result<DeficitReport> {
    need(n, s_grid, true)?;
    let ctx = GeometryContext::new(n)?;
    let rows: Vec<precise::KeyMargin> = s_grid
        .par_iter()
        .map(|&s| precise::keyestimate_margin(n, ctx.phi_inverse(s)?))
        .collect::<Result<_>>()?;
    let (mut worst, mut at, mut disagree) = (f64::INFINITY, 0.0, 0.0f64);
    let mut g_ok = true;
    for m in &rows {
        if m.relative < worst {
            worst = m.relative;
            at = m.s;
        }
        g_ok &= m.relative_from_g > 0.0;
        disagree = disagree.max((m.relative - m.relative_from_g).abs() / m.relative.abs().max(1e-300));
    }
    let r = margin_report("keyestimate", n, worst, at, "s").with_param("form_disagreement", disagree);
    let r = if worst > 0.0 { DeficitReport { status: Status::Pass, ..r } } else { r.fail("margin is not positive") };
    if !g_ok {
        return Ok(r.fail("G_n(t) >= 0 at some grid point"));
    }
    if !(disagree <= 1e-8) {
        return Ok(r.fail(format!("weight and G_n forms disagree by {disagree:e}")));
    }
    Ok(r)
}

/// `(G_n, H_n, J_n, K_n)` evaluated from their formulas at `t = 0`.
pub fn proof_functions_at_zero(n: u32) -> Result<[f64; 4]> {
    precise::proof_values_raw(n, 0.0)
}

/// Signs `G_n, H_n, J_n < 0` and `K_n ≥ 0` on a `t`-grid, plus the closed
/// form of `J_n'` against central differences.
pub fn proof_function_signs(n: u32, t_grid: &[f64]) -> Result<DeficitReport> {
    need(n, t_grid, true)?;
    let rows: Vec<(precise::ProofValues, f64)> = t_grid
        .par_iter()
        .map(|&t| {
            let v = precise::proof_values(n, t)?;
            let (closed, fd) = precise::j_prime_check(n, t)?;
            let rel = (closed - fd).abs() / closed.abs().max(f64::MIN_POSITIVE);
            Ok((v, rel))
        })
        .collect::<Result<_>>()?;
    let mut worst = f64::INFINITY;
    let mut at = 0.0;
    let mut which = "";
    let mut jp = 0.0f64;
    let mut jp_at = 0.0;
    for (v, rel) in &rows {
        for (name, m) in [("G", -v.g), ("H", -v.h), ("J", -v.j), ("K", v.k)] {
            if m < worst {
                worst = m;
                at = v.t;
                which = name;
            }
        }
        if !(*rel <= jp) {
            jp = *rel;
            jp_at = v.t;
        }
    }
    let zero = proof_functions_at_zero(n)?;
    let z = zero.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let r = margin_report("proof_signs", n, worst, at, "t")
        .with_param("j_prime_rel_err", jp)
        .with_param("j_prime_worst_t", jp_at)
        .with_param("max_abs_at_zero", z)
        .with_param("points", t_grid.len() as f64);
    let strict = rows.iter().all(|(v, _)| v.g < 0.0 && v.h < 0.0 && v.j < 0.0 && v.k >= 0.0);
    let r = if strict { DeficitReport { status: Status::Pass, ..r } } else { r.fail(format!("sign violated by {which}")) };
    if !(jp <= J_PRIME_TOL) {
        return Ok(r.fail(format!("J_n' closed form off by {jp:e} at t = {jp_at}")));
    }
    if !(z <= 1e-10) {
        return Ok(r.fail(format!("proof functions do not vanish at 0: {z:e}")));
    }
    Ok(r)
}

/// `sinh(F_n(s))^{4(n-1)} - (s/σ_n)^{4(n-1)/n} ≥ ((n-1)/n)^4 (s/σ_n)^4`,
/// relative to the right side, on an `s`-grid.
pub fn pointwise_transfer_bound(n: u32, s_grid: &[f64]) -> Result<DeficitReport> {
    need(n, s_grid, true)?;
    let ctx = GeometryContext::new(n)?;
    let rows: Vec<(f64, f64)> = s_grid
        .par_iter()
        .map(|&s| precise::transfer_residual(n, ctx.phi_inverse(s)?))
        .collect::<Result<_>>()?;
    let (worst_s, worst) = rows.iter().fold((0.0, f64::INFINITY), |a, &(s, r)| if r < a.1 { (s, r) } else { a });
    Ok(margin_report("transfer", n, worst, worst_s, "s"))
}
