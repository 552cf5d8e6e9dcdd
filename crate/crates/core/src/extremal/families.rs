//! Deterministic profile families used to approach the sharp constants.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypgeo::GeometryContext;
use crate::jet::Jet;
use crate::profile::{DecayClass, Grid, RadialProfile};

/// Knots per decade for the smooth families.
pub const FAMILY_DENSITY: f64 = 60.0;

fn ctx_for(n: u32, min_n: u32) -> Result<GeometryContext> {
    if n < min_n {
        return Err(Error::Domain(format!("family needs n >= {min_n}, got {n}")));
    }
    GeometryContext::new(n)
}

/// `e^{-1/y}` for `y > 0`, zero otherwise.
fn psi(y: Jet) -> Jet {
    if y.v < 2e-3 {
        return Jet::constant(0.0);
    }
    (-1.0 / y).exp()
}

/// Smooth step in `x ∈ [0, 1]`: 1 at `x ≤ 0`, 0 at `x ≥ 1`.
pub fn smooth_step(x: Jet) -> Jet {
    let a = psi(1.0 - x);
    let b = psi(x);
    a / (a + b)
}

/// Cutoff in `ln s`: 1 below `a`, 0 above `b`.
pub fn cutoff(s: Jet, a: f64, b: f64) -> Jet {
    if s.v <= a {
        return Jet::constant(1.0);
    }
    if s.v >= b {
        return Jet::constant(0.0);
    }
    smooth_step((s.ln() - a.ln()) / (b / a).ln())
}

/// `(1 + (s/λ)^{2/n})^{-(n-4)/2}` with `λ = σ_n scale^n`.
fn bubble_jet(s: Jet, n: f64, lambda: f64) -> Jet {
    (1.0 + (s / lambda).powf(2.0 / n)).powf(-(n - 4.0) / 2.0)
}

/// The Euclidean bubble of width `scale` in the volume coordinate, with its
/// polynomial tail of rate `(n-4)/n`.
pub fn make_bubble(n: u32, scale: f64) -> Result<RadialProfile> {
    let ctx = ctx_for(n, 5)?;
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Domain(format!("bubble scale must be positive, got {scale}")));
    }
    let nf = n as f64;
    let lambda = ctx.sigma_n() * scale.powi(n as i32);
    let lo = lambda * 1e-12;
    let hi = lambda * 1e14;
    let k = (26.0 * FAMILY_DENSITY) as usize;
    let g = Arc::new(Grid::log_spaced(ctx, lo, hi, k)?);
    RadialProfile::from_fn(g, DecayClass::PolynomialDecay { rate: (nf - 4.0) / nf }, |s| bubble_jet(s, nf, lambda))
}

/// The bubble cut off smoothly between geodesic radii `r_in` and `r_out`,
/// so that it lies in `L²(H^n)`.
pub fn make_truncated_bubble(n: u32, scale: f64, r_in: f64, r_out: f64) -> Result<RadialProfile> {
    let ctx = ctx_for(n, 5)?;
    if !(scale > 0.0 && scale.is_finite() && r_in > 0.0 && r_out > r_in) {
        return Err(Error::Domain(format!("bad truncated bubble ({scale}, {r_in}, {r_out})")));
    }
    let nf = n as f64;
    let lambda = ctx.sigma_n() * scale.powi(n as i32);
    let (a, b) = (ctx.ball_volume(r_in)?, ctx.ball_volume(r_out)?);
    let lo = (lambda * 1e-12).min(a * 1e-12);
    let g = Arc::new(Grid::log_spaced_with_breaks(ctx, lo, b, FAMILY_DENSITY, &[a])?);
    RadialProfile::from_fn(g, DecayClass::CompactSupport, |s| bubble_jet(s, nf, lambda) * cutoff(s, a, b))
}

/// Cubic Hermite interpolant on `[y0, y1]` through `(p0, d0)` and `(p1, d1)`.
#[derive(Debug, Clone, Copy)]
struct Hermite {
    y0: f64,
    h: f64,
    c: [f64; 4],
}

impl Hermite {
    fn new(y0: f64, y1: f64, p0: f64, d0: f64, p1: f64, d1: f64) -> Self {
        Self { y0, h: y1 - y0, c: [p0, d0, p1, d1] }
    }

    fn eval(&self, y: Jet) -> Jet {
        let t = (y - self.y0) / self.h;
        let t2 = t * t;
        let t3 = t2 * t;
        let [p0, d0, p1, d1] = self.c;
        (2.0 * t3 - 3.0 * t2 + 1.0) * p0
            + (t3 - 2.0 * t2 + t) * (self.h * d0)
            + (3.0 * t2 - 2.0 * t3) * p1
            + (t3 - t2) * (self.h * d1)
    }
}

/// Shape parameters of the Rellich window (in `y = ln(r/r_in)`): phase
/// offset of the sine, length of the inner blend and of the outer clamp.
pub const RELLICH_SHAPE: (f64, f64, f64) = (3.0, 2.0, 0.3);

/// Smoothed truncated power law `u ≈ |y|^{-(n-4)/2}` on `r_out/span ≤ |y| ≤ r_out`:
/// constant below the inner radius, a log-sine window in between, clamped to
/// zero with zero slope at `r_out`. `C¹` at four break knots.
pub fn rellich_powerlaw(n: u32, span: f64, r_out: f64) -> Result<RadialProfile> {
    let ctx = ctx_for(n, 5)?;
    if !(span > 1.0 && r_out > 0.0 && span.is_finite()) {
        return Err(Error::Domain(format!("bad power-law window: span {span}, r_out {r_out}")));
    }
    let nf = n as f64;
    let sigma = ctx.sigma_n();
    let k = (nf - 4.0) / 2.0;
    let (a, li, lo) = RELLICH_SHAPE;
    let len = span.ln();
    if len <= li + 2.0 * lo + 0.5 {
        return Err(Error::Domain(format!("span {span} too short for the window")));
    }
    let lam = len + a - lo;
    let om = std::f64::consts::PI / lam;
    let sine = |y: f64| ((om * (y + a)).sin(), om * (om * (y + a)).cos());
    let (p0, _) = sine(0.0);
    let (pi, di) = sine(li);
    let yb = len - 2.0 * lo;
    let (pb, db) = sine(yb);
    let inner = Hermite::new(0.0, li, p0, k * p0, pi, di);
    let outer = Hermite::new(yb, len, pb, db, 0.0, 0.0);
    let r_in = r_out / span;
    let s_at = |y: f64| sigma * (r_in * y.exp()).powf(nf);
    let (s0, s1, s2, s3) = (s_at(0.0), s_at(li), s_at(yb), s_at(len));
    let g = Arc::new(Grid::log_spaced_with_breaks(ctx, s0, s3, FAMILY_DENSITY, &[s1, s2])?);
    let ln_s0 = s0.ln();
    RadialProfile::from_fn_sided(g, DecayClass::CompactSupport, move |s, side| {
        let y = (s.ln() - ln_s0) / nf;
        let below = |b: f64| s.v < b || (s.v == b && side == crate::profile::Side::Left);
        let phi = if below(s1) {
            inner.eval(y)
        } else if below(s2) {
            (om * (y + a)).sin()
        } else if s.v < s3 {
            outer.eval(y)
        } else {
            return Jet::constant(0.0);
        };
        (-k * y).exp() * phi / p0
    })
}

/// `e^{-(n-1)ρ/2}` cut off smoothly at geodesic radius `width`; its
/// Poincaré quotient tends to `(n-1)^4/16` as `width` grows.
pub fn poincare_spreading(n: u32, width: f64) -> Result<RadialProfile> {
    let ctx = ctx_for(n, 4)?;
    if !(width > 1.0 && width <= 60.0) {
        return Err(Error::Domain(format!("spreading width must lie in (1, 60], got {width}")));
    }
    let nf = n as f64;
    let hi = ctx.ball_volume(width)?;
    let g = Arc::new(Grid::log_spaced(ctx, ctx.ball_volume(1e-6)?, hi, (30.0 * FAMILY_DENSITY) as usize)?);
    RadialProfile::from_fn(g, DecayClass::CompactSupport, move |s| match ctx.phi_inverse_jet(s) {
        Ok(rho) => (-(nf - 1.0) / 2.0 * rho).exp() * smooth_step(rho / width),
        Err(_) => Jet::constant(f64::NAN),
    })
}

/// The fixed `C²` cap `η` on `[1, 2]`: `η(1) = 0`, `η'(1) = -1`, `η''(1) = 1`,
/// vanishing to second order at 2.
pub fn adams_cap(r: Jet) -> Jet {
    if r.v >= 2.0 {
        return Jet::constant(0.0);
    }
    let x = r - 1.0;
    let x2 = x * x;
    x * (-1.0 + x * 0.5 + x2 * 4.5 - x2 * x * 6.5 + x2 * x2 * 2.5)
}

/// The Euclidean radial profile `u_m(r)` of the logarithmic concentration
/// sequence in dimension 4, continued past `r = 1` by the cap.
pub fn adams_um(m: f64, r: Jet, left_of_plateau_edge: bool) -> Jet {
    let lm = m.ln();
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let r0 = m.powf(-0.25);
    let slope = 1.0 / (2.0 * pi2 * lm).sqrt();
    if r.v < r0 || (r.v == r0 && left_of_plateau_edge) {
        (lm / (32.0 * pi2)).sqrt() + (1.0 / (8.0 * pi2 * lm)).sqrt() * (1.0 - m.sqrt() * r * r)
    } else if r.v <= 1.0 {
        -slope * r.ln()
    } else {
        slope * adams_cap(r)
    }
}

/// Unnormalized `ū_m(ρ) = u_m(3ρ)` on `H^4` in the volume coordinate, with
/// the grid refined around the inner plateau `3ρ = m^{-1/4}`.
pub fn adams_profile_unscaled(m: f64) -> Result<RadialProfile> {
    if !(m >= 10.0 && m.is_finite()) {
        return Err(Error::Domain(format!("sequence index must be >= 10, got {m}")));
    }
    let ctx = GeometryContext::new(4)?;
    let r0 = m.powf(-0.25);
    let s_edge = ctx.ball_volume(r0 / 3.0)?;
    let s_end = ctx.ball_volume(2.0 / 3.0)?;
    let lo = s_edge * 1e-8;
    let coarse = Grid::log_spaced_with_breaks(ctx, lo, s_end, FAMILY_DENSITY, &[s_edge])?;
    // a denser band of two decades either side of the plateau edge
    let fine = Grid::log_spaced(ctx, s_edge * 1e-2, s_edge * 1e2, (4.0 * 4.0 * FAMILY_DENSITY) as usize)?;
    let mut knots: Vec<f64> = coarse.knots().iter().copied().filter(|&s| s < s_edge * 0.99e-2 || s > s_edge * 1.01e2 || s == s_edge).collect();
    knots.extend(fine.knots().iter().copied().filter(|&s| s != s_edge && s < s_end));
    knots.sort_by(f64::total_cmp);
    let g = Arc::new(Grid::from_knots(ctx, knots)?);
    RadialProfile::from_fn_sided(g, DecayClass::CompactSupport, move |s, side| match ctx.phi_inverse_jet(s) {
        Ok(rho) => {
            let left = side == crate::profile::Side::Left;
            // the break volumes are only exact up to rounding of ρ
            let r = rho * 3.0;
            let r = if s.v == s_edge { Jet::new(r0, r.d1, r.d2) } else { r };
            adams_um(m, r, left)
        }
        Err(_) => Jet::constant(f64::NAN),
    })
}

/// A named test family with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileFamily {
    /// Truncated bubble at the given scale, cut off at [`BUBBLE_CUTOFF`](super::BUBBLE_CUTOFF).
    SobolevBubble { n: u32, scale: f64 },
    RellichPowerlaw { n: u32, span: f64, outer_radius: f64 },
    PoincareSpreading { n: u32, width: f64 },
    /// The normalized `w_m`; `n` is always 4.
    AdamsSequence { m: f64 },
}

impl ProfileFamily {
    pub fn n(&self) -> u32 {
        match *self {
            ProfileFamily::SobolevBubble { n, .. }
            | ProfileFamily::RellichPowerlaw { n, .. }
            | ProfileFamily::PoincareSpreading { n, .. } => n,
            ProfileFamily::AdamsSequence { .. } => 4,
        }
    }

    pub fn generate(&self) -> Result<RadialProfile> {
        match *self {
            ProfileFamily::SobolevBubble { n, scale } => {
                let (a, b) = super::BUBBLE_CUTOFF;
                make_truncated_bubble(n, scale, a, b)
            }
            ProfileFamily::RellichPowerlaw { n, span, outer_radius } => rellich_powerlaw(n, span, outer_radius),
            ProfileFamily::PoincareSpreading { n, width } => poincare_spreading(n, width),
            ProfileFamily::AdamsSequence { m } => Ok(super::adams_sequence(m)?.profile),
        }
    }
}
