//! Reconstruction of a radial profile from its Laplacian datum.
//!
//! For `-Δ_g u = f(s)` with `u` vanishing at infinity,
//! `v(t) = ∫_t^∞ I(s) / W(s)² ds` where `I(s) = ∫_0^s f = s f̄(s)` and
//! `W = n σ_n sinh(F_n(s))^{n-1}`.

use std::fmt;
use std::sync::Arc;

use super::{DecayClass, Grid, RadialProfile, Side};
use crate::error::{Error, Result};
use crate::hypgeo::GeometryContext;
use crate::quad;

type SidedFn = Arc<dyn Fn(f64, Side) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    /// `values[j]` on `(edges[j-1], edges[j]]`, zero past the last edge;
    /// `prefix[j]` is the integral up to `edges[j-1]`.
    Steps { edges: Vec<f64>, values: Vec<f64>, prefix: Vec<f64> },
    Function(SidedFn),
}

/// Laplacian datum `f` on `[0, ∞)` and its running integral.
#[derive(Clone)]
pub struct SourceProfile {
    ctx: GeometryContext,
    kind: Kind,
}

impl fmt::Debug for SourceProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Steps { edges, .. } => write!(f, "SourceProfile::Steps({} steps)", edges.len()),
            Kind::Function(_) => write!(f, "SourceProfile::Function"),
        }
    }
}

impl SourceProfile {
    pub fn from_steps(ctx: GeometryContext, edges: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if edges.is_empty() || edges.len() != values.len() {
            return Err(Error::Domain("step source needs one value per edge".into()));
        }
        if !(edges[0] > 0.0) || edges.windows(2).any(|w| w[1] <= w[0]) || edges.iter().any(|e| !e.is_finite()) {
            return Err(Error::Domain("step edges must be positive and increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite step value".into()));
        }
        let mut prefix = Vec::with_capacity(edges.len() + 1);
        prefix.push(0.0);
        let mut lo = 0.0;
        for (e, v) in edges.iter().zip(&values) {
            prefix.push(prefix[prefix.len() - 1] + v * (e - lo));
            lo = *e;
        }
        Ok(Self { ctx, kind: Kind::Steps { edges, values, prefix } })
    }

    pub fn from_fn<F: Fn(f64) -> f64 + Send + Sync + 'static>(ctx: GeometryContext, f: F) -> Self {
        Self { ctx, kind: Kind::Function(Arc::new(move |s, _| f(s))) }
    }

    /// A datum with jumps; `f(s, Side::Left)` is the limit from below.
    pub fn from_fn_sided<F: Fn(f64, Side) -> f64 + Send + Sync + 'static>(ctx: GeometryContext, f: F) -> Self {
        Self { ctx, kind: Kind::Function(Arc::new(f)) }
    }

    pub fn ctx(&self) -> &GeometryContext {
        &self.ctx
    }

    pub fn f(&self, s: f64) -> f64 {
        self.f_sided(s, Side::Right)
    }

    pub fn f_sided(&self, s: f64, side: Side) -> f64 {
        match &self.kind {
            Kind::Steps { edges, values, .. } => {
                let j = match side {
                    Side::Left => edges.partition_point(|&e| e < s),
                    Side::Right => edges.partition_point(|&e| e <= s),
                };
                values.get(j).copied().unwrap_or(0.0)
            }
            Kind::Function(f) => f(s, side),
        }
    }

    /// `∫_a^b f` with an error estimate.
    pub fn integral(&self, a: f64, b: f64) -> (f64, f64) {
        match &self.kind {
            Kind::Steps { edges, values, prefix } => {
                let cum = |x: f64| {
                    let x = x.max(0.0);
                    let j = edges.partition_point(|&e| e < x);
                    if j == edges.len() {
                        return prefix[j];
                    }
                    let lo = if j == 0 { 0.0 } else { edges[j - 1] };
                    prefix[j] + values[j] * (x - lo)
                };
                (cum(b) - cum(a), 0.0)
            }
            Kind::Function(f) => {
                if a <= 0.0 {
                    let r = quad::integrate(|s| f(s, Side::Right), 0.0, b, 1e-15, 1e-13);
                    (r.value, r.abs_err)
                } else {
                    // Kronrod panel in ln s
                    let g = |x: f64| {
                        let s = x.exp();
                        f(s, Side::Right) * s
                    };
                    quad::gk15(&g, a.ln(), b.ln())
                }
            }
        }
    }

    /// `f̄(t) = (1/t) ∫_0^t f`.
    pub fn fbar(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("running average needs t > 0, got {t}")));
        }
        Ok(self.integral(0.0, t).0 / t)
    }
}

/// The profile with `-Δ_g u = f`, sampled on `grid`. `f` is taken to vanish
/// past the last knot.
pub fn talenti_profile(src: &SourceProfile, grid: Arc<Grid>) -> Result<RadialProfile> {
    let ctx = *grid.ctx();
    let n = ctx.nf();
    let k = grid.knots().to_vec();
    let m = k.len();
    let sn = k[m - 1];

    // I at the knots
    let mut cum = vec![0.0; m];
    cum[0] = src.integral(0.0, k[0]).0;
    for i in 1..m {
        cum[i] = cum[i - 1] + if k[i] > k[i - 1] { src.integral(k[i - 1], k[i]).0 } else { 0.0 };
    }
    let total = cum[m - 1];
    let scale = cum.iter().fold(0.0f64, |a, c| a.max(c.abs())).max(f64::MIN_POSITIVE);
    let f_end = src.f_sided(sn, Side::Left);
    if (f_end * sn).abs() > 1e-6 * scale {
        return Err(Error::Integrability(format!(
            "source does not vanish at the end of the grid: f({sn:e}) = {f_end:e}"
        )));
    }

    let inv_w2 = |s: f64| -> f64 {
        match ctx.point(s) {
            Ok(p) => {
                let w = p.area(&ctx);
                1.0 / (w * w)
            }
            Err(_) => f64::NAN,
        }
    };
    let tail = quad::integrate_to_infinity(
        |z| {
            let s = sn * z.exp();
            s * inv_w2(s)
        },
        0.0,
        0.0,
        1e-13,
    );
    if !tail.converged || !tail.value.is_finite() {
        return Err(Error::Integrability("tail of the Green kernel did not converge".into()));
    }

    let mut v = vec![0.0; m];
    v[m - 1] = total * tail.value;
    for i in (0..m - 1).rev() {
        if k[i + 1] == k[i] {
            v[i] = v[i + 1];
            continue;
        }
        let (a, ci) = (k[i], cum[i]);
        let g = |x: f64| {
            let s = x.exp();
            let inner = ci + src.integral(a, s).0;
            inner * inv_w2(s) * s
        };
        let (val, _) = quad::gk15(&g, a.ln(), k[i + 1].ln());
        v[i] = v[i + 1] + val;
    }

    let mut d1 = vec![0.0; m];
    let mut d2 = vec![0.0; m];
    for i in 0..m {
        let p = ctx.point(k[i])?;
        let w = p.area(&ctx);
        let side = if i + 1 < m && k[i + 1] == k[i] { Side::Left } else { Side::Right };
        let f = src.f_sided(k[i], side);
        d1[i] = -cum[i] / (w * w);
        d2[i] = -f / (w * w) + 2.0 * (n - 1.0) * cum[i] * p.cosh / (p.sinh * w * w * w);
    }
    let decay = if total == 0.0 { DecayClass::CompactSupport } else { DecayClass::PolynomialDecay { rate: 1.0 } };
    if total == 0.0 && v[m - 1] != 0.0 {
        v[m - 1] = 0.0;
    }
    RadialProfile::from_parts(grid, v, d1, d2, decay)
}
