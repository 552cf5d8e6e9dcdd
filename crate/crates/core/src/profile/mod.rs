//! Radial profiles in the volume coordinate `s`.
//!
//! A profile `v` stands for the radial function `u = v(V_g(B_g(0, ρ)))` on
//! hyperbolic space and for `u_e(y) = v(σ_n |y|^n)` on `R^n`. Between knots
//! the profile is a quintic Hermite interpolant in `ln s` through the stored
//! values, first and second derivatives, so it is C² wherever the data are.
//! Below the first knot the profile is held constant; past the last knot it
//! follows the model named by its [`DecayClass`].

mod grid;
mod io;
mod talenti;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypgeo::{GeometryContext, RadialPoint};
use crate::jet::Jet;
use crate::quad;

pub use grid::{Grid, Node};
pub use io::ProfileDocument;
pub use talenti::{talenti_profile, SourceProfile};

/// Behaviour past the last knot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecayClass {
    /// `v ≡ 0` beyond the last knot.
    CompactSupport,
    /// `v(s) = v_N (s/s_N)^{-rate}`.
    PolynomialDecay { rate: f64 },
    /// `v(s) = v_N e^{-rate (s - s_N)}`.
    ExponentialDecay { rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    Hermite,
    /// `v = values[j]` on `(s_{j-1}, s_j]`, with `s_{-1} = 0`.
    PiecewiseConstant,
}

/// Which one-sided limit a generator should return at a break knot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Profile value and `s`-derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub s: f64,
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

/// A [`Sample`] together with the geodesic data at the same volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eval {
    pub s: f64,
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
    pub point: RadialPoint,
}

impl Eval {
    /// `-Δ_g u` at this volume coordinate.
    #[inline]
    pub fn lap_hyp(&self, ctx: &GeometryContext) -> f64 {
        let n = ctx.nf();
        let (sh, ch) = (self.point.sinh, self.point.cosh);
        let w = self.point.area(ctx);
        -(self.d2 * w * w + 2.0 * (n - 1.0) * (ch / sh) * self.d1 * w)
    }

    /// `-Δ u_e` at the Euclidean point with `σ_n |y|^n = s`.
    #[inline]
    pub fn lap_euc(&self, ctx: &GeometryContext) -> f64 {
        let n = ctx.nf();
        let r = (self.s / ctx.sigma_n()).powf(1.0 / n);
        let w = n * ctx.sigma_n() * r.powi(ctx.n() as i32 - 1);
        -(self.d2 * w * w + 2.0 * (n - 1.0) * self.d1 * w / r)
    }

    /// Euclidean radius `|y| = (s/σ_n)^{1/n}`.
    #[inline]
    pub fn euclidean_radius(&self, ctx: &GeometryContext) -> f64 {
        (self.s / ctx.sigma_n()).powf(1.0 / ctx.nf())
    }
}

/// Value and error estimate of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

/// Description of a one-dimensional functional `∫_0^∞ f ds`.
pub struct Integrand<'a> {
    pub label: &'a str,
    pub f: &'a (dyn Fn(&Eval) -> f64 + Sync),
    /// Exact contribution of `(0, s_1)` where the profile is constant.
    pub head: f64,
    /// For a polynomial tail of rate `a`, the power `p` with `f ~ s^{-p}`.
    pub tail_power: &'a dyn Fn(f64) -> f64,
    /// Whether the functional involves derivatives.
    pub needs_smooth: bool,
}

/// An immutable radial profile.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    grid: Arc<Grid>,
    values: Vec<f64>,
    // derivatives in x = ln s: v_x = s v', v_xx = s² v'' + s v'
    vx: Vec<f64>,
    vxx: Vec<f64>,
    decay: DecayClass,
    interp: Interpolation,
}

#[inline]
fn quintic(t: f64) -> [[f64; 3]; 6] {
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    [
        [1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5, -30.0 * t2 + 60.0 * t3 - 30.0 * t4, -60.0 * t + 180.0 * t2 - 120.0 * t3],
        [t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5, 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4, -36.0 * t + 96.0 * t2 - 60.0 * t3],
        [
            0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5,
            t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4,
            1.0 - 9.0 * t + 18.0 * t2 - 10.0 * t3,
        ],
        [0.5 * t3 - t4 + 0.5 * t5, 1.5 * t2 - 4.0 * t3 + 2.5 * t4, 3.0 * t - 12.0 * t2 + 10.0 * t3],
        [-4.0 * t3 + 7.0 * t4 - 3.0 * t5, -12.0 * t2 + 28.0 * t3 - 15.0 * t4, -24.0 * t + 84.0 * t2 - 60.0 * t3],
        [10.0 * t3 - 15.0 * t4 + 6.0 * t5, 30.0 * t2 - 60.0 * t3 + 30.0 * t4, 60.0 * t - 180.0 * t2 + 120.0 * t3],
    ]
}

fn check_decay(decay: DecayClass) -> Result<()> {
    match decay {
        DecayClass::CompactSupport => Ok(()),
        DecayClass::PolynomialDecay { rate } | DecayClass::ExponentialDecay { rate } => {
            if rate > 0.0 && rate.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain(format!("decay rate must be positive, got {rate}")))
            }
        }
    }
}

impl RadialProfile {
    /// Profile from values and `s`-derivatives at every knot.
    pub fn from_parts(
        grid: Arc<Grid>,
        values: Vec<f64>,
        d1: Vec<f64>,
        d2: Vec<f64>,
        decay: DecayClass,
    ) -> Result<Self> {
        let n = grid.knots().len();
        if values.len() != n || d1.len() != n || d2.len() != n {
            return Err(Error::Domain(format!(
                "profile data lengths {}/{}/{} do not match {} knots",
                values.len(),
                d1.len(),
                d2.len(),
                n
            )));
        }
        check_decay(decay)?;
        if let Some(i) = (0..n).find(|&i| !(values[i].is_finite() && d1[i].is_finite() && d2[i].is_finite())) {
            return Err(Error::Domain(format!("non-finite profile data at knot {i}")));
        }
        if decay == DecayClass::CompactSupport {
            let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if values[n - 1].abs() > 1e-10 * scale {
                return Err(Error::Domain("compactly supported profile must vanish at its last knot".into()));
            }
        }
        let k = grid.knots();
        let vx = (0..n).map(|i| k[i] * d1[i]).collect();
        let vxx = (0..n).map(|i| k[i] * k[i] * d2[i] + k[i] * d1[i]).collect();
        Ok(Self { grid, values, vx, vxx, decay, interp: Interpolation::Hermite })
    }

    /// Profile whose knot data come from a jet-valued generator.
    pub fn from_fn<F: Fn(Jet) -> Jet>(grid: Arc<Grid>, decay: DecayClass, f: F) -> Result<Self> {
        Self::from_fn_sided(grid, decay, |s, _| f(s))
    }

    /// As [`from_fn`](Self::from_fn), for generators with break points: the
    /// first copy of a repeated knot is evaluated from the left.
    pub fn from_fn_sided<F: Fn(Jet, Side) -> Jet>(grid: Arc<Grid>, decay: DecayClass, f: F) -> Result<Self> {
        let k = grid.knots();
        let n = k.len();
        let (mut v, mut d1, mut d2) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for i in 0..n {
            let side = if i + 1 < n && k[i + 1] == k[i] { Side::Left } else { Side::Right };
            let j = f(Jet::var(k[i]), side);
            v.push(j.v);
            d1.push(j.d1);
            d2.push(j.d2);
        }
        Self::from_parts(grid, v, d1, d2, decay)
    }

    /// Step profile, `values[j]` on `(s_{j-1}, s_j]` and zero past the last knot.
    pub fn piecewise_constant(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        let n = grid.knots().len();
        if values.len() != n {
            return Err(Error::Domain(format!("{} step values for {} knots", values.len(), n)));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite step value".into()));
        }
        Ok(Self {
            grid,
            values,
            vx: vec![0.0; n],
            vxx: vec![0.0; n],
            decay: DecayClass::CompactSupport,
            interp: Interpolation::PiecewiseConstant,
        })
    }

    pub fn zero(grid: Arc<Grid>) -> Self {
        let n = grid.knots().len();
        Self::from_parts(grid, vec![0.0; n], vec![0.0; n], vec![0.0; n], DecayClass::CompactSupport)
            .expect("zero profile is valid")
    }

    /// `c · v`, same grid and decay.
    pub fn scaled(&self, c: f64) -> Self {
        let m = |x: &Vec<f64>| x.iter().map(|a| a * c).collect();
        Self { grid: self.grid.clone(), values: m(&self.values), vx: m(&self.vx), vxx: m(&self.vxx), ..*self }
    }

    #[inline]
    pub fn ctx(&self) -> &GeometryContext {
        self.grid.ctx()
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.ctx().n()
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn decay(&self) -> DecayClass {
        self.decay
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interp
    }

    /// `v'` at each knot.
    pub fn d1(&self) -> Vec<f64> {
        self.grid.knots().iter().zip(&self.vx).map(|(s, vx)| vx / s).collect()
    }

    /// `v''` at each knot.
    pub fn d2(&self) -> Vec<f64> {
        let k = self.grid.knots();
        (0..k.len()).map(|i| (self.vxx[i] - self.vx[i]) / (k[i] * k[i])).collect()
    }

    /// Value at a quadrature node of this profile's grid.
    pub(crate) fn node_value(&self, nd: &Node) -> f64 {
        self.cell_sample(self.grid.cells()[nd.cell], nd.tau).v
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    #[inline]
    fn cell_sample(&self, i: usize, tau: f64) -> Sample {
        let logs = self.grid.logs();
        let h = logs[i + 1] - logs[i];
        let s = (logs[i] + h * tau).exp();
        if self.interp == Interpolation::PiecewiseConstant {
            return Sample { s, v: self.values[i + 1], d1: 0.0, d2: 0.0 };
        }
        let b = quintic(tau);
        let c = [
            self.values[i],
            self.vx[i] * h,
            self.vxx[i] * h * h,
            self.vxx[i + 1] * h * h,
            self.vx[i + 1] * h,
            self.values[i + 1],
        ];
        let (mut p, mut pt, mut ptt) = (0.0, 0.0, 0.0);
        for j in 0..6 {
            p += c[j] * b[j][0];
            pt += c[j] * b[j][1];
            ptt += c[j] * b[j][2];
        }
        let vx = pt / h;
        let vxx = ptt / (h * h);
        Sample { s, v: p, d1: vx / s, d2: (vxx - vx) / (s * s) }
    }

    /// Interpolated value and derivatives; `s` must lie in the grid span.
    pub fn sample(&self, s: f64) -> Result<Sample> {
        let i = self.grid.locate(s).ok_or(Error::Extrapolation { s, lo: self.grid.first(), hi: self.grid.last() })?;
        let logs = self.grid.logs();
        let tau = ((s.ln() - logs[i]) / (logs[i + 1] - logs[i])).clamp(0.0, 1.0);
        let mut out = self.cell_sample(i, tau);
        out.s = s;
        Ok(out)
    }

    /// Value with the head and tail models applied outside the span.
    pub fn value(&self, s: f64) -> f64 {
        if s <= self.grid.first() {
            return self.values[0];
        }
        if s > self.grid.last() {
            return self.tail_sample(s).v;
        }
        self.sample(s).map(|x| x.v).unwrap_or(0.0)
    }

    fn tail_sample(&self, s: f64) -> Sample {
        let sn = self.grid.last();
        let vn = if self.interp == Interpolation::PiecewiseConstant { 0.0 } else { self.values[self.values.len() - 1] };
        match self.decay {
            DecayClass::CompactSupport => Sample { s, v: 0.0, d1: 0.0, d2: 0.0 },
            DecayClass::PolynomialDecay { rate: a } => {
                let v = vn * (s / sn).powf(-a);
                Sample { s, v, d1: -a * v / s, d2: a * (a + 1.0) * v / (s * s) }
            }
            DecayClass::ExponentialDecay { rate: b } => {
                let v = vn * (-b * (s - sn)).exp();
                Sample { s, v, d1: -b * v, d2: b * b * v }
            }
        }
    }

    pub fn eval(&self, s: f64) -> Result<Eval> {
        let x = self.sample(s)?;
        let point = self.ctx().point(s)?;
        Ok(Eval { s, v: x.v, d1: x.d1, d2: x.d2, point })
    }

    /// `-Δ_g u` at volume coordinate `s`.
    pub fn laplace_hyperbolic(&self, s: f64) -> Result<f64> {
        self.require_smooth("laplace_hyperbolic")?;
        Ok(self.eval(s)?.lap_hyp(self.ctx()))
    }

    /// `-Δ u_e` at `|y| = (s/σ_n)^{1/n}`.
    pub fn laplace_euclidean(&self, s: f64) -> Result<f64> {
        self.require_smooth("laplace_euclidean")?;
        let x = self.sample(s)?;
        let point = RadialPoint { s, rho: 0.0, sinh: 0.0, cosh: 1.0 };
        Ok(Eval { s, v: x.v, d1: x.d1, d2: x.d2, point }.lap_euc(self.ctx()))
    }

    fn require_smooth(&self, what: &str) -> Result<()> {
        if self.interp == Interpolation::PiecewiseConstant {
            Err(Error::NotSmooth(format!("{what} needs a twice differentiable profile")))
        } else {
            Ok(())
        }
    }

    /// `∫_0^∞ f ds` over the head, the grid cells and the tail model.
    pub fn integrate(&self, ig: &Integrand<'_>) -> Result<Integral> {
        if ig.needs_smooth {
            self.require_smooth(ig.label)?;
        }
        let ctx = *self.ctx();
        let cells = self.grid.cells();
        let n6 = self.grid.nodes6()?;
        let n3 = self.grid.nodes3()?;
        let mut total = 0.0;
        let mut err = 0.0;
        for c in 0..cells.len() {
            let i = cells[c];
            let mut q6 = 0.0;
            for nd in &n6[6 * c..6 * c + 6] {
                let x = self.cell_sample(i, nd.tau);
                q6 += nd.weight * (ig.f)(&Eval { s: nd.point.s, v: x.v, d1: x.d1, d2: x.d2, point: nd.point });
            }
            let mut q3 = 0.0;
            for nd in &n3[3 * c..3 * c + 3] {
                let x = self.cell_sample(i, nd.tau);
                q3 += nd.weight * (ig.f)(&Eval { s: nd.point.s, v: x.v, d1: x.d1, d2: x.d2, point: nd.point });
            }
            total += q6;
            err += (q6 - q3).abs();
        }
        if !total.is_finite() {
            return Err(Error::Integrability(format!("{}: non-finite integrand on the grid", ig.label)));
        }
        let (tv, te) = self.integrate_tail(ig, &ctx, total.abs())?;
        Ok(Integral { value: ig.head + total + tv, error: err + te })
    }

    fn integrate_tail(&self, ig: &Integrand<'_>, ctx: &GeometryContext, scale: f64) -> Result<(f64, f64)> {
        let sn = self.grid.last();
        let vn = self.values[self.values.len() - 1];
        if self.interp == Interpolation::PiecewiseConstant || vn == 0.0 {
            return Ok((0.0, 0.0));
        }
        let eval = |s: f64| -> f64 {
            if !s.is_finite() {
                return 0.0;
            }
            let x = self.tail_sample(s);
            match ctx.point(s) {
                Ok(point) => (ig.f)(&Eval { s, v: x.v, d1: x.d1, d2: x.d2, point }),
                Err(_) => f64::NAN,
            }
        };
        let abs_tol = 1e-3 * ctx.tol_quad * scale.max(1e-300);
        let r = match self.decay {
            DecayClass::CompactSupport => return Ok((0.0, 0.0)),
            DecayClass::PolynomialDecay { rate } => {
                let p = (ig.tail_power)(rate);
                if !(p > 1.0) {
                    return Err(Error::Integrability(format!(
                        "{}: polynomial tail of rate {rate} gives an integrand ~ s^-{p}",
                        ig.label
                    )));
                }
                quad::integrate_to_infinity(|z| { let s = sn * z.exp(); eval(s) * s }, 0.0, abs_tol, 1e-12)
            }
            DecayClass::ExponentialDecay { .. } => quad::integrate_to_infinity(eval, sn, abs_tol, 1e-12),
        };
        if !r.value.is_finite() {
            return Err(Error::Integrability(format!("{}: tail integral is not finite", ig.label)));
        }
        Ok((r.value, r.abs_err))
    }

    fn head_v(&self) -> (f64, f64) {
        (self.values[0], self.grid.first())
    }

    /// `∫_{H^n} (Δ_g u)² dV_g`.
    pub fn energy_hyp(&self) -> Result<Integral> {
        let ctx = *self.ctx();
        let f = move |e: &Eval| {
            let l = e.lap_hyp(&ctx);
            l * l
        };
        self.integrate(&Integrand { label: "energy_hyp", f: &f, head: 0.0, tail_power: &|a| 2.0 * a, needs_smooth: true })
    }

    /// `∫_{R^n} (Δ u_e)² dy`.
    pub fn energy_euc(&self) -> Result<Integral> {
        let ctx = *self.ctx();
        let n = ctx.nf();
        let f = move |e: &Eval| {
            let l = e.lap_euc(&ctx);
            l * l
        };
        self.integrate(&Integrand {
            label: "energy_euc",
            f: &f,
            head: 0.0,
            tail_power: &|a| 2.0 * a + 4.0 / n,
            needs_smooth: true,
        })
    }

    /// `∫_0^∞ |v|^q ds`.
    pub fn lp_integral(&self, q: f64) -> Result<Integral> {
        if !(q >= 1.0) {
            return Err(Error::Domain(format!("Lebesgue exponent must be >= 1, got {q}")));
        }
        let (v1, s1) = self.head_v();
        let f = move |e: &Eval| e.v.abs().powf(q);
        self.integrate(&Integrand {
            label: "lp_norm",
            f: &f,
            head: v1.abs().powf(q) * s1,
            tail_power: &|a| a * q,
            needs_smooth: false,
        })
    }

    /// `(∫_0^∞ |v|^q ds)^{1/q}`, equal to `‖u‖_{L^q(H^n)}` and `‖u_e‖_{L^q(R^n)}`.
    pub fn lp_norm(&self, q: f64) -> Result<Integral> {
        let i = self.lp_integral(q)?;
        let value = i.value.max(0.0).powf(1.0 / q);
        let error = if i.value > 0.0 { i.error * value / (q * i.value) } else { i.error.powf(1.0 / q) };
        Ok(Integral { value, error })
    }

    /// `∫_0^∞ v²`.
    pub fn l2_squared(&self) -> Result<Integral> {
        self.lp_integral(2.0)
    }

    /// `∫_0^∞ v(s)² (s/σ_n)^{-a} ds`.
    pub fn weighted_l2(&self, a: f64) -> Result<Integral> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::Domain(format!("weight exponent must be >= 0, got {a}")));
        }
        let sigma = self.ctx().sigma_n();
        let (v1, s1) = self.head_v();
        let head = if v1 == 0.0 || a == 0.0 {
            v1 * v1 * s1
        } else if a < 1.0 {
            v1 * v1 * sigma.powf(a) * s1.powf(1.0 - a) / (1.0 - a)
        } else {
            return Err(Error::Integrability(format!(
                "weight (s/σ)^-{a} is not integrable at 0 for a profile with v(0) = {v1}"
            )));
        };
        let f = move |e: &Eval| e.v * e.v * (e.s / sigma).powf(-a);
        self.integrate(&Integrand {
            label: "weighted_l2",
            f: &f,
            head,
            tail_power: &|r| 2.0 * r + a,
            needs_smooth: false,
        })
    }

    /// `∫_{H^n} (Δ_g u) u dV_g`.
    pub fn inner_product_laplace(&self) -> Result<Integral> {
        let ctx = *self.ctx();
        let f = move |e: &Eval| -e.lap_hyp(&ctx) * e.v;
        self.integrate(&Integrand {
            label: "inner_product_laplace",
            f: &f,
            head: 0.0,
            tail_power: &|a| 2.0 * a,
            needs_smooth: true,
        })
    }

    /// `∫_{H^n} |∇_g u|² dV_g = ∫ v'² (n σ_n sinh^{n-1} F_n)² ds`.
    pub fn dirichlet_hyp(&self) -> Result<Integral> {
        let ctx = *self.ctx();
        let f = move |e: &Eval| {
            let w = e.point.area(&ctx);
            e.d1 * e.d1 * w * w
        };
        self.integrate(&Integrand { label: "dirichlet_hyp", f: &f, head: 0.0, tail_power: &|a| 2.0 * a, needs_smooth: true })
    }
}

#[cfg(test)]
mod tests;
