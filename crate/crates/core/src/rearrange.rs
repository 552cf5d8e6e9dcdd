//! Distribution functions and symmetrization.
//!
//! A function is represented by its value distribution: atoms `(u_i, w_i)`
//! with `w_i` the measure on which `|u| = u_i`. Sorting by value gives the
//! decreasing rearrangement exactly, `u**` is then piecewise `a + c/t` and
//! `u^♯` is the step profile `u*` read in the volume coordinate.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hypgeo::GeometryContext;
use crate::profile::{talenti_profile, DecayClass, Grid, RadialProfile, SourceProfile};
use crate::quad;
use crate::report::DeficitReport;

/// Where the atoms sit, when known.
#[derive(Debug, Clone, PartialEq)]
enum Layout {
    Unplaced,
    /// Atom `i` is a quadrature node at volume coordinate `s_i`.
    Nodes(Vec<f64>),
    /// Atom `i` fills `[Σ_{j<i} w_j, Σ_{j≤i} w_j)`.
    Consecutive,
}

/// Nonnegative function given by its value distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    values: Vec<f64>,
    weights: Vec<f64>,
    layout: Layout,
}

impl SampledFunction {
    /// Atoms `(|values[i]|, weights[i])`; a weight may be `+∞`.
    pub fn from_atoms(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        Self::build(values, weights, Layout::Unplaced)
    }

    /// A step function on `[0, Σw)` taking `values[i]` on consecutive cells of length `weights[i]`.
    pub fn from_steps(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| w.is_infinite()) {
            return Err(Error::Domain("consecutive steps need finite lengths".into()));
        }
        Self::build(values, weights, Layout::Consecutive)
    }

    fn build(values: Vec<f64>, weights: Vec<f64>, layout: Layout) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(Error::Domain(format!("{} values for {} weights", values.len(), weights.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("sample values must be finite".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::Domain("sample weights must be positive".into()));
        }
        let values = values.into_iter().map(f64::abs).collect();
        Ok(Self { values, weights, layout })
    }

    /// `|v|` at the Gauss nodes of the profile grid, one atom for the constant
    /// head `(0, s_1)` and Gauss panels over the tail model.
    pub fn from_profile(p: &RadialProfile) -> Result<Self> {
        let grid = p.grid();
        let nodes = grid.nodes6()?;
        let mut values = Vec::with_capacity(nodes.len() + 1);
        let mut weights = Vec::with_capacity(nodes.len() + 1);
        let mut pos = Vec::with_capacity(nodes.len() + 1);
        let s1 = grid.first();
        values.push(p.values()[0].abs());
        weights.push(s1);
        pos.push(0.5 * s1);
        for nd in nodes {
            values.push(p.node_value(nd).abs());
            weights.push(nd.weight);
            pos.push(nd.point.s);
        }
        let sn = grid.last();
        let tail_panels: Vec<(f64, f64)> = match p.decay() {
            DecayClass::CompactSupport => Vec::new(),
            // panels of width 1/2 in ln s out to s_N e^{24}
            DecayClass::PolynomialDecay { .. } => {
                (0..48).map(|k| (sn * (0.5 * k as f64).exp(), sn * (0.5 * (k + 1) as f64).exp())).collect()
            }
            DecayClass::ExponentialDecay { rate } => {
                let h = 0.5 / rate;
                (0..80).map(|k| (sn + h * k as f64, sn + h * (k + 1) as f64)).collect()
            }
        };
        for (a, b) in tail_panels {
            for &(x, w) in quad::GL6.iter() {
                let s = 0.5 * (a + b) + 0.5 * (b - a) * x;
                let v = p.value(s).abs();
                values.push(v);
                weights.push(0.5 * (b - a) * w);
                pos.push(s);
            }
        }
        Self::build(values, weights, Layout::Nodes(pos))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `μ(λ) = Σ {w_i : u_i > λ}`.
    pub fn distribution(&self, lam: f64) -> f64 {
        self.values.iter().zip(&self.weights).filter(|(v, _)| **v > lam).map(|(_, w)| w).sum()
    }

    /// `Σ u_i^q w_i`.
    pub fn lp_integral(&self, q: f64) -> f64 {
        self.values.iter().zip(&self.weights).map(|(v, w)| if *v == 0.0 { 0.0 } else { v.powf(q) * w }).sum()
    }
}

/// The decreasing rearrangement of a [`SampledFunction`].
///
/// Distinct positive levels `u_1 > … > u_K` with cumulative measures
/// `m_1 < … < m_K`: `u*(t) = u_k` on `[m_{k-1}, m_k)` and `0` for `t ≥ m_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rearrangement {
    levels: Vec<f64>,
    ends: Vec<f64>,
    /// `∫_0^{m_k} u*`.
    partials: Vec<f64>,
}

pub fn decreasing_rearrangement(f: &SampledFunction) -> Result<Rearrangement> {
    let mut idx: Vec<usize> = (0..f.values.len()).filter(|&i| f.values[i] > 0.0).collect();
    if let Some(&i) = idx.iter().find(|&&i| f.weights[i].is_infinite()) {
        return Err(Error::NotVanishing { level: f.values[i] });
    }
    idx.sort_by(|&a, &b| f.values[b].total_cmp(&f.values[a]));
    let mut levels: Vec<f64> = Vec::new();
    let mut ends: Vec<f64> = Vec::new();
    let mut partials: Vec<f64> = Vec::new();
    let (mut m, mut acc) = (0.0, 0.0);
    for i in idx {
        let (u, w) = (f.values[i], f.weights[i]);
        m += w;
        acc += u * w;
        if levels.last() == Some(&u) {
            *ends.last_mut().expect("nonempty") = m;
            *partials.last_mut().expect("nonempty") = acc;
        } else {
            levels.push(u);
            ends.push(m);
            partials.push(acc);
        }
    }
    Ok(Rearrangement { levels, ends, partials })
}

impl Rearrangement {
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Cumulative measures `m_k`.
    pub fn ends(&self) -> &[f64] {
        &self.ends
    }

    /// Measure of the support.
    pub fn support(&self) -> f64 {
        self.ends.last().copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.levels.is_empty()
    }

    fn index(&self, t: f64) -> usize {
        self.ends.partition_point(|&e| e <= t)
    }

    /// `u*(t)`, right-continuous.
    pub fn ustar(&self, t: f64) -> f64 {
        self.levels.get(self.index(t)).copied().unwrap_or(0.0)
    }

    /// `∫_0^t u*`.
    pub fn integral_to(&self, t: f64) -> f64 {
        let k = self.index(t);
        let (m0, p0) = if k == 0 { (0.0, 0.0) } else { (self.ends[k - 1], self.partials[k - 1]) };
        p0 + self.levels.get(k).copied().unwrap_or(0.0) * (t - m0)
    }

    /// `u**(t) = (1/t) ∫_0^t u*`, with `u**(0) = u*(0⁺)`.
    pub fn ustarstar(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.levels.first().copied().unwrap_or(0.0);
        }
        self.integral_to(t) / t
    }

    /// `∫_0^∞ (u*)^q`.
    pub fn lp_integral(&self, q: f64) -> f64 {
        let mut prev = 0.0;
        let mut acc = 0.0;
        for (u, m) in self.levels.iter().zip(&self.ends) {
            acc += u.powf(q) * (m - prev);
            prev = *m;
        }
        acc
    }

    /// `∫_0^∞ (u**)^p` for `p > 1`, with an error estimate.
    pub fn maximal_lp_integral(&self, p: f64) -> Result<(f64, f64)> {
        if !(p > 1.0) {
            return Err(Error::Domain(format!("maximal function is in L^p only for p > 1, got {p}")));
        }
        if self.is_zero() {
            return Ok((0.0, 0.0));
        }
        let mut acc = self.levels[0].powf(p) * self.ends[0];
        let mut err = 0.0;
        for k in 1..self.levels.len() {
            let (a, b) = (self.ends[k - 1], self.ends[k]);
            let u = self.levels[k];
            let c = self.partials[k - 1] - u * a;
            // u** = u + c/t on [a, b), integrated in ln t
            let r = quad::integrate(
                |x: f64| {
                    let t = x.exp();
                    (u + c / t).powf(p) * t
                },
                a.ln(),
                b.ln(),
                0.0,
                1e-13,
            );
            acc += r.value;
            err += r.abs_err;
        }
        let (m, total) = (self.support(), self.partials[self.partials.len() - 1]);
        acc += total.powf(p) * m.powf(1.0 - p) / (p - 1.0);
        Ok((acc, err))
    }

    /// `u^♯` as a step profile in the volume coordinate.
    pub fn sharp_profile(&self, ctx: GeometryContext) -> Result<RadialProfile> {
        if self.is_zero() {
            let g = Arc::new(Grid::from_knots(ctx, vec![0.5, 1.0])?);
            return RadialProfile::piecewise_constant(g, vec![0.0, 0.0]);
        }
        let (mut knots, mut vals) = (self.ends.clone(), self.levels.clone());
        if knots.len() == 1 {
            knots.insert(0, 0.5 * knots[0]);
            vals.insert(0, vals[0]);
        }
        let g = Arc::new(Grid::from_knots(ctx, knots)?);
        RadialProfile::piecewise_constant(g, vals)
    }
}

/// Hardy's inequality for the maximal function:
/// `∫(u**)^p ≤ (p/(p-1))^p ∫(u*)^p`, reported as `lhs = (p/(p-1))^p ∫(u*)^p`.
pub fn hardy_check(r: &Rearrangement, p: f64) -> Result<DeficitReport> {
    let (rhs, qerr) = r.maximal_lp_integral(p)?;
    let lhs = (p / (p - 1.0)).powf(p) * r.lp_integral(p);
    Ok(DeficitReport::new("hardy_maximal", lhs, rhs, qerr).with_param("p", p))
}

/// `∫ u² W` against `∫ (u^♯)² W` for the decreasing weight `W(s) = (s/σ_n)^{-4/n}`.
/// Needs a placed sample.
pub fn hardy_littlewood_check(f: &SampledFunction, ctx: &GeometryContext) -> Result<DeficitReport> {
    let a = 4.0 / ctx.nf();
    let sigma = ctx.sigma_n();
    // ∫_x^y (s/σ)^{-a} ds
    let cell = |x: f64, y: f64| -> f64 {
        if a == 1.0 {
            if x == 0.0 {
                f64::INFINITY
            } else {
                sigma * (y / x).ln()
            }
        } else {
            sigma.powf(a) * (y.powf(1.0 - a) - x.powf(1.0 - a)) / (1.0 - a)
        }
    };
    let original: f64 = match &f.layout {
        Layout::Unplaced => return Err(Error::Domain("weighted comparison needs placed samples".into())),
        Layout::Nodes(pos) => {
            f.values.iter().zip(&f.weights).zip(pos).map(|((v, w), s)| v * v * w * (s / sigma).powf(-a)).sum()
        }
        Layout::Consecutive => {
            let mut lo = 0.0;
            let mut acc = 0.0;
            for (v, w) in f.values.iter().zip(&f.weights) {
                if *v > 0.0 {
                    acc += v * v * cell(lo, lo + w);
                }
                lo += w;
            }
            acc
        }
    };
    let r = decreasing_rearrangement(f)?;
    let mut lo = 0.0;
    let mut sharp = 0.0;
    for (u, m) in r.levels.iter().zip(&r.ends) {
        sharp += u * u * cell(lo, *m);
        lo = *m;
    }
    Ok(DeficitReport::new("hardy_littlewood", sharp, original, 0.0).with_param("n", ctx.nf()))
}

/// Comparison `u* ≤ v` where `v` solves `-Δ_g v = f^♯` for `f = -Δ_g u`.
///
/// The report carries the tightest knot: `lhs = v(t)`, `rhs = u*(t)`,
/// classified with tolerance `tol` against `max |u|`. The residual of the
/// equation `-W² v' = ∫_0^s f^♯`, from centered differences of `v`, is stored
/// as the parameter `equation_residual` (relative to `∫ f^♯`).
pub fn talenti_compare(u: &RadialProfile, tol: f64) -> Result<DeficitReport> {
    let ctx = *u.ctx();
    let grid = u.grid();
    let nodes = grid.nodes6()?;
    let mut fv = Vec::with_capacity(nodes.len());
    let mut fw = Vec::with_capacity(nodes.len());
    for nd in nodes {
        fv.push(u.laplace_hyperbolic(nd.point.s)?);
        fw.push(nd.weight);
    }
    let f = SampledFunction::from_atoms(fv, fw)?;
    let fr = decreasing_rearrangement(&f)?;
    let l2 = f.lp_integral(2.0);
    if !l2.is_finite() {
        return Err(Error::Integrability("-Δu is not square integrable on the grid".into()));
    }
    let ur = decreasing_rearrangement(&SampledFunction::from_profile(u)?)?;
    let scale = u.max_abs();
    let knots: Vec<f64> = grid.knots().to_vec();
    if fr.is_zero() {
        let worst = knots.iter().map(|&t| ur.ustar(t)).fold(0.0, f64::max);
        return Ok(DeficitReport::new("talenti", 0.0, worst, 0.0)
            .with_tol(tol, scale)
            .with_param("n", ctx.nf())
            .with_param("equation_residual", 0.0));
    }
    let src = SourceProfile::from_steps(ctx, fr.ends.clone(), fr.levels.clone())?;
    let hi = grid.last().max(fr.support() * (1.0 + 1e-9)) * 1.0001;
    let count = knots.len().max(200);
    let vgrid = Arc::new(Grid::log_spaced(ctx, grid.first(), hi, count)?);
    let v = talenti_profile(&src, vgrid.clone())?;

    let mut worst = (f64::INFINITY, 0.0, 0.0, 0.0);
    for &t in &knots {
        let (vt, ut) = (v.value(t), ur.ustar(t));
        if vt - ut < worst.0 {
            worst = (vt - ut, vt, ut, t);
        }
    }

    let vk = v.values();
    let sk = vgrid.knots();
    let total = fr.partials[fr.partials.len() - 1];
    let mut residual: f64 = 0.0;
    for i in 1..sk.len() - 1 {
        let w = ctx.point(sk[i])?.area(&ctx);
        let slope = (vk[i + 1] - vk[i - 1]) / (sk[i + 1] - sk[i - 1]);
        let cum = fr.integral_to(sk[i]);
        residual = residual.max((-w * w * slope - cum).abs() / total);
    }
    Ok(DeficitReport::new("talenti", worst.1, worst.2, 0.0)
        .with_tol(tol, scale)
        .with_param("n", ctx.nf())
        .with_param("t", worst.3)
        .with_param("equation_residual", residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Jet;
    use proptest::prelude::*;

    fn atoms(v: &[f64], w: &[f64]) -> SampledFunction {
        SampledFunction::from_atoms(v.to_vec(), w.to_vec()).unwrap()
    }

    #[test]
    fn distribution_counts_strictly_above() {
        let f = atoms(&[2.0], &[3.0]);
        assert_eq!(f.distribution(1.0), 3.0);
        assert_eq!(f.distribution(2.0), 0.0);
        let f = atoms(&[1.0, 2.0], &[1.0, 1.0]);
        assert_eq!(f.distribution(1.0), 1.0);
        assert_eq!(f.distribution(0.5), 2.0);
    }

    #[test]
    fn two_atoms() {
        let r = decreasing_rearrangement(&atoms(&[1.0, 3.0], &[2.0, 1.0])).unwrap();
        assert_eq!(r.ustar(0.0), 3.0);
        assert_eq!(r.ustar(0.999), 3.0);
        assert_eq!(r.ustar(1.0), 1.0);
        assert_eq!(r.ustar(2.999), 1.0);
        assert_eq!(r.ustar(3.0), 0.0);
        // u** = 3 on [0,1], (3 + (t-1))/t on [1,3], 5/t after
        assert_eq!(r.ustarstar(0.5), 3.0);
        assert!((r.ustarstar(2.0) - 2.0).abs() < 1e-15);
        assert!((r.ustarstar(10.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ties_merge_and_zeros_drop() {
        let r = decreasing_rearrangement(&atoms(&[2.0, 0.0, 2.0, 1.0], &[1.0, 5.0, 1.0, 1.0])).unwrap();
        assert_eq!(r.levels(), &[2.0, 1.0]);
        assert_eq!(r.ends(), &[2.0, 3.0]);
    }

    #[test]
    fn infinite_measure_is_rejected() {
        let f = atoms(&[1.0, 0.5], &[1.0, f64::INFINITY]);
        assert_eq!(decreasing_rearrangement(&f), Err(Error::NotVanishing { level: 0.5 }));
        assert!(decreasing_rearrangement(&atoms(&[1.0, 0.0], &[1.0, f64::INFINITY])).is_ok());
    }

    #[test]
    fn constant_average() {
        let r = decreasing_rearrangement(&atoms(&[4.0], &[2.5])).unwrap();
        for t in [0.1, 1.0, 2.4] {
            assert_eq!(r.ustarstar(t), 4.0);
        }
    }

    #[test]
    fn inverse_square_root_average_doubles() {
        // u* = t^{-1/2} sampled on fine cells; ∫_0^t s^{-1/2} = 2√t
        let edges: Vec<f64> = (0..=4000).map(|k| 1e-8 * 1.005f64.powi(k)).collect();
        let mut v = vec![2.0 / edges[0].sqrt()];
        let mut w = vec![edges[0]];
        for e in edges.windows(2) {
            // exact cell average keeps ∫u* exact
            v.push(2.0 * (e[1].sqrt() - e[0].sqrt()) / (e[1] - e[0]));
            w.push(e[1] - e[0]);
        }
        let r = decreasing_rearrangement(&atoms(&v, &w)).unwrap();
        for t in [1e-3, 1e-2, 0.1] {
            let ratio = r.ustarstar(t) / r.ustar(t);
            assert!((ratio - 2.0).abs() < 2e-2, "{t}: {ratio}");
        }
    }

    #[test]
    fn hardy_constant_at_two_is_four() {
        let r = decreasing_rearrangement(&atoms(&[1.0], &[1.0])).unwrap();
        let rep = hardy_check(&r, 2.0).unwrap();
        assert_eq!(rep.lhs, 4.0);
        // ∫_0^1 1 + ∫_1^∞ t^{-2} = 2
        assert!((rep.rhs - 2.0).abs() < 1e-12);
        let z = decreasing_rearrangement(&atoms(&[0.0], &[1.0])).unwrap();
        assert_eq!(hardy_check(&z, 2.0).unwrap().gap, 0.0);
        assert!(hardy_check(&r, 1.0).is_err());
    }

    #[test]
    fn decreasing_profile_is_fixed() {
        let ctx = GeometryContext::new(5).unwrap();
        let g = Arc::new(Grid::log_spaced(ctx, 1e-6, 10.0, 1500).unwrap());
        let p = RadialProfile::from_fn(g, DecayClass::CompactSupport, |s| {
            if s.v >= 10.0 {
                Jet::constant(0.0)
            } else {
                let d = Jet::constant(10.0) - s;
                d * d * d * Jet::constant(1e-3)
            }
        })
        .unwrap();
        let r = decreasing_rearrangement(&SampledFunction::from_profile(&p).unwrap()).unwrap();
        for t in [1e-4, 0.01, 1.0, 5.0, 9.0] {
            // one cell of slope 0.3 and width ≤ 0.03
            assert!((r.ustar(t) - p.value(t)).abs() < 1e-2, "{t}");
        }
        let sharp = r.sharp_profile(ctx).unwrap();
        for q in [1.0, 2.0, 4.0] {
            let a = sharp.lp_integral(q).unwrap().value;
            let b = p.lp_integral(q).unwrap().value;
            assert!((a / b - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn equimeasurable_with_oscillating_profile() {
        let ctx = GeometryContext::new(4).unwrap();
        let g = Arc::new(Grid::log_spaced(ctx, 1e-6, 30.0, 2500).unwrap());
        let p = RadialProfile::from_fn(g, DecayClass::ExponentialDecay { rate: 0.5 }, |s| {
            (s * 2.0).sin() * (-s * 0.5).exp()
        })
        .unwrap();
        let f = SampledFunction::from_profile(&p).unwrap();
        let r = decreasing_rearrangement(&f).unwrap();
        let sharp = r.sharp_profile(ctx).unwrap();
        for q in [1.0, 2.0, 4.0] {
            let a = sharp.lp_integral(q).unwrap().value;
            let b = p.lp_integral(q).unwrap().value;
            assert!((a / b - 1.0).abs() < 1e-6, "{q}: {a} {b}");
        }
    }

    #[test]
    fn talenti_majorant_on_a_bump() {
        let ctx = GeometryContext::new(4).unwrap();
        let g = Arc::new(Grid::log_spaced(ctx, 1e-6, 3.0, 1200).unwrap());
        let p = RadialProfile::from_fn(g, DecayClass::CompactSupport, |s| {
            if s.v >= 3.0 {
                return Jet::constant(0.0);
            }
            let q = s * (1.0 / 3.0);
            (Jet::constant(1.0) - q * q).powi(3)
        })
        .unwrap();
        let rep = talenti_compare(&p, 1e-6).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.params["equation_residual"] < 1e-4, "{rep:?}");
        let z = RadialProfile::zero(p.grid().clone());
        assert_eq!(talenti_compare(&z, 1e-6).unwrap().gap, 0.0);
    }

    proptest! {
        #[test]
        fn ustarstar_dominates_ustar(v in prop::collection::vec(0.0f64..10.0, 1..40),
                                     w in prop::collection::vec(0.01f64..3.0, 40),
                                     t in 0.0f64..100.0) {
            let f = atoms(&v, &w[..v.len()]);
            let r = decreasing_rearrangement(&f).unwrap();
            prop_assert!(r.ustarstar(t) >= r.ustar(t) * (1.0 - 1e-12));
            prop_assert!(r.ustar(t) >= r.ustar(t + 0.5));
            prop_assert!(r.ustarstar(t) >= r.ustarstar(t + 0.5) * (1.0 - 1e-12));
            let m = f.distribution(1.0);
            let ms = r.ends().iter().zip(r.levels()).filter(|(_, u)| **u > 1.0).map(|(m, _)| *m).fold(0.0, f64::max);
            prop_assert!((m - ms).abs() <= 1e-12 * (1.0 + m));
            for q in [1.0, 2.0, 4.0] {
                let (a, b) = (f.lp_integral(q), r.lp_integral(q));
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
            }
        }

        #[test]
        fn hardy_littlewood_ordering(v in prop::collection::vec(0.0f64..5.0, 1..30),
                                     w in prop::collection::vec(0.05f64..2.0, 30)) {
            let ctx = GeometryContext::new(6).unwrap();
            let f = SampledFunction::from_steps(v.clone(), w[..v.len()].to_vec()).unwrap();
            let rep = hardy_littlewood_check(&f, &ctx).unwrap();
            prop_assert!(rep.passed(), "{:?}", rep);
        }

        #[test]
        fn hardy_on_random_steps(v in prop::collection::vec(0.0f64..5.0, 1..30),
                                 w in prop::collection::vec(0.05f64..2.0, 30),
                                 p in prop::sample::select(vec![1.5, 2.0, 3.0])) {
            let r = decreasing_rearrangement(&atoms(&v, &w[..v.len()])).unwrap();
            let rep = hardy_check(&r, p).unwrap();
            prop_assert!(rep.gap >= -1e-8 * rep.lhs.abs().max(1.0), "{:?}", rep);
        }
    }
}
