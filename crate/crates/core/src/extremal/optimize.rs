//! Nelder–Mead search over a smooth multiplicative perturbation of a profile.
//!
//! The candidate is `v(s) = v₀(s) · exp(g(ln s))` with `g` a uniform cubic
//! B-spline on the span of the grid. Both ratios are homogeneous of degree
//! zero, so no normalization constraint enters the search.

use std::cell::Cell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::families::smooth_step;
use super::scan::{rellich_ratio, sobolev_ratio};
use crate::deficit::SharpConstants;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::profile::RadialProfile;
use crate::report::{fixed, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OptKind {
    Sobolev,
    Rellich,
}

impl OptKind {
    pub fn ratio(self, p: &RadialProfile) -> Result<f64> {
        match self {
            OptKind::Sobolev => sobolev_ratio(p),
            OptKind::Rellich => rellich_ratio(p),
        }
    }

    pub fn sharp(self, n: u32) -> Result<f64> {
        let c = SharpConstants::new(n)?;
        match self {
            OptKind::Sobolev => c.sobolev2(),
            OptKind::Rellich => Ok(c.rellich()),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OptimizeConfig {
    /// Number of spline control values, 8 to 32.
    pub controls: usize,
    /// Initial simplex edge in the exponent.
    pub step: f64,
    pub seed: u64,
    /// Stop when the simplex values agree to this relative spread.
    pub ftol: f64,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self { controls: 12, step: 0.25, seed: 0, ftol: 1e-10 }
    }
}

#[derive(Debug, Clone)]
pub struct OptimizeResult {
    pub kind: OptKind,
    pub profile: RadialProfile,
    pub ratio: f64,
    pub initial_ratio: f64,
    pub sharp: f64,
    pub evaluations: usize,
    pub converged: bool,
    /// Best ratio after each iteration.
    pub history: Vec<f64>,
    pub controls: Vec<f64>,
    pub seed: u64,
    pub status: Status,
    pub note: Option<String>,
}

impl OptimizeResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("optimizer results always serialize")
    }
}

impl Serialize for OptimizeResult {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("OptimizeResult", 11)?;
        st.serialize_field("kind", &self.kind)?;
        st.serialize_field("n", &self.profile.n())?;
        st.serialize_field("ratio", &fixed(self.ratio))?;
        st.serialize_field("initial_ratio", &fixed(self.initial_ratio))?;
        st.serialize_field("sharp", &fixed(self.sharp))?;
        st.serialize_field("evaluations", &self.evaluations)?;
        st.serialize_field("converged", &self.converged)?;
        st.serialize_field("history", &self.history.iter().map(|x| fixed(*x)).collect::<Vec<_>>())?;
        st.serialize_field("seed", &self.seed)?;
        st.serialize_field("status", &self.status)?;
        st.serialize_field("note", &self.note)?;
        st.end()
    }
}

/// Uniform cubic B-spline and its first two derivatives at `t`.
fn bspline(t: f64) -> [f64; 3] {
    let a = t.abs();
    let sg = t.signum();
    if a >= 2.0 {
        [0.0; 3]
    } else if a >= 1.0 {
        let u = 2.0 - a;
        [u * u * u / 6.0, -sg * u * u / 2.0, u]
    } else {
        [2.0 / 3.0 - a * a + a * a * a / 2.0, sg * (-2.0 * a + 1.5 * a * a), -2.0 + 3.0 * a]
    }
}

/// Applies `exp(g)` to the knot data of a base profile.
struct Multiplier<'a> {
    base: &'a RadialProfile,
    d1: Vec<f64>,
    d2: Vec<f64>,
    x0: f64,
    x1: f64,
    h: f64,
    /// Width of the end tapers in `ln s`.
    taper: f64,
}

impl<'a> Multiplier<'a> {
    fn new(base: &'a RadialProfile, controls: usize) -> Self {
        let k = base.grid().knots();
        let x0 = k[0].ln();
        let x1 = k[k.len() - 1].ln();
        let h = (x1 - x0) / (controls - 3) as f64;
        let taper = (x1 - x0).min(8.0 * std::f64::consts::LN_10) / 8.0;
        Self { base, d1: base.d1(), d2: base.d2(), x0, x1, h, taper }
    }

    /// 0 within one taper width of either end, 1 from two widths inward.
    fn window(&self, x: f64) -> Jet {
        let x = Jet::var(x);
        let d = self.taper;
        let left = 1.0 - smooth_step((x - self.x0 - d) / d);
        let right = smooth_step((x - self.x1 + 2.0 * d) / d);
        left * right
    }

    /// `g, g_x, g_xx` at `x = ln s`.
    fn g(&self, c: &[f64], x: f64) -> [f64; 3] {
        let t = (x - self.x0) / self.h;
        let lo = (t.floor() as isize - 1).max(-1);
        let mut out = [0.0; 3];
        for j in lo..=lo + 4 {
            let idx = j + 1;
            if idx < 0 || idx as usize >= c.len() {
                continue;
            }
            let b = bspline(t - j as f64);
            let cj = c[idx as usize];
            out[0] += cj * b[0];
            out[1] += cj * b[1] / self.h;
            out[2] += cj * b[2] / (self.h * self.h);
        }
        out
    }

    fn apply(&self, c: &[f64]) -> Result<RadialProfile> {
        let k = self.base.grid().knots();
        let v0 = self.base.values();
        let m = k.len();
        let (mut v, mut d1, mut d2) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        for i in 0..m {
            let s = k[i];
            // the ends keep the head and tail models of the base profile valid
            let [b, bx, bxx] = self.g(c, s.ln());
            let t = self.window(s.ln());
            let (g, gx, gxx) = (t.v * b, t.d1 * b + t.v * bx, t.d2 * b + 2.0 * t.d1 * bx + t.v * bxx);
            let w = g.exp();
            let w1 = w * gx / s;
            let w2 = w * (gxx + gx * gx - gx) / (s * s);
            v[i] = v0[i] * w;
            d1[i] = self.d1[i] * w + v0[i] * w1;
            d2[i] = self.d2[i] * w + 2.0 * self.d1[i] * w1 + v0[i] * w2;
        }
        RadialProfile::from_parts(self.base.grid().clone(), v, d1, d2, self.base.decay())
    }
}

/// Derivative-free descent from `init`. Runs out of budget with the best point
/// so far and `converged = false`.
pub fn optimize_ratio(kind: OptKind, init: &RadialProfile, budget: usize, cfg: &OptimizeConfig) -> Result<OptimizeResult> {
    if !(8..=32).contains(&cfg.controls) {
        return Err(Error::Domain(format!("control count must lie in 8..=32, got {}", cfg.controls)));
    }
    if !(cfg.step > 0.0 && cfg.step.is_finite()) {
        return Err(Error::Domain(format!("simplex step must be positive, got {}", cfg.step)));
    }
    let dim = cfg.controls;
    if budget < dim + 1 {
        return Err(Error::Domain(format!("budget {budget} cannot fill the initial simplex of {} points", dim + 1)));
    }
    let sharp = kind.sharp(init.n())?;
    let initial_ratio = kind.ratio(init)?;
    let mul = Multiplier::new(init, dim);
    // the initial profile counts as the first evaluation
    let evals = Cell::new(1usize);
    let f = |c: &[f64]| -> f64 {
        evals.set(evals.get() + 1);
        match mul.apply(c).and_then(|p| kind.ratio(&p)) {
            Ok(r) if r.is_finite() => r,
            _ => f64::INFINITY,
        }
    };

    // seeded signs on the simplex edges
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pts: Vec<Vec<f64>> = vec![vec![0.0; dim]];
    for i in 0..dim {
        let mut p = vec![0.0; dim];
        p[i] = if rng.random_bool(0.5) { cfg.step } else { -cfg.step };
        pts.push(p);
    }
    let mut vals: Vec<f64> = Vec::with_capacity(dim + 1);
    vals.push(initial_ratio);
    for p in &pts[1..] {
        vals.push(f(p));
    }
    let mut history = Vec::new();
    let mut converged = false;
    let (alpha, gamma, rho, shrink) = (1.0, 2.0, 0.5, 0.5);

    loop {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        history.push(vals[0]);
        let spread = (vals[dim] - vals[0]).abs();
        if spread <= cfg.ftol * vals[0].abs() {
            converged = true;
            break;
        }
        if evals.get() + 2 > budget {
            break;
        }
        let mut centroid = vec![0.0; dim];
        for p in &pts[..dim] {
            for (c, x) in centroid.iter_mut().zip(p) {
                *c += x / dim as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&pts[dim]).map(|(c, w)| c + t * (w - c)).collect() };
        let xr = along(-alpha);
        let fr = f(&xr);
        if fr < vals[0] {
            let xe = along(-gamma);
            let fe = f(&xe);
            if fe < fr {
                pts[dim] = xe;
                vals[dim] = fe;
            } else {
                pts[dim] = xr;
                vals[dim] = fr;
            }
            continue;
        }
        if fr < vals[dim - 1] {
            pts[dim] = xr;
            vals[dim] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[dim] {
            let x = along(-rho);
            let v = f(&x);
            (x, v)
        } else {
            let x = along(rho);
            let v = f(&x);
            (x, v)
        };
        if fc < vals[dim].min(fr) {
            pts[dim] = xc;
            vals[dim] = fc;
            continue;
        }
        if evals.get() + dim > budget {
            break;
        }
        let best = pts[0].clone();
        for i in 1..=dim {
            pts[i] = best.iter().zip(&pts[i]).map(|(b, x)| b + shrink * (x - b)).collect();
            vals[i] = f(&pts[i]);
        }
    }

    let (bi, _) = vals.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("simplex is not empty");
    let controls = pts[bi].clone();
    let ratio = vals[bi];
    let profile = if bi == 0 && controls.iter().all(|&c| c == 0.0) { init.clone() } else { mul.apply(&controls)? };
    let mut r = OptimizeResult {
        kind,
        profile,
        ratio,
        initial_ratio,
        sharp,
        evaluations: evals.get(),
        converged,
        history,
        controls,
        seed: cfg.seed,
        status: Status::Pass,
        note: None,
    };
    if !converged {
        r.note = Some(format!("budget of {budget} evaluations exhausted"));
    }
    if !(ratio >= sharp * (1.0 - crate::report::DEFAULT_TOL)) {
        r.status = Status::Fail;
        r.note = Some(format!("ratio {ratio} below the sharp constant {sharp}"));
    }
    Ok(r)
}

/// Independent seeded runs in parallel; the best one is returned.
pub fn optimize_seeds(
    kind: OptKind,
    init: &RadialProfile,
    budget: usize,
    cfg: &OptimizeConfig,
    seeds: &[u64],
) -> Result<OptimizeResult> {
    let runs: Vec<OptimizeResult> = seeds
        .par_iter()
        .map(|&seed| optimize_ratio(kind, init, budget, &OptimizeConfig { seed, ..*cfg }))
        .collect::<Result<_>>()?;
    runs.into_iter()
        .min_by(|a, b| a.ratio.total_cmp(&b.ratio).then(a.seed.cmp(&b.seed)))
        .ok_or_else(|| Error::Domain("no seeds given".into()))
}
