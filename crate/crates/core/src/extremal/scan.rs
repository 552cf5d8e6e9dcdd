//! Concentration scans: ratios of a deficit to its sharp right-hand side
//! along a one-parameter family.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::families::{adams_profile_unscaled, make_truncated_bubble, poincare_spreading, rellich_powerlaw};
use crate::deficit::{adams_exact_ratio, sobolev_sharp_constant, SharpConstants, ADAMS_THRESHOLD};
use crate::error::{Error, Result};
use crate::profile::RadialProfile;
use crate::report::{fixed, fixed_map, Status};

/// Geodesic radii between which the scanned bubbles are cut off.
pub const BUBBLE_CUTOFF: (f64, f64) = (0.3, 1.5);

/// Outer Euclidean radius of the Rellich windows.
pub const RELLICH_OUTER_RADIUS: f64 = 0.01;

/// Ratios along a family, in the order of `grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub family: String,
    pub n: u32,
    pub param: String,
    pub grid: Vec<f64>,
    pub ratios: Vec<f64>,
    /// The sharp constant the ratios approach.
    pub target: f64,
    pub monotone_decreasing: bool,
    pub monotone_increasing: bool,
    /// Aitken extrapolation of the last three ratios; needs four points.
    pub extrapolated: Option<f64>,
    pub extra: BTreeMap<String, f64>,
    pub status: Status,
    pub note: Option<String>,
}

impl ScanResult {
    pub fn new(family: &str, n: u32, param: &str, grid: Vec<f64>, ratios: Vec<f64>, target: f64) -> Result<Self> {
        if grid.len() != ratios.len() || grid.is_empty() {
            return Err(Error::Domain(format!("scan has {} parameters and {} ratios", grid.len(), ratios.len())));
        }
        let dec = ratios.windows(2).all(|w| w[1] < w[0]);
        let inc = ratios.windows(2).all(|w| w[1] > w[0]);
        let extrapolated = if ratios.len() >= 4 { aitken(&ratios[ratios.len() - 3..]) } else { None };
        Ok(Self {
            family: family.into(),
            n,
            param: param.into(),
            grid,
            ratios,
            target,
            monotone_decreasing: dec,
            monotone_increasing: inc,
            extrapolated,
            extra: BTreeMap::new(),
            status: Status::Pass,
            note: None,
        })
    }

    pub fn last_ratio(&self) -> f64 {
        *self.ratios.last().expect("scan is nonempty")
    }

    /// Smallest ratio over the sharp constant.
    pub fn min_relative(&self) -> f64 {
        self.ratios.iter().fold(f64::INFINITY, |a, &r| a.min(r / self.target))
    }

    fn fail(&mut self, why: String) {
        self.status = Status::Fail;
        self.note = Some(match self.note.take() {
            Some(n) => format!("{n}; {why}"),
            None => why,
        });
    }

    /// Ratios must stay above `target·(1 - tol)`.
    fn check_floor(&mut self, tol: f64) {
        if let Some(r) = self.ratios.iter().find(|&&r| !(r >= self.target * (1.0 - tol))) {
            self.fail(format!("ratio {r} below the sharp constant {}", self.target));
        }
    }

    /// `param,ratio,status` rows.
    pub fn to_csv(&self) -> std::result::Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([self.param.as_str(), "ratio", "status"])?;
        for (p, r) in self.grid.iter().zip(&self.ratios) {
            let ok = if *r >= self.target * (1.0 - crate::report::DEFAULT_TOL) { "PASS" } else { "FAIL" };
            w.write_record([format!("{p:.16e}"), format!("{r:.16e}"), ok.to_string()])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scan results always serialize")
    }
}

impl Serialize for ScanResult {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ScanResult", 12)?;
        st.serialize_field("family", &self.family)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("param", &self.param)?;
        st.serialize_field("grid", &self.grid.iter().map(|x| fixed(*x)).collect::<Vec<_>>())?;
        st.serialize_field("ratios", &self.ratios.iter().map(|x| fixed(*x)).collect::<Vec<_>>())?;
        st.serialize_field("target", &fixed(self.target))?;
        st.serialize_field("monotone_decreasing", &self.monotone_decreasing)?;
        st.serialize_field("monotone_increasing", &self.monotone_increasing)?;
        st.serialize_field("extrapolated", &self.extrapolated.map(fixed))?;
        st.serialize_field("extra", &fixed_map(&self.extra))?;
        st.serialize_field("status", &self.status)?;
        st.serialize_field("note", &self.note)?;
        st.end()
    }
}

fn aitken(r: &[f64]) -> Option<f64> {
    let (a, b, c) = (r[0], r[1], r[2]);
    let d = c - 2.0 * b + a;
    if d.abs() <= 1e-14 * c.abs() {
        return None;
    }
    let x = c - (c - b) * (c - b) / d;
    x.is_finite().then_some(x)
}

/// `∫(Δ_g u)² - (n-1)^4/16 ∫u²`.
pub fn keytool_deficit(p: &RadialProfile) -> Result<f64> {
    let c = SharpConstants::new(p.n())?.poincare2();
    Ok(p.energy_hyp()?.value - c * p.l2_squared()?.value)
}

/// Deficit over `‖u‖²_{2n/(n-4)}`.
pub fn sobolev_ratio(p: &RadialProfile) -> Result<f64> {
    let n = p.ctx().nf();
    let l = p.lp_norm(2.0 * n / (n - 4.0))?.value;
    Ok(keytool_deficit(p)? / (l * l))
}

/// Deficit over `∫ u² (s/σ_n)^{-4/n}`.
pub fn rellich_ratio(p: &RadialProfile) -> Result<f64> {
    let n = p.ctx().nf();
    Ok(keytool_deficit(p)? / p.weighted_l2(4.0 / n)?.value)
}

fn par_ratios<F: Fn(f64) -> Result<f64> + Sync>(grid: &[f64], f: F) -> Result<Vec<f64>> {
    grid.par_iter().map(|&x| f(x)).collect()
}

/// Truncated bubbles of decreasing width against `S_2(n,2)`.
pub fn sobolev_sharpness_scan(n: u32, scales: &[f64]) -> Result<ScanResult> {
    if n < 5 {
        return Err(Error::Domain(format!("Sobolev scan needs n >= 5, got {n}")));
    }
    let (a, b) = BUBBLE_CUTOFF;
    let ratios = par_ratios(scales, |sc| sobolev_ratio(&make_truncated_bubble(n, sc, a, b)?))?;
    let mut r = ScanResult::new("sobolev_bubble", n, "scale", scales.to_vec(), ratios, sobolev_sharp_constant(n)?)?;
    r.check_floor(crate::report::DEFAULT_TOL);
    if !r.monotone_decreasing {
        r.fail("ratios are not decreasing".into());
    }
    Ok(r)
}

/// Power-law windows of growing span against `n²(n-4)²/16`.
pub fn rellich_sharpness_scan(n: u32, spans: &[f64]) -> Result<ScanResult> {
    if n < 5 {
        return Err(Error::Domain(format!("Rellich scan needs n >= 5, got {n}")));
    }
    let ratios = par_ratios(spans, |sp| rellich_ratio(&rellich_powerlaw(n, sp, RELLICH_OUTER_RADIUS)?))?;
    let target = SharpConstants::new(n)?.rellich();
    let mut r = ScanResult::new("rellich_powerlaw", n, "span", spans.to_vec(), ratios, target)?;
    r.check_floor(crate::report::DEFAULT_TOL);
    if !r.monotone_decreasing {
        r.fail("ratios are not decreasing".into());
    }
    Ok(r)
}

/// `∫(Δ_g u)²/∫u²` for spreading profiles against `(n-1)^4/16`.
pub fn poincare_scan(n: u32, widths: &[f64]) -> Result<ScanResult> {
    let ratios = par_ratios(widths, |w| {
        let p = poincare_spreading(n, w)?;
        Ok(p.energy_hyp()?.value / p.l2_squared()?.value)
    })?;
    let target = SharpConstants::new(n)?.poincare2();
    let mut r = ScanResult::new("poincare_spreading", n, "width", widths.to_vec(), ratios, target)?;
    r.check_floor(crate::report::DEFAULT_TOL);
    if !r.monotone_decreasing {
        r.fail("ratios are not decreasing".into());
    }
    Ok(r)
}

/// One normalized member `w_m = c_m ū_m` of the concentration sequence.
#[derive(Debug, Clone)]
pub struct AdamsMember {
    pub m: f64,
    pub c_m: f64,
    /// `∫(Δ_g w)² - 81/16 ∫w²` after normalization.
    pub constraint: f64,
    pub l2: f64,
    pub profile: RadialProfile,
}

/// `w_m` normalized so that `∫(Δ_g w)² - 81/16 ∫w² = 1`.
pub fn adams_sequence(m: f64) -> Result<AdamsMember> {
    let u = adams_profile_unscaled(m)?;
    let q = u.energy_hyp()?.value - ADAMS_THRESHOLD * u.l2_squared()?.value;
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::NonConvergence { iterations: 0, detail: format!("constraint form {q} at m = {m}") });
    }
    // the form is quadratic in c, so the root of c² q = 1 is explicit
    let c_m = q.powf(-0.5);
    let profile = u.scaled(c_m);
    let l2 = profile.l2_squared()?.value;
    let constraint = profile.energy_hyp()?.value - ADAMS_THRESHOLD * l2;
    if !((constraint - 1.0).abs() <= 1e-8) {
        return Err(Error::NonConvergence { iterations: 1, detail: format!("normalization off by {}", constraint - 1.0) });
    }
    Ok(AdamsMember { m, c_m, constraint, l2, profile })
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Exact-growth ratios on `w_m` for each power. Powers below 2 must grow
/// (positive slope against `ln ln m`), power 2 must stay within a factor 2.
pub fn adams_sharpness_scan(pows: &[f64], ms: &[f64]) -> Result<Vec<ScanResult>> {
    if pows.iter().any(|&p| !(p > 0.0 && p <= 2.0)) {
        return Err(Error::Domain("powers must lie in (0, 2]".into()));
    }
    if ms.len() < 2 || ms.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("sequence indices must increase".into()));
    }
    let members: Vec<AdamsMember> = ms.par_iter().map(|&m| adams_sequence(m)).collect::<Result<_>>()?;
    let lnln: Vec<f64> = ms.iter().map(|m| m.ln().ln()).collect();
    let mut out = Vec::new();
    for &pow in pows {
        let ratios: Vec<f64> =
            members.par_iter().map(|w| adams_exact_ratio(&w.profile, pow).map(|r| r.ratio)).collect::<Result<_>>()?;
        let mut r = ScanResult::new(&format!("adams_pow_{pow}"), 4, "m", ms.to_vec(), ratios, 0.0)?;
        let ln_r: Vec<f64> = r.ratios.iter().map(|x| x.ln()).collect();
        let slope = ls_slope(&lnln, &ln_r);
        let (mn, mx) = r.ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        r.extra.insert("pow".into(), pow);
        r.extra.insert("loglog_slope".into(), slope);
        r.extra.insert("growth".into(), r.last_ratio() / r.ratios[0]);
        r.extra.insert("max_over_min".into(), mx / mn);
        r.extra.insert("expected_slope".into(), 1.0 - pow / 2.0);
        if pow < 2.0 && !(slope > 0.0) {
            r.fail(format!("no growth for power {pow}: slope {slope}"));
        }
        if pow == 2.0 && !(mx / mn <= 2.0) {
            r.fail(format!("power 2 ratios spread by {}", mx / mn));
        }
        out.push(r);
    }
    Ok(out)
}

/// `c_m` across the sequence with the fitted constant `max |c_m - 1| ln m`
/// and the slope of `ln|c_m - 1|` against `ln ln m`.
///
/// The unnormalized form is `q = c_m^{-2}`; `(q - 1) ln m` must stay within a
/// factor 1.25 over the grid, which is the `O(1/ln m)` rate with a fitted
/// constant.
pub fn adams_normalization_fit(ms: &[f64]) -> Result<ScanResult> {
    let members: Vec<AdamsMember> = ms.par_iter().map(|&m| adams_sequence(m)).collect::<Result<_>>()?;
    let cs: Vec<f64> = members.iter().map(|w| w.c_m).collect();
    let mut r = ScanResult::new("adams_normalization", 4, "m", ms.to_vec(), cs, 1.0)?;
    let fitted = members.iter().map(|w| (w.c_m - 1.0).abs() * w.m.ln()).fold(0.0f64, f64::max);
    r.extra.insert("fitted_constant".into(), fitted);
    let l2_fit = members.iter().map(|w| w.l2 * w.m.ln()).fold(0.0f64, f64::max);
    r.extra.insert("l2_times_ln_m_max".into(), l2_fit);
    if ms.len() >= 2 {
        let x: Vec<f64> = ms.iter().map(|m| m.ln().ln()).collect();
        let y: Vec<f64> = members.iter().map(|w| (w.c_m - 1.0).abs().ln()).collect();
        r.extra.insert("loglog_slope".into(), ls_slope(&x, &y));
    }
    let excess: Vec<f64> = members.iter().map(|w| (w.c_m.powi(-2) - 1.0) * w.m.ln()).collect();
    let (lo, hi) = excess.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    r.extra.insert("excess_times_ln_m_min".into(), lo);
    r.extra.insert("excess_times_ln_m_max".into(), hi);
    if !(lo > 0.0 && hi / lo <= 1.25) {
        r.fail(format!("energy excess times ln m ranges over [{lo}, {hi}]"));
    }
    if members.iter().any(|w| !((w.constraint - 1.0).abs() <= 1e-8)) {
        r.fail("constraint not normalized".into());
    }
    Ok(r)
}
