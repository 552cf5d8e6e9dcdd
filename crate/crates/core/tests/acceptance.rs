//! End-to-end acceptance suite. Each test prints one `PASS`/`FAIL` line.

use std::time::{Duration, Instant};

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hypergap_core::corpus::{smooth_corpus, DEFAULT_SEED, DEFAULT_SIZE};
use hypergap_core::deficit::*;
use hypergap_core::extremal::*;
use hypergap_core::polyexact::{self, q};
use hypergap_core::rearrange::{decreasing_rearrangement, hardy_check, talenti_compare, SampledFunction};
use hypergap_core::report::reports_to_json;
use hypergap_core::{GeometryContext, RadialProfile};

/// Collects sub-check failures and prints the verdict line.
struct Verdict {
    id: u32,
    title: &'static str,
    start: Instant,
    failures: Vec<String>,
    facts: Vec<String>,
}

impl Verdict {
    fn new(id: u32, title: &'static str) -> Self {
        Self { id, title, start: Instant::now(), failures: Vec::new(), facts: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn fact(&mut self, f: impl Into<String>) {
        self.facts.push(f.into());
    }

    fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }

    fn finish(self) {
        let t = self.elapsed();
        let verdict = if self.failures.is_empty() { "PASS" } else { "FAIL" };
        let mut line = format!("criterion {:>2} {verdict} {} [{:.1?}]", self.id, self.title, t);
        if !self.facts.is_empty() {
            line += &format!(" {}", self.facts.join("; "));
        }
        if !self.failures.is_empty() {
            line += &format!(" | failed: {}", self.failures.join("; "));
        }
        println!("{line}");
        assert!(self.failures.is_empty(), "{line}");
    }
}

fn corpus(n: u32) -> Vec<RadialProfile> {
    smooth_corpus(n, DEFAULT_SIZE, DEFAULT_SEED).unwrap()
}

#[test]
fn c01_polynomial_algebra() {
    let mut v = Verdict::new(1, "exact coefficient algebra");
    let p = polyexact::build_p_symbolic();
    v.check(p.num.coeff_s(0).is_zero(), "a_0 is not the zero polynomial");
    v.check(p.num.coeff_s(5).is_zero(), "a_5 is not the zero polynomial");
    let certs = polyexact::verify_coefficients();
    for c in &certs {
        v.check(c.passed(), format!("{} failed", c.lemma));
    }
    let bad = polyexact::build_a_symbolic().perturbed(1, 2, 1);
    let neg = polyexact::verify_coefficients_with(&bad, &polyexact::build_b_symbolic());
    let caught = neg.iter().any(|c| !c.passed() && c.difference_poly.as_deref().is_some_and(|d| d != "0"));
    v.check(caught, "perturbed A(s) was not caught");
    v.check(v.elapsed() < Duration::from_secs(5), "runtime over 5 s");
    v.fact(format!("{} certificates, negative control caught", certs.len()));
    v.finish();
}

#[test]
fn c02_kn_identity() {
    let mut v = Verdict::new(2, "exact K_n' identity");
    let k = polyexact::kn_numerators();
    v.check(k.derived == k.target, "derived numerator differs from 24 s^2");
    v.check(k.displayed == k.target, "intermediate numerator differs from 24 s^2");
    let c = polyexact::kn_identity(10, DEFAULT_SEED);
    let spots = c.witness.as_ref().map(|w| w["spot_values"].as_array().map_or(0, Vec::len)).unwrap_or(0);
    v.check(c.passed(), "certificate failed");
    v.check(spots == 10, format!("{spots} spot values"));
    v.fact(format!("{spots} rational spot values agree"));
    v.finish();
}

#[test]
fn c03_positivity_certificates() {
    let mut v = Verdict::new(3, "coefficient positivity for n >= 4");
    let mut methods = Vec::new();
    for c in polyexact::certify_coefficients(4) {
        v.check(c.passed(), format!("{} failed", c.lemma));
        methods.push(c.witness.as_ref().map_or("?".to_string(), |w| w["method"].as_str().unwrap_or("?").to_string()));
    }
    let a1 = polyexact::build_p_symbolic().num.coeff_s(1);
    v.check(a1.eval(&q(4)).is_zero(), "a_1(4) is not zero");
    for n in 4..=12 {
        v.check(polyexact::claimkey_check(n).passed(), format!("P(s) > 0 fails at n = {n}"));
    }
    v.fact(format!("methods {methods:?}, a_1(4) = 0"));
    v.finish();
}

#[test]
fn c04_sign_suite() {
    let mut v = Verdict::new(4, "sign suite for G, H, J, K");
    let grid = log_grid(1e-2, 20.0, 2000);
    let mut worst_jp = 0.0f64;
    let mut worst_res = f64::INFINITY;
    for n in 4..=12u32 {
        let r = proof_function_signs(n, &grid).unwrap();
        v.check(r.passed(), format!("n = {n}: {:?}", r.note));
        worst_jp = worst_jp.max(r.params["j_prime_rel_err"]);
        let z = proof_functions_at_zero(n).unwrap();
        v.check(z.iter().all(|x| x.abs() <= 1e-10), format!("n = {n}: values at 0 {z:?}"));
        let ctx = GeometryContext::new(n).unwrap();
        for &t in &grid {
            let res = ctx.phi_lower_bound_residual(t).unwrap();
            worst_res = worst_res.min(res);
            if !(res >= 0.0) {
                v.check(false, format!("lower bound residual {res:e} at n = {n}, t = {t}"));
                break;
            }
        }
    }
    v.check(worst_jp <= 1e-4, format!("J' relative error {worst_jp:e}"));
    v.check(v.elapsed() < Duration::from_secs(30), "runtime over 30 s");
    v.fact(format!("max J' rel err {worst_jp:.2e}, min lower-bound residual {worst_res:.2e}"));
    v.finish();
}

#[test]
fn c05_transfer_inequality() {
    let mut v = Verdict::new(5, "transfer inequality on the corpus");
    let mut min_rel = f64::INFINITY;
    let mut count = 0;
    for n in [4u32, 5, 6, 8] {
        for (i, p) in corpus(n).iter().enumerate() {
            let r = keytool_gap(p).unwrap();
            v.check(r.passed(), format!("keytool n = {n}, member {i}: gap {:e}", r.gap));
            min_rel = min_rel.min(r.rel_gap);
            for c in tofinish_chain(p).unwrap() {
                v.check(c.passed(), format!("{} n = {n}, member {i}: gap {:e}", c.kind, c.gap));
            }
            count += 1;
        }
    }
    v.fact(format!("{count} profiles, min relative gap {min_rel:.3e}"));
    v.finish();
}

#[test]
fn c06_remainder_theorems() {
    let mut v = Verdict::new(6, "remainder theorems and the P_2 identity");
    let mut worst_id = 0.0f64;
    for n in [5u32, 6, 8] {
        for (i, p) in corpus(n).iter().enumerate() {
            let r = rellich_remainder(p).unwrap();
            v.check(r.passed(), format!("rellich n = {n}, member {i}: gap {:e}", r.gap));
            if n <= 6 {
                let s = sobolev_remainder(p).unwrap();
                v.check(s.passed(), format!("sobolev n = {n}, member {i}: gap {:e}", s.gap));
            }
            let g = gjms_p2_check(p).unwrap();
            let res = g.params["identity_residual"];
            worst_id = worst_id.max(res);
            v.check(res <= 1e-6, format!("P_2 identity n = {n}, member {i}: {res:e}"));
        }
    }
    v.fact(format!("max P_2 identity residual {worst_id:.2e}"));
    v.finish();
}

#[test]
fn c07_sobolev_sharpness() {
    let mut v = Verdict::new(7, "Sobolev concentration scan, n = 5");
    let r = sobolev_sharpness_scan(5, &[1.0, 0.3, 0.1, 0.03, 0.01, 1e-3]).unwrap();
    let last = r.last_ratio() / r.target;
    v.check(r.monotone_decreasing, "ratios not monotone in the scale");
    v.check(last <= 1.05, format!("final ratio {last} of S_2"));
    v.check(r.min_relative() >= 1.0 - 1e-8, "ratio below S_2");
    v.check(v.elapsed() < Duration::from_secs(60), "runtime over 60 s");
    v.fact(format!("S_2(5,2) = {:.6}, final ratio {last:.5} S_2", r.target));
    v.finish();
}

#[test]
fn c08_rellich_sharpness() {
    let mut v = Verdict::new(8, "Rellich power-law scan, n = 5");
    let r = rellich_sharpness_scan(5, &[1e2, 1e3, 1e4, 1e5, 1e6]).unwrap();
    let last = r.last_ratio() / r.target;
    v.check(r.monotone_decreasing, "ratios not monotone in the span");
    v.check(last <= 1.15, format!("final ratio {last} of 25/16"));
    v.check(r.min_relative() >= 1.0 - 1e-8, "ratio below 25/16");
    v.fact(format!("final ratio {last:.4} x 25/16"));
    v.finish();
}

#[test]
fn c09_adams_suite() {
    let mut v = Verdict::new(9, "Adams suite, n = 4");
    let k = SharpConstants::new(4).unwrap();
    v.check(k.adams_threshold() == 81.0 / 16.0, "threshold is not 81/16");
    let c = corpus(4);
    v.check(adams_functional(&c[0], 81.0 / 16.0).is_err(), "lambda = 81/16 accepted");
    for (i, p) in c.iter().enumerate() {
        let form = p.energy_hyp().unwrap().value - 4.0 * p.l2_squared().unwrap().value;
        let w = p.scaled(form.powf(-0.5));
        match adams_functional(&w, 4.0) {
            Ok(r) => {
                let val = r.params["adams_integral"];
                v.check(val.is_finite() && r.passed(), format!("member {i}: integral {val}"));
            }
            Err(e) => v.check(false, format!("member {i}: {e}")),
        }
    }
    let ms = [1e3, 1e4, 1e5, 1e6];
    let fit = adams_normalization_fit(&ms).unwrap();
    v.check(fit.status.is_ok(), format!("c_m fit: {:?}", fit.note));
    v.fact(format!(
        "c_m {:.4}..{:.4}, |c_m-1| ln m <= {:.3}, (c_m^-2 - 1) ln m in [{:.3}, {:.3}]",
        fit.ratios[0],
        fit.last_ratio(),
        fit.extra["fitted_constant"],
        fit.extra["excess_times_ln_m_min"],
        fit.extra["excess_times_ln_m_max"]
    ));
    for r in adams_sharpness_scan(&[1.0, 2.0], &ms).unwrap() {
        let pow = r.extra["pow"];
        if pow == 1.0 {
            let g = r.extra["growth"];
            v.check(g >= 1.3, format!("pow 1 growth {g:.4} < 1.3"));
            v.fact(format!("pow 1 growth {g:.4}"));
        } else {
            let b = r.extra["max_over_min"];
            v.check(b <= 2.0, format!("pow 2 max/min {b:.4} > 2"));
            v.fact(format!("pow 2 max/min {b:.4}"));
        }
    }
    v.finish();
}

#[test]
fn c10_rearrangement() {
    let mut v = Verdict::new(10, "rearrangement");
    let ctx = GeometryContext::new(5).unwrap();
    let mut worst = 0.0f64;
    for p in corpus(5).iter().take(8) {
        let f = SampledFunction::from_profile(p).unwrap();
        let sharp = decreasing_rearrangement(&f).unwrap().sharp_profile(ctx).unwrap();
        for qq in [1.0, 2.0, 4.0] {
            let a = sharp.lp_integral(qq).unwrap().value;
            let b = p.lp_integral(qq).unwrap().value;
            worst = worst.max((a / b - 1.0).abs());
        }
    }
    v.check(worst <= 1e-6, format!("equimeasurability off by {worst:e}"));
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut hardy_ok = 0;
    for _ in 0..50 {
        let k = rng.random_range(1..40);
        let vals: Vec<f64> = (0..k).map(|_| rng.random_range(-3.0..3.0)).collect();
        let ws: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..2.0)).collect();
        let r = decreasing_rearrangement(&SampledFunction::from_atoms(vals, ws).unwrap()).unwrap();
        for p in [1.5, 2.0, 3.0] {
            let rep = hardy_check(&r, p).unwrap();
            v.check(rep.passed(), format!("hardy p = {p}: gap {:e}", rep.gap));
            hardy_ok += rep.passed() as usize;
        }
    }
    let mut talenti = 0;
    for n in [4u32, 5, 6] {
        for (i, p) in corpus(n).iter().enumerate() {
            let r = talenti_compare(p, 1e-6).unwrap();
            v.check(r.passed(), format!("talenti n = {n}, member {i}: gap {:e}", r.gap));
            talenti += 1;
        }
    }
    v.fact(format!("Lq mismatch {worst:.1e}, {hardy_ok}/150 Hardy checks, {talenti} Talenti comparisons"));
    v.finish();
}

#[test]
fn c11_infrastructure() {
    let mut v = Verdict::new(11, "geometry and reproducibility");
    let mut worst = 0.0f64;
    for n in 4..=12u32 {
        let ctx = GeometryContext::new(n).unwrap();
        for s in log_grid(1e-8, 1e8, 161) {
            let t = ctx.phi_inverse(s).unwrap();
            let back = ctx.sigma_n() * ctx.phi(t).unwrap();
            worst = worst.max((back / s - 1.0).abs());
        }
        let nf = n as f64;
        let t = 1e-4;
        let small = ctx.phi(t).unwrap() / t.sinh().powi(n as i32);
        v.check((small - 1.0).abs() < 1e-3, format!("n = {n}: small-t ratio {small}"));
        let t = 30.0;
        let large = (ctx.ln_phi(t).unwrap() - (nf / (nf - 1.0)).ln() - (nf - 1.0) * t.sinh().ln()).exp();
        v.check((large - 1.0).abs() < 1e-6, format!("n = {n}: large-t ratio {large}"));
    }
    v.check(worst <= 1e-10, format!("round trip off by {worst:e}"));
    let run = || {
        let reports: Vec<_> = corpus(6).iter().map(|p| keytool_gap(p).unwrap()).collect();
        let scan = rellich_sharpness_scan(6, &[1e2, 1e3]).unwrap();
        (reports_to_json(&reports), scan.to_json())
    };
    let (a, b) = (run(), run());
    v.check(a == b, "reports differ between identical runs");
    v.fact(format!("round trip max rel err {worst:.1e}, reports byte-identical"));
    v.finish();
}
