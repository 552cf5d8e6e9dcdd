//! The four commands. Each returns the overall status after writing its files.

use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use rayon::prelude::*;
use serde::Serialize;

use hypergap_core::corpus::smooth_corpus;
use hypergap_core::deficit::{self, log_grid};
use hypergap_core::extremal::{self, OptKind, OptimizeConfig, ScanResult};
use hypergap_core::polyexact::{self, Certificate};
use hypergap_core::rearrange::{self, decreasing_rearrangement, SampledFunction};
use hypergap_core::report::{reports_to_csv, DeficitReport, Status};
use hypergap_core::RadialProfile;

use crate::config::RunConfig;

const SCHEMA: &str = "hypergap-report/1";

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    schema: &'static str,
    command: &'a str,
    kind: Option<&'a str>,
    seed: u64,
    status: Status,
    config: &'a RunConfig,
    results: &'a T,
}

fn write_outputs<T: Serialize>(cfg: &RunConfig, status: Status, results: &T, csv: Option<String>) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let doc = Document {
        schema: SCHEMA,
        command: &cfg.command,
        kind: cfg.kind.as_deref(),
        seed: cfg.seed,
        status,
        config: cfg,
        results,
    };
    let path = cfg.out.join(format!("{}.json", cfg.label()));
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    if let Some(c) = csv {
        let p = cfg.out.join(format!("{}.csv", cfg.label()));
        fs::write(&p, c).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(path)
}

fn overall(statuses: impl IntoIterator<Item = Status>) -> Status {
    statuses.into_iter().fold(Status::Pass, Status::worst)
}

// ---------------------------------------------------------------- certify

pub fn certify(cfg: &RunConfig, perturb_a: bool) -> anyhow::Result<Status> {
    let mut certs: Vec<Certificate> = if perturb_a {
        let bad = polyexact::build_a_symbolic().perturbed(1, 2, 1);
        polyexact::verify_coefficients_with(&bad, &polyexact::build_b_symbolic())
    } else {
        polyexact::verify_coefficients()
    };
    certs.extend(polyexact::certify_coefficients(4));
    certs.push(polyexact::kn_identity(10, cfg.seed));
    let per_n: Vec<Certificate> = (4..=cfg.n_max).into_par_iter().map(polyexact::claimkey_check).collect();
    certs.extend(per_n);

    for c in &certs {
        let tag = if c.passed() { "PASS" } else { "FAIL" };
        println!("{tag}  {}", c.lemma);
        if let Some(d) = &c.difference_poly {
            println!("      difference: {d}");
        }
    }
    let status = overall(certs.iter().map(|c| if c.passed() { Status::Pass } else { Status::Fail }));
    let path = write_outputs(cfg, status, &certs, None)?;
    println!("{} certificates, {}; wrote {}", certs.len(), status.as_str(), path.display());
    Ok(status)
}

// ---------------------------------------------------------------- check

/// Check kinds and the smallest dimension each accepts.
pub const CHECK_KINDS: &[(&str, u32, &[u32])] = &[
    ("keytool", 4, &[4, 5, 6, 8]),
    ("tofinish", 4, &[4, 5, 6, 8]),
    ("lemma31", 4, &[4, 5, 6, 8]),
    ("weighted", 4, &[4, 5, 6, 8]),
    ("rellich", 5, &[5, 6, 8]),
    ("sobolev", 5, &[5, 6]),
    ("gjms", 5, &[5, 6, 8]),
    ("talenti", 4, &[4, 5, 6]),
    ("adams", 4, &[4]),
    ("signs", 4, &[4, 5, 6, 7, 8, 9, 10, 11, 12]),
    ("keyestimate", 4, &[4, 5, 6, 7, 8, 9, 10, 11, 12]),
    ("transfer", 4, &[4, 5, 6, 7, 8, 9, 10, 11, 12]),
];

/// Reports whose status is a plain sign test on the gap, so `--tol` applies.
const GAP_KINDS: &[&str] = &["keytool", "tofinish", "weighted", "rellich", "sobolev", "talenti", "adams"];

fn one(r: hypergap_core::Result<DeficitReport>) -> hypergap_core::Result<Vec<DeficitReport>> {
    r.map(|x| vec![x])
}

fn over_corpus<F>(cfg: &RunConfig, f: F) -> anyhow::Result<Vec<DeficitReport>>
where
    F: Fn(&RadialProfile) -> hypergap_core::Result<Vec<DeficitReport>> + Sync,
{
    let corpora: Vec<Vec<RadialProfile>> =
        cfg.dimensions.iter().map(|&n| smooth_corpus(n, cfg.corpus_size, cfg.seed)).collect::<Result<_, _>>()?;
    let items: Vec<(usize, usize)> =
        (0..corpora.len()).flat_map(|d| (0..cfg.corpus_size).map(move |i| (d, i))).collect();
    let out: Vec<Vec<DeficitReport>> = items
        .par_iter()
        .map(|&(d, i)| f(&corpora[d][i]).map(|rs| rs.into_iter().map(|r| r.with_param("member", i as f64)).collect()))
        .collect::<Result<_, _>>()?;
    Ok(out.concat())
}

fn per_dimension(
    cfg: &RunConfig,
    f: impl Fn(u32) -> hypergap_core::Result<DeficitReport> + Sync,
) -> anyhow::Result<Vec<DeficitReport>> {
    Ok(cfg.dimensions.par_iter().map(|&n| f(n)).collect::<Result<_, _>>()?)
}

pub fn check(cfg: &RunConfig, kind: &str) -> anyhow::Result<Status> {
    let t_grid = log_grid(1e-2, 20.0, cfg.t_points);
    let s_grid = log_grid(1e-8, 1e8, cfg.s_points);
    let mut reports = match kind {
        "keytool" => over_corpus(cfg, |p| one(deficit::keytool_gap(p)))?,
        "tofinish" => over_corpus(cfg, deficit::tofinish_chain)?,
        "lemma31" => over_corpus(cfg, |p| one(deficit::lemma31_check(p)))?,
        "weighted" => over_corpus(cfg, deficit::euclidean_weighted_checks)?,
        "rellich" => over_corpus(cfg, |p| one(deficit::rellich_remainder(p)))?,
        "sobolev" => over_corpus(cfg, |p| one(deficit::sobolev_remainder(p)))?,
        "gjms" => over_corpus(cfg, |p| one(deficit::gjms_p2_check(p)))?,
        "talenti" => over_corpus(cfg, |p| one(rearrange::talenti_compare(p, 1e-6)))?,
        "adams" => over_corpus(cfg, |p| {
            // scale onto the constraint surface for λ = 4
            let form = p.energy_hyp()?.value - 4.0 * p.l2_squared()?.value;
            one(deficit::adams_functional(&p.scaled(form.powf(-0.5)), 4.0))
        })?,
        "signs" => per_dimension(cfg, |n| deficit::proof_function_signs(n, &t_grid))?,
        "keyestimate" => per_dimension(cfg, |n| deficit::keyestimate_check(n, &s_grid))?,
        "transfer" => per_dimension(cfg, |n| deficit::pointwise_transfer_bound(n, &s_grid))?,
        other => anyhow::bail!("unknown check kind {other}"),
    };
    if GAP_KINDS.contains(&kind) {
        for r in reports.iter_mut().filter(|r| r.note.is_none()) {
            let scale = r.lhs.abs().max(r.rhs.abs());
            r.classify(cfg.tol, scale);
        }
    }
    let status = overall(reports.iter().map(|r| r.status));
    let count = |s: Status| reports.iter().filter(|r| r.status == s).count();
    let worst = reports.iter().map(|r| r.rel_gap).fold(f64::INFINITY, f64::min);
    println!(
        "check {kind}: {} reports, {} PASS, {} WARN, {} FAIL, smallest relative gap {worst:.6e}",
        reports.len(),
        count(Status::Pass),
        count(Status::Warn),
        count(Status::Fail)
    );
    let shown: Vec<&DeficitReport> = if reports.len() <= 16 {
        reports.iter().collect()
    } else {
        reports.iter().filter(|r| r.status == Status::Fail).collect()
    };
    for r in shown {
        println!("{:5} {} {:?}: gap {:e} {}", r.status.as_str(), r.kind, r.params, r.gap, r.note.as_deref().unwrap_or(""));
    }
    let path = write_outputs(cfg, status, &reports, Some(reports_to_csv(&reports)?))?;
    println!("wrote {}", path.display());
    Ok(status)
}

// ---------------------------------------------------------------- sharpness

pub const SHARPNESS_KINDS: &[(&str, u32, &[u32])] = &[
    ("sobolev", 5, &[5]),
    ("rellich", 5, &[5]),
    ("poincare", 4, &[4, 5]),
    ("adams", 4, &[4]),
    ("optimize-sobolev", 5, &[5]),
    ("optimize-rellich", 5, &[5]),
];

fn print_scan(r: &ScanResult) {
    // relative to the target when there is one
    let unit = if r.target > 0.0 { r.target } else { 1.0 };
    let rel: Vec<String> = r.ratios.iter().map(|x| format!("{:.6}", x / unit)).collect();
    println!("{} n={} {} [{}] {}", r.family, r.n, r.param, rel.join(", "), r.status.as_str());
    for (k, v) in &r.extra {
        println!("    {k} = {v:.6e}");
    }
    if let Some(note) = &r.note {
        println!("    note: {note}");
    }
}

pub fn sharpness(cfg: &RunConfig, kind: &str) -> anyhow::Result<Status> {
    if let Some(target) = kind.strip_prefix("optimize-") {
        return optimize(cfg, target);
    }
    let scans: Vec<ScanResult> = match kind {
        "sobolev" => cfg
            .dimensions
            .iter()
            .map(|&n| extremal::sobolev_sharpness_scan(n, &cfg.scales))
            .collect::<Result<_, _>>()?,
        "rellich" => cfg
            .dimensions
            .iter()
            .map(|&n| extremal::rellich_sharpness_scan(n, &cfg.spans))
            .collect::<Result<_, _>>()?,
        "poincare" => cfg.dimensions.iter().map(|&n| extremal::poincare_scan(n, &cfg.widths)).collect::<Result<_, _>>()?,
        "adams" => {
            let mut v = vec![extremal::adams_normalization_fit(&cfg.ms)?];
            v.extend(extremal::adams_sharpness_scan(&cfg.pows, &cfg.ms)?);
            v
        }
        other => anyhow::bail!("unknown sharpness kind {other}"),
    };
    scans.iter().for_each(print_scan);
    let status = overall(scans.iter().map(|s| s.status));
    let csv = scans.iter().map(ScanResult::to_csv).collect::<Result<Vec<_>, _>>()?.join("\n");
    let path = write_outputs(cfg, status, &scans, Some(csv))?;
    println!("wrote {}", path.display());
    Ok(status)
}

fn optimize(cfg: &RunConfig, target: &str) -> anyhow::Result<Status> {
    let (kind, init): (OptKind, fn(u32) -> hypergap_core::Result<RadialProfile>) = match target {
        "sobolev" => (OptKind::Sobolev, |n| {
            let (a, b) = extremal::BUBBLE_CUTOFF;
            extremal::make_truncated_bubble(n, 1e-3, a, b)
        }),
        "rellich" => (OptKind::Rellich, |n| extremal::rellich_powerlaw(n, 1e3, extremal::RELLICH_OUTER_RADIUS)),
        other => anyhow::bail!("unknown optimizer target {other}"),
    };
    let ocfg = OptimizeConfig { controls: cfg.controls, ..OptimizeConfig::default() };
    let seeds: Vec<u64> = (0..4).map(|k| cfg.seed.wrapping_add(k)).collect();
    let mut results = Vec::new();
    for &n in &cfg.dimensions {
        let p = init(n)?;
        let r = extremal::optimize_seeds(kind, &p, cfg.budget, &ocfg, &seeds)?;
        println!(
            "optimize {target} n={n}: {:.8} -> {:.8} (sharp {:.8}, ratio/sharp {:.6}), {} evaluations, converged {}, seed {} {}",
            r.initial_ratio,
            r.ratio,
            r.sharp,
            r.ratio / r.sharp,
            r.evaluations,
            r.converged,
            r.seed,
            r.status.as_str()
        );
        results.push(r);
    }
    let status = overall(results.iter().map(|r| r.status));
    let path = write_outputs(cfg, status, &results, None)?;
    println!("wrote {}", path.display());
    Ok(status)
}

// ---------------------------------------------------------------- rearrange-demo

pub fn rearrange_demo(cfg: &RunConfig, member: usize) -> anyhow::Result<Status> {
    let n = cfg.dimensions[0];
    let corpus = smooth_corpus(n, cfg.corpus_size, cfg.seed)?;
    let p = corpus.get(member).with_context(|| format!("corpus has {} members, asked for {member}", corpus.len()))?;
    let ctx = *p.ctx();
    let f = SampledFunction::from_profile(p)?;
    let r = decreasing_rearrangement(&f)?;
    let sharp = r.sharp_profile(ctx)?;

    println!("member {member} in n = {n}: support of u* is [0, {:.6e}]", r.support());
    println!("{:>14} {:>14} {:>14}", "t", "u*(t)", "u**(t)");
    let hi = r.support().max(f64::MIN_POSITIVE);
    for t in log_grid(hi * 1e-6, hi, 7) {
        println!("{t:>14.6e} {:>14.6e} {:>14.6e}", r.ustar(t), r.ustarstar(t));
    }

    let mut reports = Vec::new();
    for q in [1.0, 2.0, 4.0] {
        let a = sharp.lp_integral(q)?.value;
        let b = p.lp_integral(q)?.value;
        let mut rep = DeficitReport::new("equimeasurable", a, b, 0.0).with_param("q", q).with_param("n", n as f64);
        let rel = (a / b - 1.0).abs();
        rep = rep.with_param("relative_mismatch", rel);
        rep.status = if rel <= 1e-6 { Status::Pass } else { Status::Fail };
        reports.push(rep);
    }
    for pp in [1.5, 2.0, 3.0] {
        reports.push(rearrange::hardy_check(&r, pp)?);
    }
    reports.push(rearrange::hardy_littlewood_check(&f, &ctx)?);
    reports.push(rearrange::talenti_compare(p, 1e-6)?);
    for rep in &reports {
        println!("{:5} {} {:?}", rep.status.as_str(), rep.kind, rep.params);
    }
    let status = overall(reports.iter().map(|r| r.status));
    let path = write_outputs(cfg, status, &reports, Some(reports_to_csv(&reports)?))?;
    println!("wrote {}", path.display());
    Ok(status)
}
