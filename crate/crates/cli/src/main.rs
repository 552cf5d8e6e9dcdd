//! `hypergap`: certificates, inequality checks and sharpness scans.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{FileConfig, RunConfig};
use hypergap_core::report::Status;

#[derive(Parser)]
#[command(name = "hypergap", version, about = "Verification suites for second-order inequalities on hyperbolic space")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Dimensions, comma separated.
    #[arg(long = "n", global = true, value_delimiter = ',')]
    dimensions: Option<Vec<u32>>,
    /// Relative tolerance for negative gaps.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Flat JSON config; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    corpus_size: Option<usize>,
    /// Points of the t-grid for the sign suite.
    #[arg(long, global = true)]
    t_points: Option<usize>,
    /// Points of the s-grid for the pointwise bounds.
    #[arg(long, global = true)]
    s_points: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact polynomial certificates.
    Certify {
        /// Largest n for the per-dimension positivity table.
        #[arg(long)]
        n_max: Option<i64>,
        /// Perturb A(s) by n s² (negative control).
        #[arg(long)]
        perturb_a: bool,
    },
    /// Run the corpus (or a pointwise grid) through one inequality.
    Check {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(run::CHECK_KINDS.iter().map(|k| k.0)))]
        kind: String,
    },
    /// Concentration scans and the profile optimizer.
    Sharpness {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(run::SHARPNESS_KINDS.iter().map(|k| k.0)))]
        kind: String,
        #[arg(long, value_delimiter = ',')]
        scales: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        spans: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        widths: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        ms: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        pows: Option<Vec<f64>>,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        controls: Option<usize>,
    },
    /// Rearrange one corpus member and run the rearrangement checks on it.
    RearrangeDemo {
        #[arg(long, default_value_t = 0)]
        member: usize,
    },
}

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NONCONVERGENCE: u8 = 3;

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("HYPERGAP_THREADS") {
        let k: usize = v.trim().parse().map_err(|_| anyhow::anyhow!("HYPERGAP_THREADS must be a positive integer, got {v:?}"))?;
        if k == 0 {
            anyhow::bail!("HYPERGAP_THREADS must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global()?;
    }
    Ok(())
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    use hypergap_core::Error as E;
    match err.downcast_ref::<E>() {
        Some(E::NonConvergence { .. }) => EXIT_NONCONVERGENCE,
        Some(E::Domain(_) | E::Format(_)) | None => EXIT_USAGE,
        Some(_) => EXIT_FAIL,
    }
}

fn execute(cli: Cli) -> anyhow::Result<Status> {
    let c = cli.common;
    let base = match &c.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let mut flags = FileConfig {
        dimensions: c.dimensions,
        tol: c.tol,
        seed: c.seed,
        corpus_size: c.corpus_size,
        out: c.out,
        t_points: c.t_points,
        s_points: c.s_points,
        ..FileConfig::default()
    };
    let lookup = |table: &[(&str, u32, &'static [u32])], kind: &str| -> (u32, &'static [u32]) {
        table.iter().find(|k| k.0 == kind).map(|k| (k.1, k.2)).expect("clap restricts the kind")
    };
    match cli.command {
        Command::Certify { n_max, perturb_a } => {
            flags.n_max = n_max;
            let cfg = RunConfig::resolve("certify", None, &[4], 4, base.overlay(flags))?;
            run::certify(&cfg, perturb_a)
        }
        Command::Check { kind } => {
            let (min_n, dims) = lookup(run::CHECK_KINDS, &kind);
            let cfg = RunConfig::resolve("check", Some(&kind), dims, min_n, base.overlay(flags))?;
            run::check(&cfg, &kind)
        }
        Command::Sharpness { kind, scales, spans, widths, ms, pows, budget, controls } => {
            let (min_n, dims) = lookup(run::SHARPNESS_KINDS, &kind);
            let f = FileConfig { scales, spans, widths, ms, pows, budget, controls, ..flags };
            let cfg = RunConfig::resolve("sharpness", Some(&kind), dims, min_n, base.overlay(f))?;
            if kind == "adams" && cfg.dimensions != [4] {
                anyhow::bail!("the Adams suite lives in dimension 4");
            }
            run::sharpness(&cfg, &kind)
        }
        Command::RearrangeDemo { member } => {
            let cfg = RunConfig::resolve("rearrange-demo", None, &[5], 4, base.overlay(flags))?;
            run::rearrange_demo(&cfg, member)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_USAGE);
    }
    match execute(cli) {
        Ok(Status::Fail) => ExitCode::from(EXIT_FAIL),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
