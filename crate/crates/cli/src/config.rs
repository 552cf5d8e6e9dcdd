//! Run configuration: a flat JSON file merged under command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use hypergap_core::corpus;

/// Everything a config file may set. Unknown keys are rejected.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub dimensions: Option<Vec<u32>>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub corpus_size: Option<usize>,
    pub out: Option<PathBuf>,
    pub t_points: Option<usize>,
    pub s_points: Option<usize>,
    pub n_max: Option<i64>,
    pub scales: Option<Vec<f64>>,
    pub spans: Option<Vec<f64>>,
    pub widths: Option<Vec<f64>>,
    pub ms: Option<Vec<f64>>,
    pub pows: Option<Vec<f64>>,
    pub budget: Option<usize>,
    pub controls: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fields set in `over` win.
    pub fn overlay(self, over: FileConfig) -> FileConfig {
        macro_rules! pick {
            ($($f:ident),*) => { FileConfig { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(dimensions, tol, seed, corpus_size, out, t_points, s_points, n_max, scales, spans, widths, ms, pows, budget, controls)
    }
}

/// Fully resolved settings, recorded in every output document.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub kind: Option<String>,
    pub dimensions: Vec<u32>,
    pub tol: f64,
    pub seed: u64,
    pub corpus_size: usize,
    pub out: PathBuf,
    pub t_points: usize,
    pub s_points: usize,
    pub n_max: i64,
    pub scales: Vec<f64>,
    pub spans: Vec<f64>,
    pub widths: Vec<f64>,
    pub ms: Vec<f64>,
    pub pows: Vec<f64>,
    pub budget: usize,
    pub controls: usize,
}

impl RunConfig {
    pub fn resolve(command: &str, kind: Option<&str>, default_dims: &[u32], min_n: u32, f: FileConfig) -> anyhow::Result<Self> {
        let cfg = RunConfig {
            command: command.to_string(),
            kind: kind.map(str::to_string),
            dimensions: f.dimensions.unwrap_or_else(|| default_dims.to_vec()),
            tol: f.tol.unwrap_or(hypergap_core::report::DEFAULT_TOL),
            seed: f.seed.unwrap_or(corpus::DEFAULT_SEED),
            corpus_size: f.corpus_size.unwrap_or(corpus::DEFAULT_SIZE),
            out: f.out.unwrap_or_else(|| PathBuf::from("hypergap-out")),
            t_points: f.t_points.unwrap_or(2000),
            s_points: f.s_points.unwrap_or(400),
            n_max: f.n_max.unwrap_or(12),
            scales: f.scales.unwrap_or_else(|| vec![1.0, 0.3, 0.1, 0.03, 0.01, 1e-3]),
            spans: f.spans.unwrap_or_else(|| vec![1e2, 1e3, 1e4, 1e5, 1e6]),
            widths: f.widths.unwrap_or_else(|| vec![5.0, 10.0, 20.0, 40.0]),
            ms: f.ms.unwrap_or_else(|| vec![1e3, 1e4, 1e5, 1e6]),
            pows: f.pows.unwrap_or_else(|| vec![1.0, 2.0]),
            budget: f.budget.unwrap_or(2000),
            controls: f.controls.unwrap_or(12),
        };
        cfg.validate(min_n)?;
        Ok(cfg)
    }

    fn validate(&self, min_n: u32) -> anyhow::Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            bail!("tolerance must be positive, got {}", self.tol);
        }
        if self.dimensions.is_empty() {
            bail!("no dimensions given");
        }
        if let Some(n) = self.dimensions.iter().find(|&&n| n < min_n) {
            bail!("dimension {n} is below {min_n} for {}", self.label());
        }
        if self.corpus_size == 0 {
            bail!("corpus size must be positive");
        }
        if self.t_points < 2 || self.s_points < 2 {
            bail!("grids need at least two points");
        }
        if self.n_max < 4 {
            bail!("n_max must be at least 4, got {}", self.n_max);
        }
        Ok(())
    }

    /// `command` or `command-kind`.
    pub fn label(&self) -> String {
        match &self.kind {
            Some(k) => format!("{}-{k}", self.command),
            None => self.command.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlay_prefers_the_second() {
        let a = FileConfig { seed: Some(1), tol: Some(1e-6), ..Default::default() };
        let b = FileConfig { seed: Some(2), ..Default::default() };
        let c = a.overlay(b);
        assert_eq!(c.seed, Some(2));
        assert_eq!(c.tol, Some(1e-6));
    }

    #[test]
    fn validation() {
        let ok = RunConfig::resolve("check", Some("keytool"), &[4], 4, FileConfig::default()).unwrap();
        assert_eq!(ok.seed, corpus::DEFAULT_SEED);
        assert_eq!(ok.label(), "check-keytool");
        let bad_tol = FileConfig { tol: Some(-1.0), ..Default::default() };
        assert!(RunConfig::resolve("check", None, &[4], 4, bad_tol).is_err());
        let low = FileConfig { dimensions: Some(vec![4]), ..Default::default() };
        assert!(RunConfig::resolve("check", Some("rellich"), &[5], 5, low).is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<FileConfig>(r#"{"sed": 3}"#).is_err());
        let f: FileConfig = serde_json::from_str(r#"{"seed": 3, "dimensions": [5, 6]}"#).unwrap();
        assert_eq!(f.dimensions, Some(vec![5, 6]));
    }
}
