//! Seeded end-to-end experiments with CSV and JSON output.
//!
//! Every experiment is a pure function of an [`ExperimentConfig`]; the
//! resulting [`ExperimentReport`] carries the file contents, a summary and a
//! list of named assertions.

mod approx;
mod escape;
mod haar;
mod metric;
mod sampler;

pub use approx::{compact_representative, run_fast_approx, ApproxRow};
pub use escape::run_escape;
pub use haar::{run_haar_pipeline, HaarSampleRow};
pub use metric::{bump_family, measure_distance, measure_distance_log_lambda, Bump, BUMP_FAMILY_VERSION};
pub use sampler::{haar_sample, siegel_calibration, SiegelRow, DEFAULT_WORD_LENGTH};

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Escape,
    Haar,
    Approx,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Escape => "escape",
            Self::Haar => "haar",
            Self::Approx => "approx",
        }
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "escape" => Ok(Self::Escape),
            "haar" => Ok(Self::Haar),
            "approx" => Ok(Self::Approx),
            _ => Err(Error::Config(format!("unknown experiment {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    /// Fincke–Pohst nodes per minimum or point count.
    pub enumeration: u64,
    /// Neighbors per Hecke operator.
    pub neighbors: u64,
    /// Lattice evaluations per experiment.
    pub evaluations: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Self { enumeration: crate::lattice::DEFAULT_ENUMERATION_BUDGET, neighbors: 100_000, evaluations: 20_000_000 }
    }
}

/// Pass/fail thresholds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub ks_max: f64,
    pub minus_mass: f64,
    pub siegel_relative: f64,
    pub max_inversions: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { ks_max: 0.15, minus_mass: 0.1, siegel_relative: 0.15, max_inversions: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n: usize,
    #[serde(rename = "M")]
    pub m: u64,
    /// Second, smaller `M` the escape distance is compared against.
    #[serde(rename = "M_reference")]
    pub m_reference: Option<u64>,
    pub primes: Vec<u64>,
    /// Grid points per stabilizer direction.
    pub density: usize,
    pub eta: f64,
    /// Width of the `(Ax)±` gap; `1/log log M` when absent.
    pub epsilon: Option<f64>,
    pub c: f64,
    pub eps_cusp: f64,
    pub radii: Vec<f64>,
    pub precision_bits: u32,
    pub oracle_samples: usize,
    pub haar_samples: usize,
    pub word_length: usize,
    /// Columns are basis vectors; normalized to covolume one.
    pub target: Option<Vec<Vec<f64>>>,
    pub search_bound: u32,
    pub seed: u64,
    pub budgets: Budgets,
    pub tolerances: Tolerances,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentKind::Escape,
            n: 2,
            m: 10_000,
            m_reference: Some(100),
            primes: vec![5, 13, 29, 61],
            density: 10_000,
            eta: 0.25,
            epsilon: None,
            c: 0.5,
            eps_cusp: 0.05,
            radii: vec![0.8, 1.0, 1.2],
            precision_bits: crate::numfield::DEFAULT_PRECISION_BITS,
            oracle_samples: 100_000,
            haar_samples: 10_000,
            word_length: DEFAULT_WORD_LENGTH,
            target: None,
            search_bound: 2,
            seed: 0,
            budgets: Budgets::default(),
            tolerances: Tolerances::default(),
        }
    }
}

impl ExperimentConfig {
    /// Defaults tuned per experiment.
    pub fn preset(kind: ExperimentKind) -> Self {
        let base = Self { experiment: kind, ..Self::default() };
        match kind {
            ExperimentKind::Escape => base,
            ExperimentKind::Haar => Self { m: 1000, m_reference: None, density: 2000, ..base },
            ExperimentKind::Approx => Self { m_reference: None, density: 400, ..base },
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let b = &self.budgets;
        if b.enumeration == 0 || b.neighbors == 0 || b.evaluations == 0 {
            return Err(Error::Config("budgets must be positive".into()));
        }
        if !(2..=5).contains(&self.n) {
            return Err(Error::Config(format!("n = {} outside 2..=5", self.n)));
        }
        if self.density == 0 || self.oracle_samples == 0 {
            return Err(Error::Config("density and oracle_samples must be positive".into()));
        }
        if !(self.c > 0.0 && self.c <= 1.0) {
            return Err(Error::Config(format!("c = {} outside (0, 1]", self.c)));
        }
        if self.radii.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::Config("radii must be positive".into()));
        }
        Ok(())
    }

    /// `ε`, defaulting to `1/log log M`.
    pub fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or_else(|| 1.0 / (self.m as f64).ln().ln())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.into(), passed, detail }
    }
}

/// Output of one experiment run.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub experiment: ExperimentKind,
    pub seed: u64,
    /// `(file name, contents)`.
    pub files: Vec<(String, String)>,
    pub summary: serde_json::Value,
    pub assertions: Vec<Assertion>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(f, _)| f == name).map(|(_, c)| c.as_str())
    }

    pub fn summary_json(&self) -> String {
        let doc = serde_json::json!({
            "experiment": self.experiment.name(),
            "seed": self.seed,
            "passed": self.passed(),
            "assertions": self.assertions,
            "summary": self.summary,
        });
        serde_json::to_string_pretty(&doc).expect("summary serializes") + "\n"
    }

    /// Writes every CSV plus `<experiment>_summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (name, contents) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, contents)?;
            written.push(path);
        }
        let path = dir.join(format!("{}_summary.json", self.experiment.name()));
        std::fs::write(&path, self.summary_json())?;
        written.push(path);
        Ok(written)
    }
}

/// Runs the experiment named in the config.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    match config.experiment {
        ExperimentKind::Escape => run_escape(config),
        ExperimentKind::Haar => run_haar_pipeline(config),
        ExperimentKind::Approx => run_fast_approx(config, None),
    }
}

/// Whether an error comes from a budget guard.
pub fn is_budget_abort(e: &Error) -> bool {
    matches!(
        e,
        Error::EnumerationBudgetExceeded { .. } | Error::NeighborBudgetExceeded { .. } | Error::BudgetExceeded(_)
    )
}

/// CSV text with a `# seed=` comment line, a header and one line per row.
pub(crate) fn csv(seed: u64, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = format!("# seed={seed}\n{}\n", header.join(","));
    for row in rows {
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

pub(crate) fn fmt(x: f64) -> String {
    format!("{x}")
}

pub(crate) fn charge(used: &mut u64, amount: u64, budget: u64) -> Result<()> {
    *used = used.saturating_add(amount);
    if *used > budget {
        return Err(Error::BudgetExceeded(format!("{used} lattice evaluations > {budget}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_roundtrip() {
        let c = ExperimentConfig::preset(ExperimentKind::Haar);
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), c);
        let partial = ExperimentConfig::from_json(r#"{"experiment": "approx", "M": 50, "seed": 9}"#).unwrap();
        assert_eq!(partial.m, 50);
        assert_eq!(partial.seed, 9);
        assert!(ExperimentConfig::from_json(r#"{"experiment": "escape", "bogus": 1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"budgets": {"enumeration": 0}}"#).is_err());
        assert!((ExperimentConfig { m: 1000, ..Default::default() }.epsilon() - 0.5174).abs() < 1e-3);
    }

    #[test]
    fn csv_layout() {
        let s = csv(7, &["a", "b"], vec![vec!["1".into(), "2".into()]]);
        assert_eq!(s, "# seed=7\na,b\n1,2\n");
    }
}
