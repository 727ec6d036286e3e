//! Reproducible experiments: a JSON config selects checks, the harness runs
//! them against cached enumerations and emits a JSON report and a CSV
//! summary.

mod checks;
mod sample;
mod store;

pub use checks::{check_ids, CheckSpec, CHECKS, INVARIANTS};
pub use store::CacheStore;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::machine::{MachineMode, MAX_LEN_CAP};
use crate::randomness::DistributionSpec;

pub const DEFAULT_SEED: u64 = 0x5eed_a17c_0de5_0001;

/// One experiment, read from a JSON file. Rationals are strings `"a/b"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    #[serde(default = "default_mode")]
    pub mode: MachineMode,
    pub max_len: usize,
    pub budget: u64,
    /// Additional budgets for the refinement checks; `budget` is always
    /// included and is the largest one used elsewhere.
    #[serde(default)]
    pub budgets: Vec<u64>,
    /// Check ids to run, or `"all"`.
    #[serde(default)]
    pub targets: Vec<String>,
    /// Strings whose complexities are reported.
    #[serde(default)]
    pub strings: Vec<BitString>,
    /// Conditions for the counting check; the empty condition if none.
    #[serde(default)]
    pub conditions: Vec<BitString>,
    #[serde(default)]
    pub distributions: Vec<DistributionSpec>,
    /// Fractional bits for interval enclosures.
    #[serde(default = "default_precision")]
    pub precision: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Random cases per randomized check.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub limits: Limits,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    #[serde(default)]
    pub report: Option<PathBuf>,
    #[serde(default)]
    pub csv: Option<PathBuf>,
}

/// Sizes of the exhaustive checks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Limits {
    pub cnv_max_len: usize,
    pub pair_max: u64,
    pub elias_max: u64,
    pub log_star_max: u64,
    pub lln_max_n: usize,
    pub bernoulli_max_n: usize,
    pub gap_max_n: usize,
    pub conserve_max_n: usize,
    pub distance_max_points: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            cnv_max_len: 8,
            pair_max: 10_000,
            elias_max: 100_000,
            log_star_max: 20_000,
            lln_max_n: 12,
            bernoulli_max_n: 8,
            gap_max_n: 30,
            conserve_max_n: 10,
            distance_max_points: 6,
        }
    }
}

fn default_mode() -> MachineMode {
    MachineMode::SelfDelimiting
}

fn default_precision() -> u32 {
    30
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_samples() -> usize {
    100
}

impl ExperimentConfig {
    /// A config running every check at the given window.
    pub fn new(id: impl Into<String>, max_len: usize, budget: u64) -> Self {
        Self {
            id: id.into(),
            mode: default_mode(),
            max_len,
            budget,
            budgets: Vec::new(),
            targets: vec!["all".into()],
            strings: Vec::new(),
            conditions: Vec::new(),
            distributions: Vec::new(),
            precision: default_precision(),
            seed: DEFAULT_SEED,
            samples: default_samples(),
            limits: Limits::default(),
            cache_dir: None,
            report: None,
            csv: None,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_len > MAX_LEN_CAP {
            return Err(Error::CapExceeded { requested: self.max_len, cap: MAX_LEN_CAP });
        }
        if self.max_len == 0 {
            return Err(Error::Config("max_len must be positive".into()));
        }
        if self.precision == 0 {
            return Err(Error::Config("precision must be positive".into()));
        }
        if let Some(&t) = self.budgets.iter().find(|&&t| t > self.budget) {
            return Err(Error::Config(format!("budget ladder entry {t} exceeds the budget {}", self.budget)));
        }
        for d in &self.distributions {
            d.validate()?;
        }
        self.selected()?;
        Ok(())
    }

    /// The budget ladder, ascending, ending at `budget`.
    pub fn ladder(&self) -> Vec<u64> {
        let mut v = self.budgets.clone();
        v.push(self.budget);
        v.sort_unstable();
        v.dedup();
        v
    }

    /// The checks named by `targets`, in registry order.
    pub fn selected(&self) -> Result<Vec<&'static CheckSpec>> {
        if let Some(bad) = self.targets.iter().find(|t| *t != "all" && !CHECKS.iter().any(|c| c.id == t.as_str())) {
            return Err(Error::Config(format!("unknown target {bad:?}")));
        }
        let all = self.targets.iter().any(|t| t == "all");
        Ok(CHECKS.iter().filter(|c| all || self.targets.iter().any(|t| t == c.id)).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Inconclusive,
    ReportOnly,
}

impl CheckStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Inconclusive => "inconclusive",
            CheckStatus::ReportOnly => "report-only",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: CheckStatus,
    /// Invariant ids this check asserts.
    pub covers: Vec<String>,
    /// Exact values, as strings.
    pub values: BTreeMap<String, String>,
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub id: String,
    pub checks: Vec<CheckRecord>,
}

impl Report {
    /// True when every asserted check passed; report-only records are ignored.
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| matches!(c.status, CheckStatus::Pass | CheckStatus::ReportOnly))
    }

    pub fn count(&self, status: CheckStatus) -> usize {
        self.checks.iter().filter(|c| c.status == status).count()
    }

    pub fn get(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// The report with elapsed times zeroed, for determinism comparisons.
    pub fn masked(&self) -> Report {
        let mut r = self.clone();
        for c in &mut r.checks {
            c.elapsed_ms = 0;
        }
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// One row per check: name, status, elapsed, and `key=value` pairs.
    pub fn write_csv(&self, w: impl std::io::Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["name", "status", "elapsed_ms", "values"])?;
        for c in &self.checks {
            let values = c.values.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join("; ");
            out.write_record([c.name.as_str(), c.status.as_str(), &c.elapsed_ms.to_string(), &values])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Runs the selected checks and writes the report files named in `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let store = CacheStore::new(cfg.cache_dir.clone())?;
    let report = run_with_store(cfg, &store)?;
    if let Some(path) = &cfg.report {
        create_parent(path)?;
        fs::write(path, report.to_json())?;
    }
    if let Some(path) = &cfg.csv {
        create_parent(path)?;
        report.write_csv(fs::File::create(path)?)?;
    }
    Ok(report)
}

/// Runs the selected checks against `store` without writing anything.
pub fn run_with_store(cfg: &ExperimentConfig, store: &CacheStore) -> Result<Report> {
    cfg.validate()?;
    let selected = cfg.selected()?;
    // One OS thread per check rather than rayon tasks: a check blocked on a
    // parallel enumeration must not pick up other checks on the same worker.
    let checks = std::thread::scope(|scope| {
        let handles: Vec<_> = selected
            .iter()
            .map(|spec| {
                scope.spawn(move || {
                    let start = Instant::now();
                    let ctx = checks::Ctx::new(cfg, store, spec.id);
                    let outcome = (spec.run)(&ctx).unwrap_or_else(checks::Outcome::errored);
                    let elapsed_ms = start.elapsed().as_millis() as u64;
                    outcome.into_record(spec, elapsed_ms)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("check thread panicked")).collect()
    });
    Ok(Report { id: cfg.id.clone(), checks })
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(())
}
