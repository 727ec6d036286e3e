use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ait_core::harness::{run_experiment, ExperimentConfig};
use ait_core::machine::{cache_gc, cache_merge_files, complexity_c, complexity_k, enumerate, EnumerationCache, MachineMode};
use ait_core::measures::{entropy, prokhorov, tv_distance, wasserstein, FiniteMeasure, MetricSpec};
use ait_core::num::{fmt_rational, to_f64};
use ait_core::randomness::{
    bernoulli_validate, conservation_report, integrable_check, lln_test, ml_check, BernoulliTestTable,
    DistributionSpec, StringMap, TestTable,
};
use ait_core::semimeasure::{coding_code, omega_t, EnumerationStream};
use ait_core::{BitString, Interval};
use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "ait", version, about = "Exact experiments with a toy universal machine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate every program up to a length and write the cache file.
    Enumerate {
        #[arg(long, default_value = "sd")]
        mode: MachineMode,
        #[arg(long)]
        max_len: usize,
        #[arg(long)]
        budget: u64,
        #[arg(long, default_value = "")]
        cond: BitString,
        #[arg(long)]
        cache: PathBuf,
    },
    /// Upper bound on K (sd cache) or C (em cache) of a string.
    K {
        #[arg(long)]
        x: BitString,
        #[arg(long, default_value = "")]
        cond: BitString,
        #[arg(long)]
        cache: PathBuf,
    },
    /// The halting probability of a window, exact.
    Omega {
        #[arg(long)]
        max_len: usize,
        #[arg(long)]
        budget: u64,
    },
    /// Build the prefix code for an enumeration stream file.
    CodingCode {
        #[arg(long)]
        stream: PathBuf,
    },
    /// The law-of-large-numbers test on one string.
    Lln {
        #[arg(long)]
        x: BitString,
        #[arg(long, default_value_t = 40)]
        bits: u32,
    },
    /// Integrability and the level-set condition of a test under a distribution.
    CheckTest {
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        dist: PathBuf,
    },
    /// Validate a Bernoulli test table.
    BernoulliValidate {
        #[arg(long)]
        table: PathBuf,
    },
    /// Conservation of randomness under a map on the uniform distribution.
    Conserve {
        #[arg(long)]
        map: StringMap,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        cache: PathBuf,
        #[arg(long, default_value_t = 40)]
        bits: u32,
    },
    /// Shannon entropy of a finite measure.
    Entropy {
        #[arg(long)]
        dist: PathBuf,
    },
    /// Distance between two measures on a finite metric space.
    Distance {
        #[arg(long)]
        kind: DistanceKind,
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        /// Required for prokhorov and wasserstein.
        #[arg(long)]
        metric: Option<PathBuf>,
    },
    /// Run an experiment config.
    Run {
        config: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Merge cache files of the same machine into one.
    CacheMerge {
        #[arg(long, short)]
        out: PathBuf,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Remove cache files subsumed by another file in the directory.
    CacheGc { dir: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum DistanceKind {
    Tv,
    Prokhorov,
    Wasserstein,
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn interval(iv: &Interval) -> Value {
    json!({ "lo": fmt_rational(&iv.lo), "hi": fmt_rational(&iv.hi), "approx": iv.midpoint_f64() })
}

fn print(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("values serialize"));
}

/// Runs one subcommand. `Ok(false)` means it ran but a checked property failed.
fn execute(command: Command) -> anyhow::Result<bool> {
    match command {
        Command::Enumerate { mode, max_len, budget, cond, cache } => {
            let c = enumerate(mode, &cond, max_len, budget)?;
            c.save(&cache).with_context(|| format!("writing {}", cache.display()))?;
            let halted = c.iter().filter(|(_, o)| o.status == ait_core::machine::Status::Halted).count();
            print(&json!({ "programs": c.len(), "halted": halted, "cache": cache }));
            Ok(true)
        }
        Command::K { x, cond, cache } => {
            let c = EnumerationCache::load(&cache).with_context(|| format!("loading {}", cache.display()))?;
            if c.condition() != &cond {
                bail!("cache was enumerated under condition {:?}, not {:?}", c.condition().to_string(), cond.to_string());
            }
            let (name, value) = match c.mode() {
                MachineMode::SelfDelimiting => ("k", complexity_k(&c, &x)?),
                MachineMode::EndMarked => ("c", complexity_c(&c, &x)?),
                MachineMode::Monotone => bail!("monotone caches have no K or C; use an sd or em cache"),
            };
            print(&json!({ "x": x, "cond": cond, "mode": c.mode(), "max_len": c.max_len(), "budget": c.budget(), name: value }));
            Ok(true)
        }
        Command::Omega { max_len, budget } => {
            let c = enumerate(MachineMode::SelfDelimiting, &BitString::empty(), max_len, budget)?;
            let omega = omega_t(&c)?;
            print(&json!({ "omega": omega.to_string(), "approx": to_f64(&omega.to_rational()) }));
            Ok(true)
        }
        Command::CodingCode { stream } => {
            let text = std::fs::read_to_string(&stream).with_context(|| format!("reading {}", stream.display()))?;
            let s: EnumerationStream = text.parse()?;
            print(&serde_json::to_value(coding_code(&s))?);
            Ok(true)
        }
        Command::Lln { x, bits } => {
            let v = lln_test(&x, bits)?;
            print(&json!({ "x": x, "payoff": fmt_rational(&v.payoff), "d": interval(&v.d) }));
            Ok(true)
        }
        Command::CheckTest { test, dist } => {
            let t: TestTable = read_json(&test)?;
            t.validate()?;
            let p: DistributionSpec = read_json(&dist)?;
            p.validate()?;
            let integrable = integrable_check(&t, &p)?;
            let ml = ml_check(&t, &p)?;
            let ok = integrable.integrable && ml.passes;
            print(&json!({ "integrable": integrable, "ml": ml }));
            Ok(ok)
        }
        Command::BernoulliValidate { table } => {
            let f: BernoulliTestTable = read_json(&table)?;
            let v = bernoulli_validate(&f);
            print(&serde_json::to_value(&v)?);
            Ok(v.valid)
        }
        Command::Conserve { map, n, cache, bits } => {
            let c = EnumerationCache::load(&cache).with_context(|| format!("loading {}", cache.display()))?;
            let r = conservation_report(map, &DistributionSpec::Uniform { n }, &c, bits)?;
            print(&json!({
                "pulled_back_expectation": fmt_rational(&r.pulled_back_expectation),
                "image_kraft": fmt_rational(&r.image_kraft),
                "integrable": r.integrable,
                "missing": r.missing,
                "max_gap": r.max_gap.as_ref().map(interval),
            }));
            Ok(r.integrable)
        }
        Command::Entropy { dist } => {
            let p: FiniteMeasure = read_json(&dist)?;
            print(&json!({ "entropy": interval(&entropy(&p)?) }));
            Ok(true)
        }
        Command::Distance { kind, p, q, metric } => {
            let p: FiniteMeasure = read_json(&p)?;
            let q: FiniteMeasure = read_json(&q)?;
            let metric = || -> anyhow::Result<MetricSpec> {
                let path = metric.as_ref().context("--metric is required for this distance")?;
                read_json(path)
            };
            let d = match kind {
                DistanceKind::Tv => tv_distance(&p, &q)?,
                DistanceKind::Prokhorov => prokhorov(&p, &q, &metric()?)?,
                DistanceKind::Wasserstein => wasserstein(&p, &q, &metric()?)?,
            };
            print(&json!({ "distance": fmt_rational(&d), "approx": to_f64(&d) }));
            Ok(true)
        }
        Command::Run { config, report, csv, cache_dir } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            cfg.report = report.or(cfg.report);
            cfg.csv = csv.or(cfg.csv);
            cfg.cache_dir = cache_dir.or(cfg.cache_dir);
            let r = run_experiment(&cfg)?;
            for c in &r.checks {
                println!("{:<32} {:<12} {:>6} ms", c.name, c.status.as_str(), c.elapsed_ms);
            }
            Ok(r.all_passed())
        }
        Command::CacheMerge { out, inputs } => {
            let merged = cache_merge_files(&inputs)?;
            merged.save(&out).with_context(|| format!("writing {}", out.display()))?;
            print(&json!({ "programs": merged.len(), "max_len": merged.max_len(), "budget": merged.budget() }));
            Ok(true)
        }
        Command::CacheGc { dir } => {
            for p in cache_gc(&dir)? {
                println!("removed {}", p.display());
            }
            Ok(true)
        }
    }
}
