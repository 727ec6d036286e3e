use std::collections::BTreeMap;
use std::fmt::Display;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sample;
use super::{CacheStore, CheckRecord, CheckStatus, ExperimentConfig};
use crate::bits::BitString;
use crate::codec::{
    beta, cnv, cnv_small, elias_delta, elias_delta_decode, kraft_construct, kraft_sum, pad_terminate, pair,
    parse_pad_terminated, prefix_free_check, shannon_fano, unpair, LogStarSums, WeightVector,
};
use crate::error::{Error, Result};
use crate::machine::{
    complexity_c, complexity_k, d0, domain_kraft_sum, run, stats_count_below, stats_gn, EnumerationCache, MachineMode,
};
use crate::measures::{
    entropy, expected_complexity, optimal_transport, prokhorov, prokhorov_report, relative_entropy_at,
    semimeasure_validate, seq_semimeasure_validate, tv_distance, wasserstein, FiniteMeasure, MetricSpec,
    RelativeEntropy,
};
use crate::num::{fmt_rational, int, pow2, ratio, to_f64, Dyadic, Rational};
use crate::randomness::{
    bernoulli_extend, bernoulli_validate, conservation_report, deviation_exceeds, gap_check, integrable_check,
    lln_table, ml_check, DistributionSpec, GapFunction, StringMap,
};
use crate::semimeasure::{coding_code, km, m_t, m_table, mixture, monotone_m, monotone_table, omega_t, EnumerationStream};

/// A named check and the invariants it asserts.
pub struct CheckSpec {
    pub id: &'static str,
    pub covers: &'static [&'static str],
    pub(crate) run: fn(&Ctx) -> Result<Outcome>,
}

/// Every invariant that some check must assert.
pub const INVARIANTS: &[&str] = &[
    "codec.kraft-prefix-free",
    "codec.kraft-lengths",
    "codec.shannon-fano-length",
    "codec.shannon-fano-order",
    "codec.cnv-injective",
    "codec.cnv-length",
    "codec.pad-roundtrip",
    "codec.pairing-bijection",
    "codec.elias-prefix-free",
    "codec.log-star-monotone",
    "machine.prefix-free",
    "machine.kraft",
    "machine.counting",
    "machine.refinement",
    "machine.determinism",
    "machine.c-le-k",
    "semimeasure.omega-sum",
    "semimeasure.refinement",
    "semimeasure.coding-code",
    "semimeasure.seq-valid",
    "semimeasure.mixture",
    "randomness.lln",
    "randomness.integrable-implies-ml",
    "randomness.bernoulli-extend",
    "randomness.gap-telescoping",
    "randomness.conservation",
    "randomness.deficiency-kraft",
    "randomness.separating-float",
    "measures.kl",
    "measures.entropy-permutation",
    "measures.distance-metric",
    "measures.w-rho",
    "measures.transport-optimal",
    "measures.prokhorov-brute-force",
    "measures.shannon-bound",
    "measures.semimeasure-validate",
];

pub const CHECKS: &[CheckSpec] = &[
    CheckSpec { id: "codec.kraft", covers: &["codec.kraft-prefix-free", "codec.kraft-lengths"], run: codec_kraft },
    CheckSpec {
        id: "codec.shannon-fano",
        covers: &["codec.kraft-prefix-free", "codec.shannon-fano-length", "codec.shannon-fano-order"],
        run: codec_shannon_fano,
    },
    CheckSpec { id: "codec.cnv", covers: &["codec.cnv-injective", "codec.cnv-length"], run: codec_cnv },
    CheckSpec { id: "codec.pad-roundtrip", covers: &["codec.pad-roundtrip"], run: codec_pad },
    CheckSpec { id: "codec.pairing", covers: &["codec.pairing-bijection"], run: codec_pairing },
    CheckSpec { id: "codec.elias-delta", covers: &["codec.elias-prefix-free"], run: codec_elias },
    CheckSpec { id: "codec.log-star", covers: &["codec.log-star-monotone"], run: codec_log_star },
    CheckSpec { id: "machine.domain", covers: &["machine.prefix-free", "machine.kraft"], run: machine_domain },
    CheckSpec { id: "machine.counting", covers: &["machine.counting"], run: machine_counting },
    CheckSpec { id: "machine.refinement", covers: &["machine.refinement"], run: machine_refinement },
    CheckSpec { id: "machine.determinism", covers: &["machine.determinism"], run: machine_determinism },
    CheckSpec { id: "machine.c-le-k", covers: &["machine.c-le-k"], run: machine_c_le_k },
    CheckSpec { id: "semimeasure.omega", covers: &["semimeasure.omega-sum"], run: semimeasure_omega },
    CheckSpec { id: "semimeasure.refinement", covers: &["semimeasure.refinement"], run: semimeasure_refinement },
    CheckSpec { id: "semimeasure.coding-code", covers: &["semimeasure.coding-code"], run: semimeasure_coding },
    CheckSpec {
        id: "semimeasure.tables",
        covers: &["semimeasure.seq-valid", "measures.semimeasure-validate"],
        run: semimeasure_tables,
    },
    CheckSpec { id: "semimeasure.mixture", covers: &["semimeasure.mixture"], run: semimeasure_mixture },
    CheckSpec { id: "randomness.lln", covers: &["randomness.lln"], run: randomness_lln },
    CheckSpec {
        id: "randomness.integrable-ml",
        covers: &["randomness.integrable-implies-ml"],
        run: randomness_integrable_ml,
    },
    CheckSpec {
        id: "randomness.bernoulli-extend",
        covers: &["randomness.bernoulli-extend"],
        run: randomness_bernoulli,
    },
    CheckSpec { id: "randomness.gap", covers: &["randomness.gap-telescoping"], run: randomness_gap },
    CheckSpec { id: "randomness.conservation", covers: &["randomness.conservation"], run: randomness_conservation },
    CheckSpec { id: "randomness.deficiency", covers: &["randomness.deficiency-kraft"], run: randomness_deficiency },
    CheckSpec { id: "randomness.separating", covers: &["randomness.separating-float"], run: randomness_separating },
    CheckSpec { id: "measures.kl", covers: &["measures.kl"], run: measures_kl },
    CheckSpec { id: "measures.entropy", covers: &["measures.entropy-permutation"], run: measures_entropy },
    CheckSpec {
        id: "measures.distances",
        covers: &[
            "measures.distance-metric",
            "measures.w-rho",
            "measures.transport-optimal",
            "measures.prokhorov-brute-force",
        ],
        run: measures_distances,
    },
    CheckSpec {
        id: "measures.expected-complexity",
        covers: &["measures.shannon-bound"],
        run: measures_expected_complexity,
    },
    CheckSpec { id: "report.strings", covers: &[], run: report_strings },
    CheckSpec { id: "report.stats", covers: &[], run: report_stats },
];

pub fn check_ids() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.id).collect()
}

pub(crate) struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    store: &'a CacheStore,
    id: &'static str,
}

impl<'a> Ctx<'a> {
    pub(crate) fn new(cfg: &'a ExperimentConfig, store: &'a CacheStore, id: &'static str) -> Self {
        Self { cfg, store, id }
    }

    /// A generator seeded from the config seed and the check id, so checks
    /// draw independent streams regardless of scheduling.
    fn rng(&self) -> ChaCha8Rng {
        // FNV-1a
        let h = self.id.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3));
        ChaCha8Rng::seed_from_u64(self.cfg.seed ^ h)
    }

    fn cache(&self, mode: MachineMode, cond: &BitString, max_len: usize, budget: u64) -> Result<Arc<EnumerationCache>> {
        self.store.get(mode, cond, max_len, budget)
    }

    fn top(&self, mode: MachineMode) -> Result<Arc<EnumerationCache>> {
        self.cache(mode, &BitString::empty(), self.cfg.max_len, self.cfg.budget)
    }

    /// Window pairs `(smaller, larger)` for the refinement checks: consecutive
    /// budgets at full length, and one length less at the full budget.
    fn window_pairs(&self) -> Vec<((usize, u64), (usize, u64))> {
        let l = self.cfg.max_len;
        let ladder = self.cfg.ladder();
        let mut pairs: Vec<_> = ladder.windows(2).map(|w| ((l, w[0]), (l, w[1]))).collect();
        if l > 1 {
            pairs.push(((l - 1, self.cfg.budget), (l, self.cfg.budget)));
        }
        pairs
    }

    fn samples(&self) -> usize {
        self.cfg.samples
    }
}

#[derive(Default)]
pub(crate) struct Outcome {
    values: BTreeMap<String, String>,
    failures: Vec<String>,
    inconclusive: Vec<String>,
    cases: u64,
    report_only: bool,
}

impl Outcome {
    fn report_only() -> Self {
        Self { report_only: true, ..Self::default() }
    }

    pub(crate) fn errored(e: Error) -> Self {
        let mut o = Self::default();
        o.failures.push(format!("error: {e}"));
        o
    }

    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn undecided(&mut self, what: impl FnOnce() -> String) {
        self.cases += 1;
        self.inconclusive.push(what());
    }

    fn value(&mut self, key: impl Into<String>, v: impl Display) {
        self.values.insert(key.into(), v.to_string());
    }

    pub(crate) fn into_record(mut self, spec: &CheckSpec, elapsed_ms: u64) -> CheckRecord {
        let status = if !self.failures.is_empty() {
            CheckStatus::Fail
        } else if !self.inconclusive.is_empty() {
            CheckStatus::Inconclusive
        } else if self.report_only {
            CheckStatus::ReportOnly
        } else {
            CheckStatus::Pass
        };
        if !self.report_only || !self.failures.is_empty() {
            self.value("cases", self.cases);
            self.value("failures", self.failures.len());
        }
        if let Some(f) = self.failures.first() {
            self.values.insert("first_failure".into(), f.clone());
        }
        if let Some(f) = self.inconclusive.first() {
            self.values.insert("first_inconclusive".into(), format!("{f}; raise precision"));
        }
        CheckRecord {
            name: spec.id.to_string(),
            status,
            covers: spec.covers.iter().map(|s| s.to_string()).collect(),
            values: self.values,
            elapsed_ms,
        }
    }
}

/// Smallest `c ≥ 0` with `2^(−c) ≤ w`, i.e. `⌈−log₂ w⌉` for `0 < w ≤ 1`.
fn ceil_neg_log2(w: &Rational) -> usize {
    let mut c = 0;
    while pow2(-(c as i64)) > *w {
        c += 1;
    }
    c
}

fn codec_kraft(ctx: &Ctx) -> Result<Outcome> {
    let mut rng = ctx.rng();
    let mut o = Outcome::default();
    let mut rejected = 0;
    for _ in 0..ctx.samples() {
        let (lens, invalid) = sample::lengths(&mut rng);
        let words: Vec<BitString> = kraft_construct(&lens)?.codewords().cloned().collect();
        o.require(words.iter().map(BitString::len).eq(lens.iter().copied()), || {
            format!("lengths {lens:?} not reproduced")
        });
        o.require(prefix_free_check(&words), || format!("code for {lens:?} is not prefix-free"));
        o.require(kraft_sum(&words) <= Dyadic::one(), || format!("kraft sum above 1 for {lens:?}"));
        if let Some(bad) = invalid {
            rejected += 1;
            o.require(matches!(kraft_construct(&bad), Err(Error::KraftExceeded { .. })), || {
                format!("{bad:?} accepted")
            });
        }
    }
    o.value("rejected_inputs", rejected);
    Ok(o)
}

fn codec_shannon_fano(ctx: &Ctx) -> Result<Outcome> {
    let mut rng = ctx.rng();
    let mut o = Outcome::default();
    for _ in 0..ctx.samples() {
        let w = sample::weights(&mut rng);
        let code = shannon_fano(&WeightVector::new(w.clone())?);
        let words: Vec<BitString> = code.codewords().cloned().collect();
        o.require(prefix_free_check(&words), || format!("not prefix-free for {w:?}"));
        o.require(kraft_sum(&words) <= Dyadic::one(), || format!("kraft sum above 1 for {w:?}"));
        for (wj, pj) in w.iter().zip(&words) {
            o.require(pj.len() <= ceil_neg_log2(wj) + 2, || format!("codeword {pj} too long for weight {wj}"));
        }
        o.require(words.windows(2).all(|p| p[0] < p[1]), || format!("order not preserved for {w:?}"));
    }
    o.require(WeightVector::new(vec![ratio(1, 2), int(0)]).is_err(), || "zero weight accepted".into());
    o.require(WeightVector::new(vec![ratio(2, 3), ratio(2, 3)]).is_err(), || "weights above 1 accepted".into());
    Ok(o)
}

fn codec_cnv(ctx: &Ctx) -> Result<Outcome> {
    let mut o = Outcome::default();
    let bases = [2u32, 3, 4, 10];
    let mut strings = 0u64;
    let mut sharp_violations = 0u64;
    let mut first_sharp = None;
    for &r in &bases {
        for &s in &bases {
            for n in 0..=ctx.cfg.limits.cnv_max_len as u32 {
                let r_pow = (r as u128).pow(n);
                let mut failures = 0u64;
                let mut over = 0u64;
                // previous output interval's right end, as (j + 1, s^m)
                let mut prev: Option<(u128, u128)> = None;
                for a in 0..r_pow as u64 {
                    let (j, m) = cnv_small(r, s, a, n).ok_or_else(|| Error::Domain("cnv overflow".into()))?;
                    let s_pow = (s as u128).pow(m);
                    // the interval argument gives s^m < 2·s·r^n; the sharper
                    // s^m ≤ s·r^n is only counted
                    let length_ok = s_pow < 2 * s as u128 * r_pow;
                    if s_pow > s as u128 * r_pow {
                        over += 1;
                    }
                    let inside = j * r_pow >= a as u128 * s_pow && (j + 1) * r_pow <= (a as u128 + 1) * s_pow;
                    let disjoint = prev.map_or(true, |(end, den)| j * den >= end * s_pow);
                    if !(length_ok && inside && disjoint) {
                        failures += 1;
                    }
                    prev = Some((j + 1, s_pow));
                    strings += 1;
                }
                o.require(failures == 0, || format!("r={r} s={s} n={n}: {failures} violations"));
                sharp_violations += over;
                if over > 0 && first_sharp.is_none() {
                    first_sharp = Some(format!("r={r} s={s} n={n}"));
                }
            }
            // the digit-level entry point agrees with the numeric one
            for n in 0..=3usize {
                for a in 0..(r as u64).pow(n as u32) {
                    let digits: Vec<u32> = (0..n).rev().map(|i| (a / (r as u64).pow(i as u32) % r as u64) as u32).collect();
                    let z = cnv(r, s, &digits)?;
                    let (_, m) = cnv_small(r, s, a, n as u32).expect("small");
                    o.require(z.len() == m as usize, || format!("cnv({r},{s},{digits:?}) length mismatch"));
                }
            }
        }
    }
    o.value("strings", strings);
    o.value("sharp_bound_violations", sharp_violations);
    o.value("first_sharp_violation", opt(first_sharp));
    Ok(o)
}

fn codec_pad(ctx: &Ctx) -> Result<Outcome> {
    let mut rng = ctx.rng();
    let mut o = Outcome::default();
    for _ in 0..ctx.samples() {
        let (xl, yl) = (rng.gen_range(1..=12), rng.gen_range(0..=12));
        let x = sample::bits(&mut rng, xl);
        let y = sample::bits(&mut rng, yl);
        let p = pad_terminate(&x)?.concat(&y);
        let back = parse_pad_terminated(&p)?;
        o.require(back == (x.clone(), y.clone()), || format!("pad roundtrip failed for {x}, {y}"));
    }
    Ok(o)
}

fn codec_pairing(ctx: &Ctx) -> Result<Outcome> {
    let n = ctx.cfg.limits.pair_max;
    let mut o = Outcome::default();
    let mut bad = 0u64;
    for i in 0..n {
        for j in 0..n {
            if unpair(pair(i, j)) != (i, j) {
                bad += 1;
            }
        }
    }
    o.require(bad == 0, || format!("{bad} pairs fail to round-trip"));
    // every code below n(n+1)/2 comes from a pair inside the square
    let mut outside = 0u64;
    for k in 0..(n as u128 * (n as u128 + 1) / 2) {
        let (i, j) = unpair(k);
        if pair(i, j) != k || i >= n || j >= n {
            outside += 1;
        }
    }
    o.require(outside == 0, || format!("{outside} codes do not invert"));
    o.value("square", n);
    Ok(o)
}

fn codec_elias(ctx: &Ctx) -> Result<Outcome> {
    let max = ctx.cfg.limits.elias_max;
    let mut o = Outcome::default();
    let mut words = Vec::with_capacity(max as usize);
    let mut bad = 0u64;
    for n in 1..=max {
        let w = elias_delta(n)?;
        if elias_delta_decode(&w)? != (n, BitString::empty()) {
            bad += 1;
        }
        words.push(w);
    }
    o.require(bad == 0, || format!("{bad} codewords fail to decode"));
    o.require(prefix_free_check(&words), || "image is not prefix-free".into());
    o.value("max_n", max);
    Ok(o)
}

fn codec_log_star(ctx: &Ctx) -> Result<Outcome> {
    let max = ctx.cfg.limits.log_star_max.max(1);
    let mut o = Outcome::default();
    let mut prev = Rational::zero();
    let mut last = None;
    let mut bad = 0u64;
    for (_, iv) in LogStarSums::new().take(max as usize) {
        if iv.lo < prev || iv.hi < iv.lo {
            bad += 1;
        }
        prev = iv.lo.clone();
        last = Some(iv);
    }
    o.require(bad == 0, || format!("{bad} partial sums decrease"));
    let last = last.expect("at least one term");
    o.value("max_n", max);
    o.value("partial_sum_lo", to_f64(&last.lo));
    o.value("partial_sum_hi", to_f64(&last.hi));
    o.value("below_3", last.hi < int(3));
    Ok(o)
}

fn machine_domain(ctx: &Ctx) -> Result<Outcome> {
    let mut o = Outcome::default();
    for t in ctx.cfg.ladder() {
        let c = ctx.cache(MachineMode::SelfDelimiting, &BitString::empty(), ctx.cfg.max_len, t)?;
        let programs: Vec<BitString> = c.domain().map(|(p, _)| p).collect();
        o.require(prefix_free_check(&programs), || format!("domain at t={t} is not prefix-free"));
        let sum = domain_kraft_sum(&c);
        o.require(sum <= Dyadic::one(), || format!("kraft sum {sum} at t={t}"));
        o.value(format!("t={t}:domain"), programs.len());
        o.value(format!("t={t}:kraft"), sum);
    }
    Ok(o)
}

fn conditions(cfg: &ExperimentConfig) -> Vec<BitString> {
    if cfg.conditions.is_empty() {
        vec![BitString::empty()]
    } else {
        cfg.conditions.clone()
    }
}

fn machine_counting(ctx: &Ctx) -> Result<Outcome> {
    let mut o = Outcome::default();
    for cond in conditions(ctx.cfg) {
        for mode in [MachineMode::SelfDelimiting, MachineMode::EndMarked] {
            let c = ctx.cache(mode, &cond, ctx.cfg.max_len, ctx.cfg.budget)?;
            for u in 0..=ctx.cfg.max_len {
                let count = stats_count_below(&c, u)?;
                o.require((count as u128) < 1u128 << (u + 1), || format!("{mode} cond={cond}: {count} strings at u={u}"));
            }
            o.value(format!("{mode}:cond={cond}:count"), stats_count_below(&c, ctx.cfg.max_len)?);
        }
    }
    Ok(o)
}

fn machine_refinement(ctx: &Ctx) -> Result<Outcome> {
    let mut o = Outcome::default();
    for mode in [MachineMode::SelfDelimiting, MachineMode::EndMarked] {
        for ((l0, t0), (l1, t1)) in ctx.window_pairs() {
            let small = ctx.cache(mode, &BitString::empty(), l0, t0)?;
            let large = ctx.cache(mode, &BitString::empty(), l1, t1)?;
            for (x, &k) in small.shortest_table() {
                let k1 = large.shortest(x);
                o.require(k1.is_some_and(|k1| k1 <= k), || {
                    format!("{mode} {x:?}: {k} at (L={l0},t={t0}) but {k1:?} at (L={l1},t={t1})")
                });
            }
        }
    }
    Ok(o)
}

fn machine_determinism(ctx: &Ctx) -> Result<Outcome> {
    let mut rng = ctx.rng();
    let mut o = Outcome::default();
    for mode in [MachineMode::SelfDelimiting, MachineMode::EndMarked, MachineMode::Monotone] {
        let c = ctx.top(mode)?;
        for _ in 0..ctx.samples() {
            let len = rng.gen_range(0..=ctx.cfg.max_len);
            let p = sample::bits(&mut rng, len);
            let a = run(mode, &p, &BitString::empty(), ctx.cfg.budget);
            let b = run(mode, &p, &BitString::empty(), ctx.cfg.budget);
            o.require(a == b && c.get(&p) == Some(&a), || format!("{mode} run of {p:?} is not reproducible"));
        }
    }
    Ok(o)
}

fn machine_c_le_k(ctx: &Ctx) -> Result<Outcome> {
    let mut o = Outcome::default();
    let sd = ctx.top(MachineMode::SelfDelimiting)?;
    let em = ctx.top(MachineMode::EndMarked)?;
    let mut compared = 0;
    for (x, &k) in sd.shortest_table() {
        if let Some(c) = complexity_c(&em, x)? {
            compared += 1;
            o.require(c <= k, || format!("C({x:?}) = {c} > K = {k}"));
        }
    }
    o.value("compared", compared);
    Ok(o)
}

fn semimeasure_omega(ctx: &Ctx) -> Result<Outcome> {
    let mut o = Outcome::default();
    for t in ctx.cfg.ladder() {
        let c = ctx.cache(MachineMode::SelfDelimiting, &BitString::empty(), ctx.cfg.max_len, t)?;
        let omega = omega_t(&c)?;
        let total = m_table(&c)?.total();
        o.require(omega <= Dyadic::one(), || format!("omega {omega} above 1 at t={t}"));
        o.require(total == omega, || format!("sum of m is {total}, omega is {omega} at t={t}"));
        o.value(format!("t={t}:omega"), omega);
    }
    Ok(o)
}

fn semimeasure_refinement(ctx: &Ctx) -> Result<Outcome> {
    let mut o = Outcome::default();
    let empty = BitString::empty();
    for ((l0, t0), (l1, t1)) in ctx.window_pairs() {
        let small = ctx.cache(MachineMode::SelfDelimiting, &empty, l0, t0)?;
        let large = ctx.cache(MachineMode::SelfDelimiting, &empty, l1, t1)?;
        for (x, m) in m_table(&small)?.masses() {
            let m1 = m_t(&large, x)?;
            o.require(*m <= m1, || format!("m({x:?}) drops from {m} to {m1}"));
        }
        let (w0, w1) = (omega_t(&small)?, omega_t(&large)?);
        o.require(w0 <= w1, || format!("omega drops from {w0} to {w1}"));
        let small = ctx.cache(MachineMode::Monotone, &empty, l0, t0)?;
        let large = ctx.cache(MachineMode::Monotone, &empty, l1, t1)?;
        for (x, m) in monotone_table(&small)?.masses() {
            let m1 = monotone_m(&large, x)?;
            o.require(*m <= m1, || format!("monotone m({x:?}) drops from {m} to {m1}"));
        }
    }
    Ok(o)
}

fn semimeasure_coding(ctx: &Ctx) -> Result<Outcome> {
    let mut rng = ctx.rng();
    let mut o = Outcome::default();
    for _ in 0..ctx.samples() {
        let stream = EnumerationStream::new(sample::stream(&mut rng))?;
        let code = coding_code(&stream);
        let words: Vec<BitString> = code.codewords().cloned().collect();
        o.require(prefix_free_check(&words), || format!("code for {stream} is not prefix-free"));
        for entry in code.entries() {
            let z: BitString = entry.label.parse()?;
            let k = stream.items().iter().filter(|(y, _)| *y == z).map(|(_, k)| *k).min().expect("claimed");
            o.require(entry.codeword.len() <= k as usize + 3, || {
                format!("codeword for {z:?} has {} bits, k = {k}", entry.codeword.len())
            });
        }
    }
    Ok(o)
}

fn semimeasure_tables(ctx: &Ctx) -> Result<Outcome> {
    let mut o = Outcome::default();
    let m = m_table(&*ctx.top(MachineMode::SelfDelimiting)?)?;
    let v = semimeasure_validate(m.masses());
    o.require(v.valid, || format!("m table rejected: {:?}", v.reason));
    let mono = monotone_table(&*ctx.top(MachineMode::Monotone)?)?;
    o.require(mono.validate().is_ok(), || "monotone table fails its own validation".into());
    let v = seq_semimeasure_validate(mono.masses());
    o.require(v.valid, || format!("monotone table rejected: {:?}", v.reason));
    o.value("monotone_nodes", mono.masses().len());

    let d = |q: (u32, u64)| Dyadic::new(q.0.into(), q.1);
    let table = |entries: &[(&str, (u32, u64))]| -> BTreeMap<BitString, Dyadic> {
        entries.iter().map(|(x, q)| (x.parse().expect("literal"), d(*q))).collect()
    };
    let zeros = table(&[("", (0, 0)), ("0", (0, 0))]);
    o.require(seq_semimeasure_validate(&zeros).valid && semimeasure_validate(&zeros).valid, || "zero table rejected".into());
    let tight = table(&[("", (1, 0)), ("0", (1, 1)), ("1", (1, 1))]);
    o.require(seq_semimeasure_validate(&tight).valid, || "equality case rejected".into());
    let over = table(&[("", (1, 0)), ("0", (3, 2)), ("1", (1, 1))]);
    o.require(!seq_semimeasure_validate(&over).valid, || "overfull children accepted".into());
    Ok(o)
}

fn semimeasure_mixture(ctx: &Ctx) -> Result<Outcome> {
    let mut rng = ctx.rng();
    let mut o = Outcome::default();
    let l = ctx.cfg.max_len;
    let tables = [l, l.saturating_sub(1).max(1), l.saturating_sub(2).max(1)]
        .iter()
        .map(|&len| m_table(&*ctx.cache(MachineMode::SelfDelimiting, &BitString::empty(), len, ctx.cfg.budget)?))
        .collect::<Result<Vec<_>>>()?;
    let weight = |rng: &mut ChaCha8Rng| Dyadic::new(rng.gen_range(0u32..=8).into(), 4);
    for _ in 0..ctx.samples() {
        let (w1, w2) = (weight(&mut rng), weight(&mut rng));
        let (v1, v2) = (weight(&mut rng), weight(&mut rng));
        let ab = mixture(&tables[..2], &[w1.clone(), w2.clone()])?;
        o.require(ab.total() <= Dyadic::one(), || "mixture exceeds 1".into());
        let left = mixture(&[ab, tables[2].clone()], &[v1.clone(), v2.clone()])?;
        let flat = mixture(&tables, &[&v1 * &w1, &v1 * &w2, v2])?;
        o.require(left == flat, || "mixture is not associative".into());
    }
    Ok(o)
}

fn randomness_lln(ctx: &Ctx) -> Result<Outcome> {
    let mut o = Outcome::default();
    for n in 1..=ctx.cfg.limits.lln_max_n {
        let v = integrable_check(&lln_table(n)?, &DistributionSpec::Uniform { n })?;
        o.require(v.expectation <= Rational::one(), || format!("n={n}: expectation {}", v.expectation));
        o.value(format!("n={n:02}"), fmt_rational(&v.expectation));
    }
    Ok(o)
}

fn randomness_integrable_ml(ctx: &Ctx) -> Result<Outcome> {
    let mut rng = ctx.rng();
    let mut o = Outcome::default();
    let mut integrable = 0;
    for _ in 0..ctx.samples() {
        let n = rng.gen_range(1..=6);
        let p = sample::distribution(&mut rng, n);
        let mut t = sample::test_table(&mut rng, n);
        let e = integrable_check(&t, &p)?.expectation;
        // every other case is scaled to expectation exactly 1
        if rng.gen_bool(0.5) && e.is_positive() {
            t = crate::randomness::TestTable::new(n, t.values.iter().map(|(x, v)| (x.clone(), v / &e)).collect())?;
        }
        if integrable_check(&t, &p)?.integrable {
            integrable += 1;
            let ml = ml_check(&t, &p)?;
            o.require(ml.passes, || format!("integrable table fails the level test: {:?}", ml.failure));
        }
    }
    o.value("integrable_cases", integrable);
    Ok(o)
}

fn randomness_bernoulli(ctx: &Ctx) -> Result<Outcome> {
    let mut rng = ctx.rng();
    let mut o = Outcome::default();
    for _ in 0..ctx.samples() {
        let n = rng.gen_range(0..=ctx.cfg.limits.bernoulli_max_n);
        let f = sample::bernoulli_table(&mut rng, n);
        o.require(bernoulli_validate(&f).valid, || format!("generated table of depth {n} invalid"));
        let g = bernoulli_extend(&f)?;
        let v = bernoulli_validate(&g);
        o.require(v.valid, || format!("extension invalid: {:?}", v.violation));
        o.require(g.restrict(n) == f, || "extension changed the original values".into());
    }
    Ok(o)
}

/// `⌈log₂ n(n+1)⌉` by integer arithmetic.
fn gap_d(n: usize, _k: usize) -> u32 {
    let v = (n * (n + 1)) as u64;
    v.next_power_of_two().trailing_zeros()
}

fn randomness_gap(ctx: &Ctx) -> Result<Outcome> {
    let mut o = Outcome::default();
    let n_max = ctx.cfg.limits.gap_max_n;
    let d = GapFunction::from_fn(n_max, gap_d);
    // Σ_{n > N} 2^(−D(n,k)) ≤ Σ_{n > N} 1/(n(n+1)) = 1/(N+1)
    let tail = ratio(1, n_max as i64 + 1);
    let grid: Vec<Rational> = (0..=10).map(|i| ratio(i, 10)).collect();
    for c in gap_check(&d, &grid, &tail)? {
        o.require(c.passes, || format!("p={}: partial sum {}", c.p, c.partial_sum));
        o.value(format!("p={}", fmt_rational(&c.p)), fmt_rational(&c.partial_sum));
    }
    Ok(o)
}

fn randomness_conservation(ctx: &Ctx) -> Result<Outcome> {
    let mut o = Outcome::default();
    let c = ctx.top(MachineMode::SelfDelimiting)?;
    let mut dists: Vec<DistributionSpec> =
        (1..=ctx.cfg.limits.conserve_max_n).map(|n| DistributionSpec::Uniform { n }).collect();
    dists.extend(ctx.cfg.distributions.iter().filter(|d| d.length().is_some_and(|n| n >= 1)).cloned());
    let mut worst = Rational::zero();
    for f in [StringMap::Identity, StringMap::DropLast, StringMap::ParityExtend] {
        for p in &dists {
            let r = conservation_report(f, p, &c, ctx.cfg.precision)?;
            o.require(r.pulled_back_expectation <= Rational::one(), || {
                format!("{f:?} on {p:?}: expectation {}", r.pulled_back_expectation)
            });
            o.require(r.pulled_back_expectation == r.image_kraft, || format!("{f:?} on {p:?}: identity broken"));
            if r.pulled_back_expectation > worst {
                worst = r.pulled_back_expectation.clone();
            }
        }
    }
    o.value("max_expectation", fmt_rational(&worst));
    Ok(o)
}

fn randomness_deficiency(ctx: &Ctx) -> Result<Outcome> {
    let mut o = Outcome::default();
    let c = ctx.top(MachineMode::SelfDelimiting)?;
    let table = c.shortest_table();
    let total: Dyadic = table.values().map(|&k| Dyadic::pow2_neg(k as u64)).sum();
    o.require(total <= Dyadic::one(), || format!("Σ 2^(−K) = {total}"));
    // one shortest witness per string
    let mut witnesses: BTreeMap<BitString, BitString> = BTreeMap::new();
    for (p, out) in c.domain() {
        if table.get(&out.output) == Some(&p.len()) {
            witnesses.entry(out.output.clone()).or_insert(p);
        }
    }
    let words: Vec<BitString> = witnesses.into_values().collect();
    o.require(words.len() == table.len(), || "missing witnesses".into());
    o.require(prefix_free_check(&words), || "witness set is not prefix-free".into());
    o.value("strings", table.len());
    o.value("kraft", total);
    Ok(o)
}

fn randomness_separating(ctx: &Ctx) -> Result<Outcome> {
    let mut rng = ctx.rng();
    let mut o = Outcome::default();
    let target = ctx.samples() * 100;
    let mut skipped = 0;
    let mut checked = 0;
    while checked < target {
        let k: u32 = rng.gen_range(0..24);
        let ones: u64 = rng.gen_range(0..=1u64 << k);
        let p = ratio(rng.gen_range(0..=1000), 1000);
        let delta = (ones as f64 - (1u64 << k) as f64 * to_f64(&p)).abs();
        let threshold = 2f64.powf(0.6 * k as f64);
        if (delta - threshold).abs() < 1e-9 * threshold {
            skipped += 1;
            continue;
        }
        o.require(deviation_exceeds(ones, k, &p) == (delta > threshold), || format!("k={k} ones={ones} p={p}"));
        checked += 1;
    }
    o.value("near_ties_skipped", skipped);
    Ok(o)
}

fn measures_kl(ctx: &Ctx) -> Result<Outcome> {
    let mut rng = ctx.rng();
    let mut o = Outcome::default();
    let bits = ctx.cfg.precision;
    for _ in 0..ctx.samples() {
        let n = rng.gen_range(1..=6);
        let mu = sample::measure(&mut rng, n);
        let nu = if rng.gen_bool(0.2) { mu.clone() } else { sample::measure(&mut rng, n) };
        let mut b = bits;
        loop {
            match relative_entropy_at(&mu, &nu, b)? {
                RelativeEntropy::NegInfinity => {
                    let continuous = mu.masses().iter().zip(nu.masses()).all(|(m, v)| m.is_zero() || v.is_positive());
                    o.require(!continuous, || "−∞ for an absolutely continuous pair".into());
                }
                RelativeEntropy::Finite(iv) if mu == nu => {
                    o.require(iv.lo.is_zero() && iv.hi.is_zero(), || "nonzero value for equal measures".into());
                }
                RelativeEntropy::Finite(iv) => {
                    if iv.hi.is_negative() {
                        o.require(true, String::new);
                    } else if iv.lo.is_positive() {
                        o.require(false, || format!("positive relative entropy {iv:?}"));
                    } else if b >= 16 * bits {
                        o.undecided(|| format!("sign of {iv:?} undecided at {b} bits"));
                    } else {
                        b *= 2;
                        continue;
                    }
                }
            }
            break;
        }
    }
    Ok(o)
}

fn measures_entropy(ctx: &Ctx) -> Result<Outcome> {
    let mut rng = ctx.rng();
    let mut o = Outcome::default();
    let width = pow2(-(ctx.cfg.precision as i64));
    for _ in 0..ctx.samples() {
        let n = rng.gen_range(1..=8);
        let p = sample::measure(&mut rng, n);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let q = FiniteMeasure::from_masses(perm.iter().map(|&i| p.masses()[i].clone()).collect())?;
        let (a, b) = (entropy(&p)?, entropy(&q)?);
        o.require(a.lo <= b.hi && b.lo <= a.hi, || format!("entropy changes under permutation: {a:?} vs {b:?}"));
        o.require(a.width() <= width && b.width() <= width, || "entropy enclosure too wide".into());
    }
    for (masses, h) in [(vec![ratio(1, 2), ratio(1, 2)], int(1)), (vec![int(1)], int(0)), (
        vec![ratio(1, 2), ratio(1, 4), ratio(1, 4)],
        ratio(3, 2),
    )] {
        let iv = entropy(&FiniteMeasure::from_masses(masses)?)?;
        o.require(iv.contains(&h), || format!("entropy {iv:?} misses {h}"));
    }
    Ok(o)
}

/// Smallest candidate `ε` with `μ(A) ≤ ν({d(·, A) ≤ ε}) + ε` for every `A`,
/// over all subsets of the points.
fn prokhorov_brute_force(mu: &FiniteMeasure, nu: &FiniteMeasure, m: &MetricSpec) -> Rational {
    let n = mu.len();
    let subsets: Vec<Vec<usize>> = (0usize..1 << n).map(|a| (0..n).filter(|&i| a >> i & 1 == 1).collect()).collect();
    let nbhd = |a: &[usize], eps: &Rational| -> Rational {
        (0..n).filter(|&j| a.iter().any(|&i| m.d(i, j) <= eps)).map(|j| nu.masses()[j].clone()).sum()
    };
    let mass = |a: &[usize]| -> Rational { a.iter().map(|&i| mu.masses()[i].clone()).sum() };
    let mut radii = vec![int(0), int(1)];
    radii.extend((0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| m.d(i, j).clone()));
    let mut candidates = radii.clone();
    for a in &subsets {
        for r in &radii {
            candidates.push(mass(a) - nbhd(a, r));
        }
    }
    candidates.retain(|c| !c.is_negative() && *c <= int(1));
    candidates.sort();
    candidates.dedup();
    candidates.into_iter().find(|eps| subsets.iter().all(|a| mass(a) <= nbhd(a, eps) + eps)).expect("1 is feasible")
}

fn measures_distances(ctx: &Ctx) -> Result<Outcome> {
    let mut rng = ctx.rng();
    let mut o = Outcome::default();
    let max_points = ctx.cfg.limits.distance_max_points.max(2);
    for _ in 0..ctx.samples() {
        let n = rng.gen_range(2..=max_points);
        let m = sample::metric(&mut rng, n);
        let (p, q, r) = (sample::measure(&mut rng, n), sample::measure(&mut rng, n), sample::measure(&mut rng, n));
        let dists: [(&str, fn(&FiniteMeasure, &FiniteMeasure, &MetricSpec) -> Result<Rational>); 3] = [
            ("tv", |a, b, _| tv_distance(a, b)),
            ("prokhorov", prokhorov),
            ("wasserstein", wasserstein),
        ];
        for (name, f) in dists {
            let pq = f(&p, &q, &m)?;
            o.require(pq == f(&q, &p, &m)?, || format!("{name} is not symmetric"));
            o.require(pq.is_zero() == (p == q), || format!("{name} zero iff equal fails"));
            o.require(f(&p, &p, &m)?.is_zero(), || format!("{name}(p, p) is not 0"));
            let via = f(&p, &r, &m)? + f(&r, &q, &m)?;
            o.require(pq <= via, || format!("{name} triangle inequality fails"));
        }
        let rep = prokhorov_report(&p, &q, &m)?;
        o.require(rep.mu_over_nu == prokhorov_brute_force(&p, &q, &m), || "one-sided prokhorov disagrees".into());
        o.require(rep.nu_over_mu == prokhorov_brute_force(&q, &p, &m), || "one-sided prokhorov disagrees".into());

        let plan = optimal_transport(&p, &q, &m)?;
        let w = plan.cost.clone();
        let mut rows = vec![Rational::zero(); n];
        let mut cols = vec![Rational::zero(); n];
        let mut cost = Rational::zero();
        for (i, j, f) in &plan.moves {
            rows[*i] += f;
            cols[*j] += f;
            cost += f * m.d(*i, *j);
        }
        o.require(rows == p.masses() && cols == q.masses() && cost == w, || "transport plan is not a coupling".into());
        let dual_ok = plan
            .supply_potentials
            .iter()
            .all(|(i, u)| plan.demand_potentials.iter().all(|(j, v)| u + v <= *m.d(*i, *j)));
        let dual: Rational = plan.supply_potentials.iter().map(|(i, u)| u * &p.masses()[*i]).sum::<Rational>()
            + plan.demand_potentials.iter().map(|(j, v)| v * &q.masses()[*j]).sum::<Rational>();
        o.require(dual_ok && dual == w, || "transport optimality certificate fails".into());

        let rho = rep.distance;
        o.require(w <= (m.diameter() + int(1)) * &rho, || format!("W = {w} above (M+1)ρ, ρ = {rho}"));
        o.require(&rho * &rho <= w, || format!("ρ² above W = {w}, ρ = {rho}"));
    }
    Ok(o)
}

fn measures_expected_complexity(ctx: &Ctx) -> Result<Outcome> {
    let mut rng = ctx.rng();
    let mut o = Outcome::default();
    let c = ctx.top(MachineMode::SelfDelimiting)?;
    let reachable: Vec<BitString> = c.shortest_table().keys().cloned().collect();
    if reachable.is_empty() {
        o.value("reachable", 0);
        return Ok(o);
    }
    for _ in 0..ctx.samples() {
        let size = rng.gen_range(1..=reachable.len().min(8));
        let support: Vec<&BitString> = reachable.choose_multiple(&mut rng, size).collect();
        let raw: Vec<i64> = (0..size).map(|_| rng.gen_range(1..=6)).collect();
        let total: i64 = raw.iter().sum();
        let masses = support.into_iter().cloned().zip(raw.iter().map(|&w| ratio(w, total))).collect();
        let p = FiniteMeasure::from_strings(masses)?;
        let e = expected_complexity(&p, &c)?;
        match e.shannon_bound {
            crate::verdict::Verdict::Pass => o.require(true, String::new),
            crate::verdict::Verdict::Fail => o.require(false, || format!("entropy {:?} above {}", e.entropy, e.expectation)),
            crate::verdict::Verdict::Inconclusive => o.undecided(|| format!("entropy {:?} vs {}", e.entropy, e.expectation)),
        }
    }
    o.value("reachable", reachable.len());
    Ok(o)
}

fn opt(v: Option<impl Display>) -> String {
    v.map_or_else(|| "none".to_string(), |v| v.to_string())
}

fn report_strings(ctx: &Ctx) -> Result<Outcome> {
    let mut o = Outcome::report_only();
    let (l, t) = (ctx.cfg.max_len, ctx.cfg.budget);
    let sd = ctx.top(MachineMode::SelfDelimiting)?;
    let em = ctx.top(MachineMode::EndMarked)?;
    let mono = ctx.top(MachineMode::Monotone)?;
    for x in &ctx.cfg.strings {
        let m = m_t(&sd, x)?;
        o.value(format!("{x}:K"), opt(complexity_k(&sd, x)?));
        o.value(format!("{x}:C"), opt(complexity_c(&em, x)?));
        o.value(format!("{x}:m"), &m);
        let mm = monotone_m(&mono, x)?;
        o.value(format!("{x}:monotone_m"), &mm);
        o.value(
            format!("{x}:Km_upper"),
            opt(km(&mm, ctx.cfg.precision).map(|iv| to_f64(&iv.hi))),
        );
        let cond = ctx.cache(MachineMode::EndMarked, &beta(x.len() as u64), l, t)?;
        o.value(format!("{x}:d0"), opt(d0(&cond, x)?));
    }
    Ok(o)
}

fn report_stats(ctx: &Ctx) -> Result<Outcome> {
    let mut o = Outcome::report_only();
    for t in ctx.cfg.ladder() {
        let c = ctx.cache(MachineMode::SelfDelimiting, &BitString::empty(), ctx.cfg.max_len, t)?;
        o.value(format!("t={t}:omega"), omega_t(&c)?);
        o.value(format!("t={t}:strings"), c.shortest_table().len());
    }
    let c = ctx.top(MachineMode::SelfDelimiting)?;
    let g: Vec<String> = (0..=ctx.cfg.max_len).map(|n| stats_gn(&c, n).to_string()).collect();
    o.value("g_n", g.join(" "));
    Ok(o)
}
