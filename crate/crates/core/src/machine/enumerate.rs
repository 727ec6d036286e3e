use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use super::{run, MachineMode, RunOutcome, Status, ISA_VERSION};
use crate::bits::BitString;
use crate::error::{Error, Result};

/// Longest program length [`enumerate`] accepts: `2^(L+1) − 1` runs.
pub const MAX_LEN_CAP: usize = 24;

/// Every program of length at most `max_len`, run at one budget on one
/// condition.
///
/// Outcomes are stored in shortlex order, so the program of an entry is
/// implied by its position.
#[derive(Debug)]
pub struct EnumerationCache {
    mode: MachineMode,
    max_len: usize,
    budget: u64,
    condition: BitString,
    outcomes: Vec<RunOutcome>,
    shortest: OnceLock<BTreeMap<BitString, usize>>,
}

impl Clone for EnumerationCache {
    fn clone(&self) -> Self {
        Self {
            mode: self.mode,
            max_len: self.max_len,
            budget: self.budget,
            condition: self.condition.clone(),
            outcomes: self.outcomes.clone(),
            shortest: OnceLock::new(),
        }
    }
}

impl PartialEq for EnumerationCache {
    fn eq(&self, other: &Self) -> bool {
        self.header() == other.header() && self.outcomes == other.outcomes
    }
}

fn program_at(index: u64) -> BitString {
    let len = 63 - (index + 1).leading_zeros() as usize;
    BitString::from_index(index + 1 - (1 << len), len)
}

fn total_programs(max_len: usize) -> u64 {
    (1u64 << (max_len + 1)) - 1
}

/// Runs every program of length `≤ max_len`.
pub fn enumerate(
    mode: MachineMode,
    condition: &BitString,
    max_len: usize,
    budget: u64,
) -> Result<EnumerationCache> {
    if max_len > MAX_LEN_CAP {
        return Err(Error::CapExceeded { requested: max_len, cap: MAX_LEN_CAP });
    }
    let outcomes = (0..total_programs(max_len))
        .into_par_iter()
        .map(|i| run(mode, &program_at(i), condition, budget))
        .collect();
    Ok(EnumerationCache {
        mode,
        max_len,
        budget,
        condition: condition.clone(),
        outcomes,
        shortest: OnceLock::new(),
    })
}

/// The identifying parameters of a cache, as written in its header line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheHeader {
    pub isa: u32,
    pub mode: MachineMode,
    pub max_len: usize,
    pub budget: u64,
    pub condition: BitString,
}

impl CacheHeader {
    fn line(&self) -> String {
        format!(
            "ait-cache\tisa={}\tmode={}\tmax_len={}\tbudget={}\tcond={}",
            self.isa, self.mode, self.max_len, self.budget, self.condition
        )
    }

    fn parse(line: &str) -> Result<Self> {
        let bad = |what: &str| Error::Cache(format!("bad header ({what}): {line:?}"));
        let mut fields = line.trim_end_matches(['\r', '\n']).split('\t');
        if fields.next() != Some("ait-cache") {
            return Err(bad("magic"));
        }
        let mut kv = HashMap::new();
        for f in fields {
            let (k, v) = f.split_once('=').ok_or_else(|| bad("field"))?;
            kv.insert(k, v);
        }
        let get = |k: &str| kv.get(k).copied().ok_or_else(|| bad(k));
        Ok(Self {
            isa: get("isa")?.parse().map_err(|_| bad("isa"))?,
            mode: get("mode")?.parse()?,
            max_len: get("max_len")?.parse().map_err(|_| bad("max_len"))?,
            budget: get("budget")?.parse().map_err(|_| bad("budget"))?,
            condition: get("cond")?.parse()?,
        })
    }

    /// Same machine and inputs, so entries are comparable.
    fn compatible(&self, other: &Self) -> bool {
        self.isa == other.isa && self.mode == other.mode && self.condition == other.condition
    }
}

impl EnumerationCache {
    pub fn mode(&self) -> MachineMode {
        self.mode
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn condition(&self) -> &BitString {
        &self.condition
    }

    pub fn header(&self) -> CacheHeader {
        CacheHeader {
            isa: ISA_VERSION,
            mode: self.mode,
            max_len: self.max_len,
            budget: self.budget,
            condition: self.condition.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn get(&self, program: &BitString) -> Option<&RunOutcome> {
        if program.len() > self.max_len {
            return None;
        }
        self.outcomes.get(program.shortlex_index() as usize)
    }

    /// All `(program, outcome)` pairs in shortlex order.
    pub fn iter(&self) -> impl Iterator<Item = (BitString, &RunOutcome)> + '_ {
        self.outcomes.iter().enumerate().map(|(i, o)| (program_at(i as u64), o))
    }

    /// Programs in the domain of the cache's mode, with their outcomes.
    pub fn domain(&self) -> impl Iterator<Item = (BitString, &RunOutcome)> + '_ {
        self.iter().filter(move |(p, o)| o.in_domain(self.mode, p.len()))
    }

    /// For every output reached by a domain program, the shortest such
    /// program's length.
    pub fn shortest_table(&self) -> &BTreeMap<BitString, usize> {
        self.shortest.get_or_init(|| {
            let mut table = BTreeMap::new();
            // shortlex order: the first hit for an output is a shortest one
            for (p, o) in self.domain() {
                table.entry(o.output.clone()).or_insert(p.len());
            }
            table
        })
    }

    pub fn shortest(&self, x: &BitString) -> Option<usize> {
        self.shortest_table().get(x).copied()
    }

    pub fn write_to(&self, w: impl Write) -> Result<()> {
        let mut w = BufWriter::new(w);
        writeln!(w, "{}", self.header().line())?;
        for (p, o) in self.iter() {
            writeln!(w, "{}\t{}\t{}\t{}\t{}", p, o.status.letter(), o.output, o.consumed, o.steps)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_to(File::create(path)?)
    }

    /// Reads a cache file. Monotone traces are not stored on disk; they are
    /// regenerated by re-running each program, which is deterministic.
    pub fn read_from(r: impl Read) -> Result<Self> {
        let mut lines = BufReader::new(r).lines();
        let header = CacheHeader::parse(&lines.next().ok_or_else(|| Error::Cache("empty file".into()))??)?;
        if header.isa != ISA_VERSION {
            return Err(Error::Cache(format!(
                "cache was written for ISA version {}, this build runs version {ISA_VERSION}",
                header.isa
            )));
        }
        if header.max_len > MAX_LEN_CAP {
            return Err(Error::CapExceeded { requested: header.max_len, cap: MAX_LEN_CAP });
        }
        let expected = total_programs(header.max_len);
        let mut outcomes = Vec::with_capacity(expected as usize);
        for (i, line) in lines.enumerate() {
            let line = line?;
            let bad = |what: &str| Error::Cache(format!("record {}: {what}: {line:?}", i + 1));
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 5 {
                return Err(bad("expected 5 fields"));
            }
            let program: BitString = fields[0].parse()?;
            if i as u64 >= expected || program != program_at(i as u64) {
                return Err(bad("program out of order"));
            }
            let mut outcome = RunOutcome {
                status: Status::from_letter(fields[1])?,
                output: fields[2].parse()?,
                consumed: fields[3].parse().map_err(|_| bad("consumed"))?,
                steps: fields[4].parse().map_err(|_| bad("steps"))?,
                trace: None,
            };
            if header.mode == MachineMode::Monotone {
                outcome = run(header.mode, &program, &header.condition, header.budget);
            }
            outcomes.push(outcome);
        }
        if outcomes.len() as u64 != expected {
            return Err(Error::Cache(format!(
                "expected {expected} records for max_len {}, found {}",
                header.max_len,
                outcomes.len()
            )));
        }
        Ok(Self {
            mode: header.mode,
            max_len: header.max_len,
            budget: header.budget,
            condition: header.condition,
            outcomes,
            shortest: OnceLock::new(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(File::open(path)?)
    }
}

/// Merges caches of the same machine, mode and condition.
///
/// The result covers the largest length at the largest budget. For each
/// program the most conclusive outcome wins (halt, then fault); entries that
/// ran out of fuel below the merged budget are re-run at it. Idempotent.
pub fn cache_merge(caches: &[EnumerationCache]) -> Result<EnumerationCache> {
    let first = caches.first().ok_or_else(|| Error::Cache("nothing to merge".into()))?;
    let header = first.header();
    if let Some(c) = caches.iter().find(|c| !c.header().compatible(&header)) {
        return Err(Error::Cache(format!(
            "cannot merge {:?} with {:?}",
            c.header(),
            header
        )));
    }
    let max_len = caches.iter().map(|c| c.max_len).max().unwrap();
    let budget = caches.iter().map(|c| c.budget).max().unwrap();
    let outcomes = (0..total_programs(max_len))
        .into_par_iter()
        .map(|i| {
            let best = caches
                .iter()
                .filter_map(|c| c.outcomes.get(i as usize).map(|o| (o, c.budget)))
                .max_by_key(|(o, b)| (o.status.rank(), *b));
            match best {
                Some((o, b)) if o.status != Status::OutOfFuel || b == budget => o.clone(),
                _ => run(header.mode, &program_at(i), &header.condition, budget),
            }
        })
        .collect();
    Ok(EnumerationCache {
        mode: header.mode,
        max_len,
        budget,
        condition: header.condition,
        outcomes,
        shortest: OnceLock::new(),
    })
}

/// Loads and merges cache files, refusing mismatched ISA versions, modes or
/// conditions.
pub fn cache_merge_files(paths: &[PathBuf]) -> Result<EnumerationCache> {
    let headers = paths.iter().map(|p| read_header(p)).collect::<Result<Vec<_>>>()?;
    if let Some(h) = headers.iter().find(|h| h.isa != headers[0].isa) {
        return Err(Error::Cache(format!(
            "ISA version mismatch: {} vs {}",
            h.isa, headers[0].isa
        )));
    }
    let caches = paths.iter().map(EnumerationCache::load).collect::<Result<Vec<_>>>()?;
    cache_merge(&caches)
}

pub fn read_header(path: impl AsRef<Path>) -> Result<CacheHeader> {
    let mut line = String::new();
    BufReader::new(File::open(path)?).read_line(&mut line)?;
    CacheHeader::parse(&line)
}

/// Deletes cache files in `dir` made redundant by another file with the same
/// machine, mode and condition and at least the same length and budget.
/// Returns the removed paths.
pub fn cache_gc(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let mut found = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_file() {
            if let Ok(h) = read_header(&path) {
                found.push((path, h));
            }
        }
    }
    found.sort_by(|a, b| a.0.cmp(&b.0));
    let mut removed = Vec::new();
    for (i, (path, h)) in found.iter().enumerate() {
        let subsumed = found.iter().enumerate().any(|(j, (_, other))| {
            j != i
                && other.compatible(h)
                && other.max_len >= h.max_len
                && other.budget >= h.budget
                && (other.max_len, other.budget) != (h.max_len, h.budget)
                || (j < i && other == h)
        });
        if subsumed {
            std::fs::remove_file(path)?;
            removed.push(path.clone());
        }
    }
    Ok(removed)
}

/// Lazily built caches for one `(max_len, budget)` window, shared across
/// threads.
#[derive(Debug)]
pub struct Lab {
    max_len: usize,
    budget: u64,
    caches: Mutex<HashMap<(MachineMode, BitString), Arc<EnumerationCache>>>,
}

impl Lab {
    pub fn new(max_len: usize, budget: u64) -> Result<Self> {
        if max_len > MAX_LEN_CAP {
            return Err(Error::CapExceeded { requested: max_len, cap: MAX_LEN_CAP });
        }
        Ok(Self { max_len, budget, caches: Mutex::new(HashMap::new()) })
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn cache(&self, mode: MachineMode, condition: &BitString) -> Arc<EnumerationCache> {
        let key = (mode, condition.clone());
        if let Some(c) = self.caches.lock().unwrap().get(&key) {
            return c.clone();
        }
        let built = Arc::new(
            enumerate(mode, condition, self.max_len, self.budget).expect("length checked in Lab::new"),
        );
        self.caches.lock().unwrap().entry(key).or_insert(built).clone()
    }

    /// Seeds the lab with a cache computed elsewhere (for example loaded from
    /// disk). The cache must match the lab's window.
    pub fn insert(&self, cache: EnumerationCache) -> Result<()> {
        if cache.max_len != self.max_len || cache.budget != self.budget {
            return Err(Error::Cache(format!(
                "cache window ({}, {}) differs from lab window ({}, {})",
                cache.max_len, cache.budget, self.max_len, self.budget
            )));
        }
        let key = (cache.mode, cache.condition.clone());
        self.caches.lock().unwrap().insert(key, Arc::new(cache));
        Ok(())
    }

    pub fn sd(&self) -> Arc<EnumerationCache> {
        self.cache(MachineMode::SelfDelimiting, &BitString::empty())
    }
}
