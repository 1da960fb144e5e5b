//! Interval scans for `d | y`, `d | 3y` and `d | Y` over filtered radicands.
//!
//! Workers pull chunks of [`CHUNK`] consecutive integers from a shared
//! counter; a single writer reorders finished chunks, so the output is the
//! same for any number of shards.

mod checkpoint;

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::mpsc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{is_probable_prime_u64, segmented_squarefree};
use crate::cfrac::{self, CfError, Norm, DEFAULT_STEP_BUDGET, MAX_RADICAND};

pub use checkpoint::{
    config_digest, read_checkpoint, write_checkpoint, Checkpoint, CheckpointError, FORMAT_VERSION,
};

/// Integers per work unit.
pub const CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Filter {
    Squarefree,
    #[serde(rename = "primes_1mod4")]
    Primes1Mod4,
    #[serde(rename = "primes_3mod4")]
    Primes3Mod4,
    SquarefreeCongruence { r: u64, m: u64 },
}

impl Filter {
    /// Members of `[lo, hi]` passing the filter, ascending.
    fn candidates(&self, lo: u64, hi: u64) -> Vec<u64> {
        match *self {
            Filter::Squarefree => segmented_squarefree(lo, hi).iter().collect(),
            Filter::SquarefreeCongruence { r, m } => segmented_squarefree(lo, hi)
                .iter()
                .filter(|d| d % m == r)
                .collect(),
            Filter::Primes1Mod4 => primes_in(lo, hi, 1),
            Filter::Primes3Mod4 => primes_in(lo, hi, 3),
        }
    }
}

fn primes_in(lo: u64, hi: u64, residue: u64) -> Vec<u64> {
    let first = lo + (residue + 4 - lo % 4) % 4;
    (first..=hi)
        .step_by(4)
        .filter(|&d| is_probable_prime_u64(d))
        .collect()
}

impl fmt::Display for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Filter::Squarefree => f.write_str("squarefree"),
            Filter::Primes1Mod4 => f.write_str("primes_1mod4"),
            Filter::Primes3Mod4 => f.write_str("primes_3mod4"),
            Filter::SquarefreeCongruence { r, m } => write!(f, "squarefree_congruence({r},{m})"),
        }
    }
}

impl FromStr for Filter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        match s.as_str() {
            "squarefree" => return Ok(Filter::Squarefree),
            "primes_1mod4" => return Ok(Filter::Primes1Mod4),
            "primes_3mod4" => return Ok(Filter::Primes3Mod4),
            _ => {}
        }
        let args = s
            .strip_prefix("squarefree_congruence(")
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| format!("unknown filter {s:?}"))?;
        let (r, m) = args
            .split_once(',')
            .ok_or_else(|| format!("expected squarefree_congruence(r,m), got {s:?}"))?;
        let r = r.parse().map_err(|_| format!("bad residue {r:?}"))?;
        let m = m.parse().map_err(|_| format!("bad modulus {m:?}"))?;
        Ok(Filter::SquarefreeCongruence { r, m })
    }
}

/// Which divisibilities produce hit records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub y: bool,
    pub three_y: bool,
    pub big_y: bool,
}

impl Default for Report {
    fn default() -> Self {
        Report { y: true, three_y: false, big_y: false }
    }
}

impl Report {
    pub fn all() -> Self {
        Report { y: true, three_y: true, big_y: true }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = [(self.y, "y"), (self.three_y, "threeY"), (self.big_y, "bigY")]
            .into_iter()
            .filter_map(|(on, n)| on.then_some(n))
            .collect();
        f.write_str(&names.join(","))
    }
}

impl FromStr for Report {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut r = Report { y: false, three_y: false, big_y: false };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "y" => r.y = true,
                "threeY" | "3y" => r.three_y = true,
                "bigY" | "Y" => r.big_y = true,
                other => return Err(format!("unknown report kind {other:?}")),
            }
        }
        if !(r.y || r.three_y || r.big_y) {
            return Err("report set is empty".into());
        }
        Ok(r)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub lo: u64,
    pub hi: u64,
    pub filter: Filter,
    pub shards: usize,
    /// Chunks emitted between checkpoint writes.
    pub checkpoint_interval: u64,
    pub report: Report,
    pub step_budget: u64,
}

impl SearchConfig {
    pub fn new(lo: u64, hi: u64, filter: Filter) -> Self {
        SearchConfig {
            lo,
            hi,
            filter,
            shards: std::thread::available_parallelism().map_or(1, |n| n.get()),
            checkpoint_interval: 16,
            report: Report::default(),
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: String| Err(SearchError::InvalidConfig(m));
        if self.lo < 2 || self.lo > self.hi {
            return bad(format!("need 2 <= lo <= hi, got [{}, {}]", self.lo, self.hi));
        }
        if self.hi >= MAX_RADICAND {
            return bad(format!("hi must be below 2^62, got {}", self.hi));
        }
        if self.shards == 0 {
            return bad("shards must be at least 1".into());
        }
        if self.checkpoint_interval == 0 {
            return bad("checkpoint interval must be at least 1".into());
        }
        if self.step_budget == 0 {
            return bad("step budget must be positive".into());
        }
        if let Filter::SquarefreeCongruence { r, m } = self.filter {
            if m == 0 || r >= m {
                return bad(format!("need 0 <= r < m, got r = {r}, m = {m}"));
            }
        }
        if !(self.report.y || self.report.three_y || self.report.big_y) {
            return bad("report set is empty".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum HitKind {
    #[serde(rename = "y_divisible")]
    YDivisible,
    #[serde(rename = "threeY_divisible")]
    ThreeYDivisible,
    #[serde(rename = "Y_divisible")]
    BigYDivisible,
}

impl HitKind {
    pub fn as_str(self) -> &'static str {
        match self {
            HitKind::YDivisible => "y_divisible",
            HitKind::ThreeYDivisible => "threeY_divisible",
            HitKind::BigYDivisible => "Y_divisible",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HitRecord {
    pub d: u64,
    pub kind: HitKind,
    pub period: u64,
    pub norm: Norm,
}

/// One line of canonical output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum Record {
    Hit(HitRecord),
    Overflow { d: u64, budget: u64 },
}

impl Record {
    pub fn d(&self) -> u64 {
        match self {
            Record::Hit(h) => h.d,
            Record::Overflow { d, .. } => *d,
        }
    }
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Record::Hit(h) => write!(f, "hit {} {} {} {}", h.d, h.kind.as_str(), h.period, h.norm),
            Record::Overflow { d, budget } => write!(f, "overflow {d} {budget}"),
        }
    }
}

impl FromStr for Record {
    type Err = String;

    fn from_str(line: &str) -> Result<Self, String> {
        let f: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| s.parse::<u64>().map_err(|_| format!("bad number {s:?}"));
        match f.as_slice() {
            ["hit", d, kind, period, norm] => {
                let kind = match *kind {
                    "y_divisible" => HitKind::YDivisible,
                    "threeY_divisible" => HitKind::ThreeYDivisible,
                    "Y_divisible" => HitKind::BigYDivisible,
                    k => return Err(format!("bad kind {k:?}")),
                };
                let norm = match *norm {
                    "1" => Norm::Plus,
                    "-1" => Norm::Minus,
                    n => return Err(format!("bad norm {n:?}")),
                };
                Ok(Record::Hit(HitRecord { d: num(d)?, kind, period: num(period)?, norm }))
            }
            ["overflow", d, budget] => Ok(Record::Overflow { d: num(d)?, budget: num(budget)? }),
            _ => Err(format!("unrecognised record {line:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Summary {
    pub scanned: u64,
    pub hits: u64,
    pub overflows: u64,
}

impl Summary {
    fn of(scanned: u64, records: &[Record]) -> Self {
        let overflows = records.iter().filter(|r| matches!(r, Record::Overflow { .. })).count() as u64;
        Summary { scanned, hits: records.len() as u64 - overflows, overflows }
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "summary scanned={} hits={} overflows={}", self.scanned, self.hits, self.overflows)
    }
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid search config: {0}")]
    InvalidConfig(String),
    #[error("checkpoint belongs to a different search (digest {found}, expected {expected})")]
    DigestMismatch { expected: String, found: String },
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("output error: {0}")]
    Io(#[from] io::Error),
}

/// Progress snapshot handed to the log callback after each checkpoint.
#[derive(Debug, Clone, Copy)]
pub struct Progress {
    pub next_d: u64,
    pub scanned: u64,
    pub hits: u64,
    pub overflows: u64,
}

/// Optional plumbing around a scan.
#[derive(Default, Clone, Copy)]
pub struct ScanControl<'a> {
    pub checkpoint: Option<&'a Path>,
    /// Stop at the next chunk boundary once set.
    pub cancel: Option<&'a AtomicBool>,
    /// Stop after this many chunks have been emitted in this run.
    pub stop_after_chunks: Option<u64>,
    pub progress: Option<&'a (dyn Fn(&Progress) + Sync)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanReport {
    pub summary: Summary,
    pub complete: bool,
    pub next_d: u64,
    /// Chunks computed in this run (zero when resuming a finished scan).
    pub chunks_scanned: u64,
}

/// Hit records for a single `d`, or `Err(budget)` on overflow.
pub fn examine(d: u64, report: Report, budget: u64) -> Result<Vec<HitRecord>, CfError> {
    let r = cfrac::unit_mod(d, d, budget)?;
    let mut out = Vec::new();
    let hit = |kind| HitRecord { d, kind, period: r.period, norm: r.norm };
    if report.y && r.y == 0 {
        out.push(hit(HitKind::YDivisible));
    }
    if report.three_y && (3 * r.y as u128).is_multiple_of(d as u128) {
        out.push(hit(HitKind::ThreeYDivisible));
    }
    if report.big_y && cfrac::d_divides_big_y(&r)? {
        out.push(hit(HitKind::BigYDivisible));
    }
    Ok(out)
}

struct ChunkResult {
    scanned: u64,
    records: Vec<Record>,
}

fn scan_chunk(cfg: &SearchConfig, lo: u64, hi: u64) -> ChunkResult {
    let ds = cfg.filter.candidates(lo, hi);
    let mut records = Vec::new();
    for &d in &ds {
        match examine(d, cfg.report, cfg.step_budget) {
            Ok(hits) => records.extend(hits.into_iter().map(Record::Hit)),
            Err(CfError::StepBudgetExceeded { budget, .. }) => {
                records.push(Record::Overflow { d, budget })
            }
            // Filters admit only squarefree d in range, so nothing else can fail.
            Err(e) => unreachable!("d = {d}: {e}"),
        }
    }
    ChunkResult { scanned: ds.len() as u64, records }
}

struct State {
    next_d: u64,
    scanned: u64,
    records: Vec<Record>,
}

impl State {
    fn checkpoint(&self, cfg: &SearchConfig) -> Checkpoint {
        Checkpoint {
            format_version: FORMAT_VERSION,
            config_digest: config_digest(cfg),
            config: cfg.clone(),
            next_d: self.next_d,
            scanned: self.scanned,
            records: self.records.clone(),
            complete: self.next_d > cfg.hi,
        }
    }
}

/// Scan `[cfg.lo, cfg.hi]` from the start, writing records then a summary line to `out`.
pub fn scan(cfg: &SearchConfig, out: &mut dyn Write, ctl: &ScanControl) -> Result<ScanReport, SearchError> {
    cfg.validate()?;
    let state = State { next_d: cfg.lo, scanned: 0, records: Vec::new() };
    run(cfg, state, out, ctl)
}

/// Continue from the checkpoint at `path`. `out` receives the complete output again,
/// starting with the records already stored in the checkpoint.
pub fn resume(
    cfg: &SearchConfig,
    path: &Path,
    out: &mut dyn Write,
    ctl: &ScanControl,
) -> Result<ScanReport, SearchError> {
    cfg.validate()?;
    let cp = read_checkpoint(path)?;
    let expected = config_digest(cfg);
    if cp.config_digest != expected {
        return Err(SearchError::DigestMismatch { expected, found: cp.config_digest });
    }
    // Records at or past the frontier belong to the in-flight chunk and are recomputed.
    let mut records = cp.records;
    records.retain(|r| r.d() < cp.next_d);
    let state = State { next_d: cp.next_d, scanned: cp.scanned, records };
    run(cfg, state, out, ctl)
}

fn run(
    cfg: &SearchConfig,
    mut state: State,
    out: &mut dyn Write,
    ctl: &ScanControl,
) -> Result<ScanReport, SearchError> {
    for r in &state.records {
        writeln!(out, "{r}")?;
    }
    let start = state.next_d;
    let mut chunks_scanned = 0;
    if start <= cfg.hi {
        let total = (cfg.hi - start) / CHUNK + 1;
        let next = AtomicU64::new(0);
        let stop = AtomicBool::new(false);
        let (tx, rx) = mpsc::channel::<(u64, ChunkResult)>();
        let outcome = std::thread::scope(|s| {
            for _ in 0..cfg.shards.min(total as usize) {
                let tx = tx.clone();
                let (next, stop) = (&next, &stop);
                s.spawn(move || {
                    while !stop.load(Ordering::Relaxed) {
                        let k = next.fetch_add(1, Ordering::Relaxed);
                        if k >= total {
                            break;
                        }
                        let lo = start + k * CHUNK;
                        let hi = (lo + CHUNK - 1).min(cfg.hi);
                        if tx.send((k, scan_chunk(cfg, lo, hi))).is_err() {
                            break;
                        }
                    }
                });
            }
            drop(tx);
            let r = merge(cfg, &mut state, out, ctl, rx, total, &mut chunks_scanned);
            stop.store(true, Ordering::Relaxed);
            r
        });
        if let Err(e) = outcome {
            if let Some(path) = ctl.checkpoint {
                // Best effort: the state still reflects only fully written chunks.
                let _ = write_checkpoint(path, &state.checkpoint(cfg));
            }
            return Err(e);
        }
    }
    let summary = Summary::of(state.scanned, &state.records);
    let complete = state.next_d > cfg.hi;
    if complete {
        writeln!(out, "{summary}")?;
    }
    out.flush()?;
    if let Some(path) = ctl.checkpoint {
        write_checkpoint(path, &state.checkpoint(cfg))?;
    }
    Ok(ScanReport { summary, complete, next_d: state.next_d, chunks_scanned })
}

/// The single writer: emits chunks in index order and owns checkpointing.
fn merge(
    cfg: &SearchConfig,
    state: &mut State,
    out: &mut dyn Write,
    ctl: &ScanControl,
    rx: mpsc::Receiver<(u64, ChunkResult)>,
    total: u64,
    emitted: &mut u64,
) -> Result<(), SearchError> {
    let start = state.next_d;
    let mut pending = BTreeMap::new();
    let mut since_checkpoint = 0;
    for (k, res) in rx.iter() {
        pending.insert(k, res);
        while let Some(res) = pending.remove(emitted) {
            let fresh: Vec<Record> = res.records.into_iter().filter(|r| r.d() >= state.next_d).collect();
            for r in &fresh {
                writeln!(out, "{r}")?;
            }
            state.records.extend(fresh);
            state.scanned += res.scanned;
            *emitted += 1;
            state.next_d = (start + *emitted * CHUNK).min(cfg.hi + 1);
            since_checkpoint += 1;
            if since_checkpoint >= cfg.checkpoint_interval && *emitted < total {
                since_checkpoint = 0;
                out.flush()?;
                if let Some(path) = ctl.checkpoint {
                    write_checkpoint(path, &state.checkpoint(cfg))?;
                }
                if let Some(p) = ctl.progress {
                    let s = Summary::of(state.scanned, &state.records);
                    p(&Progress { next_d: state.next_d, scanned: s.scanned, hits: s.hits, overflows: s.overflows });
                }
            }
            let cancelled = ctl.cancel.is_some_and(|c| c.load(Ordering::Relaxed));
            if cancelled || ctl.stop_after_chunks.is_some_and(|n| *emitted >= n) {
                return Ok(());
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_to_string(cfg: &SearchConfig) -> String {
        let mut out = Vec::new();
        scan(cfg, &mut out, &ScanControl::default()).unwrap();
        String::from_utf8(out).unwrap()
    }

    #[test]
    fn small_range_has_only_46() {
        let cfg = SearchConfig::new(2, 100, Filter::Squarefree);
        assert_eq!(run_to_string(&cfg), "hit 46 y_divisible 12 1\nsummary scanned=60 hits=1 overflows=0\n");
    }

    #[test]
    fn record_lines_round_trip() {
        let recs = [
            Record::Hit(HitRecord { d: 46, kind: HitKind::YDivisible, period: 12, norm: Norm::Plus }),
            Record::Hit(HitRecord { d: 7, kind: HitKind::BigYDivisible, period: 3, norm: Norm::Minus }),
            Record::Overflow { d: 99991, budget: 5 },
        ];
        for r in recs {
            assert_eq!(r.to_string().parse::<Record>().unwrap(), r);
        }
        assert!("hit 1 x 2 1".parse::<Record>().is_err());
    }

    #[test]
    fn filter_and_report_syntax() {
        for f in [
            Filter::Squarefree,
            Filter::Primes1Mod4,
            Filter::Primes3Mod4,
            Filter::SquarefreeCongruence { r: 3, m: 8 },
        ] {
            assert_eq!(f.to_string().parse::<Filter>().unwrap(), f);
        }
        assert_eq!("y,threeY,bigY".parse::<Report>().unwrap(), Report::all());
        assert!("".parse::<Report>().is_err());
        assert!("primes".parse::<Filter>().is_err());
    }

    #[test]
    fn overflows_are_listed() {
        let mut cfg = SearchConfig::new(2, 30, Filter::Squarefree);
        cfg.step_budget = 2;
        let text = run_to_string(&cfg);
        assert!(text.contains("overflow 19 2\n"));
        let listed = text.lines().filter(|l| l.starts_with("overflow ")).count();
        assert!(text.ends_with(&format!("overflows={listed}\n")));
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = SearchConfig::new(1, 10, Filter::Squarefree);
        assert!(cfg.validate().is_err());
        cfg.lo = 11;
        assert!(cfg.validate().is_err());
        cfg = SearchConfig::new(2, 10, Filter::SquarefreeCongruence { r: 4, m: 4 });
        assert!(cfg.validate().is_err());
        cfg = SearchConfig::new(2, 10, Filter::Squarefree);
        cfg.shards = 0;
        assert!(cfg.validate().is_err());
    }
}
