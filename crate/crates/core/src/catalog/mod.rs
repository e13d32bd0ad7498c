//! Catalog aggregation: sweeping machine spaces into BB summaries, Placid
//! Platypus tables, mergeable partial results and the TSV record format.

pub mod runner;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enumerate::{CanonicalFilter, Shard, Skip, SubsetIter};
use crate::machine::{decode_name, encode_name, Machine};
use crate::sim::{run, Outcome, Word};
use crate::symmetry::{base_set, orbit_in_space};
use runner::{pack_to_index, FastOutcome, RuleTable, SweepRunner, UNDEF};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("stream produced no machines")]
    EmptyStream,
    #[error("cannot merge partial summaries: {0}")]
    MergeMismatch(String),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("machine {name} is inconsistent with its record: {reason}")]
    Inconsistent { name: String, reason: String },
    #[error("PP bracket mismatch at ones={ones}: search found {search}, bracket formula gives {bracket}")]
    BracketMismatch { ones: u32, search: u32, bracket: u32 },
}

/// Step extremes among visited machines halting with a given ones count,
/// plus every distinct step count observed (step counts are bounded by the
/// cap, and in practice by the class's slowest halter, so the set stays
/// small).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OnesStats {
    pub count: u64,
    pub min_steps: u64,
    pub min_name: String,
    pub max_steps: u64,
    pub max_name: String,
    pub steps_seen: BTreeSet<u64>,
}

/// Aggregates for machines of one dense state count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassStats {
    pub best_ones: u32,
    /// names attaining `best_ones` (orbit representatives in canonical sweeps)
    pub best: BTreeSet<String>,
    pub per_ones: BTreeMap<u32, OnesStats>,
}

impl ClassStats {
    fn new() -> ClassStats {
        ClassStats {
            best_ones: 0,
            best: BTreeSet::new(),
            per_ones: BTreeMap::new(),
        }
    }

    fn record(&mut self, ones: u32, steps: u64, name: &str) {
        if ones > self.best_ones || (ones == self.best_ones && self.best.is_empty()) {
            self.best_ones = ones;
            self.best.clear();
            self.best.insert(name.to_string());
        } else if ones == self.best_ones {
            self.best.insert(name.to_string());
        }
        match self.per_ones.get_mut(&ones) {
            Some(stats) => {
                stats.count += 1;
                stats.steps_seen.insert(steps);
                if steps < stats.min_steps
                    || (steps == stats.min_steps && *name < *stats.min_name)
                {
                    stats.min_steps = steps;
                    stats.min_name = name.to_string();
                }
                if steps > stats.max_steps
                    || (steps == stats.max_steps && *name < *stats.max_name)
                {
                    stats.max_steps = steps;
                    stats.max_name = name.to_string();
                }
            }
            None => {
                self.per_ones.insert(
                    ones,
                    OnesStats {
                        count: 1,
                        min_steps: steps,
                        min_name: name.to_string(),
                        max_steps: steps,
                        max_name: name.to_string(),
                        steps_seen: BTreeSet::from([steps]),
                    },
                );
            }
        }
    }

    fn merge(&mut self, other: ClassStats) {
        if other.best_ones > self.best_ones {
            self.best_ones = other.best_ones;
            self.best = other.best;
        } else if other.best_ones == self.best_ones {
            self.best.extend(other.best);
        }
        for (ones, stats) in other.per_ones {
            match self.per_ones.get_mut(&ones) {
                Some(mine) => {
                    mine.count += stats.count;
                    mine.steps_seen.extend(&stats.steps_seen);
                    if stats.min_steps < mine.min_steps
                        || (stats.min_steps == mine.min_steps && stats.min_name < mine.min_name)
                    {
                        mine.min_steps = stats.min_steps;
                        mine.min_name = stats.min_name;
                    }
                    if stats.max_steps > mine.max_steps
                        || (stats.max_steps == mine.max_steps && stats.max_name < mine.max_name)
                    {
                        mine.max_steps = stats.max_steps;
                        mine.max_name = stats.max_name;
                    }
                }
                None => {
                    self.per_ones.insert(ones, stats);
                }
            }
        }
    }
}

/// Sweep bookkeeping; counts are per shard and add up under merge.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepStats {
    pub simulated: u64,
    pub halted: u64,
    pub cap_exceeded: u64,
    pub nonhalt_proofs: u64,
    /// machines skipped because they lack a start rule (halt at step 0 with
    /// an empty word); counted over the full stream even in canonical sweeps
    pub lambda_skipped: u64,
    /// machines skipped because every source has a rule, so no lookup can
    /// ever fail; counted over the full stream even in canonical sweeps
    pub total_rule_skipped: u64,
}

/// Mergeable aggregation of one (possibly sharded) sweep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialSummary {
    pub n: u32,
    pub cap: u64,
    pub canonical: bool,
    pub stats: SweepStats,
    pub classes: BTreeMap<u32, ClassStats>,
}

impl PartialSummary {
    pub fn empty(n: u32, cap: u64, canonical: bool) -> PartialSummary {
        PartialSummary {
            n,
            cap,
            canonical,
            stats: SweepStats::default(),
            classes: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("partial summaries serialize")
    }

    pub fn from_json(text: &str) -> Result<PartialSummary, CatalogError> {
        serde_json::from_str(text).map_err(|e| CatalogError::Malformed {
            line: e.line(),
            reason: e.to_string(),
        })
    }

    fn record_halt(&mut self, dense: u32, ones: u32, steps: u64, name: &str) {
        self.classes
            .entry(dense)
            .or_insert_with(ClassStats::new)
            .record(ones, steps, name);
    }

    /// Largest ones count over classes up to `m`, with the attaining names.
    fn best_upto(&self, m: u32) -> Option<(u32, Vec<String>)> {
        let best = self
            .classes
            .range(..=m)
            .map(|(_, c)| c.best_ones)
            .max()?;
        let mut names: Vec<String> = self
            .classes
            .range(..=m)
            .filter(|(_, c)| c.best_ones == best)
            .flat_map(|(_, c)| c.best.iter().cloned())
            .collect();
        names.sort();
        names.dedup();
        Some((best, names))
    }
}

/// Associative, commutative combination of two partial sweeps over the same
/// space and cap.
pub fn merge(a: PartialSummary, b: PartialSummary) -> Result<PartialSummary, CatalogError> {
    if (a.n, a.cap, a.canonical) != (b.n, b.cap, b.canonical) {
        return Err(CatalogError::MergeMismatch(format!(
            "(n={}, cap={}, canonical={}) vs (n={}, cap={}, canonical={})",
            a.n, a.cap, a.canonical, b.n, b.cap, b.canonical
        )));
    }
    let mut out = a;
    out.stats.simulated += b.stats.simulated;
    out.stats.halted += b.stats.halted;
    out.stats.cap_exceeded += b.stats.cap_exceeded;
    out.stats.nonhalt_proofs += b.stats.nonhalt_proofs;
    out.stats.lambda_skipped += b.stats.lambda_skipped;
    out.stats.total_rule_skipped += b.stats.total_rule_skipped;
    for (dense, stats) in b.classes {
        match out.classes.get_mut(&dense) {
            Some(mine) => mine.merge(stats),
            None => {
                out.classes.insert(dense, stats);
            }
        }
    }
    Ok(out)
}

/// Sweep configuration for [`sweep`].
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub n: u32,
    pub cap: u64,
    pub canonical: bool,
    pub shard: Shard,
    /// report progress on stderr every this many visited machines
    pub progress_every: Option<u64>,
}

fn name_of(froms: &[u8], digits: &[u8]) -> String {
    let mut out = String::with_capacity(4 + 8 * froms.len());
    out.push('(');
    out.push_str(&froms.len().to_string());
    for (&f, &t) in froms.iter().zip(digits) {
        out.push_str(", ");
        out.push_str(&f.to_string());
        out.push_str(", ");
        out.push_str(&t.to_string());
    }
    out.push(')');
    out
}

/// Runs one shard of the exhaustive sweep over machines with at most `n`
/// states, aggregating halting outcomes per dense state count.
///
/// Two whole blocks are short-circuited without simulation: machines without
/// a start rule (they halt immediately with the empty word, which can never
/// win once a single 1 is reachable) and machines with all `2n` rules
/// defined (no lookup can fail, so they never halt).
pub fn sweep(cfg: &SweepConfig) -> PartialSummary {
    let n = cfg.n;
    let base = 6 * n as u64;
    let slots = 2 * n as u8;
    let mut partial = PartialSummary::empty(n, cfg.cap, cfg.canonical);
    let mut filter = cfg.canonical.then(|| CanonicalFilter::new(n));
    let mut runner = SweepRunner::new(cfg.cap);
    let mut rules = RuleTable::empty(n);
    let packed: Vec<u16> = (0..6 * n).map(pack_to_index).collect();
    let to_state: Vec<u32> = (0..6 * n).map(|t| t / 6).collect();

    let mut block_start: u128 = 0;
    let mut visited: u64 = 0;
    let mut next_progress = cfg.progress_every.unwrap_or(u64::MAX);

    for k in 1..=slots as usize {
        let size = (base as u128).pow(k as u32);
        let mut subsets = SubsetIter::new(slots, k);
        while let Some(froms) = subsets.next() {
            let froms: Vec<u8> = froms.to_vec();
            let start = ((cfg.shard.index() as u128 + cfg.shard.total() as u128
                - block_start % cfg.shard.total() as u128)
                % cfg.shard.total() as u128) as u64;
            let in_shard =
                |start: u64| (size as u64).saturating_sub(start).div_ceil(cfg.shard.total());
            // machines with no (0,0) rule halt at step 0 with the empty word
            if froms[0] != 0 {
                partial.stats.lambda_skipped += in_shard(start);
                block_start += size;
                continue;
            }
            // machines with every rule defined can never reach a halt
            if k == slots as usize {
                partial.stats.total_rule_skipped += in_shard(start);
                block_start += size;
                continue;
            }
            if let Some(f) = filter.as_mut() {
                f.enter_subset(&froms);
                if f.block_non_canonical() {
                    block_start += size;
                    continue;
                }
            }
            block_start += size;
            let Some(mut walk) = crate::enumerate::BlockWalk::new(base, k, start, cfg.shard.total())
            else {
                continue;
            };
            let from_dense = u32::from(froms[k - 1]) / 2 + 1;
            while !walk.is_done() {
                let digits = walk.digits();
                if let Some(f) = &filter {
                    match f.check(digits) {
                        Ok(()) => {}
                        Err(Skip::Subtree(d)) => {
                            walk.skip_subtree(d);
                            continue;
                        }
                        Err(Skip::Block) => break,
                    }
                }
                visited += 1;
                for (i, &f) in froms.iter().enumerate() {
                    rules.entries[f as usize] = packed[digits[i] as usize];
                }
                let outcome = runner.run(&rules);
                for &f in &froms {
                    rules.entries[f as usize] = UNDEF;
                }
                partial.stats.simulated += 1;
                match outcome {
                    FastOutcome::Halted { steps, ones } => {
                        partial.stats.halted += 1;
                        if ones > 0 {
                            let digits = walk.digits();
                            let dense = digits
                                .iter()
                                .map(|&t| to_state[t as usize] + 1)
                                .max()
                                .unwrap()
                                .max(from_dense);
                            let name = name_of(&froms, digits);
                            partial.record_halt(dense, ones, steps, &name);
                        }
                    }
                    FastOutcome::CapExceeded => partial.stats.cap_exceeded += 1,
                }
                if visited >= next_progress {
                    eprintln!(
                        "sweep n={n} shard {}: visited {visited}, halted {}, cap-exceeded {}",
                        cfg.shard, partial.stats.halted, partial.stats.cap_exceeded
                    );
                    next_progress =
                        visited.saturating_add(cfg.progress_every.unwrap_or(u64::MAX));
                }
                walk.advance();
            }
        }
    }
    partial.stats.nonhalt_proofs = runner.nonhalt_proofs;
    partial
}

/// Aggregates an explicit machine stream, as `build_bb_summary` requires.
pub fn aggregate_stream(
    n: u32,
    cap: u64,
    machines: impl Iterator<Item = Machine>,
    canonical: bool,
) -> PartialSummary {
    let mut partial = PartialSummary::empty(n, cap, canonical);
    let mut runner = (cap <= SweepRunner::MAX_CAP).then(|| SweepRunner::new(cap));
    for m in machines {
        partial.stats.simulated += 1;
        let (halted, steps, ones) = match &mut runner {
            Some(r) => match r.run(&RuleTable::from_machine(&m)) {
                FastOutcome::Halted { steps, ones } => (true, steps, ones),
                FastOutcome::CapExceeded => (false, 0, 0),
            },
            None => match run(&m, cap) {
                Outcome::Halted { steps, ones, .. } => (true, steps, ones),
                Outcome::CapExceeded { .. } => (false, 0, 0),
            },
        };
        if halted {
            partial.stats.halted += 1;
            // empty-word halters never enter catalogs
            if ones > 0 {
                partial.record_halt(m.n_states(), ones, steps, &encode_name(&m));
            }
        } else {
            partial.stats.cap_exceeded += 1;
        }
    }
    if let Some(r) = runner {
        partial.stats.nonhalt_proofs = r.nonhalt_proofs;
    }
    partial
}

/// One persisted simulation record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogRecord {
    pub name: String,
    pub outcome: Outcome,
}

/// Per-`n` summary: BB value, the attaining machines and words, the minimal
/// step count among them and the base-set representatives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BBSummary {
    pub n: u32,
    pub cap: u64,
    pub bb_value: u32,
    pub machines: Vec<String>,
    pub words: Vec<String>,
    pub kt_bb: u64,
    pub base_names: Vec<String>,
    pub records: Vec<CatalogRecord>,
}

/// Extracts the summary for machines with at most `m` states from a sweep of
/// the `n >= m` space. Canonical sweeps are orbit-expanded first; every
/// winner is re-simulated so the summary is consistent by construction.
pub fn build_summary(partial: &PartialSummary, m: u32) -> Result<BBSummary, CatalogError> {
    assert!(m >= 1 && m <= partial.n);
    let (bb_value, winner_names) = partial.best_upto(m).ok_or(CatalogError::EmptyStream)?;
    let mut machines: Vec<Machine> = Vec::new();
    for name in &winner_names {
        let machine = decode_name(name).map_err(|e| CatalogError::Inconsistent {
            name: name.clone(),
            reason: e.to_string(),
        })?;
        if partial.canonical {
            machines.extend(
                orbit_in_space(&machine, partial.n)
                    .into_iter()
                    .filter(|mm| mm.n_states() <= m),
            );
        } else {
            machines.push(machine);
        }
    }
    machines.sort_by(crate::machine::name_cmp);
    machines.dedup();

    let mut records = Vec::with_capacity(machines.len());
    for machine in &machines {
        let name = encode_name(machine);
        let outcome = run(machine, partial.cap);
        match &outcome {
            Outcome::Halted { ones, .. } if *ones == bb_value => {}
            other => {
                return Err(CatalogError::Inconsistent {
                    name,
                    reason: format!("expected a halt with {bb_value} ones, got {other:?}"),
                })
            }
        }
        records.push(CatalogRecord { name, outcome });
    }

    let kt_bb = records
        .iter()
        .map(|r| r.outcome.steps())
        .min()
        .ok_or(CatalogError::EmptyStream)?;
    let mut words: Vec<String> = records
        .iter()
        .map(|r| match &r.outcome {
            Outcome::Halted { word, .. } => word.as_str().to_string(),
            Outcome::CapExceeded { .. } => unreachable!(),
        })
        .collect();
    words.sort();
    words.dedup();
    let base_names: Vec<String> = base_set(&machines).iter().map(encode_name).collect();

    Ok(BBSummary {
        n: m,
        cap: partial.cap,
        bb_value,
        machines: records.iter().map(|r| r.name.clone()).collect(),
        words,
        kt_bb,
        base_names,
        records,
    })
}

/// Builds the summary of an explicit machine stream covering the `n`-space.
pub fn build_bb_summary(
    n: u32,
    cap: u64,
    machines: impl Iterator<Item = Machine>,
    canonical: bool,
) -> Result<BBSummary, CatalogError> {
    build_summary(&aggregate_stream(n, cap, machines, canonical), n)
}

impl BBSummary {
    /// Flat `key = value` text, stable for golden comparisons.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("n = {}\n", self.n));
        out.push_str(&format!("cap = {}\n", self.cap));
        out.push_str(&format!("bb = {}\n", self.bb_value));
        out.push_str(&format!("m_bb = {}\n", self.machines.len()));
        out.push_str(&format!("kt_bb = {}\n", self.kt_bb));
        out.push_str(&format!("b_bb = {}\n", self.base_names.len()));
        out.push_str(&format!("l_bb = {}\n", self.words.join(" ")));
        for (i, base) in self.base_names.iter().enumerate() {
            out.push_str(&format!("base_{i} = {base}\n"));
        }
        out
    }
}

/// Serializes records as `name TAB status TAB steps TAB ones TAB word` lines.
pub fn write_catalog(records: &[CatalogRecord]) -> String {
    let mut out = String::new();
    for r in records {
        match &r.outcome {
            Outcome::Halted { steps, ones, word } => {
                out.push_str(&format!(
                    "{}\tHALTED\t{}\t{}\t{}\n",
                    r.name,
                    steps,
                    ones,
                    word.as_str()
                ));
            }
            Outcome::CapExceeded { steps } => {
                out.push_str(&format!("{}\tCAP_EXCEEDED\t{}\t\t\n", r.name, steps));
            }
        }
    }
    out
}

/// Parses [`write_catalog`] output; errors carry 1-based line numbers.
pub fn read_catalog(text: &str) -> Result<Vec<CatalogRecord>, CatalogError> {
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let malformed = |reason: &str| CatalogError::Malformed {
            line: line_no,
            reason: reason.to_string(),
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(malformed(&format!("expected 5 fields, got {}", fields.len())));
        }
        let name = fields[0].to_string();
        decode_name(&name).map_err(|e| malformed(&e.to_string()))?;
        let steps: u64 = fields[2]
            .parse()
            .map_err(|_| malformed("bad step count"))?;
        let outcome = match fields[1] {
            "HALTED" => {
                let ones: u32 = fields[3]
                    .parse()
                    .map_err(|_| malformed("bad ones count"))?;
                let word =
                    Word::from_text(fields[4]).map_err(|e| malformed(&e.to_string()))?;
                if word.ones() != ones {
                    return Err(malformed("ones does not match the word"));
                }
                Outcome::Halted { steps, ones, word }
            }
            "CAP_EXCEEDED" => {
                if !fields[3].is_empty() || !fields[4].is_empty() {
                    return Err(malformed("cap-exceeded records carry no ones/word"));
                }
                Outcome::CapExceeded { steps }
            }
            other => return Err(malformed(&format!("unknown status {other:?}"))),
        };
        records.push(CatalogRecord { name, outcome });
    }
    Ok(records)
}

/// A Placid Platypus table entry for one target ones count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PpEntry {
    pub ones: u32,
    pub result: PpResult,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PpResult {
    Found {
        pp: u32,
        min_steps: u64,
        min_name: String,
        max_steps: u64,
        max_name: String,
    },
    /// not reachable within the searched state counts and cap
    Unknown,
}

/// Minimal state counts for each ones target up to `max_ones`, with
/// step-extremal witnesses, from an exhaustive sweep.
pub fn build_pp_table(partial: &PartialSummary, max_ones: u32) -> Vec<PpEntry> {
    (1..=max_ones)
        .map(|ones| {
            let hit = partial
                .classes
                .iter()
                .find_map(|(dense, c)| c.per_ones.get(&ones).map(|s| (*dense, s)));
            let result = match hit {
                Some((pp, stats)) => PpResult::Found {
                    pp,
                    min_steps: stats.min_steps,
                    min_name: stats.min_name.clone(),
                    max_steps: stats.max_steps,
                    max_name: stats.max_name.clone(),
                },
                None => PpResult::Unknown,
            };
            PpEntry { ones, result }
        })
        .collect()
}

/// BB values per state count derivable from a sweep: `bb_values(p)[k]` is
/// BB(k), with index 0 holding 0.
pub fn bb_values(partial: &PartialSummary) -> Vec<u32> {
    let mut values = vec![0u32; partial.n as usize + 1];
    for k in 1..=partial.n {
        values[k as usize] = partial
            .best_upto(k)
            .map(|(bb, _)| bb)
            .unwrap_or(values[k as usize - 1]);
    }
    values
}

/// The bracket form: PP(ones) = k such that BB(k-1) < ones <= BB(k).
pub fn pp_from_bracket(bb: &[u32], ones: u32) -> Option<u32> {
    (1..bb.len())
        .find(|&k| bb[k - 1] < ones && ones <= bb[k])
        .map(|k| k as u32)
}

/// Cross-checks searched PP values against the bracket formula.
pub fn verify_bracket(partial: &PartialSummary, entries: &[PpEntry]) -> Result<(), CatalogError> {
    let bb = bb_values(partial);
    for entry in entries {
        if let PpResult::Found { pp, .. } = &entry.result {
            if let Some(bracket) = pp_from_bracket(&bb, entry.ones) {
                if bracket != *pp {
                    return Err(CatalogError::BracketMismatch {
                        ones: entry.ones,
                        search: *pp,
                        bracket,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Serializes PP entries as TSV: `ones pp min_steps min_name max_steps
/// max_name`, or `ones unknown`.
pub fn write_pp_table(entries: &[PpEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        match &e.result {
            PpResult::Found {
                pp,
                min_steps,
                min_name,
                max_steps,
                max_name,
            } => out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                e.ones, pp, min_steps, min_name, max_steps, max_name
            )),
            PpResult::Unknown => out.push_str(&format!("{}\tunknown\n", e.ones)),
        }
    }
    out
}

/// Parses [`write_pp_table`] output.
pub fn read_pp_table(text: &str) -> Result<Vec<PpEntry>, CatalogError> {
    let mut entries = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let malformed = |reason: &str| CatalogError::Malformed {
            line: line_no,
            reason: reason.to_string(),
        };
        let fields: Vec<&str> = line.split('\t').collect();
        let ones: u32 = fields[0].parse().map_err(|_| malformed("bad ones"))?;
        let result = match fields.len() {
            2 if fields[1] == "unknown" => PpResult::Unknown,
            6 => PpResult::Found {
                pp: fields[1].parse().map_err(|_| malformed("bad pp"))?,
                min_steps: fields[2].parse().map_err(|_| malformed("bad min steps"))?,
                min_name: fields[3].to_string(),
                max_steps: fields[4].parse().map_err(|_| malformed("bad max steps"))?,
                max_name: fields[5].to_string(),
            },
            _ => return Err(malformed("expected 2 or 6 fields")),
        };
        entries.push(PpEntry { ones, result });
    }
    Ok(entries)
}
