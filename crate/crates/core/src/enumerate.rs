//! Deterministic streaming of the machine space, with sharding and
//! symmetry-pruned canonical filtering.
//!
//! The space of machines with at most `n` states is ordered by rule count
//! `k`, then from-index subset (lexicographic), then to-index assignment
//! (mixed-radix, first pair most significant). Shard `s` of `m` receives the
//! machines whose global ordinal is congruent to `s` mod `m`, so shards
//! partition the space exactly and stay stable across runs.

use std::time::Duration;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::machine::{cmp_decimal, machine_space_size, Machine, Rule};
use crate::symmetry::{decimal_rank_table, AmbientGroup};

/// Enumeration is only practical while the group and ordinal arithmetic stay
/// small; six states is already far beyond exhaustive reach.
pub const MAX_ENUM_STATES: u32 = 6;

/// One slice of a deterministically sharded sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shard {
    index: u64,
    total: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ShardError {
    #[error("shard must be written i/m with 0 <= i < m")]
    Syntax,
    #[error("shard index {index} is not below total {total}")]
    OutOfRange { index: u64, total: u64 },
}

impl Shard {
    pub fn new(index: u64, total: u64) -> Result<Shard, ShardError> {
        if total == 0 || index >= total {
            return Err(ShardError::OutOfRange { index, total });
        }
        Ok(Shard { index, total })
    }

    /// The single shard covering everything.
    pub fn whole() -> Shard {
        Shard { index: 0, total: 1 }
    }

    /// Parses the command-line form `i/m`.
    pub fn parse(text: &str) -> Result<Shard, ShardError> {
        let (i, m) = text.split_once('/').ok_or(ShardError::Syntax)?;
        let index = i.trim().parse().map_err(|_| ShardError::Syntax)?;
        let total = m.trim().parse().map_err(|_| ShardError::Syntax)?;
        Shard::new(index, total)
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

impl std::fmt::Display for Shard {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.index, self.total)
    }
}

/// Lexicographic size-`k` subsets of `0..slots`.
pub(crate) struct SubsetIter {
    slots: u8,
    current: Vec<u8>,
    started: bool,
    done: bool,
}

impl SubsetIter {
    pub fn new(slots: u8, k: usize) -> SubsetIter {
        SubsetIter {
            slots,
            current: (0..k as u8).collect(),
            started: false,
            done: k == 0 || k > slots as usize,
        }
    }

    pub fn next(&mut self) -> Option<&[u8]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.current);
        }
        let k = self.current.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                return None;
            }
            i -= 1;
            if self.current[i] < self.slots - (k - i) as u8 {
                break;
            }
        }
        self.current[i] += 1;
        for j in i + 1..k {
            self.current[j] = self.current[j - 1] + 1;
        }
        Some(&self.current)
    }
}

/// Strided walk over the mixed-radix to-assignments of one subset block,
/// with sound subtree skipping.
pub(crate) struct BlockWalk {
    base: u64,
    digits: Vec<u8>,
    weights: Vec<u64>,
    rank: u64,
    stride: u64,
    residue: u64,
    size: u64,
    done: bool,
}

impl BlockWalk {
    /// `start` is the first in-shard rank; `None` when the block holds no
    /// in-shard assignment.
    pub fn new(base: u64, k: usize, start: u64, stride: u64) -> Option<BlockWalk> {
        let size = base.pow(k as u32);
        if start >= size {
            return None;
        }
        let mut weights = vec![0u64; k];
        let mut w = 1;
        for i in (0..k).rev() {
            weights[i] = w;
            w *= base;
        }
        let mut walk = BlockWalk {
            base,
            digits: vec![0; k],
            weights,
            rank: start,
            stride,
            residue: start % stride,
            size,
            done: false,
        };
        walk.set_digits(start);
        Some(walk)
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    fn set_digits(&mut self, mut rank: u64) {
        for i in 0..self.digits.len() {
            self.digits[i] = (rank / self.weights[i]) as u8;
            rank %= self.weights[i];
        }
    }

    /// Steps to the next in-shard assignment.
    pub fn advance(&mut self) {
        self.rank += self.stride;
        if self.rank >= self.size {
            self.done = true;
            return;
        }
        let mut carry = self.stride;
        let mut i = self.digits.len();
        while carry > 0 {
            i -= 1;
            let v = self.digits[i] as u64 + carry;
            self.digits[i] = (v % self.base) as u8;
            carry = v / self.base;
        }
    }

    /// Jumps past every assignment sharing digits `0..=d` with the current
    /// one, landing on the next in-shard assignment beyond them.
    pub fn skip_subtree(&mut self, d: usize) {
        let w = self.weights[d];
        let subtree_next = (self.rank / w + 1) * w;
        let offset = (self.residue + self.stride - subtree_next % self.stride) % self.stride;
        self.rank = subtree_next + offset;
        if self.rank >= self.size {
            self.done = true;
            return;
        }
        let rank = self.rank;
        self.set_digits(rank);
    }
}

pub(crate) enum Skip {
    /// No assignment of the current subset is canonical.
    Block,
    /// Nothing sharing digits `0..=d` with the current assignment is canonical.
    Subtree(usize),
}

/// Per-subset compiled comparison program for one group element: the
/// positions whose from-indexes agree pairwise, then a constant verdict at
/// the first from-index mismatch.
struct Prog {
    elem: usize,
    src: Vec<u8>,
    maxd: Vec<u8>,
    /// `Some(true)`: transformed name smaller when all compared targets tie.
    smaller_on_tie: Option<bool>,
    verdict_skip: Option<u8>,
}

/// Canonicality test for raw assignments: a machine is canonical when no
/// symmetry image has a lexicographically smaller name text.
pub(crate) struct CanonicalFilter {
    group: AmbientGroup,
    /// decimal-string rank of each to-index, fused with each element's to-map
    id_rank: Vec<u16>,
    fused_rank: Vec<Vec<u16>>,
    progs: Vec<Prog>,
    block_non_canonical: bool,
}

impl CanonicalFilter {
    pub fn new(n: u32) -> CanonicalFilter {
        let group = AmbientGroup::new(n);
        let id_rank = decimal_rank_table(6 * n);
        let fused_rank = group
            .elems
            .iter()
            .map(|e| e.to_map.iter().map(|&t| id_rank[t as usize]).collect())
            .collect();
        CanonicalFilter {
            group,
            id_rank,
            fused_rank,
            progs: Vec::new(),
            block_non_canonical: false,
        }
    }

    /// Compiles the comparison programs for one from-index subset.
    pub fn enter_subset(&mut self, froms: &[u8]) {
        self.progs.clear();
        self.block_non_canonical = false;
        let k = froms.len();
        let mut new_f = [0u8; 16];
        let mut order = [0u8; 16];
        for (idx, elem) in self.group.elems.iter().enumerate() {
            for i in 0..k {
                new_f[i] = elem.from_map[froms[i] as usize];
            }
            // insertion sort of positions by transformed from-index
            for i in 0..k {
                order[i] = i as u8;
                let mut j = i;
                while j > 0 && new_f[order[j - 1] as usize] > new_f[order[j] as usize] {
                    order.swap(j - 1, j);
                    j -= 1;
                }
            }
            let mut src = Vec::new();
            let mut maxd = Vec::new();
            let mut running_max = 0u8;
            let mut smaller_on_tie = None;
            for j in 0..k {
                let s = order[j];
                let nf = new_f[s as usize];
                if nf == froms[j] {
                    running_max = running_max.max(j as u8).max(s);
                    src.push(s);
                    maxd.push(running_max);
                } else {
                    smaller_on_tie =
                        Some(cmp_decimal(nf as u32, froms[j] as u32) == std::cmp::Ordering::Less);
                    break;
                }
            }
            let verdict_skip = src.last().map(|_| *maxd.last().unwrap());
            if smaller_on_tie == Some(true) && src.is_empty() {
                self.block_non_canonical = true;
            }
            if smaller_on_tie == Some(false) && src.is_empty() {
                continue; // can never make the name smaller
            }
            self.progs.push(Prog {
                elem: idx,
                src,
                maxd,
                smaller_on_tie,
                verdict_skip,
            });
        }
    }

    pub fn block_non_canonical(&self) -> bool {
        self.block_non_canonical
    }

    /// Checks the current assignment; on failure names the digit subtree
    /// that shares its fate.
    pub fn check(&self, digits: &[u8]) -> Result<(), Skip> {
        'next_elem: for prog in &self.progs {
            let fused = &self.fused_rank[prog.elem];
            for (j, &s) in prog.src.iter().enumerate() {
                let a = fused[digits[s as usize] as usize];
                let b = self.id_rank[digits[j] as usize];
                if a != b {
                    if a < b {
                        return Err(Skip::Subtree(prog.maxd[j] as usize));
                    }
                    continue 'next_elem;
                }
            }
            if prog.smaller_on_tie == Some(true) {
                return Err(match prog.verdict_skip {
                    Some(d) => Skip::Subtree(d as usize),
                    None => Skip::Block,
                });
            }
        }
        Ok(())
    }
}

/// Iterator over one shard of the machine space.
pub struct MachineStream {
    base: u64,
    slots: u8,
    shard: Shard,
    filter: Option<CanonicalFilter>,
    k: usize,
    subsets: SubsetIter,
    froms: Vec<u8>,
    walk: Option<BlockWalk>,
    block_start: u128,
    exhausted: bool,
}

impl MachineStream {
    fn new(n: u32, shard: Shard, canonical: bool) -> MachineStream {
        assert!(
            (1..=MAX_ENUM_STATES).contains(&n),
            "enumeration supports 1..={MAX_ENUM_STATES} states"
        );
        MachineStream {
            base: 6 * n as u64,
            slots: 2 * n as u8,
            shard,
            filter: canonical.then(|| CanonicalFilter::new(n)),
            k: 1,
            subsets: SubsetIter::new(2 * n as u8, 1),
            froms: Vec::new(),
            walk: None,
            block_start: 0,
            exhausted: false,
        }
    }

    /// First in-shard rank within a block starting at `block_start`.
    fn shard_start(&self) -> u64 {
        let m = self.shard.total as u128;
        ((self.shard.index as u128 + m - self.block_start % m) % m) as u64
    }

    fn next_block(&mut self) -> bool {
        loop {
            let froms = match self.subsets.next() {
                Some(s) => s.to_vec(),
                None => {
                    self.k += 1;
                    if self.k > self.slots as usize {
                        self.exhausted = true;
                        return false;
                    }
                    self.subsets = SubsetIter::new(self.slots, self.k);
                    continue;
                }
            };
            let size = self.base.pow(self.k as u32) as u128;
            if let Some(filter) = &mut self.filter {
                filter.enter_subset(&froms);
                if filter.block_non_canonical() {
                    self.block_start += size;
                    continue;
                }
            }
            let start = self.shard_start();
            let walk = BlockWalk::new(self.base, self.k, start, self.shard.total);
            self.block_start += size;
            if let Some(walk) = walk {
                self.froms = froms;
                self.walk = Some(walk);
                return true;
            }
        }
    }

    fn materialize(&self) -> Machine {
        let walk = self.walk.as_ref().unwrap();
        let rules = self
            .froms
            .iter()
            .zip(walk.digits())
            .map(|(&f, &t)| Rule::from_indexes(f as u32, t as u32))
            .collect();
        Machine::new(rules).expect("enumerated machines are valid")
    }
}

impl Iterator for MachineStream {
    type Item = Machine;

    fn next(&mut self) -> Option<Machine> {
        loop {
            if self.exhausted {
                return None;
            }
            let Some(walk) = self.walk.as_mut() else {
                self.next_block();
                continue;
            };
            if walk.is_done() {
                self.walk = None;
                continue;
            }
            if let Some(filter) = &self.filter {
                match filter.check(walk.digits()) {
                    Ok(()) => {}
                    Err(Skip::Subtree(d)) => {
                        walk.skip_subtree(d);
                        continue;
                    }
                    Err(Skip::Block) => {
                        self.walk = None;
                        continue;
                    }
                }
            }
            let machine = self.materialize();
            self.walk.as_mut().unwrap().advance();
            return Some(machine);
        }
    }
}

/// Streams every machine with at most `n` states belonging to `shard`.
pub fn enumerate_machines(n: u32, shard: Shard) -> MachineStream {
    MachineStream::new(n, shard, false)
}

/// Streams the canonical orbit representatives (lexicographically smallest
/// name within the `n`-state space symmetry orbit) belonging to `shard`.
pub fn enumerate_canonical(n: u32, shard: Shard) -> MachineStream {
    MachineStream::new(n, shard, true)
}

/// Walks the same stream as [`enumerate_machines`] without materializing
/// machines, returning how many the shard holds.
pub fn count_stream(n: u32, shard: Shard) -> u64 {
    let mut stream = MachineStream::new(n, shard, false);
    let mut count = 0u64;
    loop {
        if stream.exhausted {
            return count;
        }
        let Some(walk) = stream.walk.as_mut() else {
            stream.next_block();
            continue;
        };
        if walk.is_done() {
            stream.walk = None;
            continue;
        }
        count += 1;
        walk.advance();
    }
}

/// Wall-clock bounds for simulating every machine with at most `n` states,
/// given per-machine timing bounds in microseconds.
pub fn estimate_sweep(n: u32, low_us: u64, high_us: u64) -> (Duration, Duration) {
    assert!(low_us > 0 && high_us > 0, "timings must be positive");
    let space = machine_space_size(n);
    let to_duration = |micros: BigUint| {
        let secs = (&micros / 1_000_000u64).to_u64();
        let rem = (&micros % 1_000_000u64).to_u32().unwrap();
        match secs {
            Some(secs) => Duration::new(secs, rem * 1000),
            None => Duration::MAX,
        }
    };
    (
        to_duration(&space * low_us),
        to_duration(&space * high_us),
    )
}

/// Formats the sweep estimate the way the `estimate` command reports it:
/// nearest integer for the lower bound, ceiling for the upper, in days, or
/// 365-day years once the upper bound reaches a thousand days.
pub fn format_estimate(n: u32, low_us: u64, high_us: u64) -> String {
    let space = machine_space_size(n);
    let low = &space * low_us;
    let high = &space * high_us;
    let day = BigUint::from(86_400_000_000u64);
    let high_days = (&high + (&day - 1u32)) / &day;
    if high_days >= BigUint::from(1000u32) {
        let year = &day * 365u32;
        let low_years = (&low * 2u32 + &year) / (&year * 2u32);
        let high_years = (&high + (&year - 1u32)) / &year;
        format!("{low_years}..{high_years} years")
    } else {
        let low_days = (&low * 2u32 + &day) / (&day * 2u32);
        format!("{low_days}..{high_days} days")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::encode_name;
    use crate::symmetry::canonical_in_space;
    use std::collections::BTreeSet;

    #[test]
    fn stream_counts_match_the_space_size() {
        assert_eq!(enumerate_machines(1, Shard::whole()).count(), 48);
        assert_eq!(enumerate_machines(2, Shard::whole()).count(), 28_560);
        assert_eq!(count_stream(1, Shard::whole()), 48);
        assert_eq!(count_stream(2, Shard::whole()), 28_560);
    }

    #[test]
    fn stream_order_is_k_subset_assignment() {
        let names: Vec<String> = enumerate_machines(1, Shard::whole())
            .map(|m| encode_name(&m))
            .collect();
        assert_eq!(names[0], "(1, 0, 0)");
        assert_eq!(names[5], "(1, 0, 5)");
        assert_eq!(names[6], "(1, 1, 0)");
        assert_eq!(names[12], "(2, 0, 0, 1, 0)");
        assert_eq!(names[47], "(2, 0, 5, 1, 5)");
    }

    #[test]
    fn stream_is_deterministic() {
        let a: Vec<String> = enumerate_machines(2, Shard::whole())
            .map(|m| encode_name(&m))
            .collect();
        let b: Vec<String> = enumerate_machines(2, Shard::whole())
            .map(|m| encode_name(&m))
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn shards_partition_the_stream() {
        let whole: Vec<String> = enumerate_machines(2, Shard::whole())
            .map(|m| encode_name(&m))
            .collect();
        for total in [2u64, 3, 7] {
            let mut merged = vec![Vec::new(); total as usize];
            for index in 0..total {
                merged[index as usize] = enumerate_machines(2, Shard::new(index, total).unwrap())
                    .map(|m| encode_name(&m))
                    .collect();
            }
            // ordinal s mod total lands in shard s: interleaving recovers the stream
            let mut interleaved = Vec::new();
            let mut cursors = vec![0usize; total as usize];
            for ordinal in 0..whole.len() {
                let shard = ordinal % total as usize;
                interleaved.push(merged[shard][cursors[shard]].clone());
                cursors[shard] += 1;
            }
            assert_eq!(interleaved, whole, "total {total}");
        }
    }

    #[test]
    fn canonical_stream_matches_brute_force_filter() {
        for n in [1u32, 2] {
            let brute: Vec<String> = enumerate_machines(n, Shard::whole())
                .filter(|m| canonical_in_space(m, n) == *m)
                .map(|m| encode_name(&m))
                .collect();
            let fast: Vec<String> = enumerate_canonical(n, Shard::whole())
                .map(|m| encode_name(&m))
                .collect();
            assert_eq!(fast, brute, "n = {n}");
        }
    }

    #[test]
    fn canonical_count_for_one_state() {
        // 48 machines, 8 mirror-fixed, so (48 - 8) / 2 + 8 orbits
        assert_eq!(enumerate_canonical(1, Shard::whole()).count(), 28);
    }

    #[test]
    fn canonical_orbits_expand_to_the_full_space() {
        let n = 2;
        let mut expanded = Vec::new();
        for rep in enumerate_canonical(n, Shard::whole()) {
            for member in crate::symmetry::orbit_in_space(&rep, n) {
                expanded.push(encode_name(&member));
            }
        }
        let total = expanded.len();
        let unique: BTreeSet<String> = expanded.into_iter().collect();
        assert_eq!(total, 28_560, "orbits must not overlap");
        assert_eq!(unique.len(), 28_560);
    }

    #[test]
    fn canonical_shards_partition_the_canonical_stream() {
        let whole: Vec<String> = enumerate_canonical(2, Shard::whole())
            .map(|m| encode_name(&m))
            .collect();
        let mut merged: Vec<String> = (0..3)
            .flat_map(|i| {
                enumerate_canonical(2, Shard::new(i, 3).unwrap()).map(|m| encode_name(&m))
            })
            .collect();
        merged.sort();
        let mut expected = whole.clone();
        expected.sort();
        assert_eq!(merged, expected);
    }

    #[test]
    fn shard_parsing() {
        assert_eq!(Shard::parse("0/2"), Ok(Shard::new(0, 2).unwrap()));
        assert_eq!(Shard::parse("3/8"), Ok(Shard::new(3, 8).unwrap()));
        assert!(Shard::parse("2/2").is_err());
        assert!(Shard::parse("x/2").is_err());
        assert!(Shard::parse("1").is_err());
        assert!(Shard::parse("0/0").is_err());
    }

    #[test]
    fn estimate_durations() {
        let (low, high) = estimate_sweep(1, 1, 1);
        assert_eq!(low, Duration::from_micros(48));
        assert_eq!(high, Duration::from_micros(48));
    }

    #[test]
    fn estimate_formatting_matches_the_reported_figures() {
        assert_eq!(format_estimate(4, 33, 76), "58..135 days");
        assert_eq!(format_estimate(5, 530, 2200), "13775..57179 years");
    }
}
