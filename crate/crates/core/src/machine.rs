//! Machine model: rules, the integer name encoding, validation and DOT output.
//!
//! A machine is a partial transition function over `(state, symbol)` pairs on
//! a binary tape, with no dedicated halt state: the machine halts when it
//! looks up an undefined pair. Rule sources and targets are indexed as
//!
//! * from-index `f = 2*state + read`
//! * to-index   `t = 6*state + 3*write + move`  (move codes: 0 left, 1 stay, 2 right)
//!
//! and a machine with rules `f_i -> t_i` is named by the integer tuple
//! `(k, f_1, t_1, ..., f_k, t_k)` with from-indexes strictly increasing.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use thiserror::Error;

/// Head movement of a rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Move {
    Left,
    Stay,
    Right,
}

impl Move {
    /// Numeric code used by the to-index encoding.
    pub fn code(self) -> u32 {
        match self {
            Move::Left => 0,
            Move::Stay => 1,
            Move::Right => 2,
        }
    }

    pub fn from_code(code: u32) -> Option<Move> {
        match code {
            0 => Some(Move::Left),
            1 => Some(Move::Stay),
            2 => Some(Move::Right),
            _ => None,
        }
    }

    /// One-letter form used in traces and DOT edge labels.
    pub fn glyph(self) -> char {
        match self {
            Move::Left => 'L',
            Move::Stay => 'S',
            Move::Right => 'R',
        }
    }

    /// Left and right swapped, stay fixed.
    pub fn mirrored(self) -> Move {
        match self {
            Move::Left => Move::Right,
            Move::Stay => Move::Stay,
            Move::Right => Move::Left,
        }
    }
}

/// A single transition rule `(from_state, read) -> (to_state, write, mv)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rule {
    pub from_state: u32,
    pub read: u8,
    pub to_state: u32,
    pub write: u8,
    pub mv: Move,
}

impl Rule {
    pub fn from_index(&self) -> u32 {
        2 * self.from_state + u32::from(self.read)
    }

    pub fn to_index(&self) -> u32 {
        6 * self.to_state + 3 * u32::from(self.write) + self.mv.code()
    }

    /// Decodes a `(from_index, to_index)` pair.
    pub fn from_indexes(from_index: u32, to_index: u32) -> Rule {
        Rule {
            from_state: from_index / 2,
            read: (from_index % 2) as u8,
            to_state: to_index / 6,
            write: ((to_index % 6) / 3) as u8,
            mv: Move::from_code(to_index % 3).unwrap(),
        }
    }

    /// Largest state index this rule mentions.
    fn max_state(&self) -> u32 {
        self.from_state.max(self.to_state)
    }
}

/// A machine: rules sorted by from-index plus the dense state count.
///
/// Instances built through [`Machine::new`] or [`decode_name`] always satisfy
/// the model invariants (one rule per source, dense states). Arbitrary
/// combinations can be assembled with [`Machine::from_parts`] and inspected
/// with [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Machine {
    rules: Vec<Rule>,
    n_states: u32,
}

/// A machine invariant violation, reported as data by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Two rules share the same `(state, read)` source.
    DuplicateSource { from_index: u32 },
    /// A rule mentions a state `>= n_states`.
    StateOutOfRange { rule: Rule, n_states: u32 },
    /// `n_states` is not `1 + max mentioned state`.
    NotDense { n_states: u32, max_mentioned: u32 },
    /// No rules at all.
    Empty,
    /// More rules than `2 * n_states` sources.
    TooManyRules { count: usize, n_states: u32 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateSource { from_index } => {
                write!(f, "duplicate rule source (from-index {from_index})")
            }
            Violation::StateOutOfRange { rule, n_states } => write!(
                f,
                "rule ({},{}) -> ({},{},{}) mentions a state >= n_states {}",
                rule.from_state,
                rule.read,
                rule.to_state,
                rule.write,
                rule.mv.glyph(),
                n_states
            ),
            Violation::NotDense {
                n_states,
                max_mentioned,
            } => write!(
                f,
                "n_states {n_states} is not 1 + max mentioned state {max_mentioned}"
            ),
            Violation::Empty => write!(f, "machine has no rules"),
            Violation::TooManyRules { count, n_states } => {
                write!(f, "{count} rules exceed the 2*{n_states} sources")
            }
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MachineError {
    #[error("invalid machine: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

impl Machine {
    /// Builds a machine from rules, inferring the dense state count.
    pub fn new(mut rules: Vec<Rule>) -> Result<Machine, MachineError> {
        rules.sort_by_key(Rule::from_index);
        let n_states = rules.iter().map(Rule::max_state).max().map_or(0, |m| m + 1);
        let machine = Machine { rules, n_states };
        let violations = validate(&machine);
        if violations.is_empty() {
            Ok(machine)
        } else {
            Err(MachineError::Invalid(violations))
        }
    }

    /// Assembles a machine without checking invariants.
    pub fn from_parts(mut rules: Vec<Rule>, n_states: u32) -> Machine {
        rules.sort_by_key(Rule::from_index);
        Machine { rules, n_states }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn n_states(&self) -> u32 {
        self.n_states
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    /// Looks up the rule for `(state, read)`, if defined.
    pub fn rule_for(&self, state: u32, read: u8) -> Option<&Rule> {
        let f = 2 * state + u32::from(read);
        self.rules
            .binary_search_by_key(&f, Rule::from_index)
            .ok()
            .map(|i| &self.rules[i])
    }

    /// The machine name, `(k, f_1, t_1, ..., f_k, t_k)`.
    pub fn name(&self) -> String {
        encode_name(self)
    }
}

impl fmt::Display for Machine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Checks every machine invariant; an empty list means the machine is valid.
pub fn validate(m: &Machine) -> Vec<Violation> {
    let mut violations = Vec::new();
    if m.rules.is_empty() {
        violations.push(Violation::Empty);
        return violations;
    }
    for pair in m.rules.windows(2) {
        if pair[0].from_index() == pair[1].from_index() {
            violations.push(Violation::DuplicateSource {
                from_index: pair[0].from_index(),
            });
        }
    }
    if m.rules.len() > 2 * m.n_states as usize {
        violations.push(Violation::TooManyRules {
            count: m.rules.len(),
            n_states: m.n_states,
        });
    }
    let mut max_mentioned = 0;
    for rule in &m.rules {
        max_mentioned = max_mentioned.max(rule.max_state());
        if rule.max_state() >= m.n_states {
            violations.push(Violation::StateOutOfRange {
                rule: *rule,
                n_states: m.n_states,
            });
        }
    }
    if m.n_states != max_mentioned + 1 {
        violations.push(Violation::NotDense {
            n_states: m.n_states,
            max_mentioned,
        });
    }
    violations
}

/// The name tuple `(k, f_1, t_1, ..., f_k, t_k)` as parsed integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameTuple {
    pairs: Vec<(u32, u32)>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NameError {
    #[error("machine name must be a parenthesized comma-separated integer list")]
    Syntax,
    #[error("component {0:?} is not a non-negative integer")]
    BadInteger(String),
    #[error("declared rule count {declared} does not match {actual} pairs")]
    CountMismatch { declared: usize, actual: usize },
    #[error("duplicate from-index {0}")]
    DuplicateFrom(u32),
    #[error("name declares zero rules")]
    Empty,
}

impl NameTuple {
    /// Parses `(k, f1, t1, ...)`; pairs are re-sorted by from-index.
    pub fn parse(text: &str) -> Result<NameTuple, NameError> {
        let inner = text
            .trim()
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or(NameError::Syntax)?;
        let mut numbers = Vec::new();
        for token in inner.split(',') {
            let token = token.trim();
            if token.is_empty() {
                return Err(NameError::Syntax);
            }
            let value: u32 = token
                .parse()
                .map_err(|_| NameError::BadInteger(token.to_string()))?;
            numbers.push(value);
        }
        let (&k, rest) = numbers.split_first().ok_or(NameError::Syntax)?;
        if k == 0 {
            return Err(NameError::Empty);
        }
        if rest.len() % 2 != 0 || rest.len() / 2 != k as usize {
            return Err(NameError::CountMismatch {
                declared: k as usize,
                actual: rest.len() / 2,
            });
        }
        let mut pairs: Vec<(u32, u32)> =
            rest.chunks_exact(2).map(|c| (c[0], c[1])).collect();
        pairs.sort_by_key(|&(f, _)| f);
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(NameError::DuplicateFrom(w[0].0));
            }
        }
        Ok(NameTuple { pairs })
    }

    pub fn of(m: &Machine) -> NameTuple {
        NameTuple {
            pairs: m
                .rules
                .iter()
                .map(|r| (r.from_index(), r.to_index()))
                .collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    pub fn to_machine(&self) -> Machine {
        let rules = self
            .pairs
            .iter()
            .map(|&(f, t)| Rule::from_indexes(f, t))
            .collect();
        // Pairs are sorted and duplicate-free, so the result is always valid.
        Machine::new(rules).expect("name tuples decode to valid machines")
    }

    /// Normalized text: `(k, f1, t1, ..., fk, tk)`.
    pub fn text(&self) -> String {
        let mut out = String::with_capacity(4 + 8 * self.pairs.len());
        out.push('(');
        out.push_str(&self.pairs.len().to_string());
        for &(f, t) in &self.pairs {
            out.push_str(", ");
            out.push_str(&f.to_string());
            out.push_str(", ");
            out.push_str(&t.to_string());
        }
        out.push(')');
        out
    }
}

/// Parses a machine name into a machine.
pub fn decode_name(text: &str) -> Result<Machine, NameError> {
    Ok(NameTuple::parse(text)?.to_machine())
}

/// Renders the normalized machine name.
pub fn encode_name(m: &Machine) -> String {
    NameTuple::of(m).text()
}

/// Number of distinct machines with at most `n` states: `(6n+1)^(2n) - 1`.
pub fn machine_space_size(n: u32) -> BigUint {
    assert!(n >= 1, "state count must be positive");
    BigUint::from(6 * n + 1).pow(2 * n) - 1u32
}

/// Compares two values by their decimal renderings (string order).
pub fn cmp_decimal(a: u32, b: u32) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    let mut da = [0u8; 10];
    let mut db = [0u8; 10];
    let la = write_digits(a, &mut da);
    let lb = write_digits(b, &mut db);
    da[..la].cmp(&db[..lb])
}

fn write_digits(mut v: u32, buf: &mut [u8; 10]) -> usize {
    let mut tmp = [0u8; 10];
    let mut n = 0;
    loop {
        tmp[n] = b'0' + (v % 10) as u8;
        v /= 10;
        n += 1;
        if v == 0 {
            break;
        }
    }
    for i in 0..n {
        buf[i] = tmp[n - 1 - i];
    }
    n
}

/// Orders machines by their encoded name text without building the strings.
pub fn name_cmp(a: &Machine, b: &Machine) -> Ordering {
    cmp_decimal(a.rules.len() as u32, b.rules.len() as u32)
        .then_with(|| {
            for (ra, rb) in a.rules.iter().zip(&b.rules) {
                let c = cmp_decimal(ra.from_index(), rb.from_index())
                    .then_with(|| cmp_decimal(ra.to_index(), rb.to_index()));
                if c != Ordering::Equal {
                    return c;
                }
            }
            Ordering::Equal
        })
}

/// Deterministic DOT rendering: one node per state, one edge per rule
/// labeled `read,write,move`, edges sorted by from-index.
pub fn render_dot(m: &Machine) -> String {
    let mut out = String::new();
    out.push_str("digraph {\n");
    out.push_str("  node [shape=circle];\n");
    for state in 0..m.n_states {
        out.push_str(&format!("  {state};\n"));
    }
    for rule in &m.rules {
        out.push_str(&format!(
            "  {} -> {} [label=\"{},{},{}\"];\n",
            rule.from_state,
            rule.to_state,
            rule.read,
            rule.write,
            rule.mv.glyph()
        ));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = "(6, 0, 9, 1, 14, 2, 18, 3, 3, 4, 5, 6, 15)";

    #[test]
    fn decode_example_machine() {
        let m = decode_name(EXAMPLE).unwrap();
        assert_eq!(m.n_states(), 4);
        assert_eq!(m.rule_count(), 6);
        // from-index 2, to-index 18 decode to (1,0) -> (3,0,L)
        let rule = m.rule_for(1, 0).unwrap();
        assert_eq!(
            *rule,
            Rule {
                from_state: 1,
                read: 0,
                to_state: 3,
                write: 0,
                mv: Move::Left
            }
        );
    }

    #[test]
    fn decode_smallest_name() {
        let m = decode_name("(1, 0, 3)").unwrap();
        assert_eq!(m.n_states(), 1);
        assert_eq!(
            m.rules(),
            &[Rule {
                from_state: 0,
                read: 0,
                to_state: 0,
                write: 1,
                mv: Move::Left
            }]
        );
    }

    #[test]
    fn encode_example_machine() {
        let m = decode_name(EXAMPLE).unwrap();
        assert_eq!(encode_name(&m), EXAMPLE);
    }

    #[test]
    fn encode_all_zero_rule() {
        let m = Machine::new(vec![Rule {
            from_state: 0,
            read: 0,
            to_state: 0,
            write: 0,
            mv: Move::Left,
        }])
        .unwrap();
        assert_eq!(encode_name(&m), "(1, 0, 0)");
    }

    #[test]
    fn decode_normalizes_whitespace_and_order() {
        let m = decode_name("(2,1,3,  0, 3)").unwrap();
        assert_eq!(encode_name(&m), "(2, 0, 3, 1, 3)");
    }

    #[test]
    fn decode_errors() {
        assert_eq!(decode_name("nope"), Err(NameError::Syntax));
        assert_eq!(
            decode_name("(2, 0, 3)"),
            Err(NameError::CountMismatch {
                declared: 2,
                actual: 1
            })
        );
        assert_eq!(
            decode_name("(2, 0, 3, 0, 4)"),
            Err(NameError::DuplicateFrom(0))
        );
        assert_eq!(
            decode_name("(1, -1, 3)"),
            Err(NameError::BadInteger("-1".to_string()))
        );
        assert_eq!(decode_name("(0)"), Err(NameError::Empty));
    }

    #[test]
    fn validate_accepts_example() {
        let m = decode_name(EXAMPLE).unwrap();
        assert!(validate(&m).is_empty());
    }

    #[test]
    fn validate_reports_duplicate_source() {
        let r = |t: u32| Rule::from_indexes(0, t);
        let m = Machine::from_parts(vec![r(3), r(4)], 1);
        assert_eq!(
            validate(&m),
            vec![Violation::DuplicateSource { from_index: 0 }]
        );
    }

    #[test]
    fn validate_reports_sparse_states() {
        // mentions state 5 but claims 4 states
        let rule = Rule {
            from_state: 0,
            read: 0,
            to_state: 5,
            write: 0,
            mv: Move::Stay,
        };
        let m = Machine::from_parts(vec![rule], 4);
        let violations = validate(&m);
        assert!(violations
            .iter()
            .any(|v| matches!(v, Violation::StateOutOfRange { .. })));
        assert!(violations
            .iter()
            .any(|v| matches!(v, Violation::NotDense { .. })));
    }

    #[test]
    fn space_size_values() {
        assert_eq!(machine_space_size(1), BigUint::from(48u32));
        assert_eq!(machine_space_size(2), BigUint::from(28_560u32));
        assert_eq!(machine_space_size(3), BigUint::from(47_045_880u32));
        assert_eq!(machine_space_size(4), BigUint::from(152_587_890_624u64));
    }

    #[test]
    fn dot_output_for_example() {
        let m = decode_name(EXAMPLE).unwrap();
        let dot = render_dot(&m);
        let nodes = dot.lines().filter(|l| l.trim_end().ends_with(';') && !l.contains("->") && !l.contains('[')).count();
        let edges = dot.lines().filter(|l| l.contains("->")).count();
        assert_eq!(nodes, 4);
        assert_eq!(edges, 6);
        assert!(dot.contains("  1 -> 3 [label=\"0,0,L\"];\n"));
    }

    #[test]
    fn dot_output_self_loop() {
        let m = decode_name("(1, 0, 3)").unwrap();
        let dot = render_dot(&m);
        assert_eq!(dot.lines().filter(|l| l.contains("->")).count(), 1);
        assert!(dot.contains("  0 -> 0 [label=\"0,1,L\"];\n"));
    }

    #[test]
    fn decimal_order_matches_string_order() {
        let values = [0u32, 1, 2, 3, 9, 10, 11, 15, 19, 20, 21, 29, 30, 100];
        for &a in &values {
            for &b in &values {
                assert_eq!(
                    cmp_decimal(a, b),
                    a.to_string().cmp(&b.to_string()),
                    "{a} vs {b}"
                );
            }
        }
    }
}
