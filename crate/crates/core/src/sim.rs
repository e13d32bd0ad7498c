//! Blank-tape simulation: step loop, halting by undefined transition, word
//! extraction and the step-by-step trace rendering.

use std::fmt;

use thiserror::Error;

use crate::machine::{Machine, Move};

/// Unbounded bidirectional binary tape, blank = 0.
#[derive(Debug, Clone)]
pub struct Tape {
    cells: Vec<u8>,
    origin: i64,
    extent: Option<(i64, i64)>,
}

impl Tape {
    pub fn new() -> Tape {
        Tape {
            cells: vec![0; 64],
            origin: 32,
            extent: None,
        }
    }

    pub fn read(&self, pos: i64) -> u8 {
        let idx = pos + self.origin;
        if idx < 0 || idx >= self.cells.len() as i64 {
            0
        } else {
            self.cells[idx as usize]
        }
    }

    pub fn write(&mut self, pos: i64, value: u8) {
        debug_assert!(value <= 1);
        let mut idx = pos + self.origin;
        while idx < 0 || idx >= self.cells.len() as i64 {
            self.grow();
            idx = pos + self.origin;
        }
        self.cells[idx as usize] = value;
        self.extent = Some(match self.extent {
            None => (pos, pos),
            Some((lo, hi)) => (lo.min(pos), hi.max(pos)),
        });
    }

    fn grow(&mut self) {
        let old_len = self.cells.len();
        let mut grown = vec![0; old_len * 2];
        grown[old_len / 2..old_len / 2 + old_len].copy_from_slice(&self.cells);
        self.cells = grown;
        self.origin += old_len as i64 / 2;
    }

    /// Leftmost and rightmost written positions, if any cell was written.
    pub fn extent(&self) -> Option<(i64, i64)> {
        self.extent
    }
}

impl Default for Tape {
    fn default() -> Self {
        Tape::new()
    }
}

/// The output word: tape symbols from the leftmost 1 to the rightmost 1,
/// empty (lambda) when the tape holds no 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(String);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WordError {
    #[error("word {0:?} contains a symbol other than 0/1")]
    BadSymbol(String),
    #[error("word {0:?} has a leading or trailing 0")]
    Untrimmed(String),
}

impl Word {
    pub fn empty() -> Word {
        Word(String::new())
    }

    /// Parses a word, enforcing the no-leading/trailing-zero invariant.
    pub fn from_text(text: &str) -> Result<Word, WordError> {
        if !text.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(WordError::BadSymbol(text.to_string()));
        }
        if !text.is_empty() && (text.starts_with('0') || text.ends_with('0')) {
            return Err(WordError::Untrimmed(text.to_string()));
        }
        Ok(Word(text.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn ones(&self) -> u32 {
        self.0.bytes().filter(|&b| b == b'1').count() as u32
    }

    pub fn reversed(&self) -> Word {
        Word(self.0.chars().rev().collect())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Number of 1 symbols in a word.
pub fn nr_ones(w: &Word) -> u32 {
    w.ones()
}

/// Substring between the first and last 1 inclusive; lambda without any 1.
pub fn extract_word(tape: &Tape) -> Word {
    let Some((lo, hi)) = tape.extent() else {
        return Word::empty();
    };
    let mut first = None;
    let mut last = None;
    for pos in lo..=hi {
        if tape.read(pos) == 1 {
            if first.is_none() {
                first = Some(pos);
            }
            last = Some(pos);
        }
    }
    match (first, last) {
        (Some(a), Some(b)) => Word(
            (a..=b)
                .map(|p| if tape.read(p) == 1 { '1' } else { '0' })
                .collect(),
        ),
        _ => Word::empty(),
    }
}

/// Result of a bounded run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Halted { steps: u64, ones: u32, word: Word },
    CapExceeded { steps: u64 },
}

impl Outcome {
    pub fn is_halted(&self) -> bool {
        matches!(self, Outcome::Halted { .. })
    }

    pub fn steps(&self) -> u64 {
        match self {
            Outcome::Halted { steps, .. } | Outcome::CapExceeded { steps } => *steps,
        }
    }
}

fn move_delta(mv: Move) -> i64 {
    match mv {
        Move::Left => -1,
        Move::Stay => 0,
        Move::Right => 1,
    }
}

/// Runs `m` from the blank tape for at most `cap` rule applications.
///
/// A step is one applied rule; the lookup that finds no rule is not counted.
/// Halting is detected by the cap alone, never by non-termination heuristics.
pub fn run(m: &Machine, cap: u64) -> Outcome {
    let mut tape = Tape::new();
    let mut state = 0u32;
    let mut pos = 0i64;
    let mut steps = 0u64;
    loop {
        let read = tape.read(pos);
        let Some(rule) = m.rule_for(state, read) else {
            let word = extract_word(&tape);
            let ones = word.ones();
            return Outcome::Halted { steps, ones, word };
        };
        if steps == cap {
            return Outcome::CapExceeded { steps };
        }
        tape.write(pos, rule.write);
        pos += move_delta(rule.mv);
        state = rule.to_state;
        steps += 1;
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("window of {given} cells cannot contain the touched extent; need at least {required}")]
    WindowTooSmall { given: usize, required: usize },
}

/// Renders one line per configuration from step 0 through halt or cap.
///
/// Each line shows the step number, the tape window with `[q>` inserted
/// before the head cell, and the same window without the marker. The window
/// is the touched extent padded to `window` cells when given (extra cells
/// split evenly, left-biased), or exactly the extent when `None`.
pub fn render_trace(m: &Machine, cap: u64, window: Option<usize>) -> Result<Vec<String>, TraceError> {
    // probe pass: head excursion over the whole run
    let (mut lo, mut hi) = (0i64, 0i64);
    {
        let mut tape = Tape::new();
        let mut state = 0u32;
        let mut pos = 0i64;
        let mut steps = 0u64;
        loop {
            lo = lo.min(pos);
            hi = hi.max(pos);
            let read = tape.read(pos);
            let Some(rule) = m.rule_for(state, read) else {
                break;
            };
            if steps == cap {
                break;
            }
            tape.write(pos, rule.write);
            pos += move_delta(rule.mv);
            state = rule.to_state;
            steps += 1;
        }
    }

    let required = (hi - lo + 1) as usize;
    let width = window.unwrap_or(required);
    if width < required {
        return Err(TraceError::WindowTooSmall {
            given: width,
            required,
        });
    }
    let pad = (width - required) as i64;
    let win_lo = lo - pad / 2;
    let win_hi = win_lo + width as i64 - 1;

    let render_line = |tape: &Tape, state: u32, head: i64, step: u64| {
        let mut marked = String::with_capacity(width + 4);
        let mut plain = String::with_capacity(width);
        for p in win_lo..=win_hi {
            if p == head {
                marked.push('[');
                marked.push_str(&state.to_string());
                marked.push('>');
            }
            let c = if tape.read(p) == 1 { '1' } else { '0' };
            marked.push(c);
            plain.push(c);
        }
        format!("Step {step:<6}{marked}     {plain}")
    };

    let mut lines = Vec::new();
    let mut tape = Tape::new();
    let mut state = 0u32;
    let mut pos = 0i64;
    let mut steps = 0u64;
    loop {
        lines.push(render_line(&tape, state, pos, steps));
        let read = tape.read(pos);
        let Some(rule) = m.rule_for(state, read) else {
            break;
        };
        if steps == cap {
            break;
        }
        tape.write(pos, rule.write);
        pos += move_delta(rule.mv);
        state = rule.to_state;
        steps += 1;
    }
    Ok(lines)
}
