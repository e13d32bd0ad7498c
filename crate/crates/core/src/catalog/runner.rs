//! Fixed-buffer simulation loop for exhaustive sweeps.
//!
//! Outcomes agree exactly with [`crate::sim::run`] at the same cap. The only
//! difference is speed: the runner reuses one tape buffer and may stop a run
//! early when the machine provably never halts (an exactly repeated
//! configuration, or a repeated record-edge configuration whose trailing
//! tape segment matches after translation). Both proofs imply the plain
//! simulation would reach the cap, so the reported outcome is unchanged;
//! claims stay cap-relative.

/// Packed rule table indexed by `2*state + read`.
///
/// Entry layout: bits 0..1 move code, bit 2 write, bits 3.. next state;
/// `UNDEF` marks a missing rule.
#[derive(Debug, Clone)]
pub struct RuleTable {
    pub entries: [u16; 2 * MAX_SWEEP_STATES],
    pub slots: usize,
}

pub const MAX_SWEEP_STATES: usize = 6;
pub const UNDEF: u16 = u16::MAX;

/// Packs a to-index (`6*state + 3*write + move`) into a rule entry.
pub fn pack_to_index(t: u32) -> u16 {
    let state = t / 6;
    let write = (t % 6) / 3;
    let mv = t % 3;
    ((state << 3) | (write << 2) | mv) as u16
}

impl RuleTable {
    pub fn empty(n_states: u32) -> RuleTable {
        RuleTable {
            entries: [UNDEF; 2 * MAX_SWEEP_STATES],
            slots: 2 * n_states as usize,
        }
    }

    pub fn from_machine(m: &crate::machine::Machine) -> RuleTable {
        let mut table = RuleTable::empty(m.n_states());
        for rule in m.rules() {
            table.entries[rule.from_index() as usize] = pack_to_index(rule.to_index());
        }
        table
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FastOutcome {
    Halted { steps: u64, ones: u32 },
    /// Did not halt within the cap (possibly proven never to halt).
    CapExceeded,
}

#[derive(Clone, Copy, Default)]
struct EdgeSlot {
    occupied: bool,
    state: u16,
    pos: usize,
    step: u64,
    /// base tape index of the stored segment
    base: usize,
    len: usize,
    /// extreme head excursion back toward the interior since the snapshot
    excursion: usize,
}

/// Reusable sweep simulator for one step cap.
pub struct SweepRunner {
    cap: u64,
    origin: usize,
    tape: Vec<u8>,
    zobrist: Vec<u64>,
    right_buf: Vec<u8>,
    left_buf: Vec<u8>,
    cycle_buf: Vec<u8>,
    pub nonhalt_proofs: u64,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SweepRunner {
    /// Caps above this would make the fixed buffers unreasonably large.
    pub const MAX_CAP: u64 = 1 << 22;

    pub fn new(cap: u64) -> SweepRunner {
        assert!(cap <= Self::MAX_CAP, "sweep cap limited to {}", Self::MAX_CAP);
        let span = cap as usize;
        let len = 2 * span + 1;
        let mut seed = 0x5eed_b0b0_cafe_f00du64;
        SweepRunner {
            cap,
            origin: span,
            tape: vec![0; len],
            zobrist: (0..len).map(|_| splitmix64(&mut seed)).collect(),
            right_buf: Vec::new(),
            left_buf: Vec::new(),
            cycle_buf: Vec::new(),
            nonhalt_proofs: 0,
        }
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn run(&mut self, rules: &RuleTable) -> FastOutcome {
        let mut state = 0u16;
        let mut pos = self.origin;
        let mut steps = 0u64;
        let mut hash = 0u64;
        let mut lo = pos;
        let mut hi = pos;

        let mut right = EdgeSlot::default();
        let mut left = EdgeSlot::default();

        let mut snap_taken = false;
        let mut snap_state = 0u16;
        let mut snap_pos = 0usize;
        let mut snap_hash = 0u64;
        let mut snap_lo = 0usize;
        let mut snap_hi = 0usize;
        let mut next_snap = 8u64;

        let outcome = loop {
            let cell = self.tape[pos];
            let entry = rules.entries[((state << 1) | cell as u16) as usize];
            if entry == UNDEF {
                let ones = self.tape[lo..=hi].iter().filter(|&&c| c == 1).count() as u32;
                break FastOutcome::Halted { steps, ones };
            }
            if steps == self.cap {
                break FastOutcome::CapExceeded;
            }
            let write = ((entry >> 2) & 1) as u8;
            if write != cell {
                self.tape[pos] = write;
                hash ^= self.zobrist[pos];
            }
            // move code 0/1/2 maps to -1/0/+1
            pos = pos.wrapping_add((entry & 3) as usize).wrapping_sub(1);
            state = entry >> 3;
            steps += 1;

            if pos > hi {
                // arrived on a never-visited cell to the right
                if right.occupied && right.state == state {
                    let delta = pos - right.pos;
                    let from = right.excursion;
                    let mut matches = true;
                    for i in from..right.pos {
                        let then = if i < right.base || i >= right.base + right.len {
                            0
                        } else {
                            self.right_buf[i - right.base]
                        };
                        if then != self.tape[i + delta] {
                            matches = false;
                            break;
                        }
                    }
                    if matches {
                        self.nonhalt_proofs += 1;
                        break FastOutcome::CapExceeded;
                    }
                }
                if !right.occupied || steps >= 2 * right.step {
                    self.right_buf.clear();
                    self.right_buf.extend_from_slice(&self.tape[lo..pos]);
                    right = EdgeSlot {
                        occupied: true,
                        state,
                        pos,
                        step: steps,
                        base: lo,
                        len: pos - lo,
                        excursion: pos,
                    };
                }
                hi = pos;
            } else if pos < lo {
                if left.occupied && left.state == state {
                    let delta = left.pos - pos;
                    let to = left.excursion;
                    let mut matches = true;
                    for i in left.pos + 1..=to {
                        let then = if i < left.base || i >= left.base + left.len {
                            0
                        } else {
                            self.left_buf[i - left.base]
                        };
                        if then != self.tape[i - delta] {
                            matches = false;
                            break;
                        }
                    }
                    if matches {
                        self.nonhalt_proofs += 1;
                        break FastOutcome::CapExceeded;
                    }
                }
                if !left.occupied || steps >= 2 * left.step {
                    self.left_buf.clear();
                    self.left_buf.extend_from_slice(&self.tape[pos + 1..=hi]);
                    left = EdgeSlot {
                        occupied: true,
                        state,
                        pos,
                        step: steps,
                        base: pos + 1,
                        len: hi - pos,
                        excursion: pos,
                    };
                }
                lo = pos;
            }

            if right.occupied && pos < right.excursion {
                right.excursion = pos;
            }
            if left.occupied && pos > left.excursion {
                left.excursion = pos;
            }

            if snap_taken && state == snap_state && pos == snap_pos && hash == snap_hash {
                let cmp_lo = lo.min(snap_lo);
                let cmp_hi = hi.max(snap_hi);
                let mut same = true;
                for i in cmp_lo..=cmp_hi {
                    let then = if i < snap_lo || i > snap_hi {
                        0
                    } else {
                        self.cycle_buf[i - snap_lo]
                    };
                    if then != self.tape[i] {
                        same = false;
                        break;
                    }
                }
                if same {
                    // exact configuration repeat: the machine cycles forever
                    self.nonhalt_proofs += 1;
                    break FastOutcome::CapExceeded;
                }
            }
            if steps == next_snap {
                snap_taken = true;
                snap_state = state;
                snap_pos = pos;
                snap_hash = hash;
                snap_lo = lo;
                snap_hi = hi;
                self.cycle_buf.clear();
                self.cycle_buf.extend_from_slice(&self.tape[lo..=hi]);
                next_snap *= 2;
            }
        };

        self.tape[lo..=hi].fill(0);
        outcome
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::decode_name;
    use crate::sim::{run, Outcome};

    fn agree(name: &str, cap: u64) {
        let m = decode_name(name).unwrap();
        let mut runner = SweepRunner::new(cap);
        let fast = runner.run(&RuleTable::from_machine(&m));
        let slow = run(&m, cap);
        match (fast, slow) {
            (FastOutcome::Halted { steps, ones }, Outcome::Halted { steps: s, ones: o, .. }) => {
                assert_eq!((steps, ones), (s, o), "{name}");
            }
            (FastOutcome::CapExceeded, Outcome::CapExceeded { .. }) => {}
            (fast, slow) => panic!("{name}: fast {fast:?} vs slow {slow:?}"),
        }
    }

    #[test]
    fn agrees_on_the_example_machine() {
        agree("(6, 0, 9, 1, 14, 2, 18, 3, 3, 4, 5, 6, 15)", 1000);
    }

    #[test]
    fn agrees_on_simple_runners_and_cyclers() {
        for name in [
            "(1, 0, 5)",             // rightward 1-writer, translated cycle
            "(1, 0, 0)",             // leftward 0-writer
            "(1, 0, 1)",             // stay 0-writer, one-cell cycle
            "(2, 0, 5, 1, 3)",       // writes then bounces
            "(1, 1, 3)",             // immediate halt
            "(2, 0, 11, 2, 0)",      // two-state drift
            "(2, 0, 11, 2, 4)",
            "(4, 0, 9, 1, 14, 2, 18, 3, 3)",
        ] {
            agree(name, 1000);
        }
    }

    #[test]
    fn agrees_exhaustively_on_one_state() {
        let mut runner = SweepRunner::new(500);
        for m in crate::enumerate::enumerate_machines(1, crate::enumerate::Shard::whole()) {
            let fast = runner.run(&RuleTable::from_machine(&m));
            let slow = run(&m, 500);
            match (fast, slow) {
                (
                    FastOutcome::Halted { steps, ones },
                    Outcome::Halted { steps: s, ones: o, .. },
                ) => assert_eq!((steps, ones), (s, o), "{m}"),
                (FastOutcome::CapExceeded, Outcome::CapExceeded { .. }) => {}
                (fast, slow) => panic!("{m}: fast {fast:?} vs slow {slow:?}"),
            }
        }
    }

    #[test]
    fn tape_is_clean_between_runs() {
        let mut runner = SweepRunner::new(1000);
        let busy = decode_name("(6, 0, 9, 1, 14, 2, 18, 3, 3, 4, 5, 6, 15)").unwrap();
        let writer = decode_name("(1, 0, 4)").unwrap();
        runner.run(&RuleTable::from_machine(&busy));
        let after = runner.run(&RuleTable::from_machine(&writer));
        assert_eq!(after, FastOutcome::Halted { steps: 1, ones: 1 });
    }
}
