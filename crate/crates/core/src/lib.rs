//! Busy Beaver laboratory for halt-state-free binary Turing machines:
//! machine codec, simulation, symmetry reduction, exhaustive enumeration,
//! catalog aggregation and running-time ratio tables.

pub mod catalog;
pub mod enumerate;
pub mod machine;
pub mod ratios;
pub mod sim;
pub mod symmetry;

pub use enumerate::{enumerate_canonical, enumerate_machines, estimate_sweep, Shard};
pub use machine::{
    decode_name, encode_name, machine_space_size, render_dot, validate, Machine, Move, Rule,
};
pub use sim::{extract_word, nr_ones, render_trace, run, Outcome, Tape, Word};
pub use symmetry::{
    base_set, canonical_form, mirror, orbit, orbit_in_space, permute_states, StatePermutation,
};
