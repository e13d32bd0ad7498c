//! The two machine symmetries (mirrored movement, permuted non-start states),
//! orbits, canonical forms and base sets.
//!
//! Both transforms preserve step counts; mirroring reverses the output word,
//! state permutation preserves it. `orbit`/`canonical_form` work over a
//! machine's own dense state count. Enumeration-level canonical filtering
//! instead uses the ambient group of the enumerated space (`*_in_space`), so
//! that orbit expansion partitions the whole space even for machines that
//! mention a strict subset of their states.

use thiserror::Error;

use crate::machine::{name_cmp, Machine, Rule};

/// A bijection on `{0..n-1}` fixing the start state 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatePermutation {
    map: Vec<u32>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SymmetryError {
    #[error("permutation is defined on {got} states, machine has {expected}")]
    SizeMismatch { expected: u32, got: u32 },
    #[error("permutation moves the start state 0")]
    MovesStartState,
    #[error("mapping is not a bijection on its domain")]
    NotBijection,
}

impl StatePermutation {
    pub fn new(map: Vec<u32>) -> Result<StatePermutation, SymmetryError> {
        if map.first() != Some(&0) {
            return Err(SymmetryError::MovesStartState);
        }
        let n = map.len();
        let mut seen = vec![false; n];
        for &image in &map {
            if image as usize >= n || seen[image as usize] {
                return Err(SymmetryError::NotBijection);
            }
            seen[image as usize] = true;
        }
        Ok(StatePermutation { map })
    }

    pub fn identity(n: u32) -> StatePermutation {
        StatePermutation {
            map: (0..n).collect(),
        }
    }

    pub fn n_states(&self) -> u32 {
        self.map.len() as u32
    }

    pub fn apply(&self, state: u32) -> u32 {
        self.map[state as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &v)| i as u32 == v)
    }

    /// All permutations of `{0..n-1}` fixing 0, in lexicographic order.
    pub fn all(n: u32) -> Vec<StatePermutation> {
        let mut rest: Vec<u32> = (1..n).collect();
        let mut out = Vec::new();
        loop {
            let mut map = Vec::with_capacity(n as usize);
            map.push(0);
            map.extend_from_slice(&rest);
            out.push(StatePermutation { map });
            if !next_permutation(&mut rest) {
                break;
            }
        }
        out
    }
}

fn next_permutation(values: &mut [u32]) -> bool {
    if values.len() < 2 {
        return false;
    }
    let mut i = values.len() - 1;
    while i > 0 && values[i - 1] >= values[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = values.len() - 1;
    while values[j] <= values[i - 1] {
        j -= 1;
    }
    values.swap(i - 1, j);
    values[i..].reverse();
    true
}

/// Every left move becomes right and vice versa; stay moves are fixed.
pub fn mirror(m: &Machine) -> Machine {
    let rules = m
        .rules()
        .iter()
        .map(|r| Rule {
            mv: r.mv.mirrored(),
            ..*r
        })
        .collect();
    Machine::new(rules).expect("mirroring preserves validity")
}

/// Relabels every state through `p`; the result is re-normalized to dense
/// form (its state count can shrink when the image leaves a label unused).
pub fn permute_states(m: &Machine, p: &StatePermutation) -> Result<Machine, SymmetryError> {
    if p.n_states() != m.n_states() {
        return Err(SymmetryError::SizeMismatch {
            expected: m.n_states(),
            got: p.n_states(),
        });
    }
    Ok(apply_perm(m, p))
}

fn apply_perm(m: &Machine, p: &StatePermutation) -> Machine {
    let rules = m
        .rules()
        .iter()
        .map(|r| Rule {
            from_state: p.apply(r.from_state),
            to_state: p.apply(r.to_state),
            ..*r
        })
        .collect();
    Machine::new(rules).expect("state permutation preserves validity")
}

fn orbit_under(m: &Machine, n: u32) -> Vec<Machine> {
    let mut members = Vec::new();
    for p in StatePermutation::all(n) {
        let permuted = apply_perm(m, &p);
        members.push(mirror(&permuted));
        members.push(permuted);
    }
    members.sort_by(name_cmp);
    members.dedup();
    members
}

/// Orbit of `m` under mirror and all permutations of its dense states,
/// sorted by name.
pub fn orbit(m: &Machine) -> Vec<Machine> {
    orbit_under(m, m.n_states())
}

/// Orbit of `m` inside the space of machines with at most `ambient_n` states.
pub fn orbit_in_space(m: &Machine, ambient_n: u32) -> Vec<Machine> {
    assert!(m.n_states() <= ambient_n);
    orbit_under(m, ambient_n)
}

/// The orbit element with the lexicographically smallest name text.
pub fn canonical_form(m: &Machine) -> Machine {
    orbit(m).into_iter().next().expect("orbit is never empty")
}

/// Canonical representative of `m`'s orbit in the `ambient_n`-state space.
pub fn canonical_in_space(m: &Machine, ambient_n: u32) -> Machine {
    orbit_in_space(m, ambient_n)
        .into_iter()
        .next()
        .expect("orbit is never empty")
}

/// One canonical representative per orbit of the given machines.
pub fn base_set(machines: &[Machine]) -> Vec<Machine> {
    let mut bases: Vec<Machine> = machines.iter().map(canonical_form).collect();
    bases.sort_by(name_cmp);
    bases.dedup();
    bases
}

/// Precomputed index maps for the non-identity elements of the symmetry
/// group of the `n`-state space, used by canonical filtering.
pub(crate) struct AmbientGroup {
    pub elems: Vec<GroupElem>,
}

pub(crate) struct GroupElem {
    /// from-index relabeling, length `2n`
    pub from_map: Vec<u8>,
    /// to-index relabeling (state permutation plus optional mirror), length `6n`
    pub to_map: Vec<u8>,
}

impl AmbientGroup {
    pub fn new(n: u32) -> AmbientGroup {
        assert!(n >= 1 && 6 * n <= u8::MAX as u32 + 1);
        let mut elems = Vec::new();
        for p in StatePermutation::all(n) {
            for mirrored in [false, true] {
                if p.is_identity() && !mirrored {
                    continue;
                }
                let from_map = (0..2 * n)
                    .map(|f| (2 * p.apply(f / 2) + f % 2) as u8)
                    .collect();
                let to_map = (0..6 * n)
                    .map(|t| {
                        let mv = if mirrored { 2 - t % 3 } else { t % 3 };
                        (6 * p.apply(t / 6) + t % 6 / 3 * 3 + mv) as u8
                    })
                    .collect();
                elems.push(GroupElem { from_map, to_map });
            }
        }
        AmbientGroup { elems }
    }
}

/// Ranks `0..limit` by their decimal renderings, so that byte comparisons of
/// ranks order values the same way the name text does.
pub(crate) fn decimal_rank_table(limit: u32) -> Vec<u16> {
    let mut values: Vec<u32> = (0..limit).collect();
    values.sort_by_key(|v| v.to_string());
    let mut ranks = vec![0u16; limit as usize];
    for (rank, value) in values.into_iter().enumerate() {
        ranks[value as usize] = rank as u16;
    }
    ranks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{decode_name, encode_name};

    const EXAMPLE: &str = "(6, 0, 9, 1, 14, 2, 18, 3, 3, 4, 5, 6, 15)";

    #[test]
    fn mirror_is_an_involution() {
        let m = decode_name(EXAMPLE).unwrap();
        assert_eq!(mirror(&mirror(&m)), m);
        assert_ne!(mirror(&m), m);
    }

    #[test]
    fn stay_moves_are_mirror_fixed_points() {
        let m = decode_name("(1, 0, 4)").unwrap();
        assert_eq!(mirror(&m), m);
    }

    #[test]
    fn identity_permutation_is_a_no_op() {
        let m = decode_name(EXAMPLE).unwrap();
        let id = StatePermutation::identity(m.n_states());
        assert_eq!(permute_states(&m, &id).unwrap(), m);
    }

    #[test]
    fn permutation_validation() {
        assert_eq!(
            StatePermutation::new(vec![1, 0]),
            Err(SymmetryError::MovesStartState)
        );
        assert_eq!(
            StatePermutation::new(vec![0, 1, 1]),
            Err(SymmetryError::NotBijection)
        );
        let m = decode_name(EXAMPLE).unwrap();
        let p = StatePermutation::new(vec![0, 1]).unwrap();
        assert_eq!(
            permute_states(&m, &p),
            Err(SymmetryError::SizeMismatch {
                expected: 4,
                got: 2
            })
        );
    }

    #[test]
    fn one_state_orbit_is_at_most_two() {
        for name in ["(1, 0, 3)", "(1, 0, 4)", "(2, 0, 5, 1, 0)"] {
            let m = decode_name(name).unwrap();
            assert!(orbit(&m).len() <= 2, "{name}");
        }
    }

    #[test]
    fn orbit_size_divides_group_order() {
        let m = decode_name(EXAMPLE).unwrap();
        let size = orbit(&m).len();
        let group = 2 * (1..m.n_states()).map(|v| v as usize).product::<usize>();
        assert_eq!(group % size, 0, "orbit size {size} must divide {group}");
    }

    #[test]
    fn canonical_form_is_idempotent_and_mirror_invariant() {
        let m = decode_name(EXAMPLE).unwrap();
        let canon = canonical_form(&m);
        assert_eq!(canonical_form(&canon), canon);
        assert_eq!(canonical_form(&mirror(&m)), canon);
        assert!(orbit(&m).contains(&canon));
    }

    #[test]
    fn ambient_orbit_can_cross_dense_classes() {
        // (0,0) -> (1,0,L) mentions only states {0,1}; inside the 3-state
        // space its orbit also contains the relabeling through state 2.
        let m = decode_name("(1, 0, 6)").unwrap();
        assert_eq!(m.n_states(), 2);
        let ambient = orbit_in_space(&m, 3);
        let names: Vec<String> = ambient.iter().map(encode_name).collect();
        assert_eq!(
            names,
            vec!["(1, 0, 12)", "(1, 0, 14)", "(1, 0, 6)", "(1, 0, 8)"]
        );
        assert_eq!(encode_name(&canonical_in_space(&m, 3)), "(1, 0, 12)");
        // while the dense orbit stays within two states
        assert_eq!(orbit(&m).len(), 2);
    }

    #[test]
    fn base_set_of_empty_is_empty() {
        assert!(base_set(&[]).is_empty());
    }

    #[test]
    fn group_tables_match_machine_transforms() {
        let n = 4;
        let group = AmbientGroup::new(n);
        assert_eq!(group.elems.len(), 2 * 6 - 1);
        let m = decode_name(EXAMPLE).unwrap();
        let mut transformed: Vec<String> = group
            .elems
            .iter()
            .map(|g| {
                let rules = m
                    .rules()
                    .iter()
                    .map(|r| {
                        Rule::from_indexes(
                            g.from_map[r.from_index() as usize] as u32,
                            g.to_map[r.to_index() as usize] as u32,
                        )
                    })
                    .collect();
                encode_name(&Machine::new(rules).unwrap())
            })
            .collect();
        transformed.push(encode_name(&m));
        transformed.sort();
        transformed.dedup();
        let mut expected: Vec<String> = orbit_in_space(&m, n).iter().map(encode_name).collect();
        expected.sort();
        assert_eq!(transformed, expected);
    }

    #[test]
    fn rank_table_orders_like_strings() {
        let ranks = decimal_rank_table(30);
        for a in 0..30u32 {
            for b in 0..30u32 {
                assert_eq!(
                    ranks[a as usize].cmp(&ranks[b as usize]),
                    a.to_string().cmp(&b.to_string())
                );
            }
        }
    }
}
