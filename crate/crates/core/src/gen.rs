//! Seeded random instance generators for tests and benchmarks.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::condition::{Condition, PairList, StateSet};
use crate::machine::{Machine, SynthesisAutomaton};
use crate::parity::{ParityGame, PgState, Player};

/// Random machine over `n` states and `k` events. Transitions are sampled
/// per (state, event) with the given density; when `unique_labels` is set,
/// transitions that would repeat a (state, target) pair are dropped.
pub fn random_machine<R: Rng>(
    rng: &mut R,
    n: usize,
    k: usize,
    density: f64,
    unique_labels: bool,
) -> Machine {
    let states: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let events: Vec<String> = (0..k).map(|i| format!("e{i}")).collect();
    let uncontrollable: BTreeSet<String> = events
        .iter()
        .filter(|_| rng.gen_bool(0.4))
        .cloned()
        .collect();
    let controllable: BTreeSet<String> = events
        .iter()
        .filter(|e| !uncontrollable.contains(*e))
        .cloned()
        .collect();

    let mut trans: BTreeMap<(String, String), String> = BTreeMap::new();
    let mut used: BTreeSet<(String, String)> = BTreeSet::new(); // (state, target)
    for x in &states {
        for e in &events {
            if !rng.gen_bool(density) {
                continue;
            }
            let y = states[rng.gen_range(0..n)].clone();
            if unique_labels && !used.insert((x.clone(), y.clone())) {
                continue;
            }
            trans.insert((x.clone(), e.clone()), y);
        }
    }
    Machine {
        states: states.iter().cloned().collect(),
        alphabet: events.iter().cloned().collect(),
        controllable,
        uncontrollable,
        init: states[0].clone(),
        trans,
    }
}

fn random_state_set<R: Rng>(rng: &mut R, states: &StateSet, p: f64) -> StateSet {
    states.iter().filter(|_| rng.gen_bool(p)).cloned().collect()
}

pub fn random_pairs<R: Rng>(
    rng: &mut R,
    states: &StateSet,
    max_pairs: usize,
) -> PairList {
    let count = rng.gen_range(0..=max_pairs);
    (0..count)
        .map(|_| {
            (
                random_state_set(rng, states, 0.4),
                random_state_set(rng, states, 0.3),
            )
        })
        .collect()
}

/// Random synthesis instance: machine plus Streett plant and Rabin
/// specification conditions over its states.
pub fn random_synthesis<R: Rng>(
    rng: &mut R,
    n: usize,
    k: usize,
    max_pairs: usize,
) -> SynthesisAutomaton {
    let machine = random_machine(rng, n, k, 0.6, true);
    let states = machine.state_set();
    let plant = Condition::Streett(random_pairs(rng, &states, max_pairs));
    let spec = Condition::Rabin(random_pairs(rng, &states, max_pairs));
    SynthesisAutomaton {
        machine,
        plant,
        spec,
    }
}

/// Random total parity game with `n` states and colors up to `max_color`.
pub fn random_parity_game<R: Rng>(rng: &mut R, n: usize, max_color: u32) -> ParityGame {
    let states: Vec<PgState> = (0..n)
        .map(|i| {
            let deg = rng.gen_range(1..=3.min(n));
            let mut succ: Vec<usize> = Vec::new();
            while succ.len() < deg {
                let t = rng.gen_range(0..n);
                if !succ.contains(&t) {
                    succ.push(t);
                }
            }
            PgState {
                owner: if rng.gen_bool(0.5) {
                    Player::Zero
                } else {
                    Player::One
                },
                color: rng.gen_range(0..=max_color),
                succ,
                label: format!("v{i}"),
            }
        })
        .collect();
    ParityGame { states, init: 0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_machines_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let m = random_machine(&mut rng, 4, 3, 0.6, true);
            assert!(m.validate().is_empty(), "{:?}", m.validate());
        }
    }

    #[test]
    fn random_games_are_total() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let g = random_parity_game(&mut rng, 6, 4);
            g.ensure_total().unwrap();
        }
    }

    #[test]
    fn generators_are_deterministic_per_seed() {
        let a = random_machine(&mut ChaCha8Rng::seed_from_u64(3), 5, 3, 0.5, true);
        let b = random_machine(&mut ChaCha8Rng::seed_from_u64(3), 5, 3, 0.5, true);
        assert_eq!(a, b);
    }
}
