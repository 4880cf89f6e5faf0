//! Randomized structural properties of conditions and machine
//! constructions, checked against direct enumeration.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use supcon_core::condition::{Condition, Lasso, StateSet};
use supcon_core::gen::{random_machine, random_pairs};
use supcon_core::machine::{Machine, SynthesisAutomaton};

fn random_lasso<R: Rng>(rng: &mut R, universe: &[String]) -> Lasso {
    let stem_len = rng.gen_range(0..3);
    let cycle_len = rng.gen_range(1..4);
    let pick = |rng: &mut R| universe[rng.gen_range(0..universe.len())].clone();
    Lasso::new(
        (0..stem_len).map(|_| pick(rng)).collect(),
        (0..cycle_len).map(|_| pick(rng)).collect(),
    )
    .unwrap()
}

#[test]
fn dualize_flips_every_lasso() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let universe: Vec<String> = (0..4).map(|i| format!("s{i}")).collect();
    let states: StateSet = universe.iter().cloned().collect();
    for _ in 0..200 {
        let pairs = random_pairs(&mut rng, &states, 3);
        let streett = Condition::Streett(pairs.clone());
        let rabin = streett.dualize().unwrap();
        let l = random_lasso(&mut rng, &universe);
        let a = streett.eval_lasso(&l).unwrap();
        let b = rabin.eval_lasso(&l).unwrap();
        assert!(a ^ b, "duality violated on {l:?} with {pairs:?}");
    }
}

#[test]
fn buchi_embeddings_agree_with_direct_reading() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let universe: Vec<String> = (0..4).map(|i| format!("s{i}")).collect();
    let states: StateSet = universe.iter().cloned().collect();
    for _ in 0..200 {
        let f: StateSet = states
            .iter()
            .filter(|_| rng.gen_bool(0.4))
            .cloned()
            .collect();
        let buchi = Condition::Buechi(f.clone());
        let streett = Condition::buchi_to_streett(&f, &states).unwrap();
        let rabin = Condition::buchi_to_rabin(&f);
        let l = random_lasso(&mut rng, &universe);
        let expect = buchi.eval_lasso(&l).unwrap();
        assert_eq!(streett.eval_lasso(&l).unwrap(), expect);
        assert_eq!(rabin.eval_lasso(&l).unwrap(), expect);
    }
}

/// Finite-string language up to a length bound, by enumeration.
fn language(m: &Machine, max_len: usize) -> BTreeSet<Vec<String>> {
    let mut out = BTreeSet::new();
    let mut frontier = vec![(m.init.clone(), Vec::new())];
    out.insert(Vec::new());
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (x, w) in frontier {
            for e in m.enabled(&x) {
                let y = m.step(&x, &e).unwrap().clone();
                let mut w2 = w.clone();
                w2.push(e);
                out.insert(w2.clone());
                next.push((y, w2));
            }
        }
        frontier = next;
    }
    out
}

#[test]
fn relabeling_preserves_language_and_restores_unique_labels() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let m = random_machine(&mut rng, 4, 3, 0.7, false);
        let rel = m.relabel_unique();
        assert!(
            rel.machine.validate().is_empty(),
            "relabeled machine invalid: {:?}",
            rel.machine.validate()
        );
        assert_eq!(language(&m, 5), language(&rel.machine, 5));
        for (new, old) in &rel.back {
            assert!(m.states.contains(old), "back-map target {old} unknown");
            assert!(rel.machine.states.contains(new));
        }
    }
}

#[test]
fn relabeling_preserves_condition_evaluation() {
    // walk random paths of the relabeled machine; evaluating the translated
    // condition there must equal evaluating the original condition on the
    // back-projected path
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut checked = 0;
    for _ in 0..200 {
        let m = random_machine(&mut rng, 4, 3, 0.7, false);
        let states = m.state_set();
        let pairs = random_pairs(&mut rng, &states, 2);
        let sa = SynthesisAutomaton {
            machine: m,
            plant: Condition::Streett(pairs.clone()),
            spec: Condition::Rabin(pairs),
        };
        let (norm, back) = sa.normalize();

        // random walk of the relabeled machine that closes a cycle
        let mut path = vec![norm.machine.init.clone()];
        for _ in 0..8 {
            let last = path.last().unwrap();
            let en: Vec<String> = norm.machine.enabled(last).into_iter().collect();
            if en.is_empty() {
                break;
            }
            let e = &en[rng.gen_range(0..en.len())];
            path.push(norm.machine.step(last, e).unwrap().clone());
        }
        let Some(pos) = path
            .iter()
            .position(|x| *x == *path.last().unwrap())
            .filter(|&p| p + 1 < path.len())
        else {
            continue;
        };
        let lasso = Lasso::new(
            path[..=pos].to_vec(),
            path[pos + 1..].to_vec(),
        )
        .unwrap();
        let lifted: Lasso = Lasso::new(
            lasso.stem.iter().map(|x| back[x].clone()).collect(),
            lasso.cycle.iter().map(|x| back[x].clone()).collect(),
        )
        .unwrap();
        assert_eq!(
            norm.plant.eval_lasso(&lasso).unwrap(),
            sa.plant.eval_lasso(&lifted).unwrap()
        );
        assert_eq!(
            norm.spec.eval_lasso(&lasso).unwrap(),
            sa.spec.eval_lasso(&lifted).unwrap()
        );
        checked += 1;
    }
    assert!(checked >= 50, "only {checked} cyclic walks found");
}

#[test]
fn completion_yields_full_language() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..50 {
        let m = random_machine(&mut rng, 4, 2, 0.4, true);
        let done = m.complete();
        let full = language(&done.machine, 4);
        // every string over the alphabet up to length 4
        let mut expect: BTreeSet<Vec<String>> = [Vec::new()].into();
        let evs: Vec<String> = m.alphabet.iter().cloned().collect();
        for _ in 0..4 {
            let grown: BTreeSet<Vec<String>> = expect
                .iter()
                .flat_map(|w| {
                    evs.iter().map(move |e| {
                        let mut w2 = w.clone();
                        w2.push(e.clone());
                        w2
                    })
                })
                .collect();
            expect.extend(grown);
        }
        assert_eq!(full, expect);
        // original transitions survive unchanged
        for ((x, e), y) in &m.trans {
            assert_eq!(done.machine.step(x, e), Some(y));
        }
    }
}

#[test]
fn product_language_equals_plant_language_randomized() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..60 {
        let plant_m = random_machine(&mut rng, 3, 3, 0.6, true);
        let mut spec_m = random_machine(&mut rng, 3, 3, 0.6, true);
        spec_m.controllable = plant_m.controllable.clone();
        spec_m.uncontrollable = plant_m.uncontrollable.clone();
        let pc = Condition::Streett(random_pairs(&mut rng, &plant_m.state_set(), 1));
        let sc = Condition::Rabin(random_pairs(&mut rng, &spec_m.state_set(), 1));
        let sa = SynthesisAutomaton::product((&plant_m, &pc), (&spec_m, &sc)).unwrap();
        assert!(sa.machine.validate().is_empty());
        assert_eq!(language(&plant_m, 5), language(&sa.machine, 5));
    }
}
