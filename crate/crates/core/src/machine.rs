//! Deterministic finite state machines with labeled partial transitions and
//! the synthesis-automaton constructions (completion, product, unique
//! relabeling).

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::condition::{Condition, Lasso, StateSet};
use crate::error::{Error, Result};

/// Deterministic finite state machine with a partial transition function and
/// a controllable/uncontrollable event partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Machine {
    pub states: BTreeSet<String>,
    pub alphabet: BTreeSet<String>,
    pub controllable: BTreeSet<String>,
    pub uncontrollable: BTreeSet<String>,
    pub init: String,
    /// (state, event) -> successor state.
    pub trans: BTreeMap<(String, String), String>,
}

/// A named invariant breach found by [`Machine::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `controllable` and `uncontrollable` do not partition the alphabet.
    Partition { event: String },
    /// Two transitions from `state` carry different labels to one target.
    UniqueLabels {
        state: String,
        events: (String, String),
        target: String,
    },
    InitNotAState { init: String },
    UnknownState { state: String },
    UnknownEvent { event: String },
}

/// Result of [`Machine::relabel_unique`]: the relabeled machine together
/// with a back-map from new to old states for condition translation.
#[derive(Debug, Clone)]
pub struct Relabeled {
    pub machine: Machine,
    /// new state -> original state
    pub back: BTreeMap<String, String>,
}

/// Result of [`Machine::complete`]: the completed machine and its sink name.
#[derive(Debug, Clone)]
pub struct Completed {
    pub machine: Machine,
    pub sink: String,
}

impl Machine {
    /// Returns the list of invariant violations; empty iff the machine is
    /// well-formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for e in self.controllable.intersection(&self.uncontrollable) {
            out.push(Violation::Partition { event: e.clone() });
        }
        for e in &self.alphabet {
            if !self.controllable.contains(e) && !self.uncontrollable.contains(e) {
                out.push(Violation::Partition { event: e.clone() });
            }
        }
        for e in self.controllable.union(&self.uncontrollable) {
            if !self.alphabet.contains(e) {
                out.push(Violation::UnknownEvent { event: e.clone() });
            }
        }
        if !self.states.contains(&self.init) {
            out.push(Violation::InitNotAState {
                init: self.init.clone(),
            });
        }
        for ((x, e), y) in &self.trans {
            if !self.states.contains(x) {
                out.push(Violation::UnknownState { state: x.clone() });
            }
            if !self.states.contains(y) {
                out.push(Violation::UnknownState { state: y.clone() });
            }
            if !self.alphabet.contains(e) {
                out.push(Violation::UnknownEvent { event: e.clone() });
            }
        }
        // unique labels: distinct events from one state reach distinct targets
        let mut seen: BTreeMap<(&String, &String), &String> = BTreeMap::new();
        for ((x, e), y) in &self.trans {
            if let Some(prev) = seen.insert((x, y), e) {
                out.push(Violation::UniqueLabels {
                    state: x.clone(),
                    events: (prev.clone(), e.clone()),
                    target: y.clone(),
                });
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidMachine(v))
        }
    }

    /// Events with a defined transition at `state`.
    pub fn enabled(&self, state: &str) -> BTreeSet<String> {
        self.alphabet
            .iter()
            .filter(|e| {
                self.trans
                    .contains_key(&(state.to_string(), e.to_string()))
            })
            .cloned()
            .collect()
    }

    pub fn step(&self, state: &str, event: &str) -> Option<&String> {
        self.trans.get(&(state.to_string(), event.to_string()))
    }

    /// States reachable from the initial state.
    pub fn reachable(&self) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        seen.insert(self.init.clone());
        queue.push_back(self.init.clone());
        while let Some(x) = queue.pop_front() {
            for ((src, _), tgt) in &self.trans {
                if *src == x && seen.insert(tgt.clone()) {
                    queue.push_back(tgt.clone());
                }
            }
        }
        seen
    }

    /// Relabels so that distinct transitions from a state carry distinct
    /// labels, by moving to (state, event-of-entry) pairs. Machines that
    /// already satisfy the property are returned unchanged with an identity
    /// back-map.
    pub fn relabel_unique(&self) -> Relabeled {
        let needs_relabel = self
            .validate()
            .iter()
            .any(|v| matches!(v, Violation::UniqueLabels { .. }));
        if !needs_relabel {
            let back = self
                .states
                .iter()
                .map(|s| (s.clone(), s.clone()))
                .collect();
            return Relabeled {
                machine: self.clone(),
                back,
            };
        }

        // New states are "<old>@<entry event>" plus the initial state, built
        // over the reachable part only.
        let name = |x: &str, e: &str| format!("{x}@{e}");
        let mut back = BTreeMap::new();
        let mut states = BTreeSet::new();
        let mut trans = BTreeMap::new();
        let init = self.init.clone();
        states.insert(init.clone());
        back.insert(init.clone(), init.clone());

        let mut queue: VecDeque<(String, String)> = VecDeque::new();
        queue.push_back((init.clone(), self.init.clone()));
        let mut seen: BTreeSet<String> = [init.clone()].into();
        while let Some((new_id, old)) = queue.pop_front() {
            for e in self.enabled(&old) {
                let tgt_old = self.step(&old, &e).unwrap().clone();
                let tgt_new = name(&tgt_old, &e);
                trans.insert((new_id.clone(), e.clone()), tgt_new.clone());
                if seen.insert(tgt_new.clone()) {
                    states.insert(tgt_new.clone());
                    back.insert(tgt_new.clone(), tgt_old.clone());
                    queue.push_back((tgt_new, tgt_old));
                }
            }
        }

        Relabeled {
            machine: Machine {
                states,
                alphabet: self.alphabet.clone(),
                controllable: self.controllable.clone(),
                uncontrollable: self.uncontrollable.clone(),
                init,
                trans,
            },
            back,
        }
    }

    /// Adds a fresh sink so that every (state, event) pair has a defined
    /// transition; the finite-string language becomes `Sigma^*`.
    pub fn complete(&self) -> Completed {
        let mut sink = "sink".to_string();
        while self.states.contains(&sink) {
            sink.push('_');
        }
        let mut m = self.clone();
        m.states.insert(sink.clone());
        for x in &self.states {
            for e in &self.alphabet {
                m.trans
                    .entry((x.clone(), e.clone()))
                    .or_insert_with(|| sink.clone());
            }
        }
        for e in &self.alphabet {
            m.trans.insert((sink.clone(), e.clone()), sink.clone());
        }
        Completed { machine: m, sink }
    }

    /// Checks that `stem . cycle^omega` is a path of this machine from the
    /// initial state.
    pub fn is_valid_lasso(&self, lasso: &Lasso) -> bool {
        let mut seq: Vec<&String> = lasso.stem.iter().collect();
        seq.extend(lasso.cycle.iter());
        if seq.is_empty() || *seq[0] != self.init {
            return false;
        }
        let connected = |a: &String, b: &String| {
            self.trans
                .iter()
                .any(|((src, _), tgt)| src == a && tgt == b)
        };
        for w in seq.windows(2) {
            if !connected(w[0], w[1]) {
                return false;
            }
        }
        let last = lasso.cycle.last().unwrap();
        let first = lasso.cycle.first().unwrap();
        connected(last, first)
    }

    pub fn state_set(&self) -> StateSet {
        self.states.clone()
    }
}

/// A machine with its plant (Streett) and specification (Rabin) conditions.
#[derive(Debug, Clone)]
pub struct SynthesisAutomaton {
    pub machine: Machine,
    /// Streett condition realizing the plant's live behaviors.
    pub plant: Condition,
    /// Rabin condition realizing the specification.
    pub spec: Condition,
}

impl SynthesisAutomaton {
    /// Wraps a single machine carrying both conditions; Buechi conditions
    /// are embedded into Streett/Rabin form.
    pub fn from_single(
        machine: Machine,
        plant: &Condition,
        spec: &Condition,
    ) -> Result<Self> {
        let states = machine.state_set();
        let plant = plant.to_streett(&states)?;
        let spec = spec.to_rabin()?;
        Ok(SynthesisAutomaton {
            machine,
            plant,
            spec,
        })
    }

    /// Synchronous product of a plant automaton and a specification
    /// automaton over a shared alphabet. The specification machine is
    /// completed first, so the product's finite-string language equals the
    /// plant machine's. Conditions are lifted componentwise.
    pub fn product(
        plant_aut: (&Machine, &Condition),
        spec_aut: (&Machine, &Condition),
    ) -> Result<Self> {
        let (pm, pc) = plant_aut;
        let (sm, sc) = spec_aut;
        if pm.alphabet != sm.alphabet {
            return Err(Error::AlphabetMismatch);
        }
        let pc = pc.to_streett(&pm.state_set())?;
        let sc = sc.to_rabin()?;
        let completed = sm.complete();
        let sm = &completed.machine;

        let name = |p: &str, q: &str| format!("{p}|{q}");
        let init = name(&pm.init, &sm.init);
        let mut states: BTreeSet<String> = [init.clone()].into();
        let mut trans = BTreeMap::new();
        let mut plant_of: BTreeMap<String, String> = BTreeMap::new();
        let mut spec_of: BTreeMap<String, String> = BTreeMap::new();
        plant_of.insert(init.clone(), pm.init.clone());
        spec_of.insert(init.clone(), sm.init.clone());

        let mut queue: VecDeque<(String, String, String)> = VecDeque::new();
        queue.push_back((init.clone(), pm.init.clone(), sm.init.clone()));
        while let Some((id, p, q)) = queue.pop_front() {
            for e in pm.enabled(&p) {
                let p2 = pm.step(&p, &e).unwrap().clone();
                let q2 = sm.step(&q, &e).unwrap().clone();
                let id2 = name(&p2, &q2);
                trans.insert((id.clone(), e.clone()), id2.clone());
                if states.insert(id2.clone()) {
                    plant_of.insert(id2.clone(), p2.clone());
                    spec_of.insert(id2.clone(), q2.clone());
                    queue.push_back((id2, p2, q2));
                }
            }
        }

        let machine = Machine {
            states,
            alphabet: pm.alphabet.clone(),
            controllable: pm.controllable.clone(),
            uncontrollable: pm.uncontrollable.clone(),
            init,
            trans,
        };
        let plant = pc.translate(&plant_of);
        let spec = sc.translate(&spec_of);
        Ok(SynthesisAutomaton {
            machine,
            plant,
            spec,
        })
    }

    /// Applies [`Machine::relabel_unique`] and translates both conditions
    /// through the back-map.
    pub fn normalize(&self) -> (SynthesisAutomaton, BTreeMap<String, String>) {
        let rel = self.machine.relabel_unique();
        let plant = self.plant.translate(&rel.back);
        let spec = self.spec.translate(&rel.back);
        (
            SynthesisAutomaton {
                machine: rel.machine,
                plant,
                spec,
            },
            rel.back,
        )
    }
}

/// The three-state machine and conditions of the worked example; used as a
/// fixture throughout the test suites.
pub fn three_state_fixture() -> SynthesisAutomaton {
    let s = |x: &str| x.to_string();
    let machine = Machine {
        states: [s("p0"), s("p1"), s("p2")].into(),
        alphabet: [s("a"), s("b"), s("c")].into(),
        controllable: [s("a"), s("b")].into(),
        uncontrollable: [s("c")].into(),
        init: s("p0"),
        trans: [
            ((s("p0"), s("a")), s("p1")),
            ((s("p0"), s("c")), s("p0")),
            ((s("p1"), s("c")), s("p0")),
            ((s("p1"), s("b")), s("p2")),
            ((s("p2"), s("b")), s("p2")),
            ((s("p2"), s("a")), s("p1")),
        ]
        .into(),
    };
    let states = machine.state_set();
    let plant =
        Condition::buchi_to_streett(&[s("p2")].into(), &states).unwrap();
    let spec = Condition::buchi_to_rabin(&[s("p1")].into());
    SynthesisAutomaton {
        machine,
        plant,
        spec,
    }
}
