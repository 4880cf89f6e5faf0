//! Two-player game arena induced by a synthesis automaton: player 0 picks a
//! control pattern, player 1 resolves it to a transition.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::machine::{Machine, SynthesisAutomaton};

/// A control pattern: a set of enabled events containing every
/// uncontrollable event.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ControlPattern(BTreeSet<String>);

impl ControlPattern {
    pub fn new(events: BTreeSet<String>, uncontrollable: &BTreeSet<String>) -> Result<Self> {
        if !uncontrollable.is_subset(&events) {
            return Err(Error::MalformedSupervisor(
                "control pattern does not contain all uncontrollable events".into(),
            ));
        }
        Ok(ControlPattern(events))
    }

    pub fn events(&self) -> &BTreeSet<String> {
        &self.0
    }
}

/// A player-1 state: a machine state paired with an effective control
/// pattern (the chosen pattern intersected with the enabled events).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PatternState {
    /// index into `Arena::q0`
    pub origin: usize,
    pub pattern: BTreeSet<String>,
}

/// Bipartite two-player game graph. `q0[i]` is `None` exactly for the
/// losing sink that absorbs plant deadlocks.
#[derive(Debug, Clone)]
pub struct Arena {
    /// player-0 states: machine states, plus an optional sink
    pub q0: Vec<Option<String>>,
    /// player-1 states
    pub q1: Vec<PatternState>,
    pub succ0: Vec<Vec<usize>>,
    pub succ1: Vec<Vec<usize>>,
    pub init: usize,
    pub sink0: Option<usize>,
    q0_index: BTreeMap<String, usize>,
}

impl Arena {
    pub fn q0_index(&self, state: &str) -> Option<usize> {
        self.q0_index.get(state).copied()
    }

    /// Machine state name of a player-0 state; `None` for the sink.
    pub fn origin0(&self, q0: usize) -> Option<&String> {
        self.q0[q0].as_ref()
    }

    pub fn q1_label(&self, q1: usize) -> String {
        let st = &self.q1[q1];
        let origin = self.q0[st.origin]
            .as_deref()
            .unwrap_or("<sink>");
        let evs: Vec<&str> = st.pattern.iter().map(|s| s.as_str()).collect();
        format!("{origin},{{{}}}", evs.join(" "))
    }

    pub fn q0_label(&self, q0: usize) -> String {
        self.q0[q0].clone().unwrap_or_else(|| "<sink>".into())
    }

    /// Debug dump: one line per edge, `-` separated, deterministic order.
    pub fn dump(&self) -> String {
        let mut lines = Vec::new();
        for (i, succs) in self.succ0.iter().enumerate() {
            for &j in succs {
                lines.push(format!("{} - {}", self.q0_label(i), self.q1_label(j)));
            }
        }
        for (j, succs) in self.succ1.iter().enumerate() {
            for &i in succs {
                lines.push(format!("{} - {}", self.q1_label(j), self.q0_label(i)));
            }
        }
        lines.sort();
        lines.join("\n")
    }
}

/// The non-empty effective control patterns at a machine state: each pattern
/// in Gamma is quotiented by the enabled events.
fn effective_patterns(m: &Machine, state: &str) -> Vec<BTreeSet<String>> {
    let enabled = m.enabled(state);
    let base: BTreeSet<String> = enabled
        .intersection(&m.uncontrollable)
        .cloned()
        .collect();
    let free: Vec<String> = enabled
        .intersection(&m.controllable)
        .cloned()
        .collect();
    let mut out = BTreeSet::new();
    for mask in 0u64..(1u64 << free.len()) {
        let mut p = base.clone();
        for (i, e) in free.iter().enumerate() {
            if mask & (1 << i) != 0 {
                p.insert(e.clone());
            }
        }
        if !p.is_empty() {
            out.insert(p);
        }
    }
    out.into_iter().collect()
}

/// Builds the game arena of a synthesis automaton. Player-1 states are
/// deduplicated effective patterns; machine states with no enabled event are
/// routed to a losing sink.
pub fn build_arena(sa: &SynthesisAutomaton) -> Result<Arena> {
    sa.machine.ensure_valid()?;
    let m = &sa.machine;

    let reachable: Vec<String> = m.reachable().into_iter().collect();
    let mut q0: Vec<Option<String>> = reachable.iter().cloned().map(Some).collect();
    let q0_index: BTreeMap<String, usize> = reachable
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    let init = q0_index[&m.init];

    let mut q1: Vec<PatternState> = Vec::new();
    let mut succ0: Vec<Vec<usize>> = vec![Vec::new(); q0.len()];
    let mut succ1: Vec<Vec<usize>> = Vec::new();
    let mut sink0 = None;

    let need_sink = reachable.iter().any(|x| m.enabled(x).is_empty());
    if need_sink {
        let s0 = q0.len();
        q0.push(None);
        succ0.push(Vec::new());
        sink0 = Some(s0);
        let s1 = q1.len();
        q1.push(PatternState {
            origin: s0,
            pattern: BTreeSet::new(),
        });
        succ1.push(vec![s0]);
        succ0[s0].push(s1);
    }

    for (i, x) in reachable.iter().enumerate() {
        let pats = effective_patterns(m, x);
        if pats.is_empty() {
            // deadlocked machine state: only move is into the sink
            let sink_q1 = succ0[sink0.unwrap()][0];
            succ0[i].push(sink_q1);
            continue;
        }
        for pat in pats {
            let j = q1.len();
            let succs: Vec<usize> = pat
                .iter()
                .map(|e| {
                    let tgt = m.step(x, e).unwrap();
                    q0_index[tgt.as_str()]
                })
                .collect();
            let mut dedup: Vec<usize> = Vec::new();
            for t in succs {
                if !dedup.contains(&t) {
                    dedup.push(t);
                }
            }
            q1.push(PatternState {
                origin: i,
                pattern: pat,
            });
            succ1.push(dedup);
            succ0[i].push(j);
        }
    }

    // keep only states reachable from init (mirrors reachable machine part)
    let arena = Arena {
        q0,
        q1,
        succ0,
        succ1,
        init,
        sink0,
        q0_index,
    };
    debug_assert!(arena_total(&arena));
    Ok(arena)
}

fn arena_total(a: &Arena) -> bool {
    a.succ0.iter().all(|s| !s.is_empty()) && a.succ1.iter().all(|s| !s.is_empty())
}

/// Player-0 states reachable from the initial state (machine reachability
/// coincides with arena reachability on the q0 component).
pub fn reachable_q0(a: &Arena) -> BTreeSet<usize> {
    let mut seen: BTreeSet<usize> = [a.init].into();
    let mut queue: VecDeque<usize> = [a.init].into();
    while let Some(i) = queue.pop_front() {
        for &j in &a.succ0[i] {
            for &k in &a.succ1[j] {
                if seen.insert(k) {
                    queue.push_back(k);
                }
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::three_state_fixture;

    fn s(x: &str) -> String {
        x.to_string()
    }

    #[test]
    fn fixture_arena_matches_figure() {
        let fx = three_state_fixture();
        let a = build_arena(&fx).unwrap();
        assert_eq!(a.q0.len(), 3);
        assert_eq!(a.q1.len(), 7);
        assert!(a.sink0.is_none());

        let expected: BTreeSet<String> = [
            "p0,{c}",
            "p0,{a c}",
            "p1,{c}",
            "p1,{b c}",
            "p2,{a}",
            "p2,{b}",
            "p2,{a b}",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let actual: BTreeSet<String> =
            (0..a.q1.len()).map(|j| a.q1_label(j)).collect();
        assert_eq!(actual, expected);

        // edge set of the figure, up to naming
        let mut edges = BTreeSet::new();
        for (i, succs) in a.succ0.iter().enumerate() {
            for &j in succs {
                edges.insert((a.q0_label(i), a.q1_label(j)));
            }
        }
        for (j, succs) in a.succ1.iter().enumerate() {
            for &i in succs {
                edges.insert((a.q1_label(j), a.q0_label(i)));
            }
        }
        let expect_edges: BTreeSet<(String, String)> = [
            ("p0", "p0,{c}"),
            ("p0", "p0,{a c}"),
            ("p0,{c}", "p0"),
            ("p0,{a c}", "p0"),
            ("p0,{a c}", "p1"),
            ("p1", "p1,{c}"),
            ("p1", "p1,{b c}"),
            ("p1,{c}", "p0"),
            ("p1,{b c}", "p0"),
            ("p1,{b c}", "p2"),
            ("p2", "p2,{a}"),
            ("p2", "p2,{b}"),
            ("p2", "p2,{a b}"),
            ("p2,{a}", "p1"),
            ("p2,{b}", "p2"),
            ("p2,{a b}", "p1"),
            ("p2,{a b}", "p2"),
        ]
        .iter()
        .map(|(x, y)| (s(x), s(y)))
        .collect();
        assert_eq!(edges, expect_edges);
    }

    #[test]
    fn single_uncontrollable_loop_collapses_patterns() {
        let m = Machine {
            states: [s("x")].into(),
            alphabet: [s("c")].into(),
            controllable: [].into(),
            uncontrollable: [s("c")].into(),
            init: s("x"),
            trans: [((s("x"), s("c")), s("x"))].into(),
        };
        let sa = SynthesisAutomaton {
            machine: m,
            plant: crate::condition::Condition::Streett(vec![]),
            spec: crate::condition::Condition::Rabin(vec![]),
        };
        let a = build_arena(&sa).unwrap();
        assert_eq!(a.q0.len(), 1);
        assert_eq!(a.q1.len(), 1);
        assert_eq!(a.q1[0].pattern, [s("c")].into());
    }

    #[test]
    fn deadlock_state_routed_to_sink() {
        let m = Machine {
            states: [s("x"), s("dead")].into(),
            alphabet: [s("a")].into(),
            controllable: [s("a")].into(),
            uncontrollable: [].into(),
            init: s("x"),
            trans: [((s("x"), s("a")), s("dead"))].into(),
        };
        let sa = SynthesisAutomaton {
            machine: m,
            plant: crate::condition::Condition::Streett(vec![]),
            spec: crate::condition::Condition::Rabin(vec![]),
        };
        let a = build_arena(&sa).unwrap();
        let sink = a.sink0.unwrap();
        let dead = a.q0_index("dead").unwrap();
        // dead's only move leads to the sink, which loops forever
        assert_eq!(a.succ0[dead].len(), 1);
        let j = a.succ0[dead][0];
        assert_eq!(a.succ1[j], vec![sink]);
        assert_eq!(a.succ1[a.succ0[sink][0]], vec![sink]);
    }

    #[test]
    fn pattern_requires_uncontrollables() {
        let uc: BTreeSet<String> = [s("c")].into();
        assert!(ControlPattern::new([s("a")].into(), &uc).is_err());
        assert!(ControlPattern::new([s("a"), s("c")].into(), &uc).is_ok());
    }

    #[test]
    fn q1_count_bound() {
        let fx = three_state_fixture();
        let a = build_arena(&fx).unwrap();
        let bound = fx.machine.states.len()
            * (1 << fx.machine.controllable.len());
        assert!(a.q1.len() <= bound);
    }
}
