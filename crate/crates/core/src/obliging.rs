//! Reduction of the supervisor synthesis game to a parity game.
//!
//! The plant's liveness (Streett) condition is tracked by a nondeterministic
//! Buechi witness automaton, the combined correctness (Rabin) condition by a
//! deterministic index-appearance-record monitor emitting parity colors, and
//! the obligation to keep the plant's live behaviors reachable is encoded by
//! a proposal/deviation game: player 0 proposes continuations witnessing
//! plant liveness, player 1 may follow or deviate.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::arena::Arena;
use crate::condition::{Condition, Lasso, PairList};
use crate::error::Result;
use crate::machine::{Machine, SynthesisAutomaton};
use crate::parity::{ParityGame, PgState, Player};

/// Multiplicative constant in the parity-game size bound.
pub const SIZE_BOUND_CONSTANT: usize = 9;

/// State of the Buechi witness automaton for a Streett condition.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum NbaState {
    /// Waiting: no guess committed yet.
    Init,
    /// Committed guess: the pairs in `fin` see their G-set no more; the
    /// remaining pairs must hit their R-sets round-robin. `accept` marks a
    /// completed round.
    Guess {
        fin: BTreeSet<usize>,
        ptr: usize,
        accept: bool,
    },
}

/// Nondeterministic Buechi automaton over machine states accepting exactly
/// the infinite state sequences satisfying a Streett pair list.
#[derive(Debug, Clone)]
pub struct WitnessNba {
    pub states: Vec<NbaState>,
    pub init: usize,
    pairs: PairList,
    index: BTreeMap<NbaState, usize>,
}

impl WitnessNba {
    pub fn from_streett(pairs: &PairList) -> WitnessNba {
        let k = pairs.len();
        let mut states = vec![NbaState::Init];
        // every guess subset, round-robin pointer position, accept flag
        for mask in 0u64..(1u64 << k) {
            let fin: BTreeSet<usize> =
                (0..k).filter(|i| mask & (1 << i) != 0).collect();
            let rr = k - fin.len();
            for ptr in 0..rr.max(1) {
                for accept in [false, true] {
                    states.push(NbaState::Guess {
                        fin: fin.clone(),
                        ptr,
                        accept,
                    });
                }
            }
        }
        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        WitnessNba {
            states,
            init: 0,
            pairs: pairs.clone(),
            index,
        }
    }

    pub fn is_accepting(&self, s: usize) -> bool {
        matches!(self.states[s], NbaState::Guess { accept: true, .. })
    }

    fn guess_step(&self, fin: &BTreeSet<usize>, ptr: usize, letter: &str) -> Option<NbaState> {
        if fin
            .iter()
            .any(|&i| self.pairs[i].0.contains(letter))
        {
            return None; // a guessed-finished G-set was hit: run dies
        }
        let rr: Vec<usize> =
            (0..self.pairs.len()).filter(|i| !fin.contains(i)).collect();
        if rr.is_empty() {
            return Some(NbaState::Guess {
                fin: fin.clone(),
                ptr: 0,
                accept: true,
            });
        }
        let (ptr, accept) = if self.pairs[rr[ptr]].1.contains(letter) {
            if ptr + 1 == rr.len() {
                (0, true)
            } else {
                (ptr + 1, false)
            }
        } else {
            (ptr, false)
        };
        Some(NbaState::Guess {
            fin: fin.clone(),
            ptr,
            accept,
        })
    }

    /// Successor states after reading `letter` (a machine-state name).
    pub fn step(&self, state: usize, letter: &str) -> Vec<usize> {
        let mut out = Vec::new();
        match &self.states[state] {
            NbaState::Init => {
                out.push(self.init);
                // commit to any guess consistent with the letter
                let k = self.pairs.len();
                for mask in 0u64..(1u64 << k) {
                    let fin: BTreeSet<usize> =
                        (0..k).filter(|i| mask & (1 << i) != 0).collect();
                    if let Some(next) = self.guess_step(&fin, 0, letter) {
                        out.push(self.index[&next]);
                    }
                }
            }
            NbaState::Guess { fin, ptr, .. } => {
                if let Some(next) = self.guess_step(fin, *ptr, letter) {
                    out.push(self.index[&next]);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// True iff the witness automaton has an accepting run on
/// `stem . cycle^omega`; agrees with the Streett reading of the pairs.
pub fn nba_accepts_lasso(nba: &WitnessNba, lasso: &Lasso) -> Result<bool> {
    let cycle = &lasso.cycle;
    if cycle.is_empty() {
        return Err(crate::error::Error::InvalidLasso(
            "cycle must be non-empty".into(),
        ));
    }
    let mut reach: BTreeSet<usize> = [nba.init].into();
    for letter in &lasso.stem {
        reach = reach
            .iter()
            .flat_map(|&s| nba.step(s, letter))
            .collect();
    }
    // product of the automaton with the cycle positions
    let n = cycle.len();
    let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut queue: VecDeque<(usize, usize)> =
        reach.iter().map(|&s| (s, 0)).collect();
    seen.extend(queue.iter().copied());
    let mut succ: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
    while let Some((s, p)) = queue.pop_front() {
        let nexts: Vec<(usize, usize)> = nba
            .step(s, &cycle[p])
            .into_iter()
            .map(|s2| (s2, (p + 1) % n))
            .collect();
        for &v in &nexts {
            if seen.insert(v) {
                queue.push_back(v);
            }
        }
        succ.insert((s, p), nexts);
    }
    // accepting iff some reachable accepting node lies on a cycle
    for &(s, p) in &seen {
        if !nba.is_accepting(s) {
            continue;
        }
        let mut stack = succ.get(&(s, p)).cloned().unwrap_or_default();
        let mut visited = BTreeSet::new();
        while let Some(v) = stack.pop() {
            if v == (s, p) {
                return Ok(true);
            }
            if visited.insert(v) {
                if let Some(nexts) = succ.get(&v) {
                    stack.extend(nexts.iter().copied());
                }
            }
        }
    }
    Ok(false)
}

/// Deterministic index-appearance-record monitor turning a Rabin pair list
/// into parity colors: the maximal color seen infinitely often is even iff
/// the observed state sequence satisfies the Rabin condition.
#[derive(Debug, Clone)]
pub struct IarMonitor {
    /// all permutations of the pair indices; records are permutation indices
    pub perms: Vec<Vec<usize>>,
    pub init: usize,
    pairs: PairList,
    index: BTreeMap<Vec<usize>, usize>,
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::new();
        for p in out {
            for i in 0..k {
                if !p.contains(&i) {
                    let mut q = p.clone();
                    q.push(i);
                    next.push(q);
                }
            }
        }
        out = next;
    }
    out.sort();
    out
}

impl IarMonitor {
    pub fn from_rabin(pairs: &PairList) -> IarMonitor {
        let perms = permutations(pairs.len());
        let identity: Vec<usize> = (0..pairs.len()).collect();
        let index: BTreeMap<Vec<usize>, usize> = perms
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        let init = index[&identity];
        IarMonitor {
            perms,
            init,
            pairs: pairs.clone(),
            index,
        }
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    /// Largest color the monitor can emit.
    pub fn max_color(&self) -> u32 {
        2 * self.pairs.len() as u32 + 1
    }

    /// Reads one machine state: R-hit indices move to the front of the
    /// record; the color reflects the hit positions in the old record
    /// (1-based): an R-hit at position e dominating emits 2e+1, a G-hit at
    /// position f dominating emits 2f, otherwise 1.
    pub fn step(&self, state: usize, letter: &str) -> (usize, u32) {
        let perm = &self.perms[state];
        let r_hit = |i: usize| self.pairs[i].1.contains(letter);
        let g_hit = |i: usize| self.pairs[i].0.contains(letter);
        let mut e = 0u32; // max 1-based position with an R-hit
        let mut f = 0u32; // max 1-based position with a G-hit
        for (pos, &i) in perm.iter().enumerate() {
            if r_hit(i) {
                e = pos as u32 + 1;
            }
            if g_hit(i) {
                f = pos as u32 + 1;
            }
        }
        let color = if e >= f && e > 0 {
            2 * e + 1
        } else if f > 0 {
            2 * f
        } else {
            1
        };
        let mut next: Vec<usize> =
            perm.iter().copied().filter(|&i| r_hit(i)).collect();
        next.extend(perm.iter().copied().filter(|&i| !r_hit(i)));
        (self.index[&next], color)
    }
}

/// Deterministic color sequence of the monitor on `stem . cycle^omega`:
/// returns whether the maximal color emitted infinitely often is even.
pub fn iar_eval_lasso(iar: &IarMonitor, lasso: &Lasso) -> Result<bool> {
    if lasso.cycle.is_empty() {
        return Err(crate::error::Error::InvalidLasso(
            "cycle must be non-empty".into(),
        ));
    }
    let mut s = iar.init;
    for letter in &lasso.stem {
        s = iar.step(s, letter).0;
    }
    // iterate the cycle until the entry state repeats, then read the colors
    // of one full period
    let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
    let mut entries = vec![s];
    loop {
        if let Some(&start) = seen.get(&s) {
            let _ = start;
            break;
        }
        seen.insert(s, entries.len() - 1);
        for letter in &lasso.cycle {
            s = iar.step(s, letter).0;
        }
        entries.push(s);
    }
    let start = seen[&s];
    let mut max = 0u32;
    let mut t = entries[start];
    let period = entries.len() - 1 - start;
    for _ in 0..period.max(1) {
        for letter in &lasso.cycle {
            let (t2, c) = iar.step(t, letter);
            t = t2;
            max = max.max(c);
        }
    }
    Ok(max.is_multiple_of(2))
}

/// Node of the reduced parity game.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum PgNode {
    /// Player 0 picks a control pattern; `col` is the color emitted for the
    /// step that entered this machine state.
    Choose {
        q0: usize,
        nba: usize,
        iar: usize,
        tracker: u32,
        col: u32,
    },
    /// Player 1 either deviates to any successor of the pattern or hands
    /// over to player 0's proposal.
    Respond {
        q1: usize,
        nba: usize,
        iar: usize,
        tracker: u32,
    },
    /// Player 0 proposes a concrete successor together with a witness
    /// automaton transition.
    Handover {
        q1: usize,
        nba: usize,
        iar: usize,
        tracker: u32,
    },
    /// Absorbing losing node (plant deadlock or dead witness run).
    Sink,
}

/// The reduced parity game with its decoding tables.
#[derive(Debug)]
pub struct ReducedGame {
    pub game: ParityGame,
    pub nodes: Vec<PgNode>,
    pub nba: WitnessNba,
    pub iar: IarMonitor,
    node_index: BTreeMap<PgNode, usize>,
}

impl ReducedGame {
    pub fn node_index(&self, n: &PgNode) -> Option<usize> {
        self.node_index.get(n).copied()
    }

    /// Coarse state-count bound for the reduced parity game:
    /// n * 2^|controllable| * k^2 * k! * |witness NBA| * (2k+2) * constant.
    pub fn size_bound(&self, machine: &Machine) -> usize {
        let k = self.iar.pair_count();
        let fact: usize = (1..=k).product::<usize>().max(1);
        let record = (k * k * fact).max(1);
        machine.states.len()
            * (1usize << machine.controllable.len())
            * record
            * self.nba.states.len()
            * (2 * k + 2)
            * SIZE_BOUND_CONSTANT
    }
}

fn node_label(n: &PgNode, arena: &Arena) -> String {
    match n {
        PgNode::Choose {
            q0,
            nba,
            iar,
            tracker,
            col,
        } => format!(
            "C {} n{nba} i{iar} t{tracker} c{col}",
            arena.q0_label(*q0)
        ),
        PgNode::Respond {
            q1,
            nba,
            iar,
            tracker,
        } => format!("R {} n{nba} i{iar} t{tracker}", arena.q1_label(*q1)),
        PgNode::Handover {
            q1,
            nba,
            iar,
            tracker,
        } => format!("H {} n{nba} i{iar} t{tracker}", arena.q1_label(*q1)),
        PgNode::Sink => "S".into(),
    }
}

/// Builds the reduced parity game for a synthesis automaton and its arena.
///
/// Colors fold the correctness parity condition with the obligation to
/// witness plant liveness: a step is *marked* when player 1 deviates or the
/// witness automaton takes an accepting transition. The running tracker
/// accumulates the maximal monitor color since the last mark; marked steps
/// emit it, unmarked steps emit 1. Player 0 thus wins iff the correctness
/// condition holds and marks recur.
pub fn build_reduced_game(sa: &SynthesisAutomaton, arena: &Arena) -> Result<ReducedGame> {
    let states = sa.machine.state_set();
    let strong = Condition::union_rabin(&sa.plant.dualize()?, &sa.spec.to_rabin()?)?;
    let weak = sa.plant.to_streett(&states)?;
    let nba = WitnessNba::from_streett(weak.streett_pairs()?);
    let iar = IarMonitor::from_rabin(strong.rabin_pairs()?);

    let mut nodes: Vec<PgNode> = Vec::new();
    let mut node_index: BTreeMap<PgNode, usize> = BTreeMap::new();
    let mut succ: Vec<Vec<usize>> = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::new();

    let intern = |n: PgNode,
                      nodes: &mut Vec<PgNode>,
                      node_index: &mut BTreeMap<PgNode, usize>,
                      succ: &mut Vec<Vec<usize>>,
                      queue: &mut VecDeque<usize>|
     -> usize {
        if let Some(&i) = node_index.get(&n) {
            return i;
        }
        let i = nodes.len();
        node_index.insert(n.clone(), i);
        nodes.push(n);
        succ.push(Vec::new());
        queue.push_back(i);
        i
    };

    let root = PgNode::Choose {
        q0: arena.init,
        nba: nba.init,
        iar: iar.init,
        tracker: 1,
        col: 1,
    };
    let init = intern(root, &mut nodes, &mut node_index, &mut succ, &mut queue);

    while let Some(i) = queue.pop_front() {
        let node = nodes[i].clone();
        let mut targets: Vec<usize> = Vec::new();
        match node {
            PgNode::Sink => {
                targets.push(i);
            }
            PgNode::Choose {
                q0,
                nba: n,
                iar: r,
                tracker,
                ..
            } => {
                for &q1 in &arena.succ0[q0] {
                    targets.push(intern(
                        PgNode::Respond {
                            q1,
                            nba: n,
                            iar: r,
                            tracker,
                        },
                        &mut nodes,
                        &mut node_index,
                        &mut succ,
                        &mut queue,
                    ));
                }
            }
            PgNode::Respond {
                q1,
                nba: n,
                iar: r,
                tracker,
            } => {
                // deviations: any pattern successor; the witness restarts
                // and the step counts as marked
                for &q0n in &arena.succ1[q1] {
                    let t = match arena.origin0(q0n) {
                        None => intern(
                            PgNode::Sink,
                            &mut nodes,
                            &mut node_index,
                            &mut succ,
                            &mut queue,
                        ),
                        Some(x) => {
                            let (r2, c) = iar.step(r, x);
                            intern(
                                PgNode::Choose {
                                    q0: q0n,
                                    nba: nba.init,
                                    iar: r2,
                                    tracker: 1,
                                    col: tracker.max(c),
                                },
                                &mut nodes,
                                &mut node_index,
                                &mut succ,
                                &mut queue,
                            )
                        }
                    };
                    if !targets.contains(&t) {
                        targets.push(t);
                    }
                }
                targets.push(intern(
                    PgNode::Handover {
                        q1,
                        nba: n,
                        iar: r,
                        tracker,
                    },
                    &mut nodes,
                    &mut node_index,
                    &mut succ,
                    &mut queue,
                ));
            }
            PgNode::Handover {
                q1,
                nba: n,
                iar: r,
                tracker,
            } => {
                for &q0n in &arena.succ1[q1] {
                    let x = match arena.origin0(q0n) {
                        Some(x) => x.clone(),
                        None => continue,
                    };
                    let (r2, c) = iar.step(r, &x);
                    for n2 in nba.step(n, &x) {
                        let marked = nba.is_accepting(n2);
                        let (tracker2, col) = if marked {
                            (1, tracker.max(c))
                        } else {
                            (tracker.max(c), 1)
                        };
                        let t = intern(
                            PgNode::Choose {
                                q0: q0n,
                                nba: n2,
                                iar: r2,
                                tracker: tracker2,
                                col,
                            },
                            &mut nodes,
                            &mut node_index,
                            &mut succ,
                            &mut queue,
                        );
                        if !targets.contains(&t) {
                            targets.push(t);
                        }
                    }
                }
                if targets.is_empty() {
                    // every proposal kills the witness run: losing
                    targets.push(intern(
                        PgNode::Sink,
                        &mut nodes,
                        &mut node_index,
                        &mut succ,
                        &mut queue,
                    ));
                }
            }
        }
        succ[i] = targets;
    }

    let pg_states: Vec<PgState> = nodes
        .iter()
        .zip(&succ)
        .map(|(n, s)| {
            let (owner, color) = match n {
                PgNode::Choose { col, .. } => (Player::Zero, *col),
                PgNode::Respond { .. } => (Player::One, 1),
                PgNode::Handover { .. } => (Player::Zero, 1),
                PgNode::Sink => (Player::Zero, 1),
            };
            PgState {
                owner,
                color,
                succ: s.clone(),
                label: node_label(n, arena),
            }
        })
        .collect();

    Ok(ReducedGame {
        game: ParityGame {
            states: pg_states,
            init,
        },
        nodes,
        nba,
        iar,
        node_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::build_arena;
    use crate::machine::three_state_fixture;

    fn s(x: &str) -> String {
        x.to_string()
    }

    fn set(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn lasso(stem: &[&str], cycle: &[&str]) -> Lasso {
        Lasso::new(
            stem.iter().map(|s| s.to_string()).collect(),
            cycle.iter().map(|s| s.to_string()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn nba_agrees_on_fixture_plant() {
        // plant liveness of the worked example: visit p2 infinitely often
        let pairs = vec![(set(&["p0", "p1", "p2"]), set(&["p2"]))];
        let nba = WitnessNba::from_streett(&pairs);
        assert!(nba_accepts_lasso(&nba, &lasso(&["p0", "p1"], &["p2"])).unwrap());
        assert!(nba_accepts_lasso(&nba, &lasso(&["p0"], &["p1", "p2"])).unwrap());
        assert!(!nba_accepts_lasso(&nba, &lasso(&[], &["p0"])).unwrap());
        assert!(!nba_accepts_lasso(&nba, &lasso(&[], &["p0", "p1"])).unwrap());
    }

    #[test]
    fn nba_of_empty_pairs_accepts_everything() {
        let nba = WitnessNba::from_streett(&vec![]);
        assert!(nba_accepts_lasso(&nba, &lasso(&[], &["x"])).unwrap());
        assert!(nba_accepts_lasso(&nba, &lasso(&["y"], &["x", "z"])).unwrap());
    }

    #[test]
    fn iar_single_pair_colors() {
        // one pair: R-hit -> 3, G-hit -> 2, neither -> 1
        let pairs = vec![(set(&["g"]), set(&["r"]))];
        let iar = IarMonitor::from_rabin(&pairs);
        assert_eq!(iar.step(iar.init, "r").1, 3);
        assert_eq!(iar.step(iar.init, "g").1, 2);
        assert_eq!(iar.step(iar.init, "x").1, 1);
        assert_eq!(iar.max_color(), 3);
    }

    #[test]
    fn iar_matches_rabin_on_fixture_condition() {
        // strong condition of the worked example
        let pairs = vec![
            (set(&["p0", "p1", "p2"]), set(&["p2"])),
            (set(&["p1"]), set(&[])),
        ];
        let cond = Condition::Rabin(pairs.clone());
        let iar = IarMonitor::from_rabin(&pairs);
        for l in [
            lasso(&[], &["p0"]),
            lasso(&["p0"], &["p1", "p0"]),
            lasso(&["p0"], &["p1", "p2"]),
            lasso(&["p0", "p1"], &["p2"]),
            lasso(&[], &["p0", "p1", "p2"]),
        ] {
            assert_eq!(
                iar_eval_lasso(&iar, &l).unwrap(),
                cond.eval_lasso(&l).unwrap(),
                "disagreement on {l:?}"
            );
        }
    }

    #[test]
    fn iar_empty_pairs_is_constant_odd() {
        let iar = IarMonitor::from_rabin(&vec![]);
        assert_eq!(iar.perms.len(), 1);
        assert_eq!(iar.step(iar.init, "x"), (iar.init, 1));
        assert!(!iar_eval_lasso(&iar, &lasso(&[], &["x"])).unwrap());
    }

    #[test]
    fn reduced_game_fixture_shape() {
        let fx = three_state_fixture();
        let arena = build_arena(&fx).unwrap();
        let rg = build_reduced_game(&fx, &arena).unwrap();
        rg.game.ensure_total().unwrap();
        assert!(rg.game.states.len() <= rg.size_bound(&fx.machine));
        // the fixture has no deadlock, and both strong pairs keep the
        // monitor colors within 2k+1
        let k = rg.iar.pair_count();
        assert_eq!(k, 2);
        assert!(rg.game.max_color() <= 2 * k as u32 + 1);
        // init is a Choose node at p0
        match &rg.nodes[rg.game.init] {
            PgNode::Choose { q0, .. } => {
                assert_eq!(arena.q0_label(*q0), "p0")
            }
            other => panic!("unexpected init node {other:?}"),
        }
    }

    #[test]
    fn deadlocked_plant_reduces_to_sink() {
        use crate::machine::Machine;
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
            plant: Condition::Streett(vec![]),
            spec: Condition::Rabin(vec![]),
        };
        let arena = build_arena(&sa).unwrap();
        let rg = build_reduced_game(&sa, &arena).unwrap();
        rg.game.ensure_total().unwrap();
        assert!(rg.nodes.iter().any(|n| matches!(n, PgNode::Sink)));
    }
}
