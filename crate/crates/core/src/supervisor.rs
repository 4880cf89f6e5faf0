//! Finite-memory supervisors (Mealy form) and their extraction from winning
//! strategies of the reduced parity game.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::arena::Arena;
use crate::error::{Error, Result};
use crate::machine::Machine;
use crate::obliging::{PgNode, ReducedGame};
use crate::parity::ParitySolution;
use crate::strategy::{disambiguate, ArenaStrategy};

/// Finite-memory supervisor: per (memory, machine state) a control pattern,
/// per (memory, machine state, event) a memory update. Memoryless
/// supervisors may omit updates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Supervisor {
    pub mem_count: usize,
    pub init_mem: usize,
    pub pattern: BTreeMap<(usize, String), BTreeSet<String>>,
    pub step: BTreeMap<(usize, String, String), usize>,
}

impl Supervisor {
    pub fn control_pattern(&self, mem: usize, state: &str) -> Result<&BTreeSet<String>> {
        self.pattern
            .get(&(mem, state.to_string()))
            .ok_or_else(|| {
                Error::MalformedSupervisor(format!(
                    "no control pattern for memory {mem} at state {state}"
                ))
            })
    }

    /// Memory after observing `event` at `state`; memoryless supervisors
    /// stay put on missing entries.
    pub fn advance(&self, mem: usize, state: &str, event: &str) -> Result<usize> {
        if let Some(&m) = self
            .step
            .get(&(mem, state.to_string(), event.to_string()))
        {
            return Ok(m);
        }
        if self.mem_count == 1 {
            return Ok(mem);
        }
        Err(Error::MalformedSupervisor(format!(
            "no memory update for memory {mem} at state {state} on event {event}"
        )))
    }

    /// Structural well-formedness against a machine: patterns contain every
    /// uncontrollable event, and all memory references are in range.
    pub fn validate(&self, machine: &Machine) -> Result<()> {
        if self.init_mem >= self.mem_count {
            return Err(Error::MalformedSupervisor(
                "initial memory out of range".into(),
            ));
        }
        for ((m, x), pat) in &self.pattern {
            if *m >= self.mem_count {
                return Err(Error::MalformedSupervisor(format!(
                    "memory {m} out of range in pattern table"
                )));
            }
            if !machine.states.contains(x) {
                return Err(Error::MalformedSupervisor(format!(
                    "unknown state {x} in pattern table"
                )));
            }
            if !machine.uncontrollable.is_subset(pat) {
                return Err(Error::MalformedSupervisor(format!(
                    "pattern at memory {m}, state {x} blocks an uncontrollable event"
                )));
            }
            if !pat.is_subset(&machine.alphabet) {
                return Err(Error::MalformedSupervisor(format!(
                    "pattern at memory {m}, state {x} uses an unknown event"
                )));
            }
        }
        for ((m, x, e), m2) in &self.step {
            if *m >= self.mem_count || *m2 >= self.mem_count {
                return Err(Error::MalformedSupervisor(
                    "memory out of range in step table".into(),
                ));
            }
            if !machine.states.contains(x) || !machine.alphabet.contains(e) {
                return Err(Error::MalformedSupervisor(format!(
                    "unknown state or event ({x}, {e}) in step table"
                )));
            }
        }
        Ok(())
    }
}

/// One step of a supervised run, as reported by [`simulate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimStep {
    pub state: String,
    pub mem: usize,
    pub pattern: BTreeSet<String>,
    pub event: String,
    pub allowed: bool,
    pub next_state: Option<String>,
}

/// Replays an event sequence through the closed loop; stops at the first
/// event that the supervisor blocks or the machine does not enable.
pub fn simulate(
    sup: &Supervisor,
    machine: &Machine,
    events: &[String],
) -> Result<Vec<SimStep>> {
    machine.ensure_valid()?;
    sup.validate(machine)?;
    let mut out = Vec::new();
    let mut state = machine.init.clone();
    let mut mem = sup.init_mem;
    for e in events {
        if !machine.alphabet.contains(e) {
            return Err(Error::InvalidPath(format!("unknown event {e}")));
        }
        let pattern = sup.control_pattern(mem, &state)?.clone();
        let allowed =
            pattern.contains(e) && machine.step(&state, e).is_some();
        let next_state = if allowed {
            Some(machine.step(&state, e).unwrap().clone())
        } else {
            None
        };
        out.push(SimStep {
            state: state.clone(),
            mem,
            pattern,
            event: e.clone(),
            allowed,
            next_state: next_state.clone(),
        });
        match next_state {
            Some(y) => {
                mem = sup.advance(mem, &state, e)?;
                state = y;
            }
            None => break,
        }
    }
    Ok(out)
}

/// Extracts a gracious winning player-0 strategy from a solved reduced
/// game. Memory states are the reachable choice nodes of the reduced game;
/// observed moves that leave the proposal re-enter via the deviation nodes,
/// so the update is defined for every plant move, compliant or not.
/// Fails with [`Error::Unrealizable`] when player 0 loses the initial node.
pub fn gracious_from_parity(
    rg: &ReducedGame,
    sol: &ParitySolution,
    arena: &Arena,
) -> Result<ArenaStrategy> {
    if !sol.winning0.contains(&rg.game.init) {
        return Err(Error::Unrealizable);
    }

    let mut mem_of: BTreeMap<usize, usize> = BTreeMap::new();
    let mut choice: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut update: BTreeMap<(usize, usize, usize), usize> = BTreeMap::new();
    let mut queue: VecDeque<usize> = VecDeque::new();

    mem_of.insert(rg.game.init, 0);
    queue.push_back(rg.game.init);
    let mut order: Vec<usize> = vec![rg.game.init];

    while let Some(ch) = queue.pop_front() {
        let m = mem_of[&ch];
        let (q0, iar, tracker) = match &rg.nodes[ch] {
            PgNode::Choose {
                q0, iar, tracker, ..
            } => (*q0, *iar, *tracker),
            other => {
                return Err(Error::InternalSoundness(format!(
                    "memory node is not a choice node: {other:?}"
                )))
            }
        };

        // own pattern choice and, when winning, the concrete proposal
        let (own_j, proposal): (usize, Option<usize>) = if sol
            .winning0
            .contains(&ch)
        {
            let rn = sol.strategy0[ch].ok_or_else(|| {
                Error::InternalSoundness("no strategy on a winning choice node".into())
            })?;
            let (q1, n2, r2, t2) = match &rg.nodes[rn] {
                PgNode::Respond {
                    q1,
                    nba,
                    iar,
                    tracker,
                } => (*q1, *nba, *iar, *tracker),
                other => {
                    return Err(Error::InternalSoundness(format!(
                        "choice node does not move to a respond node: {other:?}"
                    )))
                }
            };
            let hn = rg
                .node_index(&PgNode::Handover {
                    q1,
                    nba: n2,
                    iar: r2,
                    tracker: t2,
                })
                .ok_or_else(|| {
                    Error::InternalSoundness("missing handover node".into())
                })?;
            let pr = sol.strategy0[hn].ok_or_else(|| {
                Error::InternalSoundness("no strategy on a winning handover node".into())
            })?;
            if matches!(rg.nodes[pr], PgNode::Sink) {
                return Err(Error::InternalSoundness(
                    "winning strategy proposes the sink".into(),
                ));
            }
            (q1, Some(pr))
        } else {
            // unreachable under compliant plant behavior; any total choice
            // keeps the path-based supervisor well-defined
            (arena.succ0[q0][0], None)
        };
        choice.insert((m, q0), own_j);

        let proposed_q0 = proposal.map(|pr| match &rg.nodes[pr] {
            PgNode::Choose { q0, .. } => *q0,
            _ => unreachable!(),
        });

        // memory update for every plant successor of q0
        let mut all_k: BTreeSet<usize> = BTreeSet::new();
        for &j in &arena.succ0[q0] {
            all_k.extend(arena.succ1[j].iter().copied());
        }
        for k in all_k {
            let next_node = match arena.origin0(k) {
                None => {
                    // the deadlock sink: loop the memory (never reached
                    // under a winning supervisor)
                    update.insert((m, own_j, k), m);
                    continue;
                }
                Some(x) => {
                    if proposed_q0 == Some(k) {
                        proposal.unwrap()
                    } else {
                        let (r2, c) = rg.iar.step(iar, x);
                        rg.node_index(&PgNode::Choose {
                            q0: k,
                            nba: rg.nba.init,
                            iar: r2,
                            tracker: 1,
                            col: tracker.max(c),
                        })
                        .ok_or_else(|| {
                            Error::InternalSoundness(
                                "missing deviation node".into(),
                            )
                        })?
                    }
                }
            };
            let m2 = *mem_of.entry(next_node).or_insert_with(|| {
                queue.push_back(next_node);
                order.push(next_node);
                order.len() - 1
            });
            update.insert((m, own_j, k), m2);
        }
    }

    Ok(ArenaStrategy {
        mem_count: order.len(),
        init_mem: 0,
        choice,
        update,
    })
}

/// Memory update through any pattern state reaching `k`; strategies
/// produced by [`disambiguate`] give the same value for every such pattern
/// state.
fn advance_via_any(
    st: &ArenaStrategy,
    arena: &Arena,
    mem: usize,
    q0: usize,
    k: usize,
) -> Result<usize> {
    if st.mem_count == 1 {
        return Ok(mem);
    }
    for &j in &arena.succ0[q0] {
        if arena.succ1[j].contains(&k) {
            if let Ok(m2) = st.advance(mem, j, k) {
                return Ok(m2);
            }
        }
    }
    Err(Error::StrategyUndefined(format!(
        "no memory update from memory {mem} at {} into {}",
        arena.q0_label(q0),
        arena.q0_label(k)
    )))
}

/// Reads a supervisor off a non-ambiguous arena strategy: the pattern is
/// the chosen effective pattern plus all uncontrollable events; the memory
/// update follows the observed machine state through the strategy. The
/// supervisor is total on enabled events, so it is defined on every plant
/// path.
pub fn supervisor_from_strategy(
    st: &ArenaStrategy,
    arena: &Arena,
    machine: &Machine,
) -> Result<Supervisor> {
    let st = disambiguate(st, arena)?;
    let mut pattern = BTreeMap::new();
    let mut step = BTreeMap::new();

    let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
    seen.insert((st.init_mem, arena.init));
    queue.push_back((st.init_mem, arena.init));
    while let Some((mem, q0)) = queue.pop_front() {
        let x = arena
            .origin0(q0)
            .ok_or_else(|| {
                Error::MalformedSupervisor(
                    "strategy reaches the deadlock sink".into(),
                )
            })?
            .clone();
        let j = st.choose(mem, q0)?;
        let full: BTreeSet<String> = arena.q1[j]
            .pattern
            .union(&machine.uncontrollable)
            .cloned()
            .collect();
        pattern.insert((mem, x.clone()), full);
        for e in machine.enabled(&x) {
            let y = machine.step(&x, &e).unwrap().clone();
            let k = arena.q0_index(&y).ok_or_else(|| {
                Error::MalformedSupervisor(format!("unknown successor {y}"))
            })?;
            let m2 = advance_via_any(&st, arena, mem, q0, k)?;
            step.insert((mem, x.clone(), e.clone()), m2);
            if seen.insert((m2, k)) {
                queue.push_back((m2, k));
            }
        }
    }

    Ok(Supervisor {
        mem_count: st.mem_count,
        init_mem: st.init_mem,
        pattern,
        step,
    })
}

/// Reads a supervisor back as an arena strategy (for round-trip checks):
/// the choice at (memory, state) is the pattern state of the effective
/// pattern, the update follows the supervisor's memory on the unique event
/// of each observed transition.
pub fn strategy_from_supervisor(
    sup: &Supervisor,
    arena: &Arena,
    machine: &Machine,
) -> Result<ArenaStrategy> {
    let mut choice = BTreeMap::new();
    let mut update = BTreeMap::new();

    let mut seen: BTreeSet<(usize, String)> = BTreeSet::new();
    let mut queue: VecDeque<(usize, String)> = VecDeque::new();
    seen.insert((sup.init_mem, machine.init.clone()));
    queue.push_back((sup.init_mem, machine.init.clone()));
    while let Some((mem, x)) = queue.pop_front() {
        let q0 = arena.q0_index(&x).ok_or_else(|| {
            Error::MalformedSupervisor(format!("unknown state {x}"))
        })?;
        let pat = sup.control_pattern(mem, &x)?;
        let eff: BTreeSet<String> =
            pat.intersection(&machine.enabled(&x)).cloned().collect();
        let j = arena.succ0[q0]
            .iter()
            .copied()
            .find(|&j| arena.q1[j].pattern == eff)
            .ok_or_else(|| {
                Error::MalformedSupervisor(format!(
                    "pattern at memory {mem}, state {x} enables no event"
                ))
            })?;
        choice.insert((mem, q0), j);
        for e in machine.enabled(&x) {
            let y = machine.step(&x, &e).unwrap().clone();
            let k = arena.q0_index(&y).unwrap();
            let m2 = sup.advance(mem, &x, &e)?;
            // the same update through every pattern state that can observe
            // this transition
            for &jj in &arena.succ0[q0] {
                if arena.q1[jj].pattern.contains(&e) {
                    update.insert((mem, jj, k), m2);
                }
            }
            if seen.insert((m2, y.clone())) {
                queue.push_back((m2, y));
            }
        }
    }

    Ok(ArenaStrategy {
        mem_count: sup.mem_count,
        init_mem: sup.init_mem,
        choice,
        update,
    })
}

/// Lifts a supervisor over a relabeled machine back to the original one:
/// new memory states are reachable (memory, relabeled state) pairs.
pub fn pull_back(
    sup: &Supervisor,
    back: &BTreeMap<String, String>,
    relabeled: &Machine,
) -> Result<Supervisor> {
    let mut mem_of: BTreeMap<(usize, String), usize> = BTreeMap::new();
    let mut order: Vec<(usize, String)> = Vec::new();
    let mut pattern = BTreeMap::new();
    let mut step = BTreeMap::new();

    let root = (sup.init_mem, relabeled.init.clone());
    mem_of.insert(root.clone(), 0);
    order.push(root.clone());
    let mut queue: VecDeque<(usize, String)> = [root].into();
    while let Some((mem, xr)) = queue.pop_front() {
        let m_new = mem_of[&(mem, xr.clone())];
        let x_old = back
            .get(&xr)
            .ok_or_else(|| {
                Error::MalformedSupervisor(format!("state {xr} has no back-image"))
            })?
            .clone();
        let pat = sup.control_pattern(mem, &xr)?.clone();
        pattern.insert((m_new, x_old.clone()), pat);
        for e in relabeled.enabled(&xr) {
            let yr = relabeled.step(&xr, &e).unwrap().clone();
            let m2 = sup.advance(mem, &xr, &e)?;
            let key = (m2, yr.clone());
            let m2_new = *mem_of.entry(key.clone()).or_insert_with(|| {
                order.push(key.clone());
                queue.push_back(key);
                order.len() - 1
            });
            step.insert((m_new, x_old.clone(), e.clone()), m2_new);
        }
    }

    Ok(Supervisor {
        mem_count: order.len(),
        init_mem: 0,
        pattern,
        step,
    })
}

/// Merges behaviorally equivalent memory states by partition refinement.
/// Two memories are merged only when their pattern and update tables agree
/// on every state (including which entries are defined).
pub fn minimize(sup: &Supervisor, machine: &Machine) -> Supervisor {
    let n = sup.mem_count;
    // initial partition: by pattern table
    let mut class: Vec<usize> = {
        let mut sig_to_class: BTreeMap<Vec<(String, BTreeSet<String>)>, usize> =
            BTreeMap::new();
        let mut out = vec![0; n];
        for (m, c) in out.iter_mut().enumerate() {
            let sig: Vec<(String, BTreeSet<String>)> = machine
                .states
                .iter()
                .filter_map(|x| {
                    sup.pattern
                        .get(&(m, x.clone()))
                        .map(|p| (x.clone(), p.clone()))
                })
                .collect();
            let next = sig_to_class.len();
            *c = *sig_to_class.entry(sig).or_insert(next);
        }
        out
    };

    // per-memory behavior signature: (state, event, class of next memory)
    type StepSig = Vec<(String, String, Option<usize>)>;
    loop {
        let mut sig_to_class: BTreeMap<(usize, StepSig), usize> = BTreeMap::new();
        let mut next_class = vec![0; n];
        for m in 0..n {
            let sig: StepSig = machine
                .states
                .iter()
                .flat_map(|x| {
                    machine.alphabet.iter().map(move |e| (x, e))
                })
                .map(|(x, e)| {
                    // memoryless fallback: missing entries stay put
                    let tgt = sup
                        .step
                        .get(&(m, x.clone(), e.clone()))
                        .copied()
                        .or(if sup.mem_count == 1 { Some(m) } else { None });
                    (x.clone(), e.clone(), tgt.map(|t| class[t]))
                })
                .collect();
            let fresh = sig_to_class.len();
            next_class[m] = *sig_to_class
                .entry((class[m], sig))
                .or_insert(fresh);
        }
        if next_class == class {
            break;
        }
        class = next_class;
    }

    // renumber classes so that the initial memory is 0, then by class id
    let count = class.iter().max().map_or(0, |&c| c + 1);
    let mut remap: Vec<Option<usize>> = vec![None; count];
    let mut order = Vec::new();
    remap[class[sup.init_mem]] = Some(0);
    order.push(class[sup.init_mem]);
    for &c in &class {
        if remap[c].is_none() {
            remap[c] = Some(order.len());
            order.push(c);
        }
    }
    let re = |m: usize| remap[class[m]].unwrap();

    let mut pattern = BTreeMap::new();
    for ((m, x), p) in &sup.pattern {
        pattern.insert((re(*m), x.clone()), p.clone());
    }
    let mut step = BTreeMap::new();
    for ((m, x, e), m2) in &sup.step {
        step.insert((re(*m), x.clone(), e.clone()), re(*m2));
    }
    Supervisor {
        mem_count: order.len(),
        init_mem: 0,
        pattern,
        step,
    }
}

/// The worked example's memoryless supervisor:
/// p0 -> {a,c}, p1 -> {b,c}, p2 -> {a,c}.
pub fn three_state_hand_supervisor() -> Supervisor {
    let s = |x: &str| x.to_string();
    let set = |xs: &[&str]| xs.iter().map(|x| x.to_string()).collect();
    Supervisor {
        mem_count: 1,
        init_mem: 0,
        pattern: [
            ((0, s("p0")), set(&["a", "c"])),
            ((0, s("p1")), set(&["b", "c"])),
            ((0, s("p2")), set(&["a", "c"])),
        ]
        .into(),
        step: BTreeMap::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::build_arena;
    use crate::machine::three_state_fixture;
    use crate::obliging::build_reduced_game;
    use crate::parity::solve_zielonka;
    use crate::strategy::is_non_ambiguous;

    fn s(x: &str) -> String {
        x.to_string()
    }

    #[test]
    fn hand_supervisor_is_well_formed() {
        let fx = three_state_fixture();
        let sup = three_state_hand_supervisor();
        sup.validate(&fx.machine).unwrap();
    }

    #[test]
    fn simulate_hand_supervisor() {
        let fx = three_state_fixture();
        let sup = three_state_hand_supervisor();
        let evs: Vec<String> =
            ["c", "a", "b", "a"].iter().map(|e| s(e)).collect();
        let steps = simulate(&sup, &fx.machine, &evs).unwrap();
        assert!(steps.iter().all(|st| st.allowed));
        assert_eq!(steps.last().unwrap().next_state, Some(s("p1")));
        // b at p2 is outside the hand supervisor's pattern {a, c}
        let evs2: Vec<String> =
            ["a", "b", "b"].iter().map(|e| s(e)).collect();
        let blocked2 = simulate(&sup, &fx.machine, &evs2).unwrap();
        assert!(!blocked2[2].allowed);
        // b at p0 is not even enabled; a at p1 is blocked by the pattern
        let blocked = simulate(&sup, &fx.machine, &[s("a"), s("a")]).unwrap();
        assert!(!blocked[1].allowed);
        assert_eq!(blocked.len(), 2);
    }

    #[test]
    fn synthesis_on_fixture_realizable() {
        let fx = three_state_fixture();
        let arena = build_arena(&fx).unwrap();
        let rg = build_reduced_game(&fx, &arena).unwrap();
        let sol = solve_zielonka(&rg.game).unwrap();
        assert!(sol.winning0.contains(&rg.game.init));
        let st = gracious_from_parity(&rg, &sol, &arena).unwrap();
        let st = disambiguate(&st, &arena).unwrap();
        assert!(is_non_ambiguous(&st, &arena, 4).unwrap());
        let sup = supervisor_from_strategy(&st, &arena, &fx.machine).unwrap();
        sup.validate(&fx.machine).unwrap();
        // every pattern keeps the uncontrollable event c
        for ((_, _), pat) in &sup.pattern {
            assert!(pat.contains("c"));
        }
    }

    #[test]
    fn round_trip_hand_supervisor() {
        let fx = three_state_fixture();
        let arena = build_arena(&fx).unwrap();
        let sup = three_state_hand_supervisor();
        let st = strategy_from_supervisor(&sup, &arena, &fx.machine).unwrap();
        // effective pattern at p2 is {a}; at p0 it is {a,c}
        let p2 = arena.q0_index("p2").unwrap();
        let j = st.choose(0, p2).unwrap();
        assert_eq!(arena.q1_label(j), "p2,{a}");
        let back = supervisor_from_strategy(&st, &arena, &fx.machine).unwrap();
        assert_eq!(back.pattern.len(), 3);
        for ((m, x), p) in &back.pattern {
            assert_eq!(sup.control_pattern(*m, x).unwrap(), p);
        }
    }

    #[test]
    fn minimize_merges_equal_memories() {
        let fx = three_state_fixture();
        let sup = three_state_hand_supervisor();
        // duplicate the single memory
        let mut big = sup.clone();
        big.mem_count = 2;
        for ((_, x), p) in sup.pattern.clone() {
            big.pattern.insert((1, x), p);
        }
        for x in ["p0", "p1", "p2"] {
            for e in ["a", "b", "c"] {
                big.step.insert((0, s(x), s(e)), 1);
                big.step.insert((1, s(x), s(e)), 0);
            }
        }
        let min = minimize(&big, &fx.machine);
        assert_eq!(min.mem_count, 1);
        for ((m, x), p) in &min.pattern {
            assert_eq!(*m, 0);
            assert_eq!(sup.control_pattern(0, x).unwrap(), p);
        }
    }

    #[test]
    fn pull_back_identity() {
        let fx = three_state_fixture();
        let back: BTreeMap<String, String> = fx
            .machine
            .states
            .iter()
            .map(|x| (x.clone(), x.clone()))
            .collect();
        let sup = three_state_hand_supervisor();
        let pulled = pull_back(&sup, &back, &fx.machine).unwrap();
        pulled.validate(&fx.machine).unwrap();
        // behavior agrees along a run
        let evs: Vec<String> = ["c", "a", "b", "a"].iter().map(|e| s(e)).collect();
        let a = simulate(&sup, &fx.machine, &evs).unwrap();
        let b = simulate(&pulled, &fx.machine, &evs).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.pattern, y.pattern);
            assert_eq!(x.allowed, y.allowed);
        }
    }
}
