//! End-to-end synthesis pipeline: normalize, build the arena and the
//! reduced parity game, solve, extract a supervisor, and verify it.

use crate::arena::build_arena;
use crate::error::{Error, Result};
use crate::machine::SynthesisAutomaton;
use crate::obliging::{build_reduced_game, SIZE_BOUND_CONSTANT};
use crate::parity::solve_zielonka;
use crate::supervisor::{
    gracious_from_parity, minimize, pull_back, supervisor_from_strategy, Supervisor,
};
use crate::verifier::verify;

#[derive(Debug, Clone, Default)]
pub struct Stats {
    pub machine_states: usize,
    pub relabeled: bool,
    pub arena_q0: usize,
    pub arena_q1: usize,
    pub parity_states: usize,
    pub parity_size_bound: usize,
    pub bound_constant: usize,
    pub parity_max_color: u32,
    pub winning_region: usize,
    pub supervisor_memory: usize,
}

impl Stats {
    pub fn render(&self) -> String {
        format!(
            "machine states:     {}\n\
             relabeled:          {}\n\
             arena states:       {} + {}\n\
             parity states:      {}\n\
             parity size bound:  {}\n\
             bound constant:     {}\n\
             parity max color:   {}\n\
             winning states:     {}\n\
             supervisor memory:  {}",
            self.machine_states,
            self.relabeled,
            self.arena_q0,
            self.arena_q1,
            self.parity_states,
            self.parity_size_bound,
            self.bound_constant,
            self.parity_max_color,
            self.winning_region,
            self.supervisor_memory,
        )
    }
}

#[derive(Debug)]
pub enum Outcome {
    Realizable(Supervisor),
    Unrealizable,
}

#[derive(Debug)]
pub struct Synthesis {
    pub outcome: Outcome,
    pub stats: Stats,
    pub arena_dump: String,
    pub parity_dump: String,
}

/// Runs the full pipeline. The seed only permutes edge orderings, which can
/// change which of several correct supervisors is extracted; the
/// realizability answer is unaffected. Every synthesized supervisor is
/// re-verified before being returned.
pub fn synthesize(sa: &SynthesisAutomaton, seed: Option<u64>) -> Result<Synthesis> {
    sa.machine.ensure_valid()?;
    let (norm, back) = sa.normalize();
    let relabeled = back.iter().any(|(new, old)| new != old);

    let arena = build_arena(&norm)?;
    let mut rg = build_reduced_game(&norm, &arena)?;
    if let Some(seed) = seed {
        rg.game.shuffle_edges(seed);
    }
    let sol = solve_zielonka(&rg.game)?;

    let mut stats = Stats {
        machine_states: sa.machine.reachable().len(),
        relabeled,
        arena_q0: arena.q0.len(),
        arena_q1: arena.q1.len(),
        parity_states: rg.game.states.len(),
        parity_size_bound: rg.size_bound(&norm.machine),
        bound_constant: SIZE_BOUND_CONSTANT,
        parity_max_color: rg.game.max_color(),
        winning_region: sol.winning0.len(),
        supervisor_memory: 0,
    };
    let arena_dump = arena.dump();
    let parity_dump = rg.game.dump();

    if !sol.winning0.contains(&rg.game.init) {
        return Ok(Synthesis {
            outcome: Outcome::Unrealizable,
            stats,
            arena_dump,
            parity_dump,
        });
    }

    let strategy = gracious_from_parity(&rg, &sol, &arena)?;
    let sup = supervisor_from_strategy(&strategy, &arena, &norm.machine)?;
    let sup = if relabeled {
        pull_back(&sup, &back, &norm.machine)?
    } else {
        sup
    };
    let sup = minimize(&sup, &sa.machine);
    stats.supervisor_memory = sup.mem_count;

    let verdict = verify(&sa.machine, &sa.plant, &sa.spec, &sup)?;
    if !verdict.ok() {
        return Err(Error::InternalSoundness(format!(
            "nonempty={} contained={} nonconflicting={} conflict={:?}",
            verdict.nonempty,
            verdict.contained,
            verdict.nonconflicting,
            verdict.conflict_state
        )));
    }

    Ok(Synthesis {
        outcome: Outcome::Realizable(sup),
        stats,
        arena_dump,
        parity_dump,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::three_state_fixture;

    #[test]
    fn fixture_synthesis_realizable_and_verified() {
        let fx = three_state_fixture();
        let syn = synthesize(&fx, None).unwrap();
        match syn.outcome {
            Outcome::Realizable(sup) => {
                assert!(sup.mem_count >= 1);
                sup.validate(&fx.machine).unwrap();
            }
            Outcome::Unrealizable => panic!("fixture must be realizable"),
        }
        assert_eq!(syn.stats.arena_q0, 3);
        assert_eq!(syn.stats.arena_q1, 7);
        assert!(!syn.stats.relabeled);
    }

    #[test]
    fn fully_uncontrollable_fixture_unrealizable() {
        // making every event uncontrollable leaves no way to steer away
        // from the b-loop at p2, so the specification is unenforceable
        let mut fx = three_state_fixture();
        fx.machine.uncontrollable = fx.machine.alphabet.clone();
        fx.machine.controllable.clear();
        let syn = synthesize(&fx, None).unwrap();
        assert!(matches!(syn.outcome, Outcome::Unrealizable));
    }

    #[test]
    fn determinism_without_seed() {
        let fx = three_state_fixture();
        let a = synthesize(&fx, None).unwrap();
        let b = synthesize(&fx, None).unwrap();
        assert_eq!(a.parity_dump, b.parity_dump);
        match (a.outcome, b.outcome) {
            (Outcome::Realizable(x), Outcome::Realizable(y)) => assert_eq!(x, y),
            _ => panic!("expected realizable on both runs"),
        }
    }

    #[test]
    fn seeds_do_not_change_realizability() {
        let fx = three_state_fixture();
        for seed in 0..5 {
            let syn = synthesize(&fx, Some(seed)).unwrap();
            assert!(matches!(syn.outcome, Outcome::Realizable(_)));
        }
    }
}
