//! Parity games, a recursive Zielonka solver with strategy extraction, and
//! an exhaustive oracle for small games.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Player {
    Zero,
    One,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Zero => Player::One,
            Player::One => Player::Zero,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PgState {
    pub owner: Player,
    pub color: u32,
    pub succ: Vec<usize>,
    pub label: String,
}

#[derive(Debug, Clone)]
pub struct ParityGame {
    pub states: Vec<PgState>,
    pub init: usize,
}

/// Winning regions with memoryless strategies on the owners' regions.
#[derive(Debug, Clone)]
pub struct ParitySolution {
    pub winning0: BTreeSet<usize>,
    pub winning1: BTreeSet<usize>,
    pub strategy0: Vec<Option<usize>>,
    pub strategy1: Vec<Option<usize>>,
}

impl ParityGame {
    pub fn ensure_total(&self) -> Result<()> {
        for (i, s) in self.states.iter().enumerate() {
            if s.succ.is_empty() {
                return Err(Error::MalformedGame(format!(
                    "state {} ({}) has no successor",
                    i, s.label
                )));
            }
        }
        Ok(())
    }

    pub fn max_color(&self) -> u32 {
        self.states.iter().map(|s| s.color).max().unwrap_or(0)
    }

    /// Permutes successor orderings deterministically from a seed. Regions
    /// are unaffected; only strategy tie-breaking changes.
    pub fn shuffle_edges(&mut self, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for s in &mut self.states {
            s.succ.shuffle(&mut rng);
        }
    }

    /// Debug dump: `state color owner -> successors`, stable ordering.
    pub fn dump(&self) -> String {
        let mut lines: Vec<String> = self
            .states
            .iter()
            .map(|s| {
                let mut succ: Vec<&str> = s
                    .succ
                    .iter()
                    .map(|&t| self.states[t].label.as_str())
                    .collect();
                succ.sort_unstable();
                format!(
                    "{} {} {} -> {}",
                    s.label,
                    s.color,
                    match s.owner {
                        Player::Zero => 0,
                        Player::One => 1,
                    },
                    succ.join(" ; ")
                )
            })
            .collect();
        lines.sort();
        lines.join("\n")
    }
}

/// Attractor of `target` for `player` within `alive`; records the
/// attracting edge for the player's own states.
fn attractor(
    game: &ParityGame,
    alive: &[bool],
    target: &BTreeSet<usize>,
    player: Player,
    strategy: &mut [Option<usize>],
) -> BTreeSet<usize> {
    let n = game.states.len();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, s) in game.states.iter().enumerate() {
        if !alive[i] {
            continue;
        }
        for &t in &s.succ {
            if alive[t] {
                preds[t].push(i);
            }
        }
    }
    let mut out_deg: Vec<usize> = (0..n)
        .map(|i| {
            if alive[i] {
                game.states[i].succ.iter().filter(|&&t| alive[t]).count()
            } else {
                0
            }
        })
        .collect();

    let mut attr: BTreeSet<usize> = target.clone();
    let mut queue: Vec<usize> = target.iter().copied().collect();
    while let Some(v) = queue.pop() {
        for &p in &preds[v] {
            if attr.contains(&p) {
                continue;
            }
            if game.states[p].owner == player {
                if strategy[p].is_none() {
                    strategy[p] = Some(v);
                }
                attr.insert(p);
                queue.push(p);
            } else {
                out_deg[p] -= 1;
                if out_deg[p] == 0 {
                    attr.insert(p);
                    queue.push(p);
                }
            }
        }
    }
    attr
}

fn zielonka(game: &ParityGame, alive: &[bool], sol: &mut ParitySolution) {
    let live: Vec<usize> = (0..game.states.len()).filter(|&i| alive[i]).collect();
    if live.is_empty() {
        return;
    }
    let d = live.iter().map(|&i| game.states[i].color).max().unwrap();
    let player = if d % 2 == 0 { Player::Zero } else { Player::One };

    let top: BTreeSet<usize> = live
        .iter()
        .copied()
        .filter(|&i| game.states[i].color == d)
        .collect();
    let mut attr_strat: Vec<Option<usize>> = vec![None; game.states.len()];
    let attr = attractor(game, alive, &top, player, &mut attr_strat);

    let mut sub_alive = alive.to_vec();
    for &i in &attr {
        sub_alive[i] = false;
    }
    let mut sub_sol = ParitySolution {
        winning0: BTreeSet::new(),
        winning1: BTreeSet::new(),
        strategy0: vec![None; game.states.len()],
        strategy1: vec![None; game.states.len()],
    };
    zielonka(game, &sub_alive, &mut sub_sol);

    let (sub_win_me, sub_win_op) = match player {
        Player::Zero => (&sub_sol.winning0, &sub_sol.winning1),
        Player::One => (&sub_sol.winning1, &sub_sol.winning0),
    };

    if sub_win_op.is_empty() {
        // `player` wins everywhere: substrategy on the subgame, attractor
        // strategy on attr \ top, any live successor on its own top states
        let (win_me, strat_me, strat_op) = match player {
            Player::Zero => (
                &mut sol.winning0,
                &mut sol.strategy0,
                &mut sol.strategy1,
            ),
            Player::One => (
                &mut sol.winning1,
                &mut sol.strategy1,
                &mut sol.strategy0,
            ),
        };
        for &i in &live {
            win_me.insert(i);
        }
        let sub_strat_me = match player {
            Player::Zero => &sub_sol.strategy0,
            Player::One => &sub_sol.strategy1,
        };
        for &i in &live {
            if game.states[i].owner != player {
                continue;
            }
            if sub_win_me.contains(&i) {
                strat_me[i] = sub_strat_me[i];
            } else if top.contains(&i) {
                strat_me[i] = game.states[i]
                    .succ
                    .iter()
                    .copied()
                    .find(|&t| alive[t]);
            } else {
                strat_me[i] = attr_strat[i];
            }
        }
        let _ = strat_op;
    } else {
        // the opponent wins at least its subgame region; peel its attractor
        let opponent = player.opponent();
        let mut op_attr_strat: Vec<Option<usize>> = vec![None; game.states.len()];
        let op_attr = attractor(game, alive, sub_win_op, opponent, &mut op_attr_strat);

        let mut rest_alive = alive.to_vec();
        for &i in &op_attr {
            rest_alive[i] = false;
        }
        let mut rest_sol = ParitySolution {
            winning0: BTreeSet::new(),
            winning1: BTreeSet::new(),
            strategy0: vec![None; game.states.len()],
            strategy1: vec![None; game.states.len()],
        };
        zielonka(game, &rest_alive, &mut rest_sol);

        let (win_op, strat_op, sub_strat_op) = match opponent {
            Player::Zero => (
                &mut sol.winning0,
                &mut sol.strategy0,
                &sub_sol.strategy0,
            ),
            Player::One => (
                &mut sol.winning1,
                &mut sol.strategy1,
                &sub_sol.strategy1,
            ),
        };
        for &i in &op_attr {
            win_op.insert(i);
        }
        for &i in &op_attr {
            if game.states[i].owner != opponent {
                continue;
            }
            if sub_win_op.contains(&i) {
                strat_op[i] = sub_strat_op[i];
            } else {
                strat_op[i] = op_attr_strat[i];
            }
        }
        // merge the rest
        for i in rest_sol.winning0 {
            sol.winning0.insert(i);
        }
        for i in rest_sol.winning1 {
            sol.winning1.insert(i);
        }
        for (i, &live) in rest_alive.iter().enumerate() {
            if live {
                if sol.strategy0[i].is_none() {
                    sol.strategy0[i] = rest_sol.strategy0[i];
                }
                if sol.strategy1[i].is_none() {
                    sol.strategy1[i] = rest_sol.strategy1[i];
                }
            }
        }
    }
}

/// Zielonka's recursive attractor algorithm; exact regions with memoryless
/// strategies. Tie-breaking follows successor order, so outputs are
/// deterministic for a fixed edge ordering.
pub fn solve_zielonka(game: &ParityGame) -> Result<ParitySolution> {
    game.ensure_total()?;
    let n = game.states.len();
    let mut sol = ParitySolution {
        winning0: BTreeSet::new(),
        winning1: BTreeSet::new(),
        strategy0: vec![None; n],
        strategy1: vec![None; n],
    };
    let alive = vec![true; n];
    zielonka(game, &alive, &mut sol);
    debug_assert_eq!(sol.winning0.len() + sol.winning1.len(), n);
    Ok(sol)
}

const BRUTE_FORCE_STATE_LIMIT: usize = 8;
const BRUTE_FORCE_COMBO_LIMIT: usize = 200_000;

/// True iff a cycle with odd maximal color is reachable from `start` in the
/// graph restricted by the given per-state successor choice for `chooser`.
fn has_odd_cycle(
    game: &ParityGame,
    choice: &[Option<usize>],
    start: usize,
    bad_parity: u32,
) -> bool {
    let n = game.states.len();
    let succs = |i: usize| -> Vec<usize> {
        match choice[i] {
            Some(t) => vec![t],
            None => game.states[i].succ.clone(),
        }
    };
    // reachable set from start
    let mut reach = vec![false; n];
    let mut stack = vec![start];
    reach[start] = true;
    while let Some(v) = stack.pop() {
        for t in succs(v) {
            if !reach[t] {
                reach[t] = true;
                stack.push(t);
            }
        }
    }
    // for each state v of the bad parity: cycle through v using colors <= color(v)
    for (v, &reached) in reach.iter().enumerate() {
        if !reached || game.states[v].color % 2 != bad_parity {
            continue;
        }
        let cap = game.states[v].color;
        let mut seen = vec![false; n];
        let mut stack: Vec<usize> = succs(v)
            .into_iter()
            .filter(|&t| game.states[t].color <= cap)
            .collect();
        let mut found = false;
        while let Some(u) = stack.pop() {
            if u == v {
                found = true;
                break;
            }
            if seen[u] {
                continue;
            }
            seen[u] = true;
            for t in succs(u) {
                if game.states[t].color <= cap {
                    stack.push(t);
                }
            }
        }
        if found {
            return true;
        }
    }
    false
}

fn strategy_combinations(
    game: &ParityGame,
    owner: Player,
) -> Result<Vec<Vec<Option<usize>>>> {
    let own: Vec<usize> = (0..game.states.len())
        .filter(|&i| game.states[i].owner == owner)
        .collect();
    let mut combos: usize = 1;
    for &i in &own {
        combos = combos.saturating_mul(game.states[i].succ.len());
        if combos > BRUTE_FORCE_COMBO_LIMIT {
            return Err(Error::SizeGuard {
                what: "brute-force strategy space",
                limit: BRUTE_FORCE_COMBO_LIMIT,
                actual: combos,
            });
        }
    }
    let mut out = Vec::with_capacity(combos);
    let mut idx = vec![0usize; own.len()];
    loop {
        let mut choice = vec![None; game.states.len()];
        for (k, &i) in own.iter().enumerate() {
            choice[i] = Some(game.states[i].succ[idx[k]]);
        }
        out.push(choice);
        // odometer increment
        let mut k = 0;
        loop {
            if k == own.len() {
                return Ok(out);
            }
            idx[k] += 1;
            if idx[k] < game.states[own[k]].succ.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Exhaustive oracle: enumerates all memoryless strategies of each player
/// and checks cycles in the strategy-restricted graph. Exact by memoryless
/// determinacy; guarded to small games.
pub fn solve_bruteforce(game: &ParityGame) -> Result<ParitySolution> {
    game.ensure_total()?;
    let n = game.states.len();
    if n > BRUTE_FORCE_STATE_LIMIT {
        return Err(Error::SizeGuard {
            what: "brute-force parity oracle",
            limit: BRUTE_FORCE_STATE_LIMIT,
            actual: n,
        });
    }

    let mut winning0: BTreeSet<usize> = BTreeSet::new();
    let mut strategy0 = vec![None; n];
    let combos0 = strategy_combinations(game, Player::Zero)?;
    for choice in &combos0 {
        let wins: BTreeSet<usize> = (0..n)
            .filter(|&s| !has_odd_cycle(game, choice, s, 1))
            .collect();
        for &s in &wins {
            winning0.insert(s);
        }
    }
    // a uniform witness strategy exists by memoryless determinacy
    for choice in &combos0 {
        if winning0
            .iter()
            .all(|&s| !has_odd_cycle(game, choice, s, 1))
        {
            strategy0 = choice.clone();
            break;
        }
    }

    let winning1: BTreeSet<usize> =
        (0..n).filter(|i| !winning0.contains(i)).collect();
    let mut strategy1 = vec![None; n];
    let combos1 = strategy_combinations(game, Player::One)?;
    for choice in &combos1 {
        if winning1
            .iter()
            .all(|&s| has_odd_cycle(game, choice, s, 0) || {
                // player 1 wins if some reachable cycle has odd max color
                has_forced_odd(game, choice, s)
            })
        {
            strategy1 = choice.clone();
            break;
        }
    }

    // strategies outside the own winning region are irrelevant
    for i in 0..n {
        if game.states[i].owner == Player::Zero && !winning0.contains(&i) {
            strategy0[i] = None;
        }
        if game.states[i].owner == Player::One && !winning1.contains(&i) {
            strategy1[i] = None;
        }
    }
    Ok(ParitySolution {
        winning0,
        winning1,
        strategy0,
        strategy1,
    })
}

/// With player 1's choice fixed, player 0 resolves the rest: player 1 wins
/// from `s` iff every player-0 resolution yields some odd-dominated cycle,
/// i.e. player 0 has no winning counter-strategy in the restricted game.
fn has_forced_odd(game: &ParityGame, choice1: &[Option<usize>], s: usize) -> bool {
    // restrict player 1 to choice1 and brute-force player 0's answers
    let restricted = ParityGame {
        states: game
            .states
            .iter()
            .enumerate()
            .map(|(i, st)| PgState {
                owner: st.owner,
                color: st.color,
                succ: match (st.owner, choice1[i]) {
                    (Player::One, Some(t)) => vec![t],
                    _ => st.succ.clone(),
                },
                label: st.label.clone(),
            })
            .collect(),
        init: game.init,
    };
    match strategy_combinations(&restricted, Player::Zero) {
        Ok(combos) => combos
            .iter()
            .all(|c0| has_odd_cycle(&restricted, c0, s, 1)),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(owner: Player, color: u32, succ: Vec<usize>) -> PgState {
        PgState {
            owner,
            color,
            succ,
            label: String::new(),
        }
    }

    #[test]
    fn single_even_loop_won_by_zero() {
        let g = ParityGame {
            states: vec![state(Player::Zero, 2, vec![0])],
            init: 0,
        };
        let sol = solve_zielonka(&g).unwrap();
        assert_eq!(sol.winning0, [0].into());
        let brute = solve_bruteforce(&g).unwrap();
        assert_eq!(brute.winning0, [0].into());
    }

    #[test]
    fn single_odd_loop_won_by_one() {
        let g = ParityGame {
            states: vec![state(Player::Zero, 1, vec![0])],
            init: 0,
        };
        let sol = solve_zielonka(&g).unwrap();
        assert_eq!(sol.winning1, [0].into());
        assert_eq!(solve_bruteforce(&g).unwrap().winning1, [0].into());
    }

    #[test]
    fn two_state_alternation() {
        // 0 (owner 0, color 1) <-> 1 (owner 1, color 2); each state may also
        // self-loop. Player 0 escapes to the color-2 cycle.
        let g = ParityGame {
            states: vec![
                state(Player::Zero, 1, vec![0, 1]),
                state(Player::One, 2, vec![0]),
            ],
            init: 0,
        };
        let z = solve_zielonka(&g).unwrap();
        let b = solve_bruteforce(&g).unwrap();
        assert_eq!(z.winning0, b.winning0);
        assert_eq!(z.winning0, [0, 1].into());
    }

    #[test]
    fn dead_state_rejected() {
        let g = ParityGame {
            states: vec![state(Player::Zero, 0, vec![])],
            init: 0,
        };
        assert!(matches!(solve_zielonka(&g), Err(Error::MalformedGame(_))));
    }

    #[test]
    fn oracle_guard_triggers() {
        let states: Vec<PgState> = (0..9)
            .map(|i| state(Player::Zero, 0, vec![(i + 1) % 9]))
            .collect();
        let g = ParityGame { states, init: 0 };
        assert!(matches!(
            solve_bruteforce(&g),
            Err(Error::SizeGuard { .. })
        ));
    }

    /// Restricting to strategy0 on winning0, every reachable cycle must
    /// have even maximal color.
    pub(crate) fn check_strategy0_sound(game: &ParityGame, sol: &ParitySolution) {
        for &s in &sol.winning0 {
            assert!(
                !has_odd_cycle(game, &sol.strategy0, s, 1),
                "strategy0 admits an odd cycle from {s}"
            );
            if game.states[s].owner == Player::Zero {
                let t = sol.strategy0[s].expect("strategy0 undefined on winning0");
                assert!(
                    sol.winning0.contains(&t),
                    "strategy0 leaves the winning region"
                );
            }
        }
    }

    #[test]
    fn strategies_sound_on_small_games() {
        let g = ParityGame {
            states: vec![
                state(Player::Zero, 1, vec![1, 2]),
                state(Player::One, 2, vec![0]),
                state(Player::One, 3, vec![2, 0]),
            ],
            init: 0,
        };
        let z = solve_zielonka(&g).unwrap();
        let b = solve_bruteforce(&g).unwrap();
        assert_eq!(z.winning0, b.winning0);
        check_strategy0_sound(&g, &z);
    }
}
