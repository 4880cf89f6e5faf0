//! Finite-memory player-0 strategies over an arena, the path/play
//! correspondence, and non-ambiguity.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::arena::Arena;
use crate::error::{Error, Result};

/// Alternating node of a play; even positions are player-0 states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum GameNode {
    P0(usize),
    P1(usize),
}

pub type Play = Vec<GameNode>;

/// Finite-memory strategy for player 0: a choice per (memory, player-0
/// state) and a memory update per observed (player-1 state, player-0
/// successor).
#[derive(Debug, Clone)]
pub struct ArenaStrategy {
    pub mem_count: usize,
    pub init_mem: usize,
    /// (memory, q0) -> chosen q1; the choice must lie in succ0(q0)
    pub choice: BTreeMap<(usize, usize), usize>,
    /// (memory, q1, next q0) -> next memory
    pub update: BTreeMap<(usize, usize, usize), usize>,
}

impl ArenaStrategy {
    /// A memoryless strategy from a per-q0 choice map.
    pub fn memoryless(choice: BTreeMap<usize, usize>) -> ArenaStrategy {
        ArenaStrategy {
            mem_count: 1,
            init_mem: 0,
            choice: choice.into_iter().map(|(q, c)| ((0, q), c)).collect(),
            update: BTreeMap::new(),
        }
    }

    pub fn choose(&self, mem: usize, q0: usize) -> Result<usize> {
        self.choice.get(&(mem, q0)).copied().ok_or_else(|| {
            Error::StrategyUndefined(format!("no choice for memory {mem}, state {q0}"))
        })
    }

    /// Memory after observing a move through `q1` into `q0`. Memoryless
    /// strategies (and missing entries of single-memory strategies) stay put.
    pub fn advance(&self, mem: usize, q1: usize, q0: usize) -> Result<usize> {
        if let Some(&m) = self.update.get(&(mem, q1, q0)) {
            return Ok(m);
        }
        if self.mem_count == 1 {
            return Ok(mem);
        }
        Err(Error::StrategyUndefined(format!(
            "no memory update for memory {mem} through {q1} into {q0}"
        )))
    }

    /// Strategy value on an arbitrary finite play ending in a player-0
    /// state: threads the memory through the observed moves.
    pub fn value_on_play(&self, play: &Play) -> Result<usize> {
        let mut mem = self.init_mem;
        let mut idx = 0;
        while idx + 2 < play.len() {
            let (q1, q0) = match (play[idx + 1], play[idx + 2]) {
                (GameNode::P1(j), GameNode::P0(k)) => (j, k),
                _ => return Err(Error::InvalidPath("play does not alternate".into())),
            };
            mem = self.advance(mem, q1, q0)?;
            idx += 2;
        }
        match play.last() {
            Some(GameNode::P0(q0)) => self.choose(mem, *q0),
            _ => Err(Error::InvalidPath("play must end in a player-0 state".into())),
        }
    }
}

/// All plays of the arena projecting to a given machine path:
/// `Plays(x0) = {x0}` and `Plays(nu x)` extends each play of `nu` by every
/// player-1 state of `Last(nu)` that can reach `x`.
pub fn plays_of_path(path: &[String], arena: &Arena) -> Result<Vec<Play>> {
    if path.is_empty() {
        return Err(Error::InvalidPath("empty path".into()));
    }
    let idx: Vec<usize> = path
        .iter()
        .map(|x| {
            arena
                .q0_index(x)
                .ok_or_else(|| Error::InvalidPath(format!("unknown state {x}")))
        })
        .collect::<Result<_>>()?;
    if idx[0] != arena.init {
        return Err(Error::InvalidPath("path does not start at the initial state".into()));
    }
    let mut plays: Vec<Play> = vec![vec![GameNode::P0(idx[0])]];
    for w in idx.windows(2) {
        let (prev, next) = (w[0], w[1]);
        let mut extended = Vec::new();
        for play in &plays {
            for &j in &arena.succ0[prev] {
                if arena.succ1[j].contains(&next) {
                    let mut p = play.clone();
                    p.push(GameNode::P1(j));
                    p.push(GameNode::P0(next));
                    extended.push(p);
                }
            }
        }
        if extended.is_empty() {
            return Err(Error::InvalidPath(format!(
                "no transition from {} to {}",
                arena.q0_label(prev),
                arena.q0_label(next)
            )));
        }
        plays = extended;
    }
    Ok(plays)
}

/// Projects a play onto its machine path (the player-0 components).
pub fn play_to_path(play: &Play, arena: &Arena) -> Vec<String> {
    play.iter()
        .filter_map(|n| match n {
            GameNode::P0(i) => arena.origin0(*i).cloned(),
            GameNode::P1(_) => None,
        })
        .collect()
}

/// All machine paths of length `<= depth + 1` states, walked over the
/// arena's player-0 projection graph.
pub fn machine_paths(arena: &Arena, depth: usize) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut frontier: Vec<Vec<usize>> = vec![vec![arena.init]];
    out.push(vec![arena.q0_label(arena.init)]);
    for _ in 0..depth {
        let mut next_frontier = Vec::new();
        for path in &frontier {
            let last = *path.last().unwrap();
            let mut targets = BTreeSet::new();
            for &j in &arena.succ0[last] {
                for &k in &arena.succ1[j] {
                    if arena.origin0(k).is_some() {
                        targets.insert(k);
                    }
                }
            }
            for k in targets {
                let mut p = path.clone();
                p.push(k);
                out.push(p.iter().map(|&i| arena.q0_label(i)).collect());
                next_frontier.push(p);
            }
        }
        frontier = next_frontier;
    }
    out
}

/// Checks that the strategy's choices agree on every pair of plays of every
/// machine path up to the given depth.
pub fn is_non_ambiguous(
    strategy: &ArenaStrategy,
    arena: &Arena,
    depth: usize,
) -> Result<bool> {
    for path in machine_paths(arena, depth) {
        let plays = plays_of_path(&path, arena)?;
        let mut first: Option<usize> = None;
        for play in &plays {
            let v = strategy.value_on_play(play)?;
            match first {
                None => first = Some(v),
                Some(f) if f != v => return Ok(false),
                _ => {}
            }
        }
    }
    Ok(true)
}

/// Re-threads a strategy's memory updates through its own previous choice,
/// yielding a non-ambiguous strategy with the same compliant plays.
pub fn disambiguate(strategy: &ArenaStrategy, arena: &Arena) -> Result<ArenaStrategy> {
    let mut choice = BTreeMap::new();
    let mut update = BTreeMap::new();

    // explore (memory, q0) pairs reachable under arbitrary plant moves,
    // advancing memory as if the observed player-1 state were our choice
    let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
    seen.insert((strategy.init_mem, arena.init));
    queue.push_back((strategy.init_mem, arena.init));
    while let Some((mem, q0)) = queue.pop_front() {
        let own = strategy.choose(mem, q0)?;
        choice.insert((mem, q0), own);
        for &j in &arena.succ0[q0] {
            for &k in &arena.succ1[j] {
                // advance through our own choice at q0, regardless of
                // which player-1 state was actually observed; observations
                // impossible under the own choice fall back to the
                // underlying update
                let next = match strategy.advance(mem, own, k) {
                    Ok(m2) => m2,
                    Err(_) => strategy.advance(mem, j, k)?,
                };
                update.insert((mem, j, k), next);
                if arena.origin0(k).is_some() && seen.insert((next, k)) {
                    queue.push_back((next, k));
                }
            }
        }
    }

    Ok(ArenaStrategy {
        mem_count: strategy.mem_count,
        init_mem: strategy.init_mem,
        choice,
        update,
    })
}

/// Bounded enumeration of finite compliant plays (up to `max_len` nodes).
pub fn compliant_plays(
    strategy: &ArenaStrategy,
    arena: &Arena,
    max_len: usize,
) -> Result<BTreeSet<Play>> {
    let mut out: BTreeSet<Play> = BTreeSet::new();
    // frontier holds (play, memory)
    let mut frontier: Vec<(Play, usize)> =
        vec![(vec![GameNode::P0(arena.init)], strategy.init_mem)];
    out.insert(frontier[0].0.clone());
    while let Some((play, mem)) = frontier.pop() {
        if play.len() + 2 > max_len {
            continue;
        }
        let q0 = match play.last() {
            Some(GameNode::P0(i)) => *i,
            _ => unreachable!(),
        };
        let j = strategy.choose(mem, q0)?;
        {
            let mut p = play.clone();
            p.push(GameNode::P1(j));
            out.insert(p.clone());
        }
        for &k in &arena.succ1[j] {
            let mut p = play.clone();
            p.push(GameNode::P1(j));
            p.push(GameNode::P0(k));
            let mem2 = strategy.advance(mem, j, k)?;
            out.insert(p.clone());
            frontier.push((p, mem2));
        }
    }
    Ok(out)
}
