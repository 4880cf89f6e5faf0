//! Independent verification of a supervisor against a plant and
//! specification: closed-loop construction, Streett nonemptiness by
//! recursive component refinement, and an exhaustive cycle-set oracle for
//! small graphs.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::condition::{Condition, Lasso, PairList, StateSet};
use crate::error::{Error, Result};
use crate::machine::Machine;
use crate::supervisor::Supervisor;

/// Finite graph whose nodes carry a machine-state origin used for condition
/// membership (several nodes may share an origin, e.g. closed-loop states).
#[derive(Debug, Clone)]
pub struct CondGraph {
    pub labels: Vec<String>,
    pub origin: Vec<String>,
    pub succ: Vec<Vec<(usize, String)>>,
    pub init: usize,
}

/// A lasso through graph nodes; convertible to a state lasso via origins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphLasso {
    pub stem: Vec<usize>,
    pub cycle: Vec<usize>,
}

impl GraphLasso {
    pub fn to_lasso(&self, g: &CondGraph) -> Lasso {
        Lasso {
            stem: self.stem.iter().map(|&i| g.origin[i].clone()).collect(),
            cycle: self.cycle.iter().map(|&i| g.origin[i].clone()).collect(),
        }
    }
}

impl CondGraph {
    /// The reachable part of a machine as a graph; origins are the states
    /// themselves.
    pub fn from_machine(m: &Machine) -> Result<CondGraph> {
        m.ensure_valid()?;
        let nodes: Vec<String> = m.reachable().into_iter().collect();
        let index: BTreeMap<&String, usize> =
            nodes.iter().enumerate().map(|(i, x)| (x, i)).collect();
        let succ = nodes
            .iter()
            .map(|x| {
                m.enabled(x)
                    .into_iter()
                    .map(|e| {
                        let y = m.step(x, &e).unwrap();
                        (index[y], e)
                    })
                    .collect()
            })
            .collect();
        Ok(CondGraph {
            labels: nodes.clone(),
            origin: nodes.clone(),
            init: index[&m.init],
            succ,
        })
    }

    fn edge(&self, a: usize, b: usize) -> bool {
        self.succ[a].iter().any(|&(t, _)| t == b)
    }

    /// Checks that `stem . cycle^omega` is a path of this graph starting at
    /// the given node.
    pub fn is_valid_lasso(&self, l: &GraphLasso, from: usize) -> bool {
        let seq: Vec<usize> =
            l.stem.iter().chain(l.cycle.iter()).copied().collect();
        if seq.is_empty() || l.cycle.is_empty() || seq[0] != from {
            return false;
        }
        for w in seq.windows(2) {
            if !self.edge(w[0], w[1]) {
                return false;
            }
        }
        self.edge(*l.cycle.last().unwrap(), l.cycle[0])
    }
}

/// Closed loop of a machine and a supervisor: nodes are reachable
/// (machine state, memory) pairs; an edge exists when the event is both
/// enabled and permitted.
pub fn closed_loop(machine: &Machine, sup: &Supervisor) -> Result<CondGraph> {
    machine.ensure_valid()?;
    sup.validate(machine)?;
    let mut labels = Vec::new();
    let mut origin = Vec::new();
    let mut succ: Vec<Vec<(usize, String)>> = Vec::new();
    let mut index: BTreeMap<(String, usize), usize> = BTreeMap::new();

    let root = (machine.init.clone(), sup.init_mem);
    index.insert(root.clone(), 0);
    labels.push(format!("{}#{}", root.0, root.1));
    origin.push(root.0.clone());
    succ.push(Vec::new());
    let mut queue: VecDeque<(String, usize)> = [root].into();
    while let Some((x, m)) = queue.pop_front() {
        let i = index[&(x.clone(), m)];
        let pat = sup.control_pattern(m, &x)?;
        let mut edges = Vec::new();
        for e in machine.enabled(&x) {
            if !pat.contains(&e) {
                continue;
            }
            let y = machine.step(&x, &e).unwrap().clone();
            let m2 = sup.advance(m, &x, &e)?;
            let key = (y.clone(), m2);
            let j = *index.entry(key.clone()).or_insert_with(|| {
                labels.push(format!("{y}#{m2}"));
                origin.push(y.clone());
                succ.push(Vec::new());
                queue.push_back(key);
                labels.len() - 1
            });
            edges.push((j, e));
        }
        succ[i] = edges;
    }
    Ok(CondGraph {
        labels,
        origin,
        succ,
        init: 0,
    })
}

type IndexPairs = Vec<(BTreeSet<usize>, BTreeSet<usize>)>;

/// Converts name-based pairs to node-index pairs via origins.
fn to_index_pairs(g: &CondGraph, pairs: &PairList) -> IndexPairs {
    pairs
        .iter()
        .map(|(gs, rs)| {
            let conv = |set: &StateSet| -> BTreeSet<usize> {
                (0..g.origin.len())
                    .filter(|&i| set.contains(&g.origin[i]))
                    .collect()
            };
            (conv(gs), conv(rs))
        })
        .collect()
}

/// Strongly connected components of the subgraph induced by `nodes`,
/// in a deterministic order.
fn sccs(g: &CondGraph, nodes: &BTreeSet<usize>) -> Vec<BTreeSet<usize>> {
    // iterative Tarjan restricted to `nodes`
    let mut idx: BTreeMap<usize, usize> = BTreeMap::new();
    let mut low: BTreeMap<usize, usize> = BTreeMap::new();
    let mut on_stack: BTreeSet<usize> = BTreeSet::new();
    let mut stack: Vec<usize> = Vec::new();
    let mut out: Vec<BTreeSet<usize>> = Vec::new();
    let mut counter = 0usize;

    for &root in nodes.iter() {
        if idx.contains_key(&root) {
            continue;
        }
        // call stack of (node, next successor position)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        idx.insert(root, counter);
        low.insert(root, counter);
        counter += 1;
        stack.push(root);
        on_stack.insert(root);
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let targets: Vec<usize> = g.succ[v]
                .iter()
                .map(|&(t, _)| t)
                .filter(|t| nodes.contains(t))
                .collect();
            if *pos < targets.len() {
                let w = targets[*pos];
                *pos += 1;
                if let std::collections::btree_map::Entry::Vacant(e) = idx.entry(w) {
                    e.insert(counter);
                    low.insert(w, counter);
                    counter += 1;
                    stack.push(w);
                    on_stack.insert(w);
                    call.push((w, 0));
                } else if on_stack.contains(&w) {
                    let lw = idx[&w];
                    let lv = low[&v];
                    low.insert(v, lv.min(lw));
                }
            } else {
                call.pop();
                if low[&v] == idx[&v] {
                    let mut comp = BTreeSet::new();
                    while let Some(w) = stack.pop() {
                        on_stack.remove(&w);
                        comp.insert(w);
                        if w == v {
                            break;
                        }
                    }
                    out.push(comp);
                }
                if let Some(&mut (u, _)) = call.last_mut() {
                    let lv = low[&v];
                    let lu = low[&u];
                    low.insert(u, lu.min(lv));
                }
            }
        }
    }
    out
}

fn nontrivial(g: &CondGraph, comp: &BTreeSet<usize>) -> bool {
    comp.len() > 1 || {
        let &v = comp.iter().next().unwrap();
        g.edge(v, v)
    }
}

/// All maximal accepting components: recursively deletes the G-states of
/// violated pairs inside each nontrivial component. Every cycle satisfying
/// the Streett pairs lies inside one of the returned components.
fn accepting_components(
    g: &CondGraph,
    pairs: &IndexPairs,
    nodes: &BTreeSet<usize>,
    out: &mut Vec<BTreeSet<usize>>,
) {
    for comp in sccs(g, nodes) {
        if !nontrivial(g, &comp) {
            continue;
        }
        let violated: Vec<usize> = (0..pairs.len())
            .filter(|&i| {
                !pairs[i].0.is_disjoint(&comp) && pairs[i].1.is_disjoint(&comp)
            })
            .collect();
        if violated.is_empty() {
            out.push(comp);
        } else {
            let removed: BTreeSet<usize> = violated
                .iter()
                .flat_map(|&i| pairs[i].0.iter().copied())
                .collect();
            let sub: BTreeSet<usize> =
                comp.difference(&removed).copied().collect();
            if !sub.is_empty() {
                accepting_components(g, pairs, &sub, out);
            }
        }
    }
}

fn bfs_path(
    g: &CondGraph,
    within: &BTreeSet<usize>,
    from: usize,
    to: usize,
) -> Option<Vec<usize>> {
    let mut prev: BTreeMap<usize, usize> = BTreeMap::new();
    let mut queue: VecDeque<usize> = [from].into();
    let mut seen: BTreeSet<usize> = [from].into();
    while let Some(v) = queue.pop_front() {
        for &(t, _) in &g.succ[v] {
            if within.contains(&t) && seen.insert(t) {
                prev.insert(t, v);
                if t == to {
                    let mut path = vec![to];
                    let mut cur = to;
                    while cur != from {
                        cur = prev[&cur];
                        path.push(cur);
                    }
                    path.reverse();
                    return Some(path);
                }
                queue.push_back(t);
            }
        }
    }
    if from == to {
        // a nonempty path from a node to itself needs an explicit cycle
        None
    } else {
        None
    }
}

/// Nonemptiness of the Streett pairs (over origins) from a node: returns a
/// witness lasso whose cycle covers a whole accepting component, or `None`.
pub fn streett_nonempty(
    g: &CondGraph,
    pairs: &PairList,
    from: usize,
) -> Option<GraphLasso> {
    let ipairs = to_index_pairs(g, pairs);
    // restrict to the part reachable from `from`
    let mut reach: BTreeSet<usize> = [from].into();
    let mut queue: VecDeque<usize> = [from].into();
    while let Some(v) = queue.pop_front() {
        for &(t, _) in &g.succ[v] {
            if reach.insert(t) {
                queue.push_back(t);
            }
        }
    }
    let mut comps = Vec::new();
    accepting_components(g, &ipairs, &reach, &mut comps);
    let comp = comps.into_iter().min()?; // deterministic pick

    let s0 = *comp.iter().next().unwrap();
    let stem: Vec<usize> = if s0 == from {
        vec![]
    } else {
        let mut p = bfs_path(g, &reach, from, s0)?;
        p.pop(); // the cycle starts at s0
        p
    };
    // closed walk inside the component visiting every node
    let mut cycle: Vec<usize> = vec![s0];
    let mut cur = s0;
    for &t in comp.iter() {
        if t == s0 {
            continue;
        }
        let p = bfs_path(g, &comp, cur, t).expect("component is strongly connected");
        cycle.extend_from_slice(&p[1..]);
        cur = t;
    }
    if cur != s0 {
        let p = bfs_path(g, &comp, cur, s0).expect("component is strongly connected");
        cycle.extend_from_slice(&p[1..p.len() - 1]);
    } else if comp.len() == 1 && !g.edge(s0, s0) {
        return None; // trivial component cannot carry a cycle
    }
    Some(GraphLasso { stem, cycle })
}

const ORACLE_NODE_LIMIT: usize = 16;

/// Exhaustive oracle: the possible infinite-visit sets are exactly the
/// reachable node subsets whose induced subgraph is strongly connected
/// (with a self-loop when the subset is a singleton). Returns every such
/// subset whose origin set satisfies the condition.
pub fn oracle_accepted_cycle_sets(
    g: &CondGraph,
    cond: &Condition,
    from: usize,
) -> Result<Vec<BTreeSet<usize>>> {
    let n = g.origin.len();
    if n > ORACLE_NODE_LIMIT {
        return Err(Error::SizeGuard {
            what: "cycle-set oracle",
            limit: ORACLE_NODE_LIMIT,
            actual: n,
        });
    }
    let mut reach: BTreeSet<usize> = [from].into();
    let mut queue: VecDeque<usize> = [from].into();
    while let Some(v) = queue.pop_front() {
        for &(t, _) in &g.succ[v] {
            if reach.insert(t) {
                queue.push_back(t);
            }
        }
    }
    let reach_vec: Vec<usize> = reach.iter().copied().collect();

    let mut out = Vec::new();
    for mask in 1u64..(1u64 << reach_vec.len()) {
        let set: BTreeSet<usize> = reach_vec
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &v)| v)
            .collect();
        if set.len() == 1 {
            let &v = set.iter().next().unwrap();
            if !g.edge(v, v) {
                continue;
            }
        } else {
            // strong connectivity of the induced subgraph
            let &v0 = set.iter().next().unwrap();
            let fwd = {
                let mut seen: BTreeSet<usize> = [v0].into();
                let mut q: VecDeque<usize> = [v0].into();
                while let Some(v) = q.pop_front() {
                    for &(t, _) in &g.succ[v] {
                        if set.contains(&t) && seen.insert(t) {
                            q.push_back(t);
                        }
                    }
                }
                seen
            };
            if fwd != set {
                continue;
            }
            let bwd = {
                let mut seen: BTreeSet<usize> = [v0].into();
                loop {
                    let grown: BTreeSet<usize> = set
                        .iter()
                        .copied()
                        .filter(|&v| {
                            seen.contains(&v)
                                || g.succ[v]
                                    .iter()
                                    .any(|&(t, _)| set.contains(&t) && seen.contains(&t))
                        })
                        .collect();
                    if grown == seen {
                        break seen;
                    }
                    seen = grown;
                }
            };
            if bwd != set {
                continue;
            }
        }
        let cycle: Vec<String> =
            set.iter().map(|&i| g.origin[i].clone()).collect();
        if cond.eval_lasso(&Lasso {
            stem: vec![],
            cycle,
        })? {
            out.push(set);
        }
    }
    Ok(out)
}

/// True iff some lasso from `from` satisfies the condition, by the
/// cycle-set oracle.
pub fn oracle_nonempty(g: &CondGraph, cond: &Condition, from: usize) -> Result<bool> {
    Ok(!oracle_accepted_cycle_sets(g, cond, from)?.is_empty())
}

const LASSO_NODE_LIMIT: usize = 8;
const LASSO_BOUND_LIMIT: usize = 5;

/// All closed walks of exactly `len` edges from `at` back to `at`,
/// reported as the intermediate node sequence plus the final return.
fn closed_walks(g: &CondGraph, at: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut walk: Vec<usize> = Vec::new();
    fn go(
        g: &CondGraph,
        home: usize,
        at: usize,
        left: usize,
        walk: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if left == 0 {
            if at == home {
                out.push(walk.clone());
            }
            return;
        }
        for &(t, _) in &g.succ[at] {
            walk.push(t);
            go(g, home, t, left - 1, walk, out);
            walk.pop();
        }
    }
    go(g, at, at, len, &mut walk, &mut out);
    out
}

/// Exhaustive bounded enumerator: every lasso from `from` with at most
/// `bound` stem edges and at most `bound` cycle edges (at least one) that
/// satisfies the condition. Distinct walks through the same nodes count as
/// distinct lassos. Guarded against blow-up.
pub fn lasso_oracle(
    g: &CondGraph,
    cond: &Condition,
    from: usize,
    bound: usize,
) -> Result<Vec<GraphLasso>> {
    let n = g.origin.len();
    if n > LASSO_NODE_LIMIT {
        return Err(Error::SizeGuard {
            what: "lasso oracle nodes",
            limit: LASSO_NODE_LIMIT,
            actual: n,
        });
    }
    if bound > LASSO_BOUND_LIMIT {
        return Err(Error::SizeGuard {
            what: "lasso oracle bound",
            limit: LASSO_BOUND_LIMIT,
            actual: bound,
        });
    }
    // stems: all walks from `from` with at most `bound` edges
    let mut stems: Vec<Vec<usize>> = vec![vec![from]];
    let mut frontier: Vec<Vec<usize>> = vec![vec![from]];
    for _ in 0..bound {
        let mut next = Vec::new();
        for s in &frontier {
            for &(t, _) in &g.succ[*s.last().unwrap()] {
                let mut s2 = s.clone();
                s2.push(t);
                next.push(s2);
            }
        }
        stems.extend(next.iter().cloned());
        frontier = next;
    }
    let mut out = Vec::new();
    for stem in stems {
        let pivot = *stem.last().unwrap();
        for len in 1..=bound {
            for cycle in closed_walks(g, pivot, len) {
                // the cycle part starts at the pivot and omits the return
                let mut c = vec![pivot];
                c.extend_from_slice(&cycle[..cycle.len() - 1]);
                let l = GraphLasso {
                    stem: stem[..stem.len() - 1].to_vec(),
                    cycle: c,
                };
                if cond.eval_lasso(&l.to_lasso(g))? {
                    out.push(l);
                }
            }
        }
    }
    Ok(out)
}

/// Outcome of verifying a supervisor.
#[derive(Debug, Clone)]
pub struct Verdict {
    /// some closed-loop run is plant-live
    pub nonempty: bool,
    /// a plant-live run of the closed loop, when one exists
    pub nonempty_witness: Option<Lasso>,
    /// every plant-live closed-loop run satisfies the specification
    pub contained: bool,
    /// every closed-loop state can continue into a plant-live run
    pub nonconflicting: bool,
    /// a plant-live run violating the specification, when containment fails
    pub containment_witness: Option<Lasso>,
    /// a closed-loop state that blocks or strands plant liveness
    pub conflict_state: Option<String>,
}

impl Verdict {
    pub fn ok(&self) -> bool {
        self.nonempty && self.contained && self.nonconflicting
    }
}

/// Verifies a supervisor: closed-loop nonemptiness and containment of the
/// live behaviors in the specification, and non-conflictingness.
pub fn verify(
    machine: &Machine,
    plant: &Condition,
    spec: &Condition,
    sup: &Supervisor,
) -> Result<Verdict> {
    let plant = plant.to_streett(&machine.state_set())?;
    let spec = spec.to_rabin()?;
    let p_pairs = plant.streett_pairs()?.clone();
    let s_pairs = spec.rabin_pairs()?.clone();
    let g = closed_loop(machine, sup)?;

    // nonemptiness: the closed loop admits a plant-live run (containment
    // below then forces it to satisfy the specification)
    let nonempty_witness =
        streett_nonempty(&g, &p_pairs, g.init).map(|w| w.to_lasso(&g));
    let nonempty = nonempty_witness.is_some();

    // containment: no live run satisfies the dualized specification
    let mut contain_pairs = p_pairs.clone();
    contain_pairs.extend(s_pairs.iter().cloned());
    let containment_witness =
        streett_nonempty(&g, &contain_pairs, g.init).map(|w| w.to_lasso(&g));
    let contained = containment_witness.is_none();

    // non-conflictingness: every node reaches an accepting component of the
    // plant condition (deadlocked nodes trivially fail)
    let ipairs = to_index_pairs(&g, &p_pairs);
    let everything: BTreeSet<usize> = (0..g.origin.len()).collect();
    let mut comps = Vec::new();
    accepting_components(&g, &ipairs, &everything, &mut comps);
    let cores: BTreeSet<usize> = comps.into_iter().flatten().collect();
    let mut can_reach = cores.clone();
    loop {
        let grown: BTreeSet<usize> = everything
            .iter()
            .copied()
            .filter(|&v| {
                can_reach.contains(&v)
                    || g.succ[v].iter().any(|&(t, _)| can_reach.contains(&t))
            })
            .collect();
        if grown == can_reach {
            break;
        }
        can_reach = grown;
    }
    let conflict_state = everything
        .iter()
        .copied()
        .find(|v| !can_reach.contains(v))
        .map(|v| g.labels[v].clone());
    let nonconflicting = conflict_state.is_none();

    Ok(Verdict {
        nonempty,
        nonempty_witness,
        contained,
        nonconflicting,
        containment_witness,
        conflict_state,
    })
}
