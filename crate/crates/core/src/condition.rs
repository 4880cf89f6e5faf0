//! Acceptance conditions over state sets and their algebra.
//!
//! A [`Condition`] is interpreted over ultimately periodic paths represented
//! as [`Lasso`]s: the set of states visited infinitely often is exactly the
//! set of states on the cycle.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

pub type StateSet = BTreeSet<String>;
pub type PairList = Vec<(StateSet, StateSet)>;

/// Tagged acceptance condition over the state set of a host structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Condition {
    /// Accepts when some state of the set is visited infinitely often.
    Buechi(StateSet),
    /// Accepts when for some pair (G, R): G is visited infinitely often and
    /// R only finitely often. The empty pair list accepts nothing.
    Rabin(PairList),
    /// Accepts when for every pair (G, R): G is visited only finitely often
    /// or R infinitely often. The empty pair list accepts everything.
    Streett(PairList),
    /// Accepts when the maximal color visited infinitely often is even.
    Parity(BTreeMap<String, u32>),
}

/// Finite representation of an ultimately periodic path: `stem . cycle^omega`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Lasso {
    pub stem: Vec<String>,
    pub cycle: Vec<String>,
}

impl Lasso {
    pub fn new(stem: Vec<String>, cycle: Vec<String>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::InvalidLasso("cycle must be non-empty".into()));
        }
        Ok(Lasso { stem, cycle })
    }

    /// The states on the cycle, i.e. the states visited infinitely often.
    pub fn cycle_set(&self) -> StateSet {
        self.cycle.iter().cloned().collect()
    }
}

fn intersects(a: &StateSet, cycle: &StateSet) -> bool {
    a.iter().any(|s| cycle.contains(s))
}

impl Condition {
    pub fn variant_name(&self) -> &'static str {
        match self {
            Condition::Buechi(_) => "Buechi",
            Condition::Rabin(_) => "Rabin",
            Condition::Streett(_) => "Streett",
            Condition::Parity(_) => "Parity",
        }
    }

    /// All states referenced by the condition.
    pub fn referenced_states(&self) -> StateSet {
        match self {
            Condition::Buechi(f) => f.clone(),
            Condition::Rabin(pairs) | Condition::Streett(pairs) => pairs
                .iter()
                .flat_map(|(g, r)| g.iter().chain(r.iter()))
                .cloned()
                .collect(),
            Condition::Parity(color) => color.keys().cloned().collect(),
        }
    }

    /// Evaluates the condition on an ultimately periodic path.
    pub fn eval_lasso(&self, lasso: &Lasso) -> Result<bool> {
        if lasso.cycle.is_empty() {
            return Err(Error::InvalidLasso("cycle must be non-empty".into()));
        }
        let inf = lasso.cycle_set();
        Ok(match self {
            Condition::Buechi(f) => intersects(f, &inf),
            Condition::Rabin(pairs) => pairs
                .iter()
                .any(|(g, r)| intersects(g, &inf) && !intersects(r, &inf)),
            Condition::Streett(pairs) => pairs
                .iter()
                .all(|(g, r)| !intersects(g, &inf) || intersects(r, &inf)),
            Condition::Parity(color) => {
                let mut max = None;
                for s in &inf {
                    let c = color.get(s).ok_or_else(|| {
                        Error::InvalidLasso(format!("state {s} has no color"))
                    })?;
                    max = Some(max.map_or(*c, |m: u32| m.max(*c)));
                }
                max.is_some_and(|m| m % 2 == 0)
            }
        })
    }

    /// Swaps the Rabin/Streett reading of a pair list. For every lasso
    /// exactly one of `c` and `c.dualize()` evaluates to true.
    pub fn dualize(&self) -> Result<Condition> {
        match self {
            Condition::Rabin(pairs) => Ok(Condition::Streett(pairs.clone())),
            Condition::Streett(pairs) => Ok(Condition::Rabin(pairs.clone())),
            other => Err(Error::ConditionVariant {
                expected: "Rabin or Streett",
                found: other.variant_name(),
            }),
        }
    }

    /// Embeds a Buechi set as the single-pair Streett condition
    /// `{(states, F)}`.
    pub fn buchi_to_streett(f: &StateSet, states: &StateSet) -> Result<Condition> {
        if !f.is_subset(states) {
            return Err(Error::InvalidLasso(
                "Buechi set not contained in host state set".into(),
            ));
        }
        Ok(Condition::Streett(vec![(states.clone(), f.clone())]))
    }

    /// Embeds a Buechi set as the single-pair Rabin condition `{(F, {})}`.
    pub fn buchi_to_rabin(f: &StateSet) -> Condition {
        Condition::Rabin(vec![(f.clone(), StateSet::new())])
    }

    /// Disjunction of two Rabin conditions by pair-list concatenation.
    pub fn union_rabin(a: &Condition, b: &Condition) -> Result<Condition> {
        let (pa, pb) = match (a, b) {
            (Condition::Rabin(pa), Condition::Rabin(pb)) => (pa, pb),
            (Condition::Rabin(_), other) | (other, _) => {
                return Err(Error::ConditionVariant {
                    expected: "Rabin",
                    found: other.variant_name(),
                })
            }
        };
        let mut pairs = pa.clone();
        for p in pb {
            if !pairs.contains(p) {
                pairs.push(p.clone());
            }
        }
        Ok(Condition::Rabin(pairs))
    }

    /// Translates the condition through a state back-map: a new state belongs
    /// to a translated set iff its image under `back` belongs to the original.
    pub fn translate(&self, back: &BTreeMap<String, String>) -> Condition {
        let lift = |set: &StateSet| -> StateSet {
            back.iter()
                .filter(|(_, old)| set.contains(*old))
                .map(|(new, _)| new.clone())
                .collect()
        };
        match self {
            Condition::Buechi(f) => Condition::Buechi(lift(f)),
            Condition::Rabin(pairs) => Condition::Rabin(
                pairs.iter().map(|(g, r)| (lift(g), lift(r))).collect(),
            ),
            Condition::Streett(pairs) => Condition::Streett(
                pairs.iter().map(|(g, r)| (lift(g), lift(r))).collect(),
            ),
            Condition::Parity(color) => Condition::Parity(
                back.iter()
                    .filter_map(|(new, old)| {
                        color.get(old).map(|c| (new.clone(), *c))
                    })
                    .collect(),
            ),
        }
    }

    pub fn streett_pairs(&self) -> Result<&PairList> {
        match self {
            Condition::Streett(p) => Ok(p),
            other => Err(Error::ConditionVariant {
                expected: "Streett",
                found: other.variant_name(),
            }),
        }
    }

    pub fn rabin_pairs(&self) -> Result<&PairList> {
        match self {
            Condition::Rabin(p) => Ok(p),
            other => Err(Error::ConditionVariant {
                expected: "Rabin",
                found: other.variant_name(),
            }),
        }
    }

    /// Normalizes a plant-side condition to Streett form.
    pub fn to_streett(&self, states: &StateSet) -> Result<Condition> {
        match self {
            Condition::Streett(_) => Ok(self.clone()),
            Condition::Buechi(f) => Condition::buchi_to_streett(f, states),
            other => Err(Error::ConditionVariant {
                expected: "Streett or Buechi",
                found: other.variant_name(),
            }),
        }
    }

    /// Normalizes a specification-side condition to Rabin form.
    pub fn to_rabin(&self) -> Result<Condition> {
        match self {
            Condition::Rabin(_) => Ok(self.clone()),
            Condition::Buechi(f) => Ok(Condition::buchi_to_rabin(f)),
            other => Err(Error::ConditionVariant {
                expected: "Rabin or Buechi",
                found: other.variant_name(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(names: &[&str]) -> StateSet {
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
    fn buchi_embeddings() {
        let states = set(&["p0", "p1", "p2"]);
        let st = Condition::buchi_to_streett(&set(&["p2"]), &states).unwrap();
        assert_eq!(
            st,
            Condition::Streett(vec![(states.clone(), set(&["p2"]))])
        );
        let rb = Condition::buchi_to_rabin(&set(&["p1"]));
        assert_eq!(rb, Condition::Rabin(vec![(set(&["p1"]), set(&[]))]));

        // F = states: satisfied by every infinite path over `states`.
        let full = Condition::buchi_to_streett(&states, &states).unwrap();
        assert!(full.eval_lasso(&lasso(&[], &["p0"])).unwrap());
        // F = empty: satisfied by no infinite path.
        let empty = Condition::buchi_to_streett(&set(&[]), &states).unwrap();
        assert!(!empty.eval_lasso(&lasso(&[], &["p0"])).unwrap());
        assert!(!Condition::buchi_to_rabin(&set(&[]))
            .eval_lasso(&lasso(&[], &["p0"]))
            .unwrap());
    }

    #[test]
    fn eval_on_fixture_conditions() {
        let states = set(&["p0", "p1", "p2"]);
        let plant = Condition::buchi_to_streett(&set(&["p2"]), &states).unwrap();
        let spec = Condition::buchi_to_rabin(&set(&["p1"]));

        // cycle {p2}: plant-accepting, spec-violating.
        let l = lasso(&["p0", "p1"], &["p2"]);
        assert!(plant.eval_lasso(&l).unwrap());
        assert!(!spec.eval_lasso(&l).unwrap());

        // cycle {p1,p2} satisfies the union via the second pair.
        let union =
            Condition::union_rabin(&plant.dualize().unwrap(), &spec).unwrap();
        assert!(union.eval_lasso(&lasso(&["p0"], &["p1", "p2"])).unwrap());
    }

    #[test]
    fn union_matches_paper_pairs() {
        let states = set(&["p0", "p1", "p2"]);
        let plant = Condition::buchi_to_streett(&set(&["p2"]), &states).unwrap();
        let spec = Condition::buchi_to_rabin(&set(&["p1"]));
        let union =
            Condition::union_rabin(&plant.dualize().unwrap(), &spec).unwrap();
        assert_eq!(
            union,
            Condition::Rabin(vec![
                (states, set(&["p2"])),
                (set(&["p1"]), set(&[])),
            ])
        );
    }

    #[test]
    fn union_with_empty_rabin_is_neutral() {
        let a = Condition::Rabin(vec![(set(&["x"]), set(&["y"]))]);
        let e = Condition::Rabin(vec![]);
        assert_eq!(Condition::union_rabin(&a, &e).unwrap(), a);
    }

    #[test]
    fn dualize_is_involution_and_rejects_buchi() {
        let c = Condition::Streett(vec![(set(&["a"]), set(&["b"]))]);
        assert_eq!(c.dualize().unwrap().dualize().unwrap(), c);
        assert!(Condition::Buechi(set(&["a"])).dualize().is_err());
        assert!(Condition::Parity(BTreeMap::new()).dualize().is_err());
    }

    #[test]
    fn empty_streett_accepts_everything() {
        let c = Condition::Streett(vec![]);
        assert!(c.eval_lasso(&lasso(&["p0"], &["p1", "p2"])).unwrap());
    }

    #[test]
    fn empty_rabin_accepts_nothing() {
        let c = Condition::Rabin(vec![]);
        assert!(!c.eval_lasso(&lasso(&[], &["p0"])).unwrap());
    }

    #[test]
    fn empty_cycle_rejected() {
        assert!(Lasso::new(vec!["p0".into()], vec![]).is_err());
    }

    #[test]
    fn parity_eval_max_even() {
        let color: BTreeMap<String, u32> =
            [("a".to_string(), 2), ("b".to_string(), 1)].into();
        let c = Condition::Parity(color);
        assert!(c.eval_lasso(&lasso(&[], &["a"])).unwrap());
        assert!(c.eval_lasso(&lasso(&[], &["a", "b"])).unwrap());
        assert!(!c.eval_lasso(&lasso(&["a"], &["b"])).unwrap());
    }
}
