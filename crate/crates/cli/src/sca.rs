//! Line-oriented text format for synthesis problems.
//!
//! Sections: `alphabet:`, `uncontrollable:`, `states:`, `init:`, `trans:`
//! (followed by `state event state` lines), then exactly one plant condition
//! (`plant_buechi:` or `plant_streett:`) and one specification condition
//! (`spec_buechi:` or `spec_rabin:`). Pair lists are written
//! `{g1 g2 | r1} ; {g3 | }`. `#` starts a comment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use supcon_core::condition::{Condition, PairList, StateSet};
use supcon_core::machine::{Machine, SynthesisAutomaton};

/// A parsed problem file.
#[derive(Debug, Clone)]
pub struct ScaDocument {
    pub alphabet: BTreeSet<String>,
    pub uncontrollable: BTreeSet<String>,
    pub states: BTreeSet<String>,
    pub init: String,
    pub trans: BTreeMap<(String, String), String>,
    /// Plant liveness, Buechi or Streett form.
    pub plant: Condition,
    /// Specification, Buechi or Rabin form.
    pub spec: Condition,
}

/// A syntax or integrity error with its 1-based source line.
#[derive(Debug)]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.msg)
    }
}

impl std::error::Error for ParseError {}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        msg: msg.into(),
    })
}

const SECTIONS: [&str; 9] = [
    "alphabet:",
    "uncontrollable:",
    "states:",
    "init:",
    "trans:",
    "plant_buechi:",
    "plant_streett:",
    "spec_buechi:",
    "spec_rabin:",
];

/// Parses a pair list `{g.. | r..} ; {..}`; an empty side is allowed.
fn parse_pairs(line: usize, text: &str) -> Result<PairList, ParseError> {
    let mut out = PairList::new();
    for chunk in text.split(';') {
        let chunk = chunk.trim();
        if chunk.is_empty() {
            continue;
        }
        let inner = chunk
            .strip_prefix('{')
            .and_then(|s| s.strip_suffix('}'))
            .ok_or(ParseError {
                line,
                msg: format!("pair `{chunk}` must be braced"),
            })?;
        let (g, r) = inner.split_once('|').ok_or(ParseError {
            line,
            msg: format!("pair `{chunk}` needs a `|` separator"),
        })?;
        let gs: StateSet = g.split_whitespace().map(str::to_string).collect();
        let rs: StateSet = r.split_whitespace().map(str::to_string).collect();
        out.push((gs, rs));
    }
    if out.is_empty() {
        return err(line, "empty pair list");
    }
    Ok(out)
}

fn render_pairs(pairs: &PairList) -> String {
    pairs
        .iter()
        .map(|(g, r)| {
            let gs: Vec<&str> = g.iter().map(String::as_str).collect();
            let rs: Vec<&str> = r.iter().map(String::as_str).collect();
            format!("{{{} | {}}}", gs.join(" "), rs.join(" "))
        })
        .collect::<Vec<_>>()
        .join(" ; ")
}

pub fn parse_sca(text: &str) -> Result<ScaDocument, ParseError> {
    let mut alphabet: Option<(usize, BTreeSet<String>)> = None;
    let mut uncontrollable: Option<(usize, BTreeSet<String>)> = None;
    let mut states: Option<(usize, BTreeSet<String>)> = None;
    let mut init: Option<(usize, String)> = None;
    let mut trans: BTreeMap<(String, String), String> = BTreeMap::new();
    let mut trans_seen = false;
    let mut plant: Option<Condition> = None;
    let mut spec: Option<Condition> = None;
    let mut in_trans = false;

    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let head = line.split_whitespace().next().unwrap();
        if SECTIONS.contains(&head) {
            in_trans = false;
            let rest = line[head.len()..].trim();
            let words =
                || rest.split_whitespace().map(str::to_string).collect::<BTreeSet<_>>();
            let dup = |what: &str| ParseError {
                line: ln,
                msg: format!("duplicate section `{what}`"),
            };
            match head {
                "alphabet:" => {
                    if alphabet.replace((ln, words())).is_some() {
                        return Err(dup(head));
                    }
                }
                "uncontrollable:" => {
                    if uncontrollable.replace((ln, words())).is_some() {
                        return Err(dup(head));
                    }
                }
                "states:" => {
                    if states.replace((ln, words())).is_some() {
                        return Err(dup(head));
                    }
                }
                "init:" => {
                    if rest.split_whitespace().count() != 1 {
                        return err(ln, "`init:` takes exactly one state");
                    }
                    if init.replace((ln, rest.to_string())).is_some() {
                        return Err(dup(head));
                    }
                }
                "trans:" => {
                    if trans_seen {
                        return Err(dup(head));
                    }
                    trans_seen = true;
                    in_trans = true;
                    if !rest.is_empty() {
                        return err(ln, "`trans:` takes no inline content");
                    }
                }
                "plant_buechi:" | "plant_streett:" => {
                    if plant.is_some() {
                        return err(ln, "more than one plant condition");
                    }
                    plant = Some(if head == "plant_buechi:" {
                        Condition::Buechi(words())
                    } else {
                        Condition::Streett(parse_pairs(ln, rest)?)
                    });
                }
                "spec_buechi:" | "spec_rabin:" => {
                    if spec.is_some() {
                        return err(ln, "more than one specification condition");
                    }
                    spec = Some(if head == "spec_buechi:" {
                        Condition::Buechi(words())
                    } else {
                        Condition::Rabin(parse_pairs(ln, rest)?)
                    });
                }
                _ => unreachable!(),
            }
            continue;
        }
        if !in_trans {
            return err(ln, format!("unexpected content `{line}`"));
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return err(ln, format!("transition `{line}` must be `state event state`"));
        }
        let key = (toks[0].to_string(), toks[1].to_string());
        if trans.contains_key(&key) {
            return err(
                ln,
                format!("duplicate transition on ({}, {})", toks[0], toks[1]),
            );
        }
        trans.insert(key, toks[2].to_string());
    }

    let missing = |what: &str| ParseError {
        line: text.lines().count().max(1),
        msg: format!("missing section `{what}`"),
    };
    let alphabet = alphabet.ok_or_else(|| missing("alphabet:"))?.1;
    let uncontrollable = uncontrollable.ok_or_else(|| missing("uncontrollable:"))?.1;
    let states = states.ok_or_else(|| missing("states:"))?.1;
    let init = init.ok_or_else(|| missing("init:"))?.1;
    if !trans_seen {
        return Err(missing("trans:"));
    }
    let plant = plant.ok_or_else(|| missing("plant_buechi: or plant_streett:"))?;
    let spec = spec.ok_or_else(|| missing("spec_buechi: or spec_rabin:"))?;

    let doc = ScaDocument {
        alphabet,
        uncontrollable,
        states,
        init,
        trans,
        plant,
        spec,
    };
    doc.check_integrity()?;
    Ok(doc)
}

impl ScaDocument {
    /// Referential integrity: every name used must be declared.
    fn check_integrity(&self) -> Result<(), ParseError> {
        let bad = |msg: String| ParseError { line: 0, msg };
        for e in &self.uncontrollable {
            if !self.alphabet.contains(e) {
                return Err(bad(format!("uncontrollable event `{e}` not in alphabet")));
            }
        }
        if !self.states.contains(&self.init) {
            return Err(bad(format!("initial state `{}` not declared", self.init)));
        }
        for ((x, e), y) in &self.trans {
            for s in [x, y] {
                if !self.states.contains(s) {
                    return Err(bad(format!("transition state `{s}` not declared")));
                }
            }
            if !self.alphabet.contains(e) {
                return Err(bad(format!("transition event `{e}` not declared")));
            }
        }
        let mut cond_states: Vec<&String> = Vec::new();
        for c in [&self.plant, &self.spec] {
            match c {
                Condition::Buechi(f) => cond_states.extend(f.iter()),
                Condition::Streett(ps) | Condition::Rabin(ps) => {
                    for (g, r) in ps {
                        cond_states.extend(g.iter());
                        cond_states.extend(r.iter());
                    }
                }
                _ => {}
            }
        }
        for s in cond_states {
            if !self.states.contains(s) {
                return Err(bad(format!("condition state `{s}` not declared")));
            }
        }
        Ok(())
    }

    /// The synthesis problem this document denotes: Buechi shorthands are
    /// embedded into the Streett (plant) and Rabin (specification) forms.
    pub fn to_synthesis(&self) -> supcon_core::Result<SynthesisAutomaton> {
        let controllable: BTreeSet<String> = self
            .alphabet
            .difference(&self.uncontrollable)
            .cloned()
            .collect();
        let machine = Machine {
            states: self.states.clone(),
            alphabet: self.alphabet.clone(),
            controllable,
            uncontrollable: self.uncontrollable.clone(),
            init: self.init.clone(),
            trans: self.trans.clone(),
        };
        machine.ensure_valid()?;
        let plant = match &self.plant {
            Condition::Buechi(f) => Condition::buchi_to_streett(f, &self.states)?,
            other => other.clone(),
        };
        let spec = match &self.spec {
            Condition::Buechi(f) => Condition::buchi_to_rabin(f),
            other => other.clone(),
        };
        Ok(SynthesisAutomaton {
            machine,
            plant,
            spec,
        })
    }
}

/// Canonical rendering; `parse_sca` of the output reproduces the document.
pub fn print_sca(doc: &ScaDocument) -> String {
    let words = |s: &BTreeSet<String>| {
        s.iter().map(String::as_str).collect::<Vec<_>>().join(" ")
    };
    let mut out = String::new();
    out.push_str(&format!("alphabet: {}\n", words(&doc.alphabet)));
    out.push_str(&format!("uncontrollable: {}\n", words(&doc.uncontrollable)));
    out.push_str(&format!("states: {}\n", words(&doc.states)));
    out.push_str(&format!("init: {}\n", doc.init));
    out.push_str("trans:\n");
    for ((x, e), y) in &doc.trans {
        out.push_str(&format!("  {x} {e} {y}\n"));
    }
    match &doc.plant {
        Condition::Buechi(f) => out.push_str(&format!("plant_buechi: {}\n", words(f))),
        Condition::Streett(ps) => {
            out.push_str(&format!("plant_streett: {}\n", render_pairs(ps)))
        }
        _ => unreachable!("plant is Buechi or Streett by construction"),
    }
    match &doc.spec {
        Condition::Buechi(f) => out.push_str(&format!("spec_buechi: {}\n", words(f))),
        Condition::Rabin(ps) => {
            out.push_str(&format!("spec_rabin: {}\n", render_pairs(ps)))
        }
        _ => unreachable!("spec is Buechi or Rabin by construction"),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = "\
# three-state plant
alphabet: a b c
uncontrollable: c
states: p0 p1 p2
init: p0
trans:
  p0 a p1
  p0 c p0
  p1 c p0
  p1 b p2
  p2 b p2
  p2 a p1
plant_buechi: p2
spec_buechi: p1
";

    #[test]
    fn parses_fixture() {
        let doc = parse_sca(FIXTURE).unwrap();
        assert_eq!(doc.states.len(), 3);
        assert_eq!(doc.trans.len(), 6);
        assert_eq!(doc.init, "p0");
        let sa = doc.to_synthesis().unwrap();
        assert_eq!(sa.machine, supcon_core::machine::three_state_fixture().machine);
        assert_eq!(sa.plant, supcon_core::machine::three_state_fixture().plant);
        assert_eq!(sa.spec, supcon_core::machine::three_state_fixture().spec);
    }

    #[test]
    fn print_then_parse_is_identity() {
        let doc = parse_sca(FIXTURE).unwrap();
        let text = print_sca(&doc);
        let doc2 = parse_sca(&text).unwrap();
        assert_eq!(print_sca(&doc2), text);
    }

    #[test]
    fn missing_init_names_the_section() {
        let broken = FIXTURE.replace("init: p0\n", "");
        let e = parse_sca(&broken).unwrap_err();
        assert!(e.msg.contains("init:"), "{e}");
    }

    #[test]
    fn empty_rabin_side_parses() {
        let text = FIXTURE.replace("spec_buechi: p1", "spec_rabin: {p1 | }");
        let doc = parse_sca(&text).unwrap();
        match &doc.spec {
            Condition::Rabin(ps) => {
                assert_eq!(ps.len(), 1);
                assert_eq!(ps[0].0, ["p1".to_string()].into());
                assert!(ps[0].1.is_empty());
            }
            other => panic!("expected Rabin, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_transition_rejected() {
        let text = FIXTURE.replace("  p0 a p1\n", "  p0 a p1\n  p0 a p2\n");
        let e = parse_sca(&text).unwrap_err();
        assert!(e.msg.contains("duplicate transition"), "{e}");
        assert_eq!(e.line, 8);
    }

    #[test]
    fn undeclared_names_rejected() {
        let text = FIXTURE.replace("plant_buechi: p2", "plant_buechi: p9");
        assert!(parse_sca(&text).is_err());
        let text = FIXTURE.replace("  p2 a p1\n", "  p2 d p1\n");
        assert!(parse_sca(&text).is_err());
    }
}
