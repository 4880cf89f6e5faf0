//! Text format for finite-memory supervisors.
//!
//! `memory:` lists the memory values, `init:` picks the starting one,
//! `pattern m x : e1 e2 ...` gives the control pattern at memory `m` and
//! machine state `x`, and `step m x e -> m'` gives the memory update.
//! Memoryless supervisors may omit the `step` lines. `#` starts a comment.

use std::collections::{BTreeMap, BTreeSet};

use supcon_core::Supervisor;

use crate::sca::ParseError;

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        msg: msg.into(),
    })
}

pub fn parse_sup(text: &str) -> Result<Supervisor, ParseError> {
    let mut mem_count: Option<usize> = None;
    let mut init_mem: Option<usize> = None;
    let mut pattern: BTreeMap<(usize, String), BTreeSet<String>> = BTreeMap::new();
    let mut step: BTreeMap<(usize, String, String), usize> = BTreeMap::new();

    let parse_mem = |ln: usize, tok: &str, bound: usize| -> Result<usize, ParseError> {
        let m: usize = tok
            .parse()
            .map_err(|_| ParseError {
                line: ln,
                msg: format!("`{tok}` is not a memory value"),
            })?;
        if m >= bound {
            return err(ln, format!("memory value {m} out of range"));
        }
        Ok(m)
    };

    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "memory:" => {
                if mem_count.is_some() {
                    return err(ln, "duplicate `memory:`");
                }
                let vals: Vec<usize> = toks[1..]
                    .iter()
                    .map(|t| t.parse())
                    .collect::<Result<_, _>>()
                    .map_err(|_| ParseError {
                        line: ln,
                        msg: "memory values must be numbers".into(),
                    })?;
                let n = vals.len();
                if n == 0 || vals != (0..n).collect::<Vec<_>>() {
                    return err(ln, "`memory:` must list 0 1 .. n-1");
                }
                mem_count = Some(n);
            }
            "init:" => {
                if init_mem.is_some() {
                    return err(ln, "duplicate `init:`");
                }
                if toks.len() != 2 {
                    return err(ln, "`init:` takes exactly one memory value");
                }
                let bound = mem_count
                    .ok_or_else(|| ParseError {
                        line: ln,
                        msg: "`memory:` must come before `init:`".into(),
                    })?;
                init_mem = Some(parse_mem(ln, toks[1], bound)?);
            }
            "pattern" => {
                let bound = mem_count.ok_or_else(|| ParseError {
                    line: ln,
                    msg: "`memory:` must come before `pattern`".into(),
                })?;
                if toks.len() < 4 || toks[3] != ":" {
                    return err(ln, "expected `pattern m x : events...`");
                }
                let m = parse_mem(ln, toks[1], bound)?;
                let x = toks[2].to_string();
                let evs: BTreeSet<String> =
                    toks[4..].iter().map(|s| s.to_string()).collect();
                if pattern.insert((m, x.clone()), evs).is_some() {
                    return err(ln, format!("duplicate pattern for ({}, {x})", toks[1]));
                }
            }
            "step" => {
                let bound = mem_count.ok_or_else(|| ParseError {
                    line: ln,
                    msg: "`memory:` must come before `step`".into(),
                })?;
                if toks.len() != 6 || toks[4] != "->" {
                    return err(ln, "expected `step m x e -> m'`");
                }
                let m = parse_mem(ln, toks[1], bound)?;
                let m2 = parse_mem(ln, toks[5], bound)?;
                let key = (m, toks[2].to_string(), toks[3].to_string());
                if step.insert(key, m2).is_some() {
                    return err(
                        ln,
                        format!("duplicate step for ({} {} {})", toks[1], toks[2], toks[3]),
                    );
                }
            }
            other => return err(ln, format!("unexpected directive `{other}`")),
        }
    }

    let last = text.lines().count().max(1);
    let mem_count = mem_count.ok_or_else(|| ParseError {
        line: last,
        msg: "missing section `memory:`".into(),
    })?;
    let init_mem = init_mem.ok_or_else(|| ParseError {
        line: last,
        msg: "missing section `init:`".into(),
    })?;
    Ok(Supervisor {
        mem_count,
        init_mem,
        pattern,
        step,
    })
}

/// Canonical rendering; `parse_sup` of the output reproduces the supervisor.
pub fn print_sup(sup: &Supervisor) -> String {
    let mut out = String::new();
    let mems: Vec<String> = (0..sup.mem_count).map(|m| m.to_string()).collect();
    out.push_str(&format!("memory: {}\n", mems.join(" ")));
    out.push_str(&format!("init: {}\n", sup.init_mem));
    for ((m, x), evs) in &sup.pattern {
        let es: Vec<&str> = evs.iter().map(String::as_str).collect();
        out.push_str(&format!("pattern {m} {x} : {}\n", es.join(" ")));
    }
    for ((m, x, e), m2) in &sup.step {
        out.push_str(&format!("step {m} {x} {e} -> {m2}\n"));
    }
    out
}
