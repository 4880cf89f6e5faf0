//! Command-line frontend: problem/supervisor file formats and the
//! synth / verify / simulate commands.
//!
//! Exit codes: 0 = success (supervisor written and verified, or check
//! passed), 1 = proven unrealizable or check failed, 2 = input error.

pub mod sca;
pub mod sup;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use supcon_core::machine::SynthesisAutomaton;
use supcon_core::{simulate, synthesize, verify, Lasso, Outcome, Supervisor, Verdict};

#[derive(Parser)]
#[command(name = "supcon", version, about = "Supervisor synthesis for discrete-event plants with liveness assumptions")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Synthesize a supervisor and write it as a .sup file
    Synth {
        /// Problem file (.sca)
        input: PathBuf,
        /// Output supervisor file; defaults to the input with extension .sup
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Print pipeline statistics
        #[arg(long)]
        stats: bool,
        /// Print the control game arena
        #[arg(long)]
        dump_arena: bool,
        /// Print the reduced parity game
        #[arg(long)]
        dump_parity: bool,
        /// Permute tie-breaking edge orders (never changes realizability)
        #[arg(long)]
        seed: Option<u64>,
        /// Check the given supervisor file instead of synthesizing
        #[arg(long, value_name = "SUP")]
        verify_only: Option<PathBuf>,
    },
    /// Check a supervisor file against a problem file
    Verify {
        /// Problem file (.sca)
        input: PathBuf,
        /// Supervisor file (.sup)
        supervisor: PathBuf,
    },
    /// Replay an event sequence through the closed loop
    Simulate {
        /// Problem file (.sca)
        input: PathBuf,
        /// Supervisor file (.sup)
        supervisor: PathBuf,
        /// Events, whitespace-separated or (for one-letter events) adjacent
        events: String,
    },
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNREALIZABLE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

fn load_problem(path: &Path) -> Result<SynthesisAutomaton, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let doc = sca::parse_sca(&text)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    doc.to_synthesis()
        .map_err(|e| format!("{}: {e}", path.display()))
}

fn load_supervisor(path: &Path) -> Result<Supervisor, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    sup::parse_sup(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn render_lasso(l: &Lasso) -> String {
    format!("{} | {}", l.stem.join(" "), l.cycle.join(" "))
}

fn print_verdict(v: &Verdict) {
    let tag = |b: bool| if b { "PASS" } else { "FAIL" };
    print!("nonemptiness:      {}", tag(v.nonempty));
    match &v.nonempty_witness {
        Some(w) => println!("  (witness: {})", render_lasso(w)),
        None => println!(),
    }
    print!("containment:       {}", tag(v.contained));
    match &v.containment_witness {
        Some(w) => println!("  (counterexample: {})", render_lasso(w)),
        None => println!(),
    }
    print!("nonconflicting:    {}", tag(v.nonconflicting));
    match &v.conflict_state {
        Some(x) => println!("  (stuck at: {x})"),
        None => println!(),
    }
    println!("overall:           {}", tag(v.ok()));
}

fn cmd_synth(
    input: &Path,
    output: Option<PathBuf>,
    stats: bool,
    dump_arena: bool,
    dump_parity: bool,
    seed: Option<u64>,
    verify_only: Option<PathBuf>,
) -> i32 {
    let sa = match load_problem(input) {
        Ok(sa) => sa,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };

    if let Some(sup_path) = verify_only {
        let sup = match load_supervisor(&sup_path) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_INPUT;
            }
        };
        return match verify(&sa.machine, &sa.plant, &sa.spec, &sup) {
            Ok(v) => {
                print_verdict(&v);
                if v.ok() {
                    EXIT_OK
                } else {
                    EXIT_UNREALIZABLE
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_INPUT
            }
        };
    }

    let syn = match synthesize(&sa, seed) {
        Ok(s) => s,
        Err(e) => panic!("internal soundness failure: {e}"),
    };
    if stats {
        println!("{}", syn.stats.render());
    }
    if dump_arena {
        println!("{}", syn.arena_dump);
    }
    if dump_parity {
        println!("{}", syn.parity_dump);
    }
    match syn.outcome {
        Outcome::Realizable(sup) => {
            let out_path =
                output.unwrap_or_else(|| input.with_extension("sup"));
            if let Err(e) = fs::write(&out_path, sup::print_sup(&sup)) {
                eprintln!("error: cannot write {}: {e}", out_path.display());
                return EXIT_INPUT;
            }
            println!("realizable: supervisor written to {}", out_path.display());
            EXIT_OK
        }
        Outcome::Unrealizable => {
            println!("unrealizable: no supervisor exists");
            EXIT_UNREALIZABLE
        }
    }
}

fn cmd_verify(input: &Path, supervisor: &Path) -> i32 {
    let (sa, sup) = match (load_problem(input), load_supervisor(supervisor)) {
        (Ok(sa), Ok(sup)) => (sa, sup),
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    match verify(&sa.machine, &sa.plant, &sa.spec, &sup) {
        Ok(v) => {
            print_verdict(&v);
            if v.ok() {
                EXIT_OK
            } else {
                EXIT_UNREALIZABLE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

/// Splits an event string: whitespace-separated tokens, or single letters
/// when the whole string is one undeclared token made of declared letters.
fn split_events(raw: &str, sa: &SynthesisAutomaton) -> Result<Vec<String>, String> {
    let toks: Vec<String> = raw.split_whitespace().map(str::to_string).collect();
    let known = |e: &String| sa.machine.alphabet.contains(e);
    if toks.iter().all(known) {
        return Ok(toks);
    }
    if toks.len() == 1 {
        let chars: Vec<String> =
            toks[0].chars().map(|c| c.to_string()).collect();
        if chars.iter().all(known) {
            return Ok(chars);
        }
    }
    let bad = toks.iter().find(|e| !known(e)).unwrap();
    Err(format!("unknown event `{bad}`"))
}

fn cmd_simulate(input: &Path, supervisor: &Path, events: &str) -> i32 {
    let (sa, sup) = match (load_problem(input), load_supervisor(supervisor)) {
        (Ok(sa), Ok(sup)) => (sa, sup),
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let evs = match split_events(events, &sa) {
        Ok(evs) => evs,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let trace = match simulate(&sup, &sa.machine, &evs) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    for (i, s) in trace.iter().enumerate() {
        let pat: Vec<&str> = s.pattern.iter().map(String::as_str).collect();
        if s.allowed {
            println!(
                "step {}: {} --{}--> {}  (memory {}, pattern {{{}}})",
                i + 1,
                s.state,
                s.event,
                s.next_state.as_deref().unwrap_or("?"),
                s.mem,
                pat.join(" ")
            );
        } else {
            println!(
                "inconsistent at step {}: event {} not possible at {} under pattern {{{}}}",
                i + 1,
                s.event,
                s.state,
                pat.join(" ")
            );
        }
    }
    if trace.iter().all(|s| s.allowed) && trace.len() == evs.len() {
        println!("consistent: all {} events accepted", evs.len());
    }
    EXIT_OK
}

pub fn run(cli: Cli) -> i32 {
    match cli.cmd {
        Command::Synth {
            input,
            output,
            stats,
            dump_arena,
            dump_parity,
            seed,
            verify_only,
        } => cmd_synth(
            &input,
            output,
            stats,
            dump_arena,
            dump_parity,
            seed,
            verify_only,
        ),
        Command::Verify { input, supervisor } => cmd_verify(&input, &supervisor),
        Command::Simulate {
            input,
            supervisor,
            events,
        } => cmd_simulate(&input, &supervisor, &events),
    }
}
