//! Supervisor synthesis for non-terminating discrete-event plants.
//!
//! The plant is a deterministic finite machine with a controllable /
//! uncontrollable event partition, its live behaviors are given by a
//! Streett condition and the specification by a Rabin condition. Synthesis
//! reduces the control problem to a two-player game whose solution yields a
//! finite-memory supervisor; every result is independently re-verified.

pub mod arena;
pub mod condition;
pub mod error;
pub mod gen;
pub mod machine;
pub mod obliging;
pub mod parity;
pub mod pipeline;
pub mod strategy;
pub mod supervisor;
pub mod verifier;

pub use condition::{Condition, Lasso};
pub use error::{Error, Result};
pub use machine::{Machine, SynthesisAutomaton};
pub use pipeline::{synthesize, Outcome, Stats, Synthesis};
pub use supervisor::{simulate, Supervisor};
pub use verifier::{verify, Verdict};
