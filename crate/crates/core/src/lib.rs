//! Learning automata with self-adjusting memory depth.
//!
//! The crate is organised bottom-up:
//!
//! * [`probability`], [`fsla`] and [`automaton`] hold the classical automata:
//!   the Tsetlin `L_{KN,K}` machine, linear reward/penalty VSLA and the
//!   variable-action-set VSLA used as a depth controller.
//! * [`hybrid`] composes them into the symmetric and asymmetric variable-depth
//!   hybrids.
//! * [`environment`] provides stationary, Markov-switching and state-dependent
//!   P-model environments; [`markov`] solves stationary distributions and the
//!   chain-averaged reward each action sees.
//! * [`experiment`] runs seeded trials and writes CSV/JSON results.
//! * [`selfish`] is a proof-of-work mining simulator with a selfish pool, used
//!   to compare fork-choice defenses.

pub mod automaton;
pub mod environment;
pub mod error;
pub mod experiment;
pub mod fsla;
pub mod hybrid;
pub mod markov;
pub mod parallel;
pub mod probability;
pub mod selfish;

pub use error::{Error, Result};

/// The generator every stochastic draw in a trial is taken from.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Builds the per-trial generator for `seed`.
pub fn seeded_rng(seed: u64) -> SimRng {
    use rand::SeedableRng;
    SimRng::seed_from_u64(seed)
}
