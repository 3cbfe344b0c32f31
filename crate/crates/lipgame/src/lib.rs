//! Analysis and purification of Lipschitz games.
//!
//! A *Lipschitz game* is a finite normal-form game whose Lipschitz constant —
//! the maximal change in any player's payoff when a single opponent switches
//! strategy — is small. Games like this admit pure ε-equilibria, and this
//! crate implements the constructions that produce them, the counterexample
//! families that show the thresholds are tight, and the verification tooling
//! around both.
//!
//! # Modules
//!
//! - [`game_core`] — game representations, Lipschitz/η constants, regret,
//!   best response, pure/mixed ε-equilibrium verification and search
//! - [`purification`] — two-step best response, self-purification sampling
//!   and the concentration-based success certificate
//! - [`anonymous`] — anonymous games, the Lipschitz extension to the simplex,
//!   the auxiliary continuous game and Shapley–Folkman rounding
//! - [`counterexamples`] — Gale–Berlekamp games, mass matching pennies and
//!   the restaurant game
//! - [`replication`] — replicating a base game into `n·L` players and
//!   projecting a pure ε-equilibrium back to a mixed one
//! - [`experiments`] — the named experiment presets behind `lipgame experiment`
//! - [`report`] — the JSON report emitted by the CLI

pub mod anonymous;
pub mod counterexamples;
pub mod error;
pub mod experiments;
pub mod game_core;
pub mod linalg;
pub mod purification;
pub mod replication;
pub mod report;
pub mod rng;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::Error;
pub use game_core::{Budget, Game, GameKind, GameSpec, MixedProfile, PureProfile};

/// Additive tolerance used by every inequality check in equilibrium tests.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Default cap on the number of evaluated cells in exhaustive operations.
pub const DEFAULT_BUDGET: u64 = 10_000_000;
