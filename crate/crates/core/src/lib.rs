//! Simulation and analysis of the amended EWL quantum Prisoner's Dilemma.
//!
//! * [`cmath`]: complex 2×2 / 4×4 algebra and the protocol operators.
//! * [`engine`]: the algorithmic model from `|CC⟩` to the two card messages.
//! * [`games`]: payoff matrices, PD predicates, the taxi game.
//! * [`equilibrium`]: grid best responses, pure Nash equilibria, Pareto sets.
//! * [`protocol`]: the participation meta-game and the PD type classifier.
//! * [`cli`]: the `aewl` command-line tool.

pub mod cli;
pub mod cmath;
pub mod engine;
pub mod equilibrium;
pub mod error;
pub mod games;
pub mod protocol;

pub use error::{Error, Result};
