//! Synthesis and evaluation of randomized patrolling strategies for fully
//! connected security games.
//!
//! The crate builds factored modular strategies by decomposing a game into
//! basic sets, computes the theoretical protection bounds they are measured
//! against, and evaluates strategies exactly (attacker best response) and
//! empirically (Monte Carlo).

pub mod bounds;
pub mod cli;
pub mod evaluation;
pub mod game;
pub mod synthesis;

pub use bounds::{min_patrollers, protection_upper_bound, BoundSolution};
pub use game::{damage, validate, GameStructure, VertexGroup};
pub use synthesis::{naive_strategy, synthesize, ModularStrategy};
pub use evaluation::{best_response_level, simulate, ProtectionReport};
