//! Nash and secure equilibria with finite memory for turn-based
//! multiplayer games with quantitative reachability and safety objectives.
//!
//! The crate builds equilibria in three steps: solve a truncated game by
//! backward induction, cut its outcome into a prefix and a repeatable
//! cycle, and wrap that play in punishment automata. Every result is
//! checked by an exact best-response verifier before it is returned.

pub mod arena;
pub mod attractor;
pub mod automaton;
pub mod equilibrium;
pub mod error;
pub mod random;
pub mod tree_solver;
pub mod verifier;

pub use arena::{
    Cost, CostProfile, GameArena, Lasso, Objective, ObjectiveKind, PlayerId, PlayerSet, Rational,
    Vertex,
};

pub use automaton::{StrategyAutomaton, StrategyProfile};
pub use error::{GameError, Result};
