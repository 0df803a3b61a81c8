//! Subgame-perfect equilibria in multiplayer parity games.
//!
//! The crate computes the negotiation function on requirements and its least
//! fixed point, whose consistent plays are exactly the outcomes of
//! subgame-perfect equilibria. On top of it sit constrained-existence queries
//! for Nash and subgame-perfect equilibria, LTL verification of equilibrium
//! outcomes, certificate checking via deviation graphs, and generators for
//! the SAT-based hardness gadgets.

pub mod decisions;
pub mod error;
pub mod fixtures;
pub mod game;
pub mod graph;
pub mod lasso;
pub mod ltl;
pub mod negotiation;
pub mod reductions;
pub mod requirements;
pub mod zerosum;

pub use error::{Error, Result};
pub use game::{Game, GameBuilder, PlayerId, VertexId};
pub use lasso::{LassoPlay, PayoffVector};
pub use requirements::{ReqValue, Requirement};
