//! Exact solvers for the two-choice network cascade game with myopic and
//! strategic agents, together with schedule optimization and the
//! experiment drivers built on them.

pub mod blockdp;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod game;
pub mod graphs;
pub mod schedulers;

pub use error::{CascadeError, Result};
pub use game::{Choice, GameParams, GameSpec, Mode, Rational, Situation};
