//! Maximin/minimax strategies, symmetric fixed points and Nash equilibria
//! for n-player zero-sum games in which every player but one (the alien)
//! is symmetric.

pub mod cli;
pub mod config;
pub mod cournot;
pub mod dsl;
pub mod equilibrium;
pub mod error;
pub mod game;
pub mod minimax;
pub mod report;
pub mod run;
pub mod scalar;

pub use error::{Error, Result};
pub use game::{evaluate_payoff, GameDefinition, StrategyInterval, StrategyProfile};
pub use scalar::OptResult;
