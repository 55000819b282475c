use thiserror::Error;

use crate::dsl::{EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("player index {index} out of range for a {n}-player game")]
    PlayerIndex { index: usize, n: usize },

    #[error("player {player} is not in group 1 (group 1 is players 0..{alien})")]
    NotGroup1 { player: usize, alien: usize },

    #[error("strategy {value} of player {player} lies outside [{lo}, {hi}]")]
    Domain {
        player: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("profile has {got} entries, game has {expected} players")]
    ProfileLength { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("objective evaluated to a non-finite value at x = {x}")]
    NonFinite { x: f64 },

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("no fixed point located: {0}")]
    NoFixedPoint(String),

    #[error(
        "alien strategy disagreement: argmin of group-1 payoff {argmin_group1} vs argmax of alien payoff {argmax_alien}"
    )]
    TransferMismatch { argmin_group1: f64, argmax_alien: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    /// Errors that stem from solver behaviour rather than bad input.
    pub fn is_solver_fault(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. }
                | Error::Eval(_)
                | Error::NoFixedPoint(_)
                | Error::TransferMismatch { .. }
        )
    }
}
