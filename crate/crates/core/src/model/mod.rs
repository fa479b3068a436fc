//! Timed automaton games: syntax, the `.tg` text format and the concrete
//! move semantics.

mod constraint;
mod game;
mod semantics;
mod tg;

pub use constraint::{parse_constraint, ClockConstraint, ConstraintSyntaxError};
pub use game::{Clock, Edge, Location, Player, QueryState, TimedGame};
pub use semantics::{
    apply_move, elapse, enabled_move, invariant_holds_during, joint_destination, ConcreteState, Move,
    MoveAction, Outcome,
};
pub use tg::{parse_game, parse_rational, write_game};

/// Exact rational time value.
pub type Q = num_rational::BigRational;

/// Errors raised while building, loading or querying a game.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("undeclared location '{0}'")]
    UndeclaredLocation(String),
    #[error("undeclared clock '{0}'")]
    UndeclaredClock(String),
    #[error("duplicate declaration of '{0}'")]
    Duplicate(String),
    #[error("location '{location}' has two edges labelled '{action}'")]
    DuplicateEdge { location: String, action: String },
    #[error("action '{0}' is used by both players")]
    SharedAction(String),
    #[error("parity {0} out of range")]
    ParityOutOfRange(u64),
    #[error("valuation has no value for clock index {0}")]
    MissingClock(usize),
    #[error("state {0} violates the invariant of its location")]
    InvariantViolated(String),
    #[error("negative clock value in state {0}")]
    NegativeValue(String),
    #[error("a constant compared with clock '{0}' exceeds its ceiling")]
    ConstantAboveCeiling(String),
    #[error("illegal move: {0}")]
    IllegalMove(String),
}
