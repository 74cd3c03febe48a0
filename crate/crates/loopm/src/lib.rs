//! Exact algebraic analysis of classical and probabilistic while-loops:
//! closed forms for (moments of) loop variables, strongest polynomial
//! invariants, parameter sensitivities, and solvable-loop synthesis for
//! loops with non-linear cyclic dependencies.

pub mod algebra;
pub mod cli;
pub mod error;
pub mod frontend;
pub mod invariants;
pub mod limits;
pub mod moments;
pub mod recurrences;
pub mod sensitivity;
pub mod simulator;
pub mod solver;
pub mod unsolvable;

pub use error::{Error, Result};
pub use limits::Limits;
