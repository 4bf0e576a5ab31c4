//! Factors: dense tables and their value-keyed automaton form, with the
//! combination and projection operators used by bucket elimination.

mod dafsa_factor;
mod table;
mod value;

use thiserror::Error;

use crate::automata::AutomatonError;

pub use dafsa_factor::{merge_scopes, DafsaFactor, OpContext};
pub use table::{redundancy, TabularFactor};
pub use value::{CombineOp, ProjectOp, Value, ValueKeySet, DEFAULT_EPSILON};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FactorError {
    #[error("scope has {scope} variables but {domains} domains")]
    ScopeLength { scope: usize, domains: usize },
    #[error("scope is not strictly increasing")]
    ScopeNotSorted,
    #[error("variable {var} has an empty domain")]
    EmptyDomain { var: usize },
    #[error("table has {found} values, expected {expected}")]
    TableSize { expected: usize, found: usize },
    #[error("variable {var} has different domains in the two factors")]
    DomainMismatch { var: usize },
    #[error("variable {var} is not in the scope")]
    VariableNotInScope { var: usize },
    #[error("{cells} cells exceed the cap of {cap}")]
    TooLarge { cells: u128, cap: usize },
    #[error("deadline exceeded")]
    Timeout,
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}
