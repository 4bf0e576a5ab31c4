//! Exact MAP and weighted CSP solving by bucket elimination, with every
//! factor stored as value-keyed leveled automata instead of dense tables.
//! Dense-table and exhaustive reference solvers are included for checking.

pub mod automata;
pub mod factor;
pub mod generate;
pub mod io;
pub mod model;
pub mod oracle;
