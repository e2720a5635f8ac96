//! Combinatorial models of zero-dimensional dynamical systems: graph coverings,
//! ordered Bratteli diagrams with Vershik successors, stationary presentations,
//! substitution reads and array systems.

pub mod bratteli;
pub mod coverings;
pub mod document;
pub mod dot;
pub mod error;
pub mod fixtures;
pub mod graphs;
pub mod orbits;
pub mod report;
pub mod stationary;
pub mod substitution;
pub mod verdict;
pub mod words;

pub use error::{Error, Result};
pub use verdict::Verdict;
