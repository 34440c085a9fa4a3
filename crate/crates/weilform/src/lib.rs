//! Exact computation with finite quadratic modules, their Weil
//! representations, and Jacobi forms of critical weight.
//!
//! The crate computes entirely in cyclotomic fields: generator matrices of
//! Weil representations, invariant subspaces, the critical-weight dimension
//! pipeline, the trace dimension formula, and truncated q-expansions of the
//! classical series (eta, odd thetas, theta blocks, lattice thetas, and the
//! weight-one Eisenstein-integer series), all with exact arithmetic and
//! constructions verified against their defining identities.

pub mod cli;
pub mod config;
pub mod cyclotomic;
pub mod error;
pub mod fqm;
pub mod jacobidim;
pub mod linalg;
pub mod qseries;
pub mod rational;
pub mod verify;
pub mod weilrep;
