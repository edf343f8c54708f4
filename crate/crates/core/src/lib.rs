//! Finite-field toolkit for permutation polynomials of the form
//! `X + gamma * Tr_{q^n/q}(X^k)`.
//!
//! - [`ffield`]: table-driven arithmetic in F_{p^m}, traces, subgroups.
//! - [`permcheck`]: early-abort bijectivity tests on fields and on mu_d.
//! - [`reductions`]: executable forms of the line, mu-subgroup and n = 2 criteria.
//! - [`ratmaps`]: companion rational maps and polynomial identities.
//! - [`families`]: the nine known families, evaluation and classification.
//! - [`search`]: exhaustive census with orbit reductions and checkpoints.
//! - [`cli`]: the `tracepp` command-line front end.

pub mod cli;
pub mod error;
pub mod families;
pub mod ffield;
pub mod numtheory;
pub mod permcheck;
pub mod poly;
pub mod ratmaps;
pub mod reductions;
pub mod search;

pub use error::{Error, Result};
pub use ffield::{Elem, FieldCtx};
