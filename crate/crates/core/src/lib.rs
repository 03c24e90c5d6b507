//! Exact finite-level computations with pseudorepresentations, Cayley-Hamilton
//! algebras, generalized matrix algebras and extension groups with conditions.

pub mod chalg;
pub mod conditions;
pub mod error;
pub mod exactalg;
pub mod extgroups;
pub mod grouprep;
pub mod gma;
pub mod guard;
pub mod pseudorep;
pub mod workbench;

pub use error::{Error, Result};
