//! Finite cubespaces and nilspaces: constructions, axiom checks, canonical
//! factors, structure groups, fibrations, cocycles and translations.

pub mod cocycle;
pub mod constructions;
pub mod corpus;
pub mod cube;
pub mod cubeset;
pub mod cubespace;
pub mod dynamics;
pub mod error;
pub mod factors;
pub mod fibrations;
pub mod format;
pub mod group;
pub mod guard;
pub mod linalg;
mod orbit;
pub mod relation;
pub mod translations;
pub mod verdict;

pub use error::{Error, Result};
