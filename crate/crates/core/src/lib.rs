//! Finite-scale universe constructions for presheaf, sheaf and glued topoi:
//! Hofmann–Streicher universes with realignment, sheafified universes, a
//! bounded small object argument, Artin gluing along the Sierpiński cone, and
//! checkers for the universe axioms.

pub mod corpus;
pub mod error;
pub mod fincat;
pub mod outcome;
pub mod presheaf;
pub mod sample;
pub mod sheaf_universe;
pub mod gluing;
pub mod internal;
pub mod site;
pub mod universe;

pub use error::{Cap, Error, Result};
pub use outcome::{Outcome, Tally};
