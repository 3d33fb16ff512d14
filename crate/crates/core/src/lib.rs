//! Fraïssé sequences in categories, modelled over finite structures.
//!
//! Objects are finite structures, arrows are maps between them, and every
//! infinitary notion is checked on finite prefixes up to a size bound.

pub mod category;
pub mod cli;
pub mod concrete;
pub mod error;
pub mod generic;
pub mod io;
pub mod morphism;
pub mod normed;
pub mod properties;
pub mod retracts;
pub mod sequences;
pub mod structure;
pub mod trees;

pub use category::{Category, FiniteCategory, Op, Opposite};
pub use concrete::{ArrowClass, Concrete};
pub use error::{Error, Result};
pub use morphism::Morphism;
pub use structure::{FinStructure, Graph, Kind, Payload};
