//! Finite-section laboratory for frames generated by iterating a pair of
//! commuting operators on a single vector, modelled on quotient modules of
//! the Hardy space over the bidisc.

pub mod batch;
pub mod dynamics;
pub mod error;
pub mod frame;
pub mod hardy;
pub mod inner;
pub mod linalg;
pub mod model;
pub mod runner;
pub mod submodule;

pub use error::{Error, Result};
