//! Minimum-energy broadcast range assignment on random grid networks.

pub mod algorithms;
pub mod error;
pub mod grid;
pub mod protocol;
pub mod range;

pub use error::{Error, Result};
pub mod bench;
pub mod bounds;

#[cfg(test)]
mod proptests;
