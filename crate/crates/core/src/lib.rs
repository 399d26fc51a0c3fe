//! Executable checks for the combinatorics of directed function families, the
//! two-sided structure families built from them, and the abstract elementary
//! class they live in.

pub mod aec;
pub mod cli;
pub mod coherent;
pub mod error;
pub mod functions;
pub mod indexing;
pub mod sharp;
pub mod structures;

pub use error::{Error, Result};
