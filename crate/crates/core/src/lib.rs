//! Analysis of Gabor systems `(E_{mb}T_{na}g)` with piecewise-constant windows
//! on rational lattices: correlation functions, Zak-domain frame bounds and
//! duals, convergence of the Walnut series, classification predicates, and a
//! dense discrete oracle for cross-checking.

pub mod classify;
pub mod cli;
pub mod correlations;
pub mod error;
pub mod gallery;
pub mod model;
pub mod oracle;
pub mod walnut;
pub mod zak;
pub mod zakmat;

pub use error::{Error, Result};
