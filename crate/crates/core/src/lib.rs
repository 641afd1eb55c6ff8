//! Numerical laboratory for spectral distributions of matrix sequences.
//!
//! The crate builds finite members of structured sequences (Toeplitz, diagonal
//! sampling, Jordan corner constructions, random perturbations), tracks their GLT
//! symbols through sums and products, and measures how far spectra are from one
//! another or from a symbol using the matching distances `d` and `d'`, the
//! approximating-class functional `p` and its relatives.

pub mod distribution;
pub mod error;
pub mod generators;
pub mod glt;
pub mod matching;
pub mod notation;
pub mod perturbation;
pub mod spectral;
pub mod symbolic;

pub use error::{Error, Result};
pub use glt::{MatrixFamily, SeqExpr, SymbolFn};
pub use spectral::{ComplexMatrix, C64};
