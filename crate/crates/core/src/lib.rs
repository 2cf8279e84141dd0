//! Fourier-sparse Boolean functions: spectra, affine restrictions, folding
//! structure and parity decision tree construction.

pub mod corpus;
pub mod error;
pub mod experiment;
pub mod folding;
pub mod gf2;
pub mod pdt;
pub mod restriction;
pub mod spectral;

pub use error::{Error, Result};
pub use gf2::{Gf2Basis, ParityVector};
pub use restriction::AffineConstraintSystem;
pub use spectral::{FourierSpectrum, Support, TruthTable};
