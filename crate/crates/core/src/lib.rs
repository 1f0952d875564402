//! Autocorrelation and diffraction of one-dimensional weighted Dirac combs
//! supported on the integers.
//!
//! The crate covers substitution sequences (period doubling, Thue–Morse,
//! generalised Morse, Rudin–Shapiro), periodic combs and random combs. Exact
//! autocorrelation coefficients come from rational recursions; empirical ones
//! from finite windows, and the two are meant to be checked against each other.

pub mod correlation;
pub mod distribution;
pub mod error;
pub mod exact;
pub mod periodic;
pub mod random;
pub mod spectral;
pub mod substitution;
pub mod window;

pub use error::{Error, Result};
