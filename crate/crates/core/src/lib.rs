//! Spectral injectivity certificates for polynomial maps, the complex-to-real
//! Keller reduction, collision search, and a path-based mountain-pass solver
//! instrumented with Rayleigh-quotient monitors.

pub mod collide;
pub mod corpus;
pub mod error;
pub mod linalg;
pub mod minimax;
pub mod polymap;
pub mod realify;
pub mod sampling;
pub mod spectra;

pub use error::{Error, Result};
