//! Complex (Hilbert-augmented) Fourier correlation of unevenly spaced tick
//! data and lead-lag analysis of the resulting matrix.
//!
//! The pipeline runs [`ingest`] → [`estimator`] → [`spectral`] → [`graph`],
//! with [`synthetic`] providing markets of known lead-lag structure and
//! [`pipeline`] orchestrating runs from the command line.

pub mod error;
pub mod estimator;
pub mod graph;
pub mod ingest;
pub mod io;
pub mod matrix;
pub mod numeric;
pub mod pipeline;
pub mod spectral;
pub mod synthetic;

pub use error::{Error, Result};
pub use matrix::ComplexMatrix;
