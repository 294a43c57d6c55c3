//! Hermitian eigenanalysis of the complex correlation matrix.
//!
//! Eigenvalues are sorted largest first and every eigenvector is rotated so
//! its largest-magnitude coefficient is real and positive. Indices in this
//! API are 0-based; the CLI and CSV outputs number components from 1.

mod classify;
mod components;
mod eigen;
mod export;

pub use classify::{
    classify_components, phase_dispersion, ClassifyConfig, ComponentClass, ComponentTag, SectorSummary,
};
pub use components::{principal_component, principal_components, ComplexPrincipalComponent};
pub use eigen::{eig_hermitian, eig_matrix, remove_market_mode, renormalize, EigenDecomposition, HERMITIAN_TOLERANCE};
pub use export::{eigenvalues_to_csv, eigenvectors_to_csv};
