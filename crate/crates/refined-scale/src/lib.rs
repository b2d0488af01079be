//! Refined Sobolev scales H^{s,phi} and Petrovskii-elliptic pseudodifferential
//! systems on the flat torus, with spectral Galerkin experiments for the
//! Fredholm property, a priori estimates, embeddings, and regularity lifting.

pub mod error;
pub mod fredholm_analysis;
pub mod pdo_calculus;
pub mod refined_spaces;
pub mod regularity;
pub mod slowly_varying;

pub use error::{Error, Result};
pub use refined_spaces::{FourierField, ManifoldSpec, Mode, RefinedIndex};
pub use slowly_varying::SlowlyVaryingFunction;
