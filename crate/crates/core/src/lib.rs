//! Variational analysis of the Ky Fan k-norm.
//!
//! The crate covers proximal maps of the norm and its conjugate, validation
//! and index bookkeeping of subgradient pairs, first- and second-order
//! directional derivatives of singular values, membership tests for the
//! tangent, lineality and critical cones, the sigma-term, and a set of
//! independent numerical oracles used to cross-check all of the above.

pub mod error;
pub mod spectral;
pub mod norms;
pub mod ge;
pub mod derivatives;
pub mod cones;
pub mod sigma;
pub mod oracles;

pub use error::{Error, Result};
