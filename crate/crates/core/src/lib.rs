//! Numerical toolkit for non-Hermitian Hamiltonians with an antilinear
//! symmetry: spectrum classification, metric (intertwining) operators,
//! pseudounitary time evolution, and resonance propagators with their
//! time-domain transforms, time delays and time advances.
//!
//! Units: `hbar = 1` throughout, so energies and inverse times share a scale.

pub mod cli;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod linalg;
pub mod metric;
pub mod odes;
pub mod response;
pub(crate) mod serde_util;
pub mod table;
pub mod symmetry;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, EigenSystem, C64};
