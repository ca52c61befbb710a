//! Anisotropic electrical impedance tomography on the unit disk.

// Negated comparisons are how NaN inputs get rejected throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod forward;
pub mod geometry;
pub mod io;
pub mod phantoms;
pub mod qc;
pub mod recon;

pub use error::{Error, Result};
