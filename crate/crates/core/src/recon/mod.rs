//! Calderón-type reconstruction of the scalar factor `a`.

pub mod cgo;
pub mod fhat;
pub mod field;
pub mod metrics;

pub use cgo::{make_cgo_pair, CgoPair};
pub use fhat::{bilinear_form, fhat_grid, inverse_fourier, FhatGrid, InverseSamples, TraceBasis};
pub use field::{
    assemble_tensor, disk_grid, reconstruct, reconstruct_scalar, Calibration, ReconOptions,
    ReconstructedField, ScalarSamples,
};
pub use metrics::{cross_section_metrics, CrossSectionMetrics};
