//! Disk meshes, electrode layouts and conductivity tensors.

pub mod electrodes;
pub mod mesh;
pub mod tensor;

pub use electrodes::{place_electrodes, place_electrodes_on, ElectrodeArc, ElectrodeLayout};
pub use mesh::{build_disk_mesh, Mesh};
pub use tensor::{tensor_from_factored, ConductivityField, ScalarField, Tensor2};
