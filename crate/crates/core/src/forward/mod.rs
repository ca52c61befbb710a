//! Complete Electrode Model forward solver and discrete DN maps.

pub mod cem;
pub mod dn;
pub mod patterns;

pub use cem::{
    assemble_cem_system, element_stiffness, simulate_voltages, solve_forward, CemSolver, CemSystem,
    ForwardSolution, NoiseSpec, VoltageData,
};

pub use dn::{dn_matrix, DnMatrix};
pub use patterns::{trig_current_patterns, CurrentPatternSet};
