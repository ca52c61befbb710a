//! Quasi-conformal isotropisation: Beltrami coefficients, Hilbert and Cauchy
//! transforms, and the Scheme-1 solver.

pub mod beltrami;
mod fft;
pub mod map;
pub mod transforms;

pub use beltrami::{beltrami_coefficient, extend_mu, GridSpec, MuGrid};
pub use map::{
    beltrami_residual, pushforward_tensor, solve_beltrami, CoordinateMap, IdentityMap,
    InitialGuess, QcMap, QcMapInfo, SchemeOptions,
};
pub use transforms::{cauchy_transform, hilbert_transform, CauchyPlan, HilbertPlan};
