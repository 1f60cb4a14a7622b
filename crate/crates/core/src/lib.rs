//! Self-similar profiles for nonlinear diffusion systems.
//!
//! The crate solves `(A(U))'' + (y/2) U' = 0` with prescribed limits at `±∞`, for
//! scalar diffusivities by shooting and for vector flux maps by a Newton solve on a
//! perturbation of a smoothed step. It also reduces reaction-diffusion systems with
//! fast reversible reactions to such equations and tracks relative-entropy decay of
//! the time-dependent problem in scaling variables.

pub mod entropy;
pub mod error;
pub mod flux;
pub mod grid;
pub mod interp;
pub mod linalg;
pub mod profile;
pub mod quad;
pub mod reduction;
pub mod roots;
pub mod scalar;
pub mod vector;

pub use error::{Error, Result};
pub use flux::{
    BoxRegion, ClampedScalar, Constants, Diffusivity, FluxMap, LinearFlux, ScalarAsVector, ScalarDiffusivity,
    ScalarFlux, VectorFluxMap,
};
pub use grid::{BoundaryPair, Grid};
pub use interp::TildeU;
pub use profile::Profile;
