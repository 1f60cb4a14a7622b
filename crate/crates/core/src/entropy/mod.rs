//! Relative-entropy decay of `u_τ = (A(u))_yy + (y/2) u_y` towards a profile `U`.
//!
//! Provides the entropy densities `E_p` and their glued versions, the relative entropy
//! and Hellinger distance, the flatness conditions of the decay estimates, a
//! semi-implicit scheme for the scalar equation, the moment laws and the linearized
//! operator at `U`.

mod density;
mod evolution;
mod functionals;
mod linearized;

pub use density::EntropyDensity;
pub use evolution::{
    bump, evolve, moment_odes_check, sample, step_moments, step_pde, EvolutionState, EvolveOptions,
    MomentResiduals, Trajectory, TrajectorySample,
};
pub use functionals::{
    decay_rate_fit, entropy_inequality_check, hellinger, hellinger_constant, inequality_ratio, logspace, relative_entropy,
    sigma_check, DecayFit, InequalityMode, InequalityReport, SigmaMode, SigmaReport,
};
pub use linearized::{adjoint_apply, eigen_residuals, linearized_apply, EigenResiduals, EIGEN_WEIGHT_FLOOR};

#[cfg(test)]
mod tests;
