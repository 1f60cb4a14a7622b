//! Reduction of detailed-balance reaction-diffusion systems to conserved quantities:
//! `u = Qc`, the equilibrium parametrization `c = Ψ(u)`, the reduced flux
//! `A(u) = Q D Ψ(u)`, lifting of profiles and the reaction multipliers.

mod network;
mod psi;
mod reduced;

pub use network::{build_q, Reaction, ReactionNetwork};
pub use psi::{
    psi_general, psi_general_jacobian, psi_three_species, psi_two_reactions, psi_two_species, PsiGeneral,
    ReductionMap, CLIP,
};
pub use reduced::{
    lagrange_multiplier, lift_profile, monotonicity_lemma_check, reduced_flux_map, LiftedProfile, Multipliers,
    ReducedFlux, ReducedScalar, TwoSpeciesMultiplier,
};
