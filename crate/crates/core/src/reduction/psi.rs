use nalgebra::{DMatrix, DVector};

use super::network::{build_q, ReactionNetwork};
use crate::error::{Error, Result};
use crate::roots::brent;

/// Coordinates within this distance below zero are treated as zero.
pub const CLIP: f64 = 1e-14;

fn check_nonnegative(u: &[f64]) -> Result<bool> {
    if u.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("reduced coordinates"));
    }
    if let Some(x) = u.iter().find(|&&x| x < -CLIP) {
        return Err(Error::OutsideDomain(format!("coordinate {x} is negative")));
    }
    Ok(u.iter().any(|&x| x < 0.0))
}

/// `s(u) = √((1+u₁+u₂)² - 4u₁u₂)`, continued by `1 + u₁ + u₂` when a coordinate is
/// nonpositive, and its gradient.
pub(crate) fn s_three(u1: f64, u2: f64) -> (f64, f64, f64) {
    if u1 <= 0.0 || u2 <= 0.0 {
        return (1.0 + u1 + u2, 1.0, 1.0);
    }
    let s = ((1.0 + u1 + u2).powi(2) - 4.0 * u1 * u2).sqrt();
    (s, (1.0 + u1 - u2) / s, (1.0 + u2 - u1) / s)
}

/// Equilibrium of `X₃ ⇌ X₁ + X₂` with conserved `u = (c₁ + c₃, c₂ + c₃)`.
pub fn psi_three_species(u: [f64; 2]) -> Result<[f64; 3]> {
    check_nonnegative(&u)?;
    let (u1, u2) = (u[0].max(0.0), u[1].max(0.0));
    Ok(psi_three_raw(u1, u2))
}

pub(crate) fn psi_three_raw(u1: f64, u2: f64) -> [f64; 3] {
    let (s, _, _) = s_three(u1, u2);
    // c₃ = (1+u₁+u₂-s)/2 = 2u₁u₂/(1+u₁+u₂+s) without cancellation.
    let c3 = if u1 > 0.0 && u2 > 0.0 { 2.0 * u1 * u2 / (1.0 + u1 + u2 + s) } else { 0.5 * (1.0 + u1 + u2 - s) };
    [u1 - c3, u2 - c3, c3]
}

pub(crate) fn psi_three_jacobian(u1: f64, u2: f64) -> DMatrix<f64> {
    let (_, s1, s2) = s_three(u1, u2);
    DMatrix::from_row_slice(
        3,
        2,
        &[
            0.5 * (1.0 + s1),
            0.5 * (s2 - 1.0),
            0.5 * (s1 - 1.0),
            0.5 * (1.0 + s2),
            0.5 * (1.0 - s1),
            0.5 * (1.0 - s2),
        ],
    )
}

/// `σ(u) = (√(1+16u) - 1)/8`, written as `2u/(√(1+16u) + 1)`.
pub(crate) fn sigma(u: f64) -> f64 {
    2.0 * u / ((1.0 + 16.0 * u).sqrt() + 1.0)
}

/// Equilibrium of `2X₁ ⇌ X₂ ⇌ X₃` with conserved `u = c₁ + 2c₂ + 2c₃`.
pub fn psi_two_reactions(u: f64) -> Result<[f64; 3]> {
    check_nonnegative(&[u])?;
    let u = u.max(0.0);
    let s = sigma(u);
    let rest = (u - s) / 4.0;
    Ok([s, rest, rest])
}

/// `dΨ/du` for the two-reaction network, `σ' = (1+16u)^{-1/2}`.
pub(crate) fn psi_two_reactions_prime(u: f64) -> [f64; 3] {
    let sp = if u <= 0.0 { 1.0 } else { 1.0 / (1.0 + 16.0 * u).sqrt() };
    [sp, (1.0 - sp) / 4.0, (1.0 - sp) / 4.0]
}

/// Solves `βc₁ + γc₂ = u` with `c₁^γ = c₂^β`.
pub fn psi_two_species(beta: f64, gamma: f64, u: f64) -> Result<[f64; 2]> {
    if !(beta > 0.0 && gamma > 0.0 && beta.is_finite() && gamma.is_finite()) {
        return Err(Error::InvalidInput(format!("exponents must be positive, got {beta}, {gamma}")));
    }
    check_nonnegative(&[u])?;
    let u = u.max(0.0);
    if beta == gamma {
        return Ok([u / (beta + gamma), u / (beta + gamma)]);
    }
    if u == 0.0 {
        return Ok([0.0, 0.0]);
    }
    // Parametrize by the species with exponent ratio ≥ 1 so the map stays well scaled:
    // c₂ = c₁^{γ/β}, or equivalently c₁ = c₂^{β/γ}.
    let (a, b, r, swap) = if gamma >= beta {
        (beta, gamma, gamma / beta, false)
    } else {
        (gamma, beta, beta / gamma, true)
    };
    // a x + b x^r = u, increasing in x ≥ 0.
    let f = |x: f64| a * x + b * x.powf(r) - u;
    let hi = u / a;
    let mut x = if f(hi) <= 0.0 {
        hi
    } else {
        brent(f, 0.0, hi, 1e-15 * hi, 200)?
    };
    for _ in 0..3 {
        let fp = a + b * r * x.powf(r - 1.0);
        let step = f(x) / fp;
        if !step.is_finite() {
            break;
        }
        x = (x - step).clamp(0.0, hi);
    }
    let y = x.powf(r);
    Ok(if swap { [y, x] } else { [x, y] })
}

/// `dΨ/du` for the two-species network at `c = Ψ(u)`.
pub(crate) fn psi_two_species_prime(beta: f64, gamma: f64, c: [f64; 2]) -> [f64; 2] {
    if beta == gamma {
        let v = 1.0 / (beta + gamma);
        return [v, v];
    }
    if gamma > beta {
        let r = gamma / beta;
        let d1 = 1.0 / (beta + gamma * r * c[0].powf(r - 1.0));
        [d1, r * c[0].powf(r - 1.0) * d1]
    } else {
        let r = beta / gamma;
        let d2 = 1.0 / (gamma + beta * r * c[1].powf(r - 1.0));
        [r * c[1].powf(r - 1.0) * d2, d2]
    }
}

/// Result of the constrained entropy minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiGeneral {
    pub c: Vec<f64>,
    /// Dual variables `μ` with `log(c/w) = Qᵀμ`.
    pub mu: Vec<f64>,
    pub iterations: usize,
    /// True when some coordinate of `u` was clipped to zero or some `c_i` underflowed.
    pub clipped: bool,
}

/// Minimizes `Σ w_i λ_B(c_i/w_i)` subject to `Qc = u` by Newton on the dual
/// `μ ↦ Σ w_i exp((Qᵀμ)_i) - μ·u`, whose gradient is `Q(w ⊙ exp(Qᵀμ)) - u`.
pub fn psi_general(network: &ReactionNetwork, q: &DMatrix<f64>, u: &[f64]) -> Result<PsiGeneral> {
    let m = q.nrows();
    let n = network.species();
    if q.ncols() != n || u.len() != m {
        return Err(Error::InvalidInput(format!(
            "Q is {}x{}, network has {n} species, u has {} entries",
            q.nrows(),
            q.ncols(),
            u.len()
        )));
    }
    let mut clipped = check_nonnegative(u)?;
    let u = DVector::from_iterator(m, u.iter().map(|x| x.max(0.0)));
    let w = DVector::from_column_slice(network.equilibrium());
    let scale = 1.0 + u.amax();
    if u.amax() == 0.0 {
        return Ok(PsiGeneral { c: vec![0.0; n], mu: vec![f64::NEG_INFINITY; m], iterations: 0, clipped });
    }
    let conc = |mu: &DVector<f64>| -> DVector<f64> {
        let e = q.transpose() * mu;
        DVector::from_iterator(n, (0..n).map(|i| w[i] * e[i].exp()))
    };
    let dual = |mu: &DVector<f64>| conc(mu).sum() - mu.dot(&u);
    let mut mu = DVector::zeros(m);
    for it in 0..200 {
        let c = conc(&mu);
        let grad = q * &c - &u;
        if grad.amax() <= 1e-13 * scale {
            clipped |= c.iter().any(|&x| x == 0.0);
            return Ok(PsiGeneral { c: c.iter().copied().collect(), mu: mu.iter().copied().collect(), iterations: it, clipped });
        }
        let hess = q * DMatrix::from_diagonal(&c) * q.transpose();
        let step = hess
            .clone()
            .cholesky()
            .map(|ch| ch.solve(&grad))
            .or_else(|| hess.lu().solve(&grad))
            .ok_or_else(|| Error::OutsideDomain("singular dual Hessian".into()))?;
        let f0 = dual(&mu);
        let slope = -grad.dot(&step);
        let mut t = 1.0;
        loop {
            let trial = &mu - &step * t;
            let f1 = dual(&trial);
            // Near the solution the decrease of the dual drops below its roundoff, so a
            // step that shrinks the gradient is accepted as well.
            let shrinks = || (q * conc(&trial) - &u).amax() < 0.5 * grad.amax();
            if f1.is_finite() && (f1 <= f0 + 1e-4 * t * slope || shrinks()) {
                mu = trial;
                break;
            }
            t *= 0.5;
            if t < 1e-12 {
                // The dual no longer decreases in floating point.
                if grad.amax() <= 1e-11 * scale {
                    clipped |= c.iter().any(|&x| x == 0.0);
                    return Ok(PsiGeneral { c: c.iter().copied().collect(), mu: mu.iter().copied().collect(), iterations: it, clipped });
                }
                return Err(Error::OutsideDomain(format!("dual Newton stalled for u = {:?}", u.as_slice())));
            }
        }
    }
    Err(Error::OutsideDomain(format!("dual Newton did not converge for u = {:?}", u.as_slice())))
}

/// `DΨ(u) = C Qᵀ (Q C Qᵀ)^{-1}` with `C = diag(c)`, from differentiating
/// `log(c/w) = Qᵀμ` and `Qc = u`.
pub fn psi_general_jacobian(q: &DMatrix<f64>, c: &[f64]) -> DMatrix<f64> {
    let cd = DMatrix::from_diagonal(&DVector::from_column_slice(c));
    let cq = &cd * q.transpose();
    let g = q * &cq;
    match g.clone().try_inverse() {
        Some(inv) => cq * inv,
        None => DMatrix::from_element(c.len(), q.nrows(), f64::NAN),
    }
}

/// Explicit or general equilibrium parametrization together with its `Q`.
#[derive(Debug, Clone, PartialEq)]
pub enum ReductionMap {
    /// `γ X₁ ⇌ β X₂`, `Q = (β γ)`.
    TwoSpecies { beta: f64, gamma: f64 },
    /// `X₃ ⇌ X₁ + X₂`, `Q = [[1,0,1],[0,1,1]]`.
    ThreeSpecies,
    /// `2X₁ ⇌ X₂ ⇌ X₃`, `Q = (1 2 2)`.
    TwoReactions,
    /// Any detailed-balance network, solved by the dual Newton iteration.
    General { network: ReactionNetwork, q: DMatrix<f64> },
}

impl ReductionMap {
    pub fn general(network: ReactionNetwork) -> Result<Self> {
        let q = build_q(&network)?;
        Ok(Self::General { network, q })
    }

    pub fn label(&self) -> String {
        match self {
            Self::TwoSpecies { beta, gamma } => format!("two_species({beta},{gamma})"),
            Self::ThreeSpecies => "three_species".into(),
            Self::TwoReactions => "two_reactions".into(),
            Self::General { .. } => "general".into(),
        }
    }

    pub fn q(&self) -> DMatrix<f64> {
        match self {
            Self::TwoSpecies { beta, gamma } => DMatrix::from_row_slice(1, 2, &[*beta, *gamma]),
            Self::ThreeSpecies => DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0]),
            Self::TwoReactions => DMatrix::from_row_slice(1, 3, &[1.0, 2.0, 2.0]),
            Self::General { q, .. } => q.clone(),
        }
    }

    /// Number of conserved coordinates.
    pub fn reduced_dim(&self) -> usize {
        match self {
            Self::TwoSpecies { .. } | Self::TwoReactions => 1,
            Self::ThreeSpecies => 2,
            Self::General { q, .. } => q.nrows(),
        }
    }

    pub fn species(&self) -> usize {
        match self {
            Self::TwoSpecies { .. } => 2,
            Self::ThreeSpecies | Self::TwoReactions => 3,
            Self::General { q, .. } => q.ncols(),
        }
    }

    /// The network the map parametrizes; explicit maps need integer exponents.
    pub fn network(&self) -> Result<ReactionNetwork> {
        match self {
            Self::TwoSpecies { beta, gamma } => {
                if beta.fract() != 0.0 || gamma.fract() != 0.0 {
                    return Err(Error::InvalidInput("non-integer exponents have no network".into()));
                }
                ReactionNetwork::two_species(*beta as u32, *gamma as u32)
            }
            Self::ThreeSpecies => Ok(ReactionNetwork::three_species()),
            Self::TwoReactions => Ok(ReactionNetwork::two_reactions()),
            Self::General { network, .. } => Ok(network.clone()),
        }
    }

    /// `Ψ(u)` and whether a coordinate was clipped to the boundary of the domain.
    pub fn psi(&self, u: &[f64]) -> Result<(Vec<f64>, bool)> {
        if u.len() != self.reduced_dim() {
            return Err(Error::InvalidInput(format!("expected {} coordinates", self.reduced_dim())));
        }
        let clipped = check_nonnegative(u)?;
        Ok(match self {
            Self::TwoSpecies { beta, gamma } => (psi_two_species(*beta, *gamma, u[0])?.to_vec(), clipped),
            Self::ThreeSpecies => (psi_three_species([u[0], u[1]])?.to_vec(), clipped),
            Self::TwoReactions => (psi_two_reactions(u[0])?.to_vec(), clipped),
            Self::General { network, q } => {
                let r = psi_general(network, q, u)?;
                (r.c, r.clipped)
            }
        })
    }

    /// `Ψ` continued to all of `R^m` (affinely past the boundary of the domain where
    /// a closed form allows it) and its Jacobian.
    pub fn psi_extended(&self, u: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
        match self {
            Self::TwoSpecies { beta, gamma } => {
                let c0 = psi_two_species(*beta, *gamma, u[0].max(0.0)).expect("valid exponents");
                let d = psi_two_species_prime(*beta, *gamma, c0);
                let d = if u[0] <= 0.0 { psi_two_species_prime(*beta, *gamma, [0.0, 0.0]) } else { d };
                let c = if u[0] < 0.0 { vec![d[0] * u[0], d[1] * u[0]] } else { c0.to_vec() };
                (c, DMatrix::from_column_slice(2, 1, &d))
            }
            Self::ThreeSpecies => (psi_three_raw(u[0], u[1]).to_vec(), psi_three_jacobian(u[0], u[1])),
            Self::TwoReactions => {
                let d = psi_two_reactions_prime(u[0]);
                let c = if u[0] < 0.0 {
                    vec![u[0], 0.0, 0.0]
                } else {
                    psi_two_reactions(u[0]).expect("nonnegative").to_vec()
                };
                (c, DMatrix::from_column_slice(3, 1, &d))
            }
            Self::General { network, q } => match psi_general(network, q, u) {
                Ok(r) => {
                    let j = psi_general_jacobian(q, &r.c);
                    (r.c, j)
                }
                Err(_) => (
                    vec![f64::NAN; q.ncols()],
                    DMatrix::from_element(q.ncols(), q.nrows(), f64::NAN),
                ),
            },
        }
    }
}
