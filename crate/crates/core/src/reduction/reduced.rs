use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::psi::ReductionMap;
use crate::error::{Error, Result};
use crate::flux::{BoxRegion, FluxMap, ScalarFlux, VectorFluxMap};
use crate::grid::Grid;
use crate::profile::{derivative, second_derivative, Profile};

/// `A(u) = Q D Ψ(u)` for a diagonal diffusion matrix `D`.
#[derive(Debug, Clone)]
pub struct ReducedFlux {
    pub map: ReductionMap,
    pub diffusion: Vec<f64>,
    q: DMatrix<f64>,
}

impl ReducedFlux {
    pub fn new(map: ReductionMap, diffusion: Vec<f64>) -> Result<Self> {
        if diffusion.len() != map.species() {
            return Err(Error::InvalidInput(format!(
                "{} diffusion coefficients for {} species",
                diffusion.len(),
                map.species()
            )));
        }
        if diffusion.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::InvalidInput(format!("diffusion coefficients must be positive: {diffusion:?}")));
        }
        let q = map.q();
        Ok(Self { map, diffusion, q })
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }
}

impl FluxMap for ReducedFlux {
    fn dim(&self) -> usize {
        self.q.nrows()
    }

    fn apply(&self, u: &[f64]) -> Vec<f64> {
        let (c, _) = self.map.psi_extended(u);
        let dc = DVector::from_iterator(c.len(), c.iter().zip(&self.diffusion).map(|(c, d)| c * d));
        (&self.q * dc).iter().copied().collect()
    }

    fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        let (_, j) = self.map.psi_extended(u);
        let d = DMatrix::from_diagonal(&DVector::from_column_slice(&self.diffusion));
        &self.q * d * j
    }

    fn label(&self) -> String {
        format!("reduced({}, d = {:?})", self.map.label(), self.diffusion)
    }
}

/// One-component reduced flux seen as a scalar diffusivity `D = A'`.
#[derive(Debug, Clone)]
pub struct ReducedScalar(pub ReducedFlux);

impl ScalarFlux for ReducedScalar {
    fn flux(&self, u: f64) -> f64 {
        self.0.apply(&[u])[0]
    }

    fn diffusivity(&self, u: f64) -> f64 {
        self.0.jacobian(&[u])[(0, 0)]
    }

    fn label(&self) -> String {
        self.0.label()
    }
}

/// Reduced flux with sampled constants on `region`.
pub fn reduced_flux_map(map: ReductionMap, diffusion: Vec<f64>, region: &BoxRegion, per_axis: usize) -> Result<VectorFluxMap> {
    let flux = ReducedFlux::new(map, diffusion)?;
    VectorFluxMap::certified(Arc::new(flux), region, per_axis)
}

/// Strict monotonicity region of the three-species reduced flux:
/// `(3 - √8) d₃ < d_j < (3 + √8) d₃` for `j = 1, 2`.
pub fn monotonicity_lemma_check(d1: f64, d2: f64, d3: f64) -> bool {
    let lo = (3.0 - 8f64.sqrt()) * d3;
    let hi = (3.0 + 8f64.sqrt()) * d3;
    [d1, d2].iter().all(|&d| lo < d && d < hi)
}

/// Concentration profile `C = Ψ(U)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedProfile {
    pub grid: Grid,
    /// Component-major concentrations; `NaN` at infeasible nodes.
    pub c: Vec<Vec<f64>>,
    /// Nodes where `U` has a negative coordinate.
    pub infeasible: Vec<usize>,
    /// Nodes where a coordinate within roundoff of zero was clipped.
    pub clipped: Vec<usize>,
}

impl LiftedProfile {
    pub fn feasible(&self) -> bool {
        self.infeasible.is_empty()
    }

    pub fn at(&self, i: usize) -> Vec<f64> {
        self.c.iter().map(|c| c[i]).collect()
    }
}

pub fn lift_profile(profile: &Profile, map: &ReductionMap) -> Result<LiftedProfile> {
    if profile.dim() != map.reduced_dim() {
        return Err(Error::InvalidInput(format!(
            "profile has {} components, the reduction expects {}",
            profile.dim(),
            map.reduced_dim()
        )));
    }
    let n = profile.grid.n_points();
    let species = map.species();
    let mut c = vec![vec![f64::NAN; n]; species];
    let mut infeasible = Vec::new();
    let mut clipped = Vec::new();
    for i in 0..n {
        match map.psi(&profile.at(i)) {
            Ok((ci, clip)) => {
                for k in 0..species {
                    c[k][i] = ci[k];
                }
                if clip {
                    clipped.push(i);
                }
            }
            Err(Error::OutsideDomain(_)) => infeasible.push(i),
            Err(e) => return Err(e),
        }
    }
    Ok(LiftedProfile { grid: profile.grid, c, infeasible, clipped })
}

/// Multipliers of the constrained profile equation
/// `D C'' + (y/2) C' + Σ_r λ_r (β^r - α^r) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Multipliers {
    /// `λ_r(y)` per reaction direction, node-major within each direction.
    pub lambda: Vec<Vec<f64>>,
    /// Largest norm of the part of `D C'' + (y/2) C'` outside the stoichiometric span.
    pub off_gamma: f64,
    /// For one reaction `γX₁ ⇌ βX₂`: both expressions of `Λ = -(d₁C₁''+(y/2)C₁')/γ
    /// = (d₂C₂''+(y/2)C₂')/β` and their largest mismatch.
    pub two_species: Option<TwoSpeciesMultiplier>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoSpeciesMultiplier {
    pub from_first: Vec<f64>,
    pub from_second: Vec<f64>,
    pub mismatch: f64,
}

impl Multipliers {
    /// `max_y |λ(y)|` over all directions.
    pub fn sup(&self) -> f64 {
        self.lambda.iter().flatten().fold(0.0, |a, b| a.max(b.abs()))
    }
}

/// Least-squares multipliers on interior nodes (the end nodes are reported as 0).
pub fn lagrange_multiplier(lifted: &LiftedProfile, diffusion: &[f64], directions: &[Vec<i64>]) -> Result<Multipliers> {
    let species = lifted.c.len();
    if diffusion.len() != species || directions.iter().any(|d| d.len() != species) {
        return Err(Error::InvalidInput("dimension mismatch between profile, diffusion and reactions".into()));
    }
    if !lifted.feasible() {
        return Err(Error::OutsideDomain("lifted profile leaves the admissible set".into()));
    }
    let grid = &lifted.grid;
    let ys = grid.nodes();
    let n = ys.len();
    let residual: Vec<Vec<f64>> = (0..species)
        .map(|k| {
            let d1 = derivative(grid, &lifted.c[k]);
            let d2 = second_derivative(grid, &lifted.c[k]);
            (0..n).map(|i| diffusion[k] * d2[i] + 0.5 * ys[i] * d1[i]).collect()
        })
        .collect();
    let r = directions.len();
    let mut lambda = vec![vec![0.0; n]; r];
    let mut off: f64 = 0.0;
    if r > 0 {
        let s = DMatrix::from_fn(species, r, |i, j| directions[j][i] as f64);
        let svd = s.clone().svd(true, true);
        for i in 1..n - 1 {
            let rhs = DVector::from_iterator(species, (0..species).map(|k| -residual[k][i]));
            let x = svd.solve(&rhs, 1e-12).map_err(|e| Error::InvalidInput(e.into()))?;
            let rest = &s * &x - &rhs;
            off = off.max(rest.norm());
            for j in 0..r {
                lambda[j][i] = x[j];
            }
        }
    } else {
        for i in 1..n - 1 {
            off = off.max((0..species).map(|k| residual[k][i].powi(2)).sum::<f64>().sqrt());
        }
    }
    let two_species = match directions {
        [d] if species == 2 && d[0] < 0 && d[1] > 0 => {
            let gamma = -d[0] as f64;
            let beta = d[1] as f64;
            let mut a = vec![0.0; n];
            let mut b = vec![0.0; n];
            let mut mismatch: f64 = 0.0;
            for i in 1..n - 1 {
                a[i] = -residual[0][i] / gamma;
                b[i] = residual[1][i] / beta;
                mismatch = mismatch.max((a[i] - b[i]).abs());
            }
            Some(TwoSpeciesMultiplier { from_first: a, from_second: b, mismatch })
        }
        _ => None,
    };
    Ok(Multipliers { lambda, off_gamma: off, two_species })
}
