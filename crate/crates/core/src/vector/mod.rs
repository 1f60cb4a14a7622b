//! Vector profiles of `A(U)'' + (y/2) U' = 0` through the integrated equation
//! `A(ũ + v')' + (y/2) v' - v/2 + g = 0` for the potential `v`, `U = ũ + v'`.
//!
//! `v` lives on the nodes with `v(±L) = 0`; `v'` and `A(ũ + v')` are taken at cell
//! midpoints, so the outer derivative is a compact difference and the Jacobian is
//! block tridiagonal.

mod checks;
mod linear;

pub use checks::{
    flux_envelope, integral_relations, verify_theorem_estimates, verify_weak_residual,
    FluxEnvelope, IntegralRelations, TheoremEstimates,
};
pub use linear::linear_matrix_profile;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::flux::{FluxMap, VectorFluxMap};
use crate::grid::{BoundaryPair, Grid};
use crate::interp::TildeU;
use crate::linalg::BlockTridiagonal;
use crate::profile::{derivative, Profile};

/// Regularizations `A + εI` used when `a_lo = 0`; `ε = 0` is attempted afterwards.
pub const DEFAULT_VECTOR_EPS: [f64; 8] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];
/// Smallest Armijo step before Newton gives up.
const MIN_STEP: f64 = 1.0 / 1_048_576.0;
const ARMIJO: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct VectorSolveConfig {
    pub grid: Grid,
    /// Explicit regularization stages; empty selects `[0]` for `a_lo > 0` and the
    /// default schedule followed by `0` otherwise.
    pub eps_schedule: Vec<f64>,
    /// Bound on the sup-norm of the discrete residual.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Backtracking factor.
    pub damping: f64,
    /// Combine with a solve on the twice refined grid (only for `a_lo > 0`).
    pub extrapolate: bool,
}

impl VectorSolveConfig {
    pub fn new(grid: Grid) -> Self {
        Self {
            grid,
            eps_schedule: Vec::new(),
            newton_tol: 1e-10,
            newton_max_iter: 60,
            damping: 0.5,
            extrapolate: true,
        }
    }

    /// Default grid sized from `a_up`.
    pub fn for_map(map: &VectorFluxMap) -> Result<Self> {
        Ok(Self::new(Grid::for_scale(map.constants.a_up)?))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.newton_tol > 0.0) {
            return Err(Error::InvalidInput("newton_tol must be positive".into()));
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::InvalidInput("damping must lie in (0, 1)".into()));
        }
        if self.newton_max_iter == 0 {
            return Err(Error::InvalidInput("newton_max_iter must be positive".into()));
        }
        if self.eps_schedule.iter().any(|e| !(e.is_finite() && *e >= 0.0))
            || self.eps_schedule.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(Error::InvalidInput(
                "eps schedule must be nonnegative and strictly decreasing".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorReport {
    pub eps_used: Vec<f64>,
    /// Sup-norm change of `U` between consecutive stages.
    pub stage_changes: Vec<f64>,
    /// Regularization of the returned profile; nonzero when the `ε = 0` stage failed.
    pub final_eps: f64,
    pub regularized: bool,
    pub residual: f64,
    pub iterations: usize,
    /// The potential `v`, component-major.
    pub v: Vec<Vec<f64>>,
    pub a_up: f64,
    /// True when the returned values combine the grid and its refinement.
    pub extrapolated: bool,
}

/// The discrete integrated equation for one regularization.
struct System<'a> {
    map: &'a dyn FluxMap,
    eps: f64,
    m: usize,
    n: usize,
    h: f64,
    ys: Vec<f64>,
    /// `ũ` at the cell midpoints, node-major.
    tilde_mid: Vec<Vec<f64>>,
    /// `g` at the nodes, node-major.
    g: Vec<Vec<f64>>,
}

impl System<'_> {
    fn mid_state(&self, v: &[f64], j: usize) -> Vec<f64> {
        let m = self.m;
        (0..m)
            .map(|k| self.tilde_mid[j][k] + (v[(j + 1) * m + k] - v[j * m + k]) / self.h)
            .collect()
    }

    fn flux_eps(&self, u: &[f64]) -> Vec<f64> {
        let mut a = self.map.apply(u);
        for (ak, uk) in a.iter_mut().zip(u) {
            *ak += self.eps * uk;
        }
        a
    }

    fn residual(&self, v: &[f64]) -> Vec<f64> {
        let (m, n, h) = (self.m, self.n, self.h);
        let fluxes: Vec<Vec<f64>> = (0..n - 1).map(|j| self.flux_eps(&self.mid_state(v, j))).collect();
        let mut f = vec![0.0; n * m];
        for i in 1..n - 1 {
            for k in 0..m {
                let dv = (v[(i + 1) * m + k] - v[(i - 1) * m + k]) / (2.0 * h);
                f[i * m + k] = (fluxes[i][k] - fluxes[i - 1][k]) / h + 0.5 * self.ys[i] * dv
                    - 0.5 * v[i * m + k]
                    + self.g[i][k];
            }
        }
        f
    }

    fn jacobian(&self, v: &[f64]) -> BlockTridiagonal {
        let (m, n, h) = (self.m, self.n, self.h);
        let eye = DMatrix::<f64>::identity(m, m);
        let jm: Vec<DMatrix<f64>> = (0..n - 1)
            .map(|j| self.map.jacobian(&self.mid_state(v, j)) + &eye * self.eps)
            .collect();
        let mut sys = BlockTridiagonal::zeros(n - 2, m);
        let h2 = h * h;
        for b in 0..n - 2 {
            let i = b + 1;
            let drift = self.ys[i] / (4.0 * h);
            sys.diag[b] = -(&jm[i] + &jm[i - 1]) / h2 - &eye * 0.5;
            sys.upper[b] = &jm[i] / h2 + &eye * drift;
            sys.lower[b] = &jm[i - 1] / h2 - &eye * drift;
        }
        sys
    }

    /// Damped Newton from `v`; returns the iteration count and final residual.
    fn newton(&self, v: &mut [f64], cfg: &VectorSolveConfig) -> Result<(usize, f64)> {
        let (m, n) = (self.m, self.n);
        let mut f = self.residual(v);
        let mut norm = sup(&f);
        for iter in 0..cfg.newton_max_iter {
            if !norm.is_finite() {
                break;
            }
            if norm <= cfg.newton_tol {
                return Ok((iter, norm));
            }
            let jac = self.jacobian(v);
            let rhs: Vec<DVector<f64>> = (1..n - 1)
                .map(|i| DVector::from_iterator(m, (0..m).map(|k| -f[i * m + k])))
                .collect();
            let step = jac.solve(&rhs).map_err(|_| Error::Newton {
                eps: self.eps,
                residual: norm,
                iterations: iter,
            })?;
            let phi0 = 0.5 * dot(&f, &f);
            let mut alpha = 1.0;
            loop {
                let mut trial = v.to_vec();
                for (b, s) in step.iter().enumerate() {
                    for k in 0..m {
                        trial[(b + 1) * m + k] += alpha * s[k];
                    }
                }
                let ft = self.residual(&trial);
                let phi = 0.5 * dot(&ft, &ft);
                if phi.is_finite() && phi <= (1.0 - 2.0 * ARMIJO * alpha) * phi0 {
                    v.copy_from_slice(&trial);
                    f = ft;
                    norm = sup(&f);
                    break;
                }
                alpha *= cfg.damping;
                if alpha < MIN_STEP {
                    // Stagnation at roundoff level still counts as converged.
                    if norm <= cfg.newton_tol * 10.0 {
                        return Ok((iter, norm));
                    }
                    return Err(Error::Newton {
                        eps: self.eps,
                        residual: norm,
                        iterations: iter,
                    });
                }
            }
        }
        if norm <= cfg.newton_tol {
            return Ok((cfg.newton_max_iter, norm));
        }
        Err(Error::Newton {
            eps: self.eps,
            residual: norm,
            iterations: cfg.newton_max_iter,
        })
    }

    /// `U = ũ + v'` at the nodes and the flux `(A(U))'`.
    fn profile(&self, v: &[f64], grid: Grid, tilde: &TildeU) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let (m, n, h) = (self.m, self.n, self.h);
        let mut u = vec![vec![0.0; n]; m];
        for i in 0..n {
            for k in 0..m {
                let at = |j: usize| v[j * m + k];
                let dv = if i == 0 || i == n - 1 {
                    0.0
                } else if i == 1 || i == n - 2 {
                    (at(i + 1) - at(i - 1)) / (2.0 * h)
                } else {
                    (8.0 * (at(i + 1) - at(i - 1)) - (at(i + 2) - at(i - 2))) / (12.0 * h)
                };
                u[k][i] = tilde.value(k, self.ys[i]) + dv;
            }
        }
        let mid: Vec<Vec<f64>> = (0..n - 1).map(|j| self.map.apply(&self.mid_state(v, j))).collect();
        let mut q = vec![vec![0.0; n]; m];
        for k in 0..m {
            let node_flux: Vec<f64> = (0..n)
                .map(|i| {
                    let ui: Vec<f64> = (0..m).map(|c| u[c][i]).collect();
                    self.map.apply(&ui)[k]
                })
                .collect();
            let ends = derivative(&grid, &node_flux);
            q[k][0] = ends[0];
            q[k][n - 1] = ends[n - 1];
            for i in 1..n - 1 {
                q[k][i] = (mid[i][k] - mid[i - 1][k]) / h;
            }
        }
        (u, q)
    }
}

fn sup(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |a, b| if b.is_nan() { f64::NAN } else { a.max(b.abs()) })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `g(y) = ∫_{-∞}^{y} (η/2) ũ'(η) dη` at the grid nodes, component-major.
pub fn g_source(tilde: &TildeU, grid: &Grid) -> Vec<Vec<f64>> {
    let ys = grid.nodes();
    (0..tilde.dim())
        .map(|k| ys.iter().map(|&y| tilde.source(k, y)).collect())
        .collect()
}

/// Solves the vector profile equation starting from `v = 0`.
pub fn solve_vector(
    map: &VectorFluxMap,
    boundary: &BoundaryPair,
    config: &VectorSolveConfig,
) -> Result<(Profile, VectorReport)> {
    solve_vector_from(map, boundary, config, None)
}

/// As [`solve_vector`], with an optional initial potential (component-major).
pub fn solve_vector_from(
    map: &VectorFluxMap,
    boundary: &BoundaryPair,
    config: &VectorSolveConfig,
    initial: Option<&[Vec<f64>]>,
) -> Result<(Profile, VectorReport)> {
    config.validate()?;
    let c = &map.constants;
    if !c.admissible() {
        return Err(Error::Hypothesis(format!(
            "a_lo + delta = {} + {} is not positive for {}",
            c.a_lo,
            c.delta,
            map.map.label()
        )));
    }
    let m = map.dim();
    if boundary.dim() != m {
        return Err(Error::InvalidInput(format!(
            "boundary has {} components, flux map has {m}",
            boundary.dim()
        )));
    }
    let (u, q, report) = solve_on_grid(map, boundary, config, config.grid, initial)?;
    if !(config.extrapolate && c.a_lo > 0.0 && !report.regularized) {
        let profile = Profile::new(config.grid, u, q, boundary.clone())?;
        return Ok((profile, report));
    }
    // Richardson step: the scheme is centred, so the leading error is O(h²).
    let grid = config.grid;
    let n = grid.n_points();
    let fine = Grid::new(grid.half_width(), 2 * n - 1)?;
    let warm: Vec<Vec<f64>> = report
        .v
        .iter()
        .map(|vk| {
            (0..2 * n - 1)
                .map(|j| if j % 2 == 0 { vk[j / 2] } else { 0.5 * (vk[j / 2] + vk[j / 2 + 1]) })
                .collect()
        })
        .collect();
    let (uf, qf, _) = solve_on_grid(map, boundary, config, fine, Some(&warm))?;
    let blend = |coarse: &[Vec<f64>], fine: &[Vec<f64>]| -> Vec<Vec<f64>> {
        coarse
            .iter()
            .zip(fine)
            .map(|(ck, fk)| (0..n).map(|i| (4.0 * fk[2 * i] - ck[i]) / 3.0).collect())
            .collect()
    };
    let profile = Profile::new(grid, blend(&u, &uf), blend(&q, &qf), boundary.clone())?;
    Ok((profile, VectorReport { extrapolated: true, ..report }))
}

type GridSolution = (Vec<Vec<f64>>, Vec<Vec<f64>>, VectorReport);

fn solve_on_grid(
    map: &VectorFluxMap,
    boundary: &BoundaryPair,
    config: &VectorSolveConfig,
    grid: Grid,
    initial: Option<&[Vec<f64>]>,
) -> Result<GridSolution> {
    let c = &map.constants;
    let m = map.dim();
    let n = grid.n_points();
    let ys = grid.nodes();
    let h = grid.spacing();
    let tilde = TildeU::new(boundary.clone(), c.a_up)?;
    let tilde_mid: Vec<Vec<f64>> = (0..n - 1).map(|j| tilde.values(ys[j] + 0.5 * h)).collect();
    let g_cm = g_source(&tilde, &grid);
    let g: Vec<Vec<f64>> = (0..n).map(|i| (0..m).map(|k| g_cm[k][i]).collect()).collect();

    let (stages, optional_zero) = if !config.eps_schedule.is_empty() {
        (config.eps_schedule.clone(), false)
    } else if c.a_lo > 0.0 {
        (vec![0.0], false)
    } else {
        (DEFAULT_VECTOR_EPS.to_vec(), true)
    };

    let mut v = vec![0.0; n * m];
    if let Some(init) = initial {
        if init.len() != m || init.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidInput("initial potential has the wrong shape".into()));
        }
        for i in 1..n - 1 {
            for k in 0..m {
                v[i * m + k] = init[k][i];
            }
        }
    }

    let make = |eps: f64| System {
        map: map.map.as_ref(),
        eps,
        m,
        n,
        h,
        ys: ys.clone(),
        tilde_mid: tilde_mid.clone(),
        g: g.clone(),
    };

    let mut eps_used = Vec::new();
    let mut stage_changes = Vec::new();
    let mut prev_u: Option<Vec<Vec<f64>>> = None;
    let mut last = None;
    let mut run_stage = |eps: f64, v: &mut Vec<f64>, required: bool| -> Result<bool> {
        let sys = make(eps);
        let mut trial = v.clone();
        match sys.newton(&mut trial, config) {
            Ok((iters, res)) => {
                *v = trial;
                let (u, q) = sys.profile(v, grid, &tilde);
                if let Some(p) = &prev_u {
                    stage_changes.push(max_diff(p, &u));
                }
                prev_u = Some(u.clone());
                eps_used.push(eps);
                last = Some((eps, iters, res, u, q));
                Ok(true)
            }
            Err(e) if required => Err(e),
            Err(_) => Ok(false),
        }
    };

    let direct = stages.len() == 1 && stages[0] == 0.0 && initial.is_none();
    if direct {
        // A strongly monotone map usually converges directly; otherwise continue in ε.
        if !run_stage(0.0, &mut v, false)? {
            v.iter_mut().for_each(|x| *x = 0.0);
            for &eps in DEFAULT_VECTOR_EPS.iter() {
                run_stage(eps, &mut v, true)?;
            }
            run_stage(0.0, &mut v, true)?;
        }
    } else {
        for &eps in &stages {
            run_stage(eps, &mut v, true)?;
        }
        if optional_zero {
            run_stage(0.0, &mut v, false)?;
        }
    }

    let (final_eps, iterations, residual, u, q) = last.expect("at least one stage ran");
    let v_cm = (0..m).map(|k| (0..n).map(|i| v[i * m + k]).collect()).collect();
    let report = VectorReport {
        eps_used,
        stage_changes,
        final_eps,
        regularized: final_eps > 0.0,
        residual,
        iterations,
        v: v_cm,
        a_up: c.a_up,
        extrapolated: false,
    };
    Ok((u, q, report))
}

fn max_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests;
