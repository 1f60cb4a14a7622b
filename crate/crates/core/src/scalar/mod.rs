//! Scalar profiles of `(D(U)U')' + (y/2)U' = 0` by shooting from `y = 0`.
//!
//! The first-order system `U' = Q/D(U)`, `Q' = -(y/2)U'` is integrated outward on
//! both half-lines. For a fixed centre value `U(0)` the right end `U(L)` increases
//! with `Q(0)`, so `Q(0)` is found by a bracketed root search hitting `U_+`; the
//! outer search adjusts `U(0)` until the left half-line lands on `U_-`.

mod estimates;
mod oracle;

pub use estimates::{
    fit_slope, flux_square_bounds, front_exponent, lp_derivative_check, q0_u0_brackets, support_endpoints,
    verify_gaussian_bounds, Brackets, FluxSquareBounds, GaussianCheck, LpCheck, SupportEndpoints,
};
pub use oracle::{closed_form_oracle, erf_profile, OracleCase, OracleExample};

use crate::error::{Error, Result};
use crate::flux::ScalarDiffusivity;
use crate::grid::{BoundaryPair, Grid};
use crate::profile::Profile;
use crate::roots::brent;

/// Default regularization schedule for degenerate diffusivities.
pub const DEFAULT_EPS_SCHEDULE: [f64; 5] = [1e-2, 1e-4, 1e-6, 1e-8, 1e-10];
/// Nodes closer than this to a limit are set to the limit after a regularized solve.
pub const SNAP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSolveConfig {
    pub grid: Grid,
    /// Values of `ε` in `D + ε`; used only when `D` vanishes somewhere on `[U_-, U_+]`.
    pub eps_schedule: Vec<f64>,
    /// Admissible mismatch `|U(±L) - U_±|`.
    pub shoot_tol: f64,
    /// Integration substeps per grid cell.
    pub substeps: usize,
    pub max_iter: usize,
}

impl ScalarSolveConfig {
    pub fn new(grid: Grid) -> Self {
        Self {
            grid,
            eps_schedule: DEFAULT_EPS_SCHEDULE.to_vec(),
            shoot_tol: 1e-8,
            substeps: 8,
            max_iter: 200,
        }
    }

    /// Default grid sized from the largest diffusivity.
    pub fn for_diffusivity(d: &ScalarDiffusivity) -> Result<Self> {
        Ok(Self::new(Grid::for_scale(d.d_sup())?))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.shoot_tol > 0.0) {
            return Err(Error::InvalidInput("shoot_tol must be positive".into()));
        }
        if self.substeps == 0 {
            return Err(Error::InvalidInput("substeps must be at least 1".into()));
        }
        if self
            .eps_schedule
            .iter()
            .any(|e| !(e.is_finite() && *e > 0.0))
            || self.eps_schedule.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(Error::InvalidInput(
                "eps schedule must be positive and strictly decreasing".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarReport {
    pub u0: f64,
    pub q0: f64,
    /// Upper/lower bounds for the support, `∓∞` when the defining integral diverges.
    pub y_minus_star: f64,
    pub y_plus_star: f64,
    pub gaussian_bound_ok: bool,
    pub gaussian_worst_ratio: f64,
    pub u0_bracket: (f64, f64),
    pub q0_bracket: (f64, f64),
    /// Regularizations actually used, in order; `[0]` for a nondegenerate solve.
    pub eps_used: Vec<f64>,
    /// Sup-norm change of the profile between consecutive stages.
    pub stage_changes: Vec<f64>,
    /// Nodes where `D(U) < 1e-8` while the flux is positive.
    pub singular_nodes: Vec<usize>,
    /// Last node equal to `U_-` and first node equal to `U_+`, when such nodes exist.
    pub free_boundary: (Option<f64>, Option<f64>),
}

/// Slack allowed in the Gaussian comparison before it counts as violated.
pub const GAUSSIAN_SLACK: f64 = 1e-6;

/// Regularized diffusivity used by the integrator.
struct Shooter<'a> {
    d: &'a ScalarDiffusivity,
    eps: f64,
    h: f64,
    cells: usize,
    substeps: usize,
}

impl Shooter<'_> {
    fn d(&self, u: f64) -> f64 {
        self.d.d(u) + self.eps
    }

    fn d_prime(&self, u: f64) -> f64 {
        let (lo, hi) = self.d.interval();
        if u <= lo || u >= hi {
            0.0
        } else {
            self.d.flux().diffusivity_prime(u)
        }
    }

    /// Integrates one half-line in `z = |y|` and returns `U(L)`.
    ///
    /// `dir = +1` for `y > 0` (`U` increases), `-1` for `y < 0`. When `record` is
    /// given it receives `(U, Q)` at each node `z_k = k h`.
    fn run(&self, u0: f64, q0: f64, dir: f64, mut record: Option<&mut Vec<(f64, f64)>>) -> f64 {
        let dt = self.h / self.substeps as f64;
        let (mut u, mut q) = (u0, q0);
        if let Some(r) = record.as_deref_mut() {
            r.clear();
            r.push((u, q));
        }
        let mut z = 0.0;
        for cell in 0..self.cells {
            for s in 0..self.substeps {
                let z1 = (cell as f64 + (s + 1) as f64 / self.substeps as f64) * self.h;
                let dd = self.d(u);
                let stiff = dt * (0.5 * z1 + (q * self.d_prime(u)).abs() / dd) / dd;
                let explicit = if stiff <= 1.0 { self.rk4(z, u, q, dt, dir) } else { None };
                match explicit {
                    Some((nu, nq)) => {
                        u = nu;
                        q = nq;
                    }
                    None => {
                        let (du, nq) = self.implicit_step(u, q, z1, dt, dir);
                        u += dir * du;
                        q = nq;
                    }
                }
                z = z1;
            }
            if let Some(r) = record.as_deref_mut() {
                r.push((u, q));
            }
        }
        u
    }

    /// Classical Runge-Kutta step, or `None` when a stage leaves `[U_-, U_+]` or
    /// produces a negative flux, where the regularized field is too stiff for it.
    fn rk4(&self, z: f64, u: f64, q: f64, dt: f64, dir: f64) -> Option<(f64, f64)> {
        let (lo, hi) = self.d.interval();
        let rhs = |z: f64, u: f64, q: f64| -> Option<(f64, f64)> {
            if !(u >= lo && u <= hi && q >= 0.0) {
                return None;
            }
            let up = q / self.d(u);
            Some((dir * up, -0.5 * z * up))
        };
        let (k1u, k1q) = rhs(z, u, q)?;
        let (k2u, k2q) = rhs(z + 0.5 * dt, u + 0.5 * dt * k1u, q + 0.5 * dt * k1q)?;
        let (k3u, k3q) = rhs(z + 0.5 * dt, u + 0.5 * dt * k2u, q + 0.5 * dt * k2q)?;
        let (k4u, k4q) = rhs(z + dt, u + dt * k3u, q + dt * k3q)?;
        let nu = u + dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        let nq = q + dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        if nq < 0.0 || dir * (nu - u) < 0.0 {
            return None;
        }
        Some((nu, nq))
    }

    /// Backward Euler step for stiff stretches. With `δ = |U_1 - U|` the update
    /// satisfies `Q_1 = Q - (z_1/2) δ` and `δ D_ε(U_1) = dt Q_1`, a scalar equation
    /// with the bracket `[0, dt Q / (ε + dt z_1/2)]`.
    fn implicit_step(&self, u: f64, q: f64, z1: f64, dt: f64, dir: f64) -> (f64, f64) {
        if q <= 0.0 {
            return (0.0, 0.0);
        }
        let f = |delta: f64| delta * (self.d(u + dir * delta) + 0.5 * dt * z1) - dt * q;
        let hi = dt * q / (self.eps + 0.5 * dt * z1);
        let delta = brent(f, 0.0, hi, 1e-15 * hi, 200).unwrap_or(hi);
        let nq = (q - 0.5 * z1 * delta).max(0.0);
        (delta, nq)
    }
}

/// Solves the scalar profile equation for `U_- ≤ U_+`.
pub fn solve_scalar(
    d: &ScalarDiffusivity,
    boundary: &BoundaryPair,
    config: &ScalarSolveConfig,
) -> Result<(Profile, ScalarReport)> {
    config.validate()?;
    if boundary.dim() != 1 {
        return Err(Error::InvalidInput("scalar solver needs a one-component boundary".into()));
    }
    let (lo, hi) = (boundary.minus()[0], boundary.plus()[0]);
    if lo > hi {
        return Err(Error::InvalidInput(format!(
            "U_- = {lo} exceeds U_+ = {hi}; reflect y before solving"
        )));
    }
    let grid = config.grid;
    let n = grid.n_points();
    if lo == hi {
        let profile = Profile::new(grid, vec![vec![lo; n]], vec![vec![0.0; n]], boundary.clone())?;
        let report = ScalarReport {
            u0: lo,
            q0: 0.0,
            y_minus_star: f64::NEG_INFINITY,
            y_plus_star: f64::INFINITY,
            gaussian_bound_ok: true,
            gaussian_worst_ratio: 0.0,
            u0_bracket: (lo, lo),
            q0_bracket: (0.0, 0.0),
            eps_used: vec![0.0],
            stage_changes: vec![],
            singular_nodes: vec![],
            free_boundary: (None, None),
        };
        return Ok((profile, report));
    }
    let d = ScalarDiffusivity::new(d.flux().clone(), lo, hi)?;
    let degenerate = d.d_star() <= 0.0;
    let stages: Vec<f64> = if degenerate {
        if config.eps_schedule.is_empty() {
            return Err(Error::InvalidInput(
                "diffusivity vanishes on the boundary interval but the eps schedule is empty".into(),
            ));
        }
        config.eps_schedule.clone()
    } else {
        vec![0.0]
    };

    let mut previous: Option<(f64, Vec<f64>)> = None;
    let mut stage_changes = Vec::new();
    let mut last = None;
    for &eps in &stages {
        let shooter = Shooter {
            d: &d,
            eps,
            h: grid.spacing(),
            cells: grid.center(),
            substeps: config.substeps,
        };
        let (u0, q0) = shoot(&shooter, lo, hi, previous.as_ref().map(|p| p.0), config.max_iter)?;
        let (u, q) = trace(&shooter, &grid, u0, q0);
        if let Some((_, prev_u)) = &previous {
            let change = u.iter().zip(prev_u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            stage_changes.push(change);
        }
        previous = Some((u0, u.clone()));
        last = Some((u0, q0, u, q));
    }
    let (u0, q0, mut u, mut q) = last.expect("at least one stage");

    for i in 0..n {
        u[i] = u[i].clamp(lo, hi);
        if degenerate {
            if (u[i] - lo).abs() < SNAP_TOL {
                u[i] = lo;
            } else if (hi - u[i]).abs() < SNAP_TOL {
                u[i] = hi;
            }
            if u[i] == lo || u[i] == hi {
                q[i] = 0.0;
            }
        }
        q[i] = q[i].max(0.0);
    }
    // Snapping may leave isolated interior nodes equal to a limit; monotonicity is restored.
    for i in 1..n {
        if u[i] < u[i - 1] {
            u[i] = u[i - 1];
        }
    }

    let profile = Profile::new(grid, vec![u], vec![q], boundary.clone())?;
    let mismatch = profile.boundary_mismatch();
    if mismatch > config.shoot_tol {
        return Err(Error::Bracket(format!(
            "boundary mismatch {mismatch:e} exceeds {:e}; enlarge the grid",
            config.shoot_tol
        )));
    }

    let brackets = q0_u0_brackets(d.d_star(), d.d_sup(), boundary);
    let ends = support_endpoints(&d, u0, q0);
    let gauss = verify_gaussian_bounds(&profile, d.d_sup());
    let ys = grid.nodes();
    let singular_nodes = (0..n)
        .filter(|&i| d.d(profile.u[0][i]) < 1e-8 && profile.q[0][i] > 0.0)
        .collect();
    let left_free = (0..n).take_while(|&i| profile.u[0][i] == lo).last().map(|i| ys[i]);
    let right_free = (0..n).rev().take_while(|&i| profile.u[0][i] == hi).last().map(|i| ys[i]);
    let report = ScalarReport {
        u0,
        q0,
        y_minus_star: ends.minus,
        y_plus_star: ends.plus,
        gaussian_bound_ok: gauss.worst_ratio <= 1.0 + GAUSSIAN_SLACK,
        gaussian_worst_ratio: gauss.worst_ratio,
        u0_bracket: brackets.u0,
        q0_bracket: brackets.q0,
        eps_used: stages,
        stage_changes,
        singular_nodes,
        free_boundary: (
            if degenerate { left_free } else { None },
            if degenerate { right_free } else { None },
        ),
    };
    Ok((profile, report))
}

/// Finds `(U(0), Q(0))` for one regularization stage.
fn shoot(s: &Shooter, lo: f64, hi: f64, warm: Option<f64>, max_iter: usize) -> Result<(f64, f64)> {
    let delta = hi - lo;
    let d_star = s.d.d_star() + s.eps;
    let d_sup = s.d.d_sup() + s.eps;

    let inner = |u0: f64| -> Result<f64> {
        let gap = hi - u0;
        if gap <= 0.0 {
            return Ok(0.0);
        }
        let miss = |q0: f64| s.run(u0, q0, 1.0, None) - hi;
        let mut a = 0.5 * gap * (d_star / 4.0).sqrt();
        let mut b = 2.0 * gap * (d_sup / 2.0).sqrt();
        let mut grow = 0;
        while miss(b) < 0.0 {
            b *= 2.0;
            grow += 1;
            if grow > 60 {
                return Err(Error::Bracket(format!("no upper flux bracket for U(0) = {u0}")));
            }
        }
        let mut shrink = 0;
        while a > 0.0 && miss(a) > 0.0 {
            a *= 0.25;
            shrink += 1;
            if shrink > 200 {
                a = 0.0;
            }
        }
        brent(miss, a, b, 4.0 * f64::EPSILON * b, max_iter)
    };
    let outer = |u0: f64| -> f64 {
        match inner(u0) {
            Ok(q0) => s.run(u0, q0, -1.0, None) - lo,
            Err(_) => f64::NAN,
        }
    };

    let gamma = (d_star / (2.0 * d_sup)).sqrt();
    let margin = 1e-3 * delta;
    let floor = lo + 1e-12 * delta;
    let ceil = hi - 1e-12 * delta;
    let cor_lo = ((lo + gamma * hi) / (1.0 + gamma) - margin).max(floor);
    let cor_hi = ((gamma * lo + hi) / (1.0 + gamma) + margin).min(ceil);

    let mut candidates = Vec::new();
    if let Some(w) = warm {
        let r = 0.02 * delta;
        candidates.push(((w - r).max(floor), (w + r).min(ceil)));
    }
    candidates.push((cor_lo, cor_hi));
    candidates.push((floor, ceil));
    for (a, b) in candidates {
        let (fa, fb) = (outer(a), outer(b));
        if fa.is_nan() || fb.is_nan() || fa > 0.0 || fb < 0.0 {
            continue;
        }
        let u0 = brent(outer, a, b, 1e-14 * delta, max_iter)?;
        let q0 = inner(u0)?;
        return Ok((u0, q0));
    }
    Err(Error::Bracket(format!(
        "U(0) search failed on [{floor}, {ceil}] at eps = {:e}",
        s.eps
    )))
}

/// Records `(U, Q)` on the whole grid for the final centre data.
fn trace(s: &Shooter, grid: &Grid, u0: f64, q0: f64) -> (Vec<f64>, Vec<f64>) {
    let n = grid.n_points();
    let c = grid.center();
    let mut right = Vec::new();
    let mut left = Vec::new();
    s.run(u0, q0, 1.0, Some(&mut right));
    s.run(u0, q0, -1.0, Some(&mut left));
    let mut u = vec![0.0; n];
    let mut q = vec![0.0; n];
    for k in 0..=c {
        u[c + k] = right[k].0;
        q[c + k] = right[k].1;
        u[c - k] = left[k].0;
        q[c - k] = left[k].1;
    }
    (u, q)
}
