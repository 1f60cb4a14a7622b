use super::density::EntropyDensity;
use super::functionals::{hellinger, relative_entropy};
use crate::error::{Error, Result};
use crate::flux::ScalarFlux;
use crate::grid::Grid;
use crate::linalg::solve_tridiagonal;
use crate::profile::Profile;
use crate::quad::simpson;

/// Solution of `u_τ = (A(u))_yy + (y/2) u_y` at time `τ` with pinned end values.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionState {
    pub grid: Grid,
    pub u: Vec<f64>,
    pub tau: f64,
    /// Set once a step had to clip a negative value to 0.
    pub clipped: bool,
    /// `‖u‖∞` above which a step counts as unstable.
    pub bound: f64,
}

impl EvolutionState {
    /// State at `τ = 0`; `u` must be nonnegative and its end values are the Dirichlet data.
    pub fn new(grid: Grid, u: Vec<f64>) -> Result<Self> {
        if u.len() != grid.n_points() {
            return Err(Error::InvalidInput(format!("expected {} nodes, got {}", grid.n_points(), u.len())));
        }
        if let Some(i) = u.iter().position(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::InvalidInput(format!("initial value {} at node {i} is not a nonnegative number", u[i])));
        }
        let sup = u.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        Ok(Self { grid, u, tau: 0.0, clipped: false, bound: 1.1 * sup })
    }

    /// `u₀ = U (1 + amplitude·ψ((y - center)/radius))` with the bump `ψ(s) = exp(1 - 1/(1 - s²))`.
    pub fn perturbed(profile: &Profile, amplitude: f64, center: f64, radius: f64) -> Result<Self> {
        if profile.dim() != 1 {
            return Err(Error::InvalidInput("evolution is scalar".into()));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidInput(format!("bump radius must be positive, got {radius}")));
        }
        let u = profile
            .grid
            .nodes()
            .iter()
            .zip(&profile.u[0])
            .map(|(&y, &big_u)| big_u * (1.0 + amplitude * bump((y - center) / radius)))
            .collect();
        Self::new(profile.grid, u)
    }

    /// `min(h²/(4 max A'(u)), h/L)`: the explicit drift moves at most half a cell.
    pub fn stable_dt(&self, flux: &dyn ScalarFlux) -> f64 {
        let h = self.grid.spacing();
        let d_max = self.u.iter().fold(0.0f64, |a, &u| a.max(flux.diffusivity(u)));
        let drift = 0.5 * h / (0.5 * self.grid.half_width());
        if d_max > 0.0 {
            drift.min(0.25 * h * h / d_max)
        } else {
            drift
        }
    }
}

pub fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

/// One semi-implicit step: `A(u)` is linearized at `u^k` and the diffusion solved
/// implicitly, the drift is explicit first-order upwind.
pub fn step_pde(state: &EvolutionState, flux: &dyn ScalarFlux, dt: f64) -> Result<EvolutionState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
    }
    let n = state.u.len();
    let h = state.grid.spacing();
    let ys = state.grid.nodes();
    let u = &state.u;
    let d: Vec<f64> = u.iter().map(|&x| flux.diffusivity(x)).collect();
    let r: Vec<f64> = u.iter().zip(&d).map(|(&x, &dx)| flux.flux(x) - dx * x).collect();
    let k = dt / (h * h);
    let m = n - 2;
    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    for j in 0..m {
        let i = j + 1;
        lower[j] = -k * d[i - 1];
        diag[j] = 1.0 + 2.0 * k * d[i];
        upper[j] = -k * d[i + 1];
        let drift = if ys[i] > 0.0 {
            u[i + 1] - u[i]
        } else if ys[i] < 0.0 {
            u[i] - u[i - 1]
        } else {
            0.0
        };
        rhs[j] = u[i] + k * (r[i + 1] - 2.0 * r[i] + r[i - 1]) + dt * 0.5 * ys[i] * drift / h;
    }
    rhs[0] -= lower[0] * u[0];
    rhs[m - 1] -= upper[m - 1] * u[n - 1];
    solve_tridiagonal(&lower, &diag, &upper, &mut rhs)?;
    let mut next = Vec::with_capacity(n);
    next.push(u[0]);
    next.extend_from_slice(&rhs);
    next.push(u[n - 1]);
    let mut clipped = state.clipped;
    for x in next.iter_mut() {
        if !x.is_finite() {
            return Err(Error::Unstable(format!("non-finite value at tau = {}", state.tau + dt)));
        }
        if *x < 0.0 {
            *x = 0.0;
            clipped = true;
        }
    }
    let sup = next.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if sup > state.bound {
        return Err(Error::Unstable(format!(
            "sup norm {sup:.6e} exceeds {:.6e} at tau = {}",
            state.bound,
            state.tau + dt
        )));
    }
    Ok(EvolutionState { grid: state.grid, u: next, tau: state.tau + dt, clipped, bound: state.bound })
}

/// Diagnostics recorded along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub tau: f64,
    /// `H_φ(u)`; `NaN` when the reference profile is not positive.
    pub entropy: f64,
    pub hellinger: f64,
    /// `∫ (u - ū) dy` with `ū` the step between the limits.
    pub moment0: f64,
    /// `∫ y (u - ū) dy`.
    pub moment1: f64,
    /// `max |u - U|`.
    pub sup_deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOptions {
    pub tau_end: f64,
    /// Spacing of the recorded samples in `τ`.
    pub sample_dt: f64,
    pub phi: EntropyDensity,
    pub max_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub final_state: EvolutionState,
    pub steps: usize,
}

impl Trajectory {
    /// `(τ, H_φ)` pairs with `τ ∈ [from, to]`.
    pub fn entropy_series(&self, from: f64, to: f64) -> Vec<(f64, f64)> {
        self.samples
            .iter()
            .filter(|s| s.tau >= from - 1e-12 && s.tau <= to + 1e-12)
            .map(|s| (s.tau, s.entropy))
            .collect()
    }
}

pub fn sample(state: &EvolutionState, reference: &Profile, phi: &EntropyDensity) -> TrajectorySample {
    let grid = &state.grid;
    let big_u = &reference.u[0];
    let entropy = relative_entropy(grid, &state.u, big_u, phi).unwrap_or(f64::NAN);
    let (moment0, moment1) = step_moments(grid, &state.u, reference.boundary.minus()[0], reference.boundary.plus()[0]);
    let sup_deviation = state.u.iter().zip(big_u).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    TrajectorySample {
        tau: state.tau,
        entropy,
        hellinger: hellinger(grid, &state.u, big_u),
        moment0,
        moment1,
        sup_deviation,
    }
}

/// `∫ (u - ū)` and `∫ y (u - ū)` with `ū = U_-` left of 0 and `U_+` right of it.
pub fn step_moments(grid: &Grid, u: &[f64], lo: f64, hi: f64) -> (f64, f64) {
    let c = grid.center();
    let h = grid.spacing();
    let ys = grid.nodes();
    let left: Vec<f64> = (0..=c).map(|i| u[i] - lo).collect();
    let right: Vec<f64> = (c..u.len()).map(|i| u[i] - hi).collect();
    let left1: Vec<f64> = left.iter().enumerate().map(|(i, w)| ys[i] * w).collect();
    let right1: Vec<f64> = right.iter().enumerate().map(|(j, w)| ys[c + j] * w).collect();
    (simpson(&left, h) + simpson(&right, h), simpson(&left1, h) + simpson(&right1, h))
}

/// Integrates to `tau_end`, recording a sample every `sample_dt`; each step uses the
/// stability rule, shortened to land on the sample times.
pub fn evolve(
    initial: EvolutionState,
    flux: &dyn ScalarFlux,
    reference: &Profile,
    options: &EvolveOptions,
) -> Result<Trajectory> {
    if reference.dim() != 1 || reference.grid != initial.grid {
        return Err(Error::InvalidInput("reference profile must be scalar and share the grid".into()));
    }
    if !(options.tau_end > 0.0 && options.sample_dt > 0.0) {
        return Err(Error::InvalidInput("tau_end and sample_dt must be positive".into()));
    }
    let mut state = initial;
    let mut samples = vec![sample(&state, reference, &options.phi)];
    let count = (options.tau_end / options.sample_dt).round().max(1.0) as usize;
    let mut steps = 0;
    for s in 1..=count {
        let target = s as f64 * options.sample_dt;
        while state.tau < target - 1e-12 * target {
            if steps >= options.max_steps {
                return Err(Error::Unstable(format!("step budget {} exhausted at tau = {}", options.max_steps, state.tau)));
            }
            let dt = state.stable_dt(flux).min(target - state.tau);
            state = step_pde(&state, flux, dt)?;
            steps += 1;
        }
        state.tau = target;
        samples.push(sample(&state, reference, &options.phi));
    }
    Ok(Trajectory { samples, final_state: state, steps })
}

/// Largest mismatch in the moment laws
/// `d/dτ ∫(u - ū) = -½ ∫(u - ū)` and `d/dτ ∫y(u - ū) = -(A(U_+) - A(U_-)) - ∫y(u - ū)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentResiduals {
    pub zeroth: f64,
    pub first: f64,
    /// `max |∫(u - ū)|` over the samples.
    pub zeroth_scale: f64,
    /// `max |∫y(u - ū) + A(U_+) - A(U_-)|`, the distance of the first moment from its rest value.
    pub first_scale: f64,
    /// Negated slope of `log |∫(u - ū)|` when the moment keeps one sign.
    pub zeroth_rate: Option<f64>,
}

/// Centered differences in `τ` of the recorded moments against the moment laws;
/// `a_jump = A(U_+) - A(U_-)`.
pub fn moment_odes_check(samples: &[TrajectorySample], a_jump: f64) -> Result<MomentResiduals> {
    if samples.len() < 3 {
        return Err(Error::InvalidInput("moment check needs at least three samples".into()));
    }
    let dt = samples[1].tau - samples[0].tau;
    if !(dt > 0.0) || samples.windows(2).any(|w| ((w[1].tau - w[0].tau) - dt).abs() > 1e-9 * dt) {
        return Err(Error::InvalidInput("moment check needs uniformly spaced samples".into()));
    }
    let mut zeroth: f64 = 0.0;
    let mut first: f64 = 0.0;
    for w in samples.windows(3) {
        let d0 = (w[2].moment0 - w[0].moment0) / (2.0 * dt);
        let d1 = (w[2].moment1 - w[0].moment1) / (2.0 * dt);
        zeroth = zeroth.max((d0 + 0.5 * w[1].moment0).abs());
        first = first.max((d1 + a_jump + w[1].moment1).abs());
    }
    let zeroth_scale = samples.iter().fold(0.0f64, |a, s| a.max(s.moment0.abs()));
    let first_scale = samples.iter().fold(0.0f64, |a, s| a.max((s.moment1 + a_jump).abs()));
    let one_sign = samples.iter().all(|s| s.moment0 > 0.0) || samples.iter().all(|s| s.moment0 < 0.0);
    let zeroth_rate = if one_sign {
        let pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.tau, s.moment0.abs())).collect();
        super::functionals::decay_rate_fit(&pts).ok().map(|f| f.rate)
    } else {
        None
    };
    Ok(MomentResiduals { zeroth, first, zeroth_scale, first_scale, zeroth_rate })
}
