use crate::flux::{FluxMap, VectorFluxMap};
use crate::interp::TildeU;
use crate::profile::Profile;
use crate::quad::{cumulative_trapezoid, integrate, simpson};

/// Largest value of `|q(y)| / (|q(0)| exp(-δ y²/4))` over nodes where `|q|` is above
/// the roundoff floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxEnvelope {
    pub worst_ratio: f64,
    pub q0_norm: f64,
    pub floor: f64,
    pub nodes_checked: usize,
}

/// Multiple of `eps |A| / h`, the roundoff level of a differenced flux, below which
/// `|q|` carries no relative information.
const ENVELOPE_ROUNDOFF: f64 = 2048.0;

pub fn flux_envelope(profile: &Profile, map: &dyn FluxMap, delta: f64) -> FluxEnvelope {
    let n = profile.grid.n_points();
    let c = profile.grid.center();
    let h = profile.grid.spacing();
    let ys = profile.grid.nodes();
    let norm_at = |i: usize| profile.q.iter().map(|qk| qk[i] * qk[i]).sum::<f64>().sqrt();
    let a_max = (0..n)
        .map(|i| map.apply(&profile.at(i)).iter().fold(0.0f64, |a, b| a.max(b.abs())))
        .fold(0.0, f64::max);
    let floor = (ENVELOPE_ROUNDOFF * f64::EPSILON * a_max / h).max(1e-13);
    let q0 = norm_at(c);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for i in 0..n {
        let qi = norm_at(i);
        if qi <= floor {
            continue;
        }
        checked += 1;
        let ratio = (qi.ln() - q0.ln() + 0.25 * delta * ys[i] * ys[i]).exp();
        worst = worst.max(ratio);
    }
    FluxEnvelope {
        worst_ratio: worst,
        q0_norm: q0,
        floor,
        nodes_checked: checked,
    }
}

/// Terms of the a-priori estimate and the derived sup bound.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoremEstimates {
    /// `a_lo ‖U'‖²`.
    pub gradient_term: f64,
    /// `‖U - ũ‖²`.
    pub deviation_term: f64,
    /// `‖v‖²_{H¹} / a_up`.
    pub potential_term: f64,
    /// Sum of the three terms divided by `a_up^{1/2} Δ²`.
    pub apriori_ratio: f64,
    pub envelope: FluxEnvelope,
    /// `max |U - ũ|`.
    pub sup_deviation: f64,
    /// `max |U - ũ| / (a_up^{1/2} Δ / (δ^{1/2} a_lo))` when `δ, a_lo > 0`.
    pub sup_ratio: Option<f64>,
}

/// Evaluates the a-priori quantities with `ũ` built from the map's `a_up` and the
/// potential `v(y) = ∫_{-L}^{y} (U - ũ)`.
pub fn verify_theorem_estimates(profile: &Profile, map: &VectorFluxMap) -> TheoremEstimates {
    let c = &map.constants;
    let grid = &profile.grid;
    let ys = grid.nodes();
    let tilde = TildeU::new(profile.boundary.clone(), c.a_up).expect("certified a_up is positive");
    let m = profile.dim();
    let mut grad = 0.0;
    let mut dev = 0.0;
    let mut pot = 0.0;
    let mut sup_dev: f64 = 0.0;
    for k in 0..m {
        let du = profile.derivative(k);
        grad += integrate(grid, &du.iter().map(|x| x * x).collect::<Vec<_>>());
        let w: Vec<f64> = ys
            .iter()
            .zip(&profile.u[k])
            .map(|(&y, &u)| u - tilde.value(k, y))
            .collect();
        sup_dev = w.iter().fold(sup_dev, |a, b| a.max(b.abs()));
        let w2: Vec<f64> = w.iter().map(|x| x * x).collect();
        dev += integrate(grid, &w2);
        let v = cumulative_trapezoid(grid, &w);
        pot += integrate(grid, &v.iter().map(|x| x * x).collect::<Vec<_>>()) + integrate(grid, &w2);
    }
    let delta_pm = profile.boundary.delta();
    let gradient_term = c.a_lo.max(0.0) * grad;
    let potential_term = pot / c.a_up;
    let scale = c.a_up.sqrt() * delta_pm * delta_pm;
    let total = gradient_term + dev + potential_term;
    let apriori_ratio = if scale > 0.0 { total / scale } else { 0.0 };
    let sup_ratio = if c.delta > 0.0 && c.a_lo > 0.0 && delta_pm > 0.0 {
        Some(sup_dev / (c.a_up.sqrt() * delta_pm / (c.delta.sqrt() * c.a_lo)))
    } else {
        None
    };
    TheoremEstimates {
        gradient_term,
        deviation_term: dev,
        potential_term,
        apriori_ratio,
        envelope: flux_envelope(profile, map.map.as_ref(), c.delta),
        sup_deviation: sup_dev,
        sup_ratio,
    }
}

/// Zeroth and first moments of `U - ū` against the step `ū`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralRelations {
    /// `∫ (U - ū) dy` per component.
    pub moment0: Vec<f64>,
    /// `∫ y (ū - U) dy - (A(U_+) - A(U_-))` per component.
    pub moment1_residual: Vec<f64>,
    /// Largest `|U(±L) - U_±|`.
    pub tail: f64,
    /// False when the profile has not decayed to the limits at the grid ends.
    pub decay_ok: bool,
}

pub fn integral_relations(profile: &Profile, map: &dyn FluxMap) -> IntegralRelations {
    let grid = &profile.grid;
    let ys = grid.nodes();
    let c = grid.center();
    let h = grid.spacing();
    let (lo, hi) = (profile.boundary.minus(), profile.boundary.plus());
    let a_lo = map.apply(lo);
    let a_hi = map.apply(hi);
    let mut moment0 = Vec::new();
    let mut moment1 = Vec::new();
    for k in 0..profile.dim() {
        let u = &profile.u[k];
        let left: Vec<f64> = (0..=c).map(|i| u[i] - lo[k]).collect();
        let right: Vec<f64> = (c..ys.len()).map(|i| u[i] - hi[k]).collect();
        moment0.push(simpson(&left, h) + simpson(&right, h));
        let left1: Vec<f64> = (0..=c).map(|i| -ys[i] * left[i]).collect();
        let right1: Vec<f64> = (c..ys.len()).map(|i| -ys[i] * right[i - c]).collect();
        moment1.push(simpson(&left1, h) + simpson(&right1, h) - (a_hi[k] - a_lo[k]));
    }
    let tail = profile.boundary_mismatch();
    let scale = profile.boundary.delta().max(f64::MIN_POSITIVE);
    IntegralRelations {
        moment0,
        moment1_residual: moment1,
        tail,
        decay_ok: tail <= 1e-10 * scale,
    }
}

/// Largest weak residual `|∫ A_k(U) ψ'' - U_k ((y/2) ψ)' dy|` over `family_size`
/// translated bumps `ψ(y) = exp(1 - 1/(1 - s²))`, `s = (y - c)/r`, per component.
///
/// Derivatives of the test function are taken as grid differences and the integral
/// as a node sum, so the residual of a constant profile vanishes to roundoff and a
/// smooth solution gives `O(h²)`.
pub fn verify_weak_residual(profile: &Profile, map: &dyn FluxMap, family_size: usize) -> f64 {
    let grid = &profile.grid;
    let ys = grid.nodes();
    let n = ys.len();
    let h = grid.spacing();
    let reach = 0.6 * grid.half_width();
    let count = family_size.max(1);
    let radius = (2.0 * reach / count as f64).max(8.0 * h);
    let au: Vec<Vec<f64>> = (0..n).map(|i| map.apply(&profile.at(i))).collect();
    let mut worst: f64 = 0.0;
    for j in 0..count {
        let center = -reach + (j as f64 + 0.5) * 2.0 * reach / count as f64;
        let psi: Vec<f64> = ys.iter().map(|&y| bump((y - center) / radius)).collect();
        let f: Vec<f64> = ys.iter().zip(&psi).map(|(y, p)| 0.5 * y * p).collect();
        for k in 0..profile.dim() {
            let mut acc = 0.0;
            for i in 1..n - 1 {
                let d2 = (psi[i + 1] - 2.0 * psi[i] + psi[i - 1]) / (h * h);
                let d1 = (f[i + 1] - f[i - 1]) / (2.0 * h);
                acc += au[i][k] * d2 - profile.u[k][i] * d1;
            }
            worst = worst.max((acc * h).abs());
        }
    }
    worst
}

fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}
