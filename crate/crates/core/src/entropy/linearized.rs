use crate::flux::ScalarFlux;
use crate::profile::{derivative, Profile};

/// `L_U v = (A'(U) v)'' + (y/2) v'` by centered differences; zero at the end nodes.
pub fn linearized_apply(profile: &Profile, flux: &dyn ScalarFlux, v: &[f64]) -> Vec<f64> {
    let grid = &profile.grid;
    let h = grid.spacing();
    let ys = grid.nodes();
    let n = v.len();
    let w: Vec<f64> = profile.u[0].iter().zip(v).map(|(&u, &v)| flux.diffusivity(u) * v).collect();
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = (w[i + 1] - 2.0 * w[i] + w[i - 1]) / (h * h) + 0.25 * ys[i] * (v[i + 1] - v[i - 1]) / h;
    }
    out
}

/// `L*_U w = A'(U) w'' - ((y/2) w)'` by centered differences; zero at the end nodes.
pub fn adjoint_apply(profile: &Profile, flux: &dyn ScalarFlux, w: &[f64]) -> Vec<f64> {
    let grid = &profile.grid;
    let h = grid.spacing();
    let ys = grid.nodes();
    let n = w.len();
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        let d = flux.diffusivity(profile.u[0][i]);
        out[i] = d * (w[i + 1] - 2.0 * w[i] + w[i - 1]) / (h * h)
            - 0.25 * (ys[i + 1] * w[i + 1] - ys[i - 1] * w[i - 1]) / h;
    }
    out
}

/// Relative residuals of the eigenpairs `(U', -1/2)` and `(y U', -1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenResiduals {
    /// `‖L U' + U'/2‖∞ / ‖U'‖∞`; `None` for a constant profile.
    pub r1: Option<f64>,
    /// `‖L(yU') + yU'‖∞ / ‖yU'‖∞`; `None` for a constant profile.
    pub r2: Option<f64>,
}

/// Nodes where `|V|` is below this fraction of `‖V‖∞` are left out of the residual.
pub const EIGEN_WEIGHT_FLOOR: f64 = 1e-8;

pub fn eigen_residuals(profile: &Profile, flux: &dyn ScalarFlux) -> EigenResiduals {
    let ys = profile.grid.nodes();
    let v1 = derivative(&profile.grid, &profile.u[0]);
    let v2: Vec<f64> = v1.iter().zip(&ys).map(|(v, y)| v * y).collect();
    EigenResiduals {
        r1: residual(profile, flux, &v1, -0.5),
        r2: residual(profile, flux, &v2, -1.0),
    }
}

fn residual(profile: &Profile, flux: &dyn ScalarFlux, v: &[f64], lambda: f64) -> Option<f64> {
    let scale = v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let u_max = profile.u[0].iter().fold(0.0f64, |a, b| a.max(b.abs()));
    // Differences of a constant profile leave only rounding noise.
    if scale <= 64.0 * f64::EPSILON * u_max / profile.grid.spacing() {
        return None;
    }
    let lv = linearized_apply(profile, flux, v);
    let n = v.len();
    let worst = (1..n - 1)
        .filter(|&i| v[i].abs() > EIGEN_WEIGHT_FLOOR * scale)
        .map(|i| (lv[i] - lambda * v[i]).abs())
        .fold(0.0, f64::max);
    Some(worst / scale)
}
