use crate::flux::ScalarDiffusivity;
use crate::grid::BoundaryPair;
use crate::profile::Profile;
use crate::quad::tanh_sinh;

/// A-priori intervals for the centre value and the centre flux.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Brackets {
    pub u0: (f64, f64),
    pub q0: (f64, f64),
}

/// Intervals containing `U(0)` and `Q(0)` for diffusivities in `[d_star, d_sup]`.
pub fn q0_u0_brackets(d_star: f64, d_sup: f64, boundary: &BoundaryPair) -> Brackets {
    let (lo, hi) = (boundary.minus()[0], boundary.plus()[0]);
    let delta = hi - lo;
    let gamma = if d_sup > 0.0 {
        (d_star.max(0.0) / (2.0 * d_sup)).sqrt()
    } else {
        0.0
    };
    Brackets {
        u0: ((lo + gamma * hi) / (1.0 + gamma), (gamma * lo + hi) / (1.0 + gamma)),
        q0: ((d_star.max(0.0) / 16.0).sqrt() * delta, (d_sup / 8.0).sqrt() * delta),
    }
}

/// Two-sided bounds on `2 Q(0)²` obtained separately from each half-line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxSquareBounds {
    pub left: (f64, f64),
    pub right: (f64, f64),
}

impl FluxSquareBounds {
    /// Whether `2 q0²` lies in both intervals up to the relative `slack`.
    pub fn contains(&self, q0: f64, slack: f64) -> bool {
        let v = 2.0 * q0 * q0;
        [self.left, self.right]
            .iter()
            .all(|&(a, b)| v >= a * (1.0 - slack) && v <= b * (1.0 + slack))
    }
}

/// `∫_{U_-}^{U0} (s - U_-) D ≤ 2Q0² ≤ (U0 - U_-) ∫_{U_-}^{U0} D` and the mirrored pair.
pub fn flux_square_bounds(d: &ScalarDiffusivity, u0: f64) -> FluxSquareBounds {
    let (lo, hi) = d.interval();
    let tol = 1e-12;
    let left_lo = tanh_sinh(|s, dl, _| dl * d.d(s), lo, u0, tol).value;
    let left_hi = (u0 - lo) * tanh_sinh(|s, _, _| d.d(s), lo, u0, tol).value;
    let right_lo = tanh_sinh(|s, _, dr| dr * d.d(s), u0, hi, tol).value;
    let right_hi = (hi - u0) * tanh_sinh(|s, _, _| d.d(s), u0, hi, tol).value;
    FluxSquareBounds {
        left: (left_lo, left_hi),
        right: (right_lo, right_hi),
    }
}

/// Bounds on the support of a degenerate profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportEndpoints {
    /// `y_-^*`, or `-∞` when the defining integral diverges.
    pub minus: f64,
    /// `y_+^*`, or `+∞` when the defining integral diverges.
    pub plus: f64,
    pub minus_converged: bool,
    pub plus_converged: bool,
}

/// `y_+^* = ((U_+ - U0)/Q0) ∫_{U0}^{U_+} D(u)/(U_+ - u) du` and the mirrored `y_-^*`.
pub fn support_endpoints(d: &ScalarDiffusivity, u0: f64, q0: f64) -> SupportEndpoints {
    let (lo, hi) = d.interval();
    if !(q0 > 0.0) {
        return SupportEndpoints {
            minus: f64::NEG_INFINITY,
            plus: f64::INFINITY,
            minus_converged: false,
            plus_converged: false,
        };
    }
    let tol = 1e-10;
    let right = tanh_sinh(|u, _, dr| d.d(u) / dr, u0, hi, tol);
    let left = tanh_sinh(|u, dl, _| d.d(u) / dl, lo, u0, tol);
    let plus = if right.converged {
        (hi - u0) / q0 * right.value
    } else {
        f64::INFINITY
    };
    let minus = if left.converged {
        -(u0 - lo) / q0 * left.value
    } else {
        f64::NEG_INFINITY
    };
    SupportEndpoints {
        minus,
        plus,
        minus_converged: left.converged,
        plus_converged: right.converged,
    }
}

/// Worst ratio in the Gaussian comparison of tails and fluxes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianCheck {
    /// Largest `lhs / rhs` over all admissible pairs; at most 1 when the bounds hold.
    pub worst_ratio: f64,
    pub pairs_checked: usize,
}

/// Values below this fraction of their scale are treated as roundoff and skipped.
const GAUSSIAN_FLOOR: f64 = 1e-10;

/// Checks `w(y) ≤ w(z) exp(-(y² - z²)/(4 D_sup))` for `0 ≤ z ≤ y`, with `w` either
/// the tail `U_+ - U(y)`, the mirrored tail `U(-y) - U_-`, or the flux `Q(±y)`.
pub fn verify_gaussian_bounds(profile: &Profile, d_sup: f64) -> GaussianCheck {
    let grid = profile.grid;
    let ys = grid.nodes();
    let c = grid.center();
    let (lo, hi) = (profile.boundary.minus()[0], profile.boundary.plus()[0]);
    let u = &profile.u[0];
    let q = &profile.q[0];
    let qmax = q.iter().copied().fold(0.0, f64::max);
    let scale_u = (hi - lo).abs();

    let mut worst: f64 = 0.0;
    let mut pairs = 0usize;
    let mut check = |w: &dyn Fn(usize) -> f64, scale: f64| {
        // Running minimum of log w(z) + z²/(4D) over admissible z ≤ y.
        let mut best = f64::INFINITY;
        for k in 0..=c {
            let z = ys[c + k];
            let val = w(k);
            if !(val > GAUSSIAN_FLOOR * scale) {
                continue;
            }
            let phi = val.ln() + z * z / (4.0 * d_sup);
            if best.is_finite() {
                worst = worst.max((phi - best).exp());
                pairs += 1;
            }
            best = best.min(phi);
        }
    };
    check(&|k| hi - u[c + k], scale_u);
    check(&|k| u[c - k] - lo, scale_u);
    check(&|k| q[c + k], qmax);
    check(&|k| q[c - k], qmax);
    GaussianCheck {
        worst_ratio: worst,
        pairs_checked: pairs,
    }
}

/// Both sides of the `L^p` bound on `U'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// False when the weight integral diverges; the comparison is then skipped.
    pub weight_converged: bool,
}

/// Compares `‖U'‖_p^p` with `Ĉ_θ^{p-1} C̃_{p,θ}` where
/// `Ĉ_θ = √(2 D_sup/(1-θ)) Δ / ((U_+ - U(0))^θ (U(0) - U_-)^θ)` and
/// `C̃_{p,θ} = ∫ ((U_+ - u)^θ (u - U_-)^θ / D(u))^{p-1} du`.
pub fn lp_derivative_check(profile: &Profile, d: &ScalarDiffusivity, p: f64, theta: f64) -> LpCheck {
    let grid = profile.grid;
    let h = grid.spacing();
    let u = &profile.u[0];
    let lhs: f64 = u.windows(2).map(|w| ((w[1] - w[0]) / h).abs().powf(p) * h).sum();
    let (lo, hi) = (profile.boundary.minus()[0], profile.boundary.plus()[0]);
    let delta = hi - lo;
    let u0 = u[grid.center()];
    let c_hat = (2.0 * d.d_sup() / (1.0 - theta)).sqrt() * delta
        / ((hi - u0).powf(theta) * (u0 - lo).powf(theta));
    let weight = tanh_sinh(
        |x, dl, dr| ((dr.powf(theta) * dl.powf(theta)) / d.d(x)).powf(p - 1.0),
        lo,
        hi,
        1e-7,
    );
    let rhs = if weight.converged {
        c_hat.powf(p - 1.0) * weight.value
    } else {
        f64::INFINITY
    };
    LpCheck {
        lhs,
        rhs,
        holds: weight.converged && lhs <= rhs * (1.0 + 1e-12),
        weight_converged: weight.converged,
    }
}

/// Fits the exponent `κ` in `U(y) - U_- ≈ c (y - y_f)^κ` just right of a left free
/// boundary `y_f`, using the first `count` nodes with `U > U_-`.
pub fn front_exponent(profile: &Profile, count: usize) -> Option<f64> {
    let ys = profile.grid.nodes();
    let u = &profile.u[0];
    let lo = profile.boundary.minus()[0];
    let first = u.iter().position(|&v| v > lo)?;
    if first == 0 {
        return None;
    }
    let y_f = ys[first - 1];
    let pts: Vec<(f64, f64)> = (first..(first + count).min(u.len()))
        .filter(|&i| u[i] - lo > 0.0)
        .map(|i| ((ys[i] - y_f).ln(), (u[i] - lo).ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    Some(fit_slope(&pts))
}

/// Least-squares slope of `(x, y)` pairs.
pub fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
