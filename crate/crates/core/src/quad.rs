//! Quadrature: grid rules and double-exponential integration of endpoint-singular integrands.

use crate::grid::Grid;

/// Outcome of an adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
    /// False when the estimates did not settle or the endpoint tail indicates divergence.
    pub converged: bool,
}

const T_MAX: f64 = 4.0;
/// Distances (relative to the half width) bounding the two endpoint tails compared
/// for divergence. Integrable power singularities lose mass quickly between them;
/// a logarithmic divergence loses only a fixed fraction.
const TAIL_NEAR: f64 = 1e-8;
const TAIL_FAR: f64 = 1e-16;
/// Largest admissible ratio of far to near tail mass, i.e. `|f| ~ dist^{-α}` with
/// `α < 0.875` counts as integrable.
const TAIL_RATIO: f64 = 0.1;

/// Tanh-sinh quadrature of `f` over `[a, b]`.
///
/// The integrand is called as `f(x, x - a, b - x)` with the two distances computed
/// without cancellation, so singular factors such as `1/(b - x)` stay accurate down
/// to distances of order `1e-37 (b - a)`.
pub fn tanh_sinh<F>(f: F, a: f64, b: f64, tol: f64) -> Quad
where
    F: Fn(f64, f64, f64) -> f64,
{
    if a == b {
        return Quad {
            value: 0.0,
            error: 0.0,
            converged: true,
        };
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let hw = 0.5 * (hi - lo);
    let half_pi = std::f64::consts::FRAC_PI_2;

    // Returns (weighted value, near tail, far tail, finite flag).
    // Points whose abscissa rounds onto an endpoint are dropped when the integrand
    // cannot be evaluated there.
    let eval = |t: f64| -> (f64, f64, f64, bool) {
        let u = half_pi * t.sinh();
        let w = half_pi * t.cosh() / (u.cosh() * u.cosh());
        let dl = 2.0 * hw / (1.0 + (-2.0 * u).exp());
        let dr = 2.0 * hw / (1.0 + (2.0 * u).exp());
        let x = if t < 0.0 { lo + dl } else { hi - dr };
        let v = hw * w * f(x, dl, dr);
        if !v.is_finite() {
            let resolvable = x > lo && x < hi;
            return (0.0, 0.0, 0.0, !resolvable);
        }
        let dist = dl.min(dr);
        let near = if dist < TAIL_NEAR * hw { v.abs() } else { 0.0 };
        let far = if dist < TAIL_FAR * hw { v.abs() } else { 0.0 };
        (v, near, far, true)
    };

    let mut h = 1.0;
    let mut sum = 0.0;
    let mut near = 0.0;
    let mut far = 0.0;
    let mut finite = true;
    let n0 = (T_MAX / h) as i64;
    for k in -n0..=n0 {
        let (v, tn, tf, ok) = eval(k as f64 * h);
        sum += v;
        near += tn;
        far += tf;
        finite &= ok;
    }
    let mut estimate = h * sum;
    let mut error = f64::INFINITY;
    let mut settled = false;
    for _level in 1..=12 {
        h *= 0.5;
        let n = (T_MAX / h) as i64;
        let mut k = -n + if n % 2 == 0 { 1 } else { 0 };
        while k <= n {
            let (v, tn, tf, ok) = eval(k as f64 * h);
            sum += v;
            near += tn;
            far += tf;
            finite &= ok;
            k += 2;
        }
        let next = h * sum;
        error = (next - estimate).abs();
        estimate = next;
        if error <= tol * estimate.abs().max(1e-300) {
            settled = true;
            break;
        }
    }
    let diverging = far > TAIL_RATIO * near && h * far > 1e-8 * estimate.abs();
    Quad {
        value: sign * estimate,
        error,
        converged: settled && finite && !diverging && estimate.is_finite(),
    }
}

/// Composite Simpson rule over equally spaced samples; falls back to a 3/8 panel
/// when the interval count is odd and to the trapezoid for two samples.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (values[0] + values[1]),
        3 => h / 3.0 * (values[0] + 4.0 * values[1] + values[2]),
        _ => {
            let intervals = n - 1;
            let even_end = if intervals % 2 == 0 { n - 1 } else { n - 4 };
            let mut total = 0.0;
            if even_end > 0 {
                let mut acc = values[0] + values[even_end];
                for (i, v) in values.iter().enumerate().take(even_end).skip(1) {
                    acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
                }
                total = h / 3.0 * acc;
            }
            if even_end != n - 1 {
                let s = &values[even_end..];
                total += 3.0 * h / 8.0 * (s[0] + 3.0 * s[1] + 3.0 * s[2] + s[3]);
            }
            total
        }
    }
}

/// Integral over the whole grid of node samples, split at `y = 0` so that a kink or
/// jump located at the center node does not degrade the rule.
pub fn integrate(grid: &Grid, values: &[f64]) -> f64 {
    let c = grid.center();
    let h = grid.spacing();
    simpson(&values[..=c], h) + simpson(&values[c..], h)
}

/// Trapezoid rule over the grid.
pub fn trapezoid(grid: &Grid, values: &[f64]) -> f64 {
    let h = grid.spacing();
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    h * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1]))
}

/// Running trapezoid integral starting from zero at the first node.
pub fn cumulative_trapezoid(grid: &Grid, values: &[f64]) -> Vec<f64> {
    let h = grid.spacing();
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Five-point Gauss-Legendre nodes and weights on `[-1, 1]`.
pub const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];
