use super::density::EntropyDensity;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::profile::Profile;
use crate::quad::trapezoid;

/// `H_φ(u) = ∫ φ(u/U) U dy` by the trapezoid rule; `+∞` when `φ` is infinite somewhere.
pub fn relative_entropy(grid: &Grid, u: &[f64], big_u: &[f64], phi: &EntropyDensity) -> Result<f64> {
    check_lengths(grid, u, big_u)?;
    if let Some(i) = big_u.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "relative entropy needs a positive profile; U = {} at node {i}",
            big_u[i]
        )));
    }
    let vals: Vec<f64> = u.iter().zip(big_u).map(|(&u, &w)| phi.value(u.max(0.0) / w) * w).collect();
    if vals.iter().any(|v| v.is_infinite()) {
        return Ok(f64::INFINITY);
    }
    Ok(trapezoid(grid, &vals))
}

/// `∫ (√u - √U)² dy` by the trapezoid rule.
pub fn hellinger(grid: &Grid, u: &[f64], big_u: &[f64]) -> f64 {
    let vals: Vec<f64> = u
        .iter()
        .zip(big_u)
        .map(|(&a, &b)| (a.max(0.0).sqrt() - b.max(0.0).sqrt()).powi(2))
        .collect();
    trapezoid(grid, &vals)
}

fn check_lengths(grid: &Grid, u: &[f64], big_u: &[f64]) -> Result<()> {
    let n = grid.n_points();
    if u.len() != n || big_u.len() != n {
        return Err(Error::InvalidInput(format!(
            "expected {n} nodes, got {} and {}",
            u.len(),
            big_u.len()
        )));
    }
    Ok(())
}

/// `n` points spaced evenly in `log ρ` between `lo` and `hi`.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// `Ĉ = sup_{r ≠ 1} (√r - 1)² / φ(r)`, sampled on `[1e-12, 1e12]` together with the
/// limits at `0`, `1` and `∞`.
pub fn hellinger_constant(phi: &EntropyDensity) -> f64 {
    let (_, q) = phi.exponents();
    let at_zero = 1.0 / phi.value(0.0);
    let at_infinity = if q < 1.0 { 1.0 - q } else { 0.0 };
    // (√r - 1)² ≈ x²/4 and φ ≈ x²/2 near 1.
    let mut sup = at_zero.max(at_infinity).max(0.5);
    for r in logspace(1e-12, 1e12, 24_001) {
        if r == 1.0 {
            continue;
        }
        let f = phi.value(r);
        if f > 0.0 {
            sup = sup.max(((r - 1.0) / (r.sqrt() + 1.0)).powi(2) / f);
        }
    }
    sup
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Negated least-squares slope of `log H` against `τ`.
    pub rate: f64,
    /// Root mean square residual of the fit in `log H`.
    pub residual: f64,
}

pub fn decay_rate_fit(series: &[(f64, f64)]) -> Result<DecayFit> {
    if series.len() < 10 {
        return Err(Error::InvalidInput(format!("decay fit needs at least 10 samples, got {}", series.len())));
    }
    if let Some(&(t, h)) = series.iter().find(|(_, h)| !(*h > 0.0 && h.is_finite())) {
        return Err(Error::InvalidInput(format!("entropy {h} at tau = {t} is not positive")));
    }
    let pts: Vec<(f64, f64)> = series.iter().map(|&(t, h)| (t, h.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("decay fit needs distinct times".into()));
    }
    let slope = sxy / sxx;
    let ss: f64 = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    Ok(DecayFit { rate: -slope, residual: (ss / n).sqrt() })
}

/// Flatness condition of the decay theorems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaMode {
    /// `A' ≥ a_lo` and `|A''| ≤ C_A`: `Σ = sup U'²`, needs `C_A² Σ < a_lo`.
    Lipschitz { c_a: f64, a_lo: f64 },
    /// `A(u) = u^m`: `Σ = sup U'² U^{m-2}`, needs `Σ < 1/(m(m-1)²)`.
    Pme { m: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaReport {
    pub sigma: f64,
    /// Threshold the strict inequality compares against (`∞` for `m = 1`).
    pub threshold: f64,
    pub lambda_predicted: f64,
    pub hypothesis_ok: bool,
}

pub fn sigma_check(profile: &Profile, mode: SigmaMode) -> Result<SigmaReport> {
    if profile.dim() != 1 {
        return Err(Error::InvalidInput("flatness condition is for scalar profiles".into()));
    }
    let u = &profile.u[0];
    if let Some(i) = u.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::Hypothesis(format!("profile touches 0 at node {i} (U = {})", u[i])));
    }
    let du = profile.derivative(0);
    match mode {
        SigmaMode::Lipschitz { c_a, a_lo } => {
            if !(a_lo > 0.0) || !(c_a >= 0.0) {
                return Err(Error::InvalidInput(format!("need a_lo > 0 and C_A >= 0, got {a_lo}, {c_a}")));
            }
            let sigma = du.iter().fold(0.0f64, |a, d| a.max(d * d));
            let threshold = if c_a == 0.0 { f64::INFINITY } else { a_lo / (c_a * c_a) };
            Ok(SigmaReport {
                sigma,
                threshold,
                lambda_predicted: 0.5 * (1.0 - c_a * c_a * sigma / a_lo),
                hypothesis_ok: sigma < threshold,
            })
        }
        SigmaMode::Pme { m } => {
            if !(m >= 1.0) {
                return Err(Error::InvalidInput(format!("porous medium exponent must be >= 1, got {m}")));
            }
            let sigma = du
                .iter()
                .zip(u)
                .fold(0.0f64, |a, (d, &x)| a.max(d * d * x.powf(m - 2.0)));
            let k = m * (m - 1.0).powi(2);
            let threshold = if k == 0.0 { f64::INFINITY } else { 1.0 / k };
            Ok(SigmaReport {
                sigma,
                threshold,
                lambda_predicted: 0.5 * (1.0 - k * sigma),
                hypothesis_ok: sigma < threshold,
            })
        }
    }
}

/// Pointwise inequality used in the decay proofs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InequalityMode {
    /// `φ''(ρ) ρ² (ρ-1)² ≤ 2 φ(ρ)`.
    Ca,
    /// `φ''(ρ) m (ρ^{m-1} - 1)² / (4 ρ^{m-3}) ≤ m (m-1)² φ(ρ) / 2`.
    Pme { m: f64 },
}

impl InequalityMode {
    fn sides(&self, phi: &EntropyDensity, rho: f64) -> (f64, f64) {
        let d2 = phi.d2(rho);
        let f = phi.value(rho);
        match *self {
            InequalityMode::Ca => (d2 * rho * rho * (rho - 1.0).powi(2), 2.0 * f),
            InequalityMode::Pme { m } => {
                let g = ((m - 1.0) * rho.ln()).exp_m1();
                (d2 * m * g * g / (4.0 * rho.powf(m - 3.0)), m * (m - 1.0).powi(2) * f / 2.0)
            }
        }
    }

    /// Ratio of the `x²` coefficients of both sides at `ρ = 1`, where `φ ≈ x²/2`
    /// on either side (`E_p''(1) = 1` for every `p`).
    fn limit_at_one(&self) -> f64 {
        let (lhs, rhs) = match *self {
            InequalityMode::Ca => (1.0, 1.0),
            InequalityMode::Pme { m } => {
                let k = m * (m - 1.0).powi(2);
                (k / 4.0, k / 4.0)
            }
        };
        ratio(lhs, rhs)
    }
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs == 0.0 {
        if lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        lhs / rhs
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityReport {
    pub max_ratio: f64,
    pub worst_rho: f64,
    /// Value of the ratio at `ρ = 1`, taken as the limit of the leading Taylor terms.
    pub limit_at_one: f64,
}

/// `lhs/rhs` of the inequality at one `ρ > 0`, `ρ ≠ 1`.
pub fn inequality_ratio(phi: &EntropyDensity, mode: InequalityMode, rho: f64) -> f64 {
    let (lhs, rhs) = mode.sides(phi, rho);
    ratio(lhs, rhs)
}

pub fn entropy_inequality_check(phi: &EntropyDensity, mode: InequalityMode, rho: &[f64]) -> InequalityReport {
    let limit = mode.limit_at_one();
    let mut max_ratio = limit;
    let mut worst_rho = 1.0;
    for &r in rho {
        if !(r > 0.0) || r == 1.0 {
            continue;
        }
        let q = inequality_ratio(phi, mode, r);
        if q > max_ratio {
            max_ratio = q;
            worst_rho = r;
        }
    }
    InequalityReport { max_ratio, worst_rho, limit_at_one: limit }
}
