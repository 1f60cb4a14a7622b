/// Convex entropy densities with `φ(1) = φ'(1) = 0` and `φ''(1) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntropyDensity {
    /// `E_p(ρ) = (ρ^p - pρ + p - 1)/(p(p-1))`, with the logarithmic limits at `p = 0, 1`.
    Power { p: f64 },
    /// `E_p` on `[0, 1]` glued to `E_q` on `[1, ∞)`.
    Split { p: f64, q: f64 },
}

/// Below this distance to `ρ = 1` the Taylor series is used.
const SERIES_RADIUS: f64 = 0.1;

impl EntropyDensity {
    pub fn e(p: f64) -> Self {
        EntropyDensity::Power { p }
    }

    pub fn split(p: f64, q: f64) -> Self {
        EntropyDensity::Split { p, q }
    }

    /// `φ_m = φ_{p_m, q_m}` with `p_m = max(1/2, m-1)`, `q_m = min(1/2, 2-m)`.
    pub fn phi_m(m: f64) -> Self {
        EntropyDensity::Split { p: (m - 1.0).max(0.5), q: (2.0 - m).min(0.5) }
    }

    pub fn label(&self) -> String {
        match *self {
            EntropyDensity::Power { p } => format!("E_{p}"),
            EntropyDensity::Split { p, q } => format!("phi_{{{p},{q}}}"),
        }
    }

    fn exponent(&self, rho: f64) -> f64 {
        match *self {
            EntropyDensity::Power { p } => p,
            EntropyDensity::Split { p, q } => {
                if rho <= 1.0 {
                    p
                } else {
                    q
                }
            }
        }
    }

    /// Exponents used below and above `ρ = 1`.
    pub fn exponents(&self) -> (f64, f64) {
        match *self {
            EntropyDensity::Power { p } => (p, p),
            EntropyDensity::Split { p, q } => (p, q),
        }
    }

    pub fn value(&self, rho: f64) -> f64 {
        power_value(self.exponent(rho), rho)
    }

    pub fn d1(&self, rho: f64) -> f64 {
        power_d1(self.exponent(rho), rho)
    }

    pub fn d2(&self, rho: f64) -> f64 {
        if rho < 0.0 {
            return f64::NAN;
        }
        rho.powf(self.exponent(rho) - 2.0)
    }
}

fn power_value(p: f64, rho: f64) -> f64 {
    if rho.is_nan() || rho < 0.0 {
        return f64::NAN;
    }
    if rho == 0.0 {
        return if p == 1.0 {
            1.0
        } else if p > 0.0 {
            1.0 / p
        } else {
            f64::INFINITY
        };
    }
    if rho.is_infinite() {
        return f64::INFINITY;
    }
    let x = rho - 1.0;
    if x.abs() < SERIES_RADIUS {
        return series(p, x);
    }
    let l = log_rho(rho);
    if p == 1.0 {
        rho * l - x
    } else if p == 0.0 {
        x - l
    } else {
        ((p * l).exp_m1() - p * x) / (p * (p - 1.0))
    }
}

/// `Σ_j C(p-2, j) x^{j+2} / ((j+1)(j+2))`, the twice integrated binomial series of `ρ^{p-2}`.
fn series(p: f64, x: f64) -> f64 {
    let mut coeff = 1.0;
    let mut pow = x * x;
    let mut sum = 0.0;
    for j in 0..80 {
        let jf = j as f64;
        let term = coeff * pow / ((jf + 1.0) * (jf + 2.0));
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        coeff *= (p - 2.0 - jf) / (jf + 1.0);
        pow *= x;
    }
    sum
}

fn power_d1(p: f64, rho: f64) -> f64 {
    if rho.is_nan() || rho < 0.0 {
        return f64::NAN;
    }
    let l = log_rho(rho);
    if p == 1.0 {
        l
    } else {
        ((p - 1.0) * l).exp_m1() / (p - 1.0)
    }
}

/// `ln ρ`, through `ln_1p(ρ - 1)` near 1 where `ρ - 1` is exact.
fn log_rho(rho: f64) -> f64 {
    if (0.5..=2.0).contains(&rho) {
        (rho - 1.0).ln_1p()
    } else {
        rho.ln()
    }
}
