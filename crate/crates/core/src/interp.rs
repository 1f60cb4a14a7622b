//! Smoothed step between the boundary limits.
//!
//! `ũ(y) = ½(1 - χ(y/√a))U_- + ½(1 + χ(y/√a))U_+` with the odd quintic
//! `χ(s) = 15s/8 - 5s³/4 + 3s⁵/8` clamped to `[-1, 1]`. The quintic is C² at
//! `s = ±1`, so `ũ` equals the step function for `|y| ≥ √a`.

use crate::error::{Error, Result};
use crate::grid::BoundaryPair;

pub fn chi(s: f64) -> f64 {
    if s >= 1.0 {
        1.0
    } else if s <= -1.0 {
        -1.0
    } else {
        let s2 = s * s;
        s * (15.0 / 8.0 - s2 * (5.0 / 4.0 - s2 * 3.0 / 8.0))
    }
}

pub fn chi_prime(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let t = 1.0 - s * s;
        15.0 / 8.0 * t * t
    }
}

pub fn chi_second(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        -7.5 * s * (1.0 - s * s)
    }
}

/// `∫_{-1}^{s} t χ'(t) dt`, which vanishes again at `s = 1` by oddness.
fn moment_chi(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let s2 = s * s;
        15.0 / 8.0 * (s2 / 2.0 - s2 * s2 / 2.0 + s2 * s2 * s2 / 6.0 - 1.0 / 6.0)
    }
}

/// The smoothed interpolant `ũ` with its first two derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct TildeU {
    boundary: BoundaryPair,
    a_up: f64,
}

impl TildeU {
    pub fn new(boundary: BoundaryPair, a_up: f64) -> Result<Self> {
        if !(a_up.is_finite() && a_up > 0.0) {
            return Err(Error::InvalidInput(format!(
                "interpolation scale must be positive and finite, got {a_up}"
            )));
        }
        Ok(Self { boundary, a_up })
    }

    pub fn boundary(&self) -> &BoundaryPair {
        &self.boundary
    }

    pub fn a_up(&self) -> f64 {
        self.a_up
    }

    pub fn dim(&self) -> usize {
        self.boundary.dim()
    }

    /// Half-width of the transition layer; `ũ` is the exact step outside it.
    pub fn support_radius(&self) -> f64 {
        self.a_up.sqrt()
    }

    fn jump(&self, k: usize) -> f64 {
        self.boundary.plus()[k] - self.boundary.minus()[k]
    }

    pub fn value(&self, k: usize, y: f64) -> f64 {
        let c = chi(y / self.a_up.sqrt());
        let (lo, hi) = (self.boundary.minus()[k], self.boundary.plus()[k]);
        0.5 * (1.0 - c) * lo + 0.5 * (1.0 + c) * hi
    }

    pub fn first(&self, k: usize, y: f64) -> f64 {
        let r = self.a_up.sqrt();
        0.5 * self.jump(k) * chi_prime(y / r) / r
    }

    pub fn second(&self, k: usize, y: f64) -> f64 {
        0.5 * self.jump(k) * chi_second(y / self.a_up.sqrt()) / self.a_up
    }

    pub fn values(&self, y: f64) -> Vec<f64> {
        (0..self.dim()).map(|k| self.value(k, y)).collect()
    }

    /// Source `g(y) = ∫_{-∞}^{y} (η/2) ũ'(η) dη`, evaluated in closed form.
    pub fn source(&self, k: usize, y: f64) -> f64 {
        let r = self.a_up.sqrt();
        0.25 * self.jump(k) * r * moment_chi(y / r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn chi_saturates_with_matching_derivatives() {
        assert_eq!(chi(1.0), 1.0);
        assert_eq!(chi(-1.0), -1.0);
        let near = 1.0 - 1e-9;
        assert!((chi(near) - 1.0).abs() < 1e-15);
        assert!(chi_prime(near) < 1e-15);
        assert!(chi_second(near).abs() < 1e-7);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for &s in &[-0.9, -0.3, 0.0, 0.2, 0.7] {
            let fd1 = (chi(s + h) - chi(s - h)) / (2.0 * h);
            let fd2 = (chi_prime(s + h) - chi_prime(s - h)) / (2.0 * h);
            assert!((fd1 - chi_prime(s)).abs() < 1e-9);
            assert!((fd2 - chi_second(s)).abs() < 1e-8);
        }
    }

    #[test]
    fn interpolant_examples() {
        let b = BoundaryPair::scalar(-1.0, 3.0).unwrap();
        let t = TildeU::new(b, 1.0).unwrap();
        assert_eq!(t.value(0, 0.0), 1.0);
        assert_eq!(t.value(0, 2.0), 3.0);
        assert_eq!(t.value(0, -2.0), -1.0);
        let flat = TildeU::new(BoundaryPair::scalar(0.7, 0.7).unwrap(), 2.0).unwrap();
        for y in [-3.0, -0.4, 0.0, 1.1] {
            assert!((flat.value(0, y) - 0.7).abs() < 1e-15);
            assert_eq!(flat.source(0, y), 0.0);
        }
        assert!(TildeU::new(BoundaryPair::scalar(0.0, 1.0).unwrap(), 0.0).is_err());
    }

    #[test]
    fn source_matches_numerical_integral() {
        let b = BoundaryPair::scalar(0.0, 2.0).unwrap();
        let t = TildeU::new(b, 2.5).unwrap();
        let n = 200_000;
        let (a, y) = (-2.0, 0.8);
        let h = (y - a) / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let eta = a + (i as f64 + 0.5) * h;
            acc += 0.5 * eta * t.first(0, eta) * h;
        }
        assert!((acc - t.source(0, y)).abs() < 1e-9);
        assert_eq!(t.source(0, 1.6), 0.0);
        assert_eq!(t.source(0, -1.6), 0.0);
    }

    #[test]
    fn source_vanishes_outside_layer_for_unit_scale() {
        let t = TildeU::new(BoundaryPair::scalar(0.0, 1.0).unwrap(), 1.0).unwrap();
        assert_eq!(t.source(0, 1.5), 0.0);
    }

    proptest! {
        #[test]
        fn interpolant_is_point_symmetric(
            lo in -5.0f64..5.0, hi in -5.0f64..5.0, a in 0.01f64..50.0, y in -20.0f64..20.0
        ) {
            let t = TildeU::new(BoundaryPair::scalar(lo, hi).unwrap(), a).unwrap();
            let s = t.value(0, y) + t.value(0, -y);
            prop_assert!((s - lo - hi).abs() < 1e-12 * (1.0 + lo.abs() + hi.abs()));
        }

        #[test]
        fn interpolant_equals_step_outside_layer(
            lo in -5.0f64..5.0, hi in -5.0f64..5.0, a in 0.01f64..50.0, f in 1.0f64..10.0
        ) {
            let b = BoundaryPair::scalar(lo, hi).unwrap();
            let t = TildeU::new(b.clone(), a).unwrap();
            let y = f * a.sqrt();
            prop_assert_eq!(t.value(0, y), hi);
            prop_assert_eq!(t.value(0, -y), lo);
            prop_assert_eq!(t.source(0, y), 0.0);
        }

        #[test]
        fn chi_is_odd_and_monotone(s in -2.0f64..2.0, ds in 0.0f64..1.0) {
            prop_assert_eq!(chi(-s), -chi(s));
            prop_assert!(chi(s + ds) >= chi(s));
        }
    }
}
