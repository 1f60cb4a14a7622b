//! Uniform symmetric meshes and boundary data.

use crate::error::{ensure_finite, Error, Result};

/// Default node count used when a problem does not specify one.
pub const DEFAULT_POINTS: usize = 2001;

/// Uniform mesh on `[-L, L]` with an odd number of nodes, so `y = 0` is a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    half_width: f64,
    n_points: usize,
}

impl Grid {
    pub fn new(half_width: f64, n_points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidInput(format!(
                "half width must be positive and finite, got {half_width}"
            )));
        }
        if n_points < 3 || n_points % 2 == 0 {
            return Err(Error::InvalidInput(format!(
                "point count must be odd and at least 3, got {n_points}"
            )));
        }
        Ok(Self {
            half_width,
            n_points,
        })
    }

    /// Width chosen so that `exp(-L^2 / (4 d_max)) < 1e-12`.
    pub fn default_half_width(d_max: f64) -> f64 {
        (4.0 * d_max.max(f64::MIN_POSITIVE) * 27.7).sqrt().ceil()
    }

    /// Default mesh for a problem whose largest diffusion scale is `d_max`.
    pub fn for_scale(d_max: f64) -> Result<Self> {
        Self::new(Self::default_half_width(d_max), DEFAULT_POINTS)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n_points - 1) as f64
    }

    /// Index of the node at `y = 0`.
    pub fn center(&self) -> usize {
        (self.n_points - 1) / 2
    }

    pub fn node(&self, i: usize) -> f64 {
        // Computed from the center so that the mesh is exactly symmetric.
        let k = i as f64 - self.center() as f64;
        k * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.node(i)).collect()
    }
}

/// Limits `U_-` and `U_+` of a profile at `y = -inf` and `y = +inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPair {
    minus: Vec<f64>,
    plus: Vec<f64>,
}

impl BoundaryPair {
    pub fn new(minus: Vec<f64>, plus: Vec<f64>) -> Result<Self> {
        if minus.is_empty() || minus.len() != plus.len() {
            return Err(Error::InvalidInput(format!(
                "boundary vectors must be nonempty and of equal length ({} vs {})",
                minus.len(),
                plus.len()
            )));
        }
        ensure_finite(&minus, "boundary U_-")?;
        ensure_finite(&plus, "boundary U_+")?;
        Ok(Self { minus, plus })
    }

    pub fn scalar(minus: f64, plus: f64) -> Result<Self> {
        Self::new(vec![minus], vec![plus])
    }

    pub fn dim(&self) -> usize {
        self.minus.len()
    }

    pub fn minus(&self) -> &[f64] {
        &self.minus
    }

    pub fn plus(&self) -> &[f64] {
        &self.plus
    }

    /// Euclidean distance `|U_+ - U_-|`.
    pub fn delta(&self) -> f64 {
        self.minus
            .iter()
            .zip(&self.plus)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }

    /// Step function `ū(y)`: `U_-` for `y < 0`, `U_+` for `y > 0`, midpoint at 0.
    pub fn step(&self, k: usize, y: f64) -> f64 {
        if y < 0.0 {
            self.minus[k]
        } else if y > 0.0 {
            self.plus[k]
        } else {
            0.5 * (self.minus[k] + self.plus[k])
        }
    }
}
