use crate::error::{Error, Result};
use crate::grid::{BoundaryPair, Grid};

/// Grid samples of a profile `U` and its flux `Q = (A(U))'`.
///
/// Values are stored component-major: `u[k][i]` is component `k` at node `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub grid: Grid,
    pub u: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
    pub boundary: BoundaryPair,
}

impl Profile {
    pub fn new(grid: Grid, u: Vec<Vec<f64>>, q: Vec<Vec<f64>>, boundary: BoundaryPair) -> Result<Self> {
        let m = boundary.dim();
        let n = grid.n_points();
        if u.len() != m || q.len() != m {
            return Err(Error::InvalidInput(format!(
                "profile has {} value and {} flux components, boundary has {m}",
                u.len(),
                q.len()
            )));
        }
        if u.iter().chain(q.iter()).any(|c| c.len() != n) {
            return Err(Error::InvalidInput(format!("profile components must have {n} nodes")));
        }
        Ok(Self { grid, u, q, boundary })
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    /// Values of all components at node `i`.
    pub fn at(&self, i: usize) -> Vec<f64> {
        self.u.iter().map(|c| c[i]).collect()
    }

    /// Largest deviation of the end nodes from the boundary limits.
    pub fn boundary_mismatch(&self) -> f64 {
        let last = self.grid.n_points() - 1;
        (0..self.dim())
            .map(|k| {
                let lo = (self.u[k][0] - self.boundary.minus()[k]).abs();
                let hi = (self.u[k][last] - self.boundary.plus()[k]).abs();
                lo.max(hi)
            })
            .fold(0.0, f64::max)
    }

    /// Second-order derivative of component `k` (centered inside, one-sided at the ends).
    pub fn derivative(&self, k: usize) -> Vec<f64> {
        derivative(&self.grid, &self.u[k])
    }

    /// Largest componentwise difference to another profile on the same grid.
    pub fn sup_distance(&self, other: &Profile) -> f64 {
        self.u
            .iter()
            .zip(&other.u)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// Second-order finite-difference derivative of node samples.
pub fn derivative(grid: &Grid, f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let h = grid.spacing();
    let mut d = vec![0.0; n];
    if n < 3 {
        return d;
    }
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    for i in 1..n - 1 {
        d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    }
    d
}

/// Second-order finite-difference second derivative; the end values copy their neighbours.
pub fn second_derivative(grid: &Grid, f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let h2 = grid.spacing().powi(2);
    let mut d = vec![0.0; n];
    for i in 1..n.saturating_sub(1) {
        d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
    }
    if n >= 3 {
        d[0] = d[1];
        d[n - 1] = d[n - 2];
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_is_exact_for_quadratics() {
        let g = Grid::new(2.0, 9).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|y| y * y - 3.0 * y).collect();
        let d = derivative(&g, &f);
        for (i, y) in g.nodes().iter().enumerate() {
            assert!((d[i] - (2.0 * y - 3.0)).abs() < 1e-12);
        }
        let d2 = second_derivative(&g, &f);
        assert!(d2.iter().all(|v| (v - 2.0).abs() < 1e-12));
    }

    #[test]
    fn shape_is_validated() {
        let g = Grid::new(1.0, 3).unwrap();
        let b = BoundaryPair::scalar(0.0, 1.0).unwrap();
        assert!(Profile::new(g, vec![vec![0.0; 3]], vec![vec![0.0; 2]], b.clone()).is_err());
        let p = Profile::new(g, vec![vec![0.0, 0.5, 1.0]], vec![vec![0.0; 3]], b).unwrap();
        assert_eq!(p.boundary_mismatch(), 0.0);
        assert_eq!(p.at(1), vec![0.5]);
    }
}
