//! Banded solvers for the discretized profile and evolution equations.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Solves a tridiagonal system in place of `rhs` (Thomas algorithm).
///
/// `lower[i]` couples row `i` to unknown `i - 1` (ignored for `i = 0`),
/// `upper[i]` couples row `i` to unknown `i + 1` (ignored for the last row).
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
) -> Result<()> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut beta = diag[0];
    if beta == 0.0 {
        return Err(Error::InvalidInput("singular tridiagonal system".into()));
    }
    rhs[0] /= beta;
    for i in 1..n {
        c[i - 1] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * c[i - 1];
        if beta == 0.0 {
            return Err(Error::InvalidInput("singular tridiagonal system".into()));
        }
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    Ok(())
}

/// Block tridiagonal system with square blocks of equal size.
#[derive(Debug, Clone)]
pub struct BlockTridiagonal {
    pub lower: Vec<DMatrix<f64>>,
    pub diag: Vec<DMatrix<f64>>,
    pub upper: Vec<DMatrix<f64>>,
}

impl BlockTridiagonal {
    pub fn zeros(blocks: usize, size: usize) -> Self {
        let z = DMatrix::zeros(size, size);
        Self {
            lower: vec![z.clone(); blocks],
            diag: vec![z.clone(); blocks],
            upper: vec![z; blocks],
        }
    }

    pub fn blocks(&self) -> usize {
        self.diag.len()
    }

    /// Block LU elimination without inter-block pivoting; each diagonal block is
    /// factored with partial pivoting.
    pub fn solve(&self, rhs: &[DVector<f64>]) -> Result<Vec<DVector<f64>>> {
        let n = self.blocks();
        let mut cp: Vec<DMatrix<f64>> = Vec::with_capacity(n);
        let mut dp: Vec<DVector<f64>> = Vec::with_capacity(n);
        for i in 0..n {
            let (m, r) = if i == 0 {
                (self.diag[0].clone(), rhs[0].clone())
            } else {
                (
                    &self.diag[i] - &self.lower[i] * &cp[i - 1],
                    &rhs[i] - &self.lower[i] * &dp[i - 1],
                )
            };
            let lu = m.lu();
            let d = lu
                .solve(&r)
                .ok_or_else(|| Error::InvalidInput(format!("singular pivot block {i}")))?;
            let c = if i + 1 < n {
                lu.solve(&self.upper[i])
                    .ok_or_else(|| Error::InvalidInput(format!("singular pivot block {i}")))?
            } else {
                DMatrix::zeros(0, 0)
            };
            cp.push(c);
            dp.push(d);
        }
        let mut x = dp;
        for i in (0..n - 1).rev() {
            let next = x[i + 1].clone();
            x[i] -= &cp[i] * next;
        }
        Ok(x)
    }
}
