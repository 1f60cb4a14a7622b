use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::grid::{BoundaryPair, Grid};
use crate::profile::Profile;
use crate::quad::GAUSS5;

/// Exact profile for the linear flux `A(u) = M u`:
/// `U(y) = U_- + ∫_{-∞}^{y} (4π)^{-1/2} M^{-1/2} exp(-η² (4M)^{-1}) dη (U_+ - U_-)`.
///
/// The matrix function is applied through an eigendecomposition. Every eigenvalue
/// must have positive real part; non-symmetric matrices need distinct eigenvalues.
pub fn linear_matrix_profile(matrix: &DMatrix<f64>, boundary: &BoundaryPair, grid: Grid) -> Result<Profile> {
    let m = matrix.nrows();
    if !matrix.is_square() || m != boundary.dim() {
        return Err(Error::InvalidInput(format!(
            "matrix is {}x{}, boundary has {} components",
            matrix.nrows(),
            matrix.ncols(),
            boundary.dim()
        )));
    }
    let (lambdas, vecs, inv) = eigen_basis(matrix)?;
    if let Some(l) = lambdas.iter().find(|l| !(l.re > 0.0)) {
        return Err(Error::Hypothesis(format!(
            "eigenvalue {l} has non-positive real part; use the regularized solver"
        )));
    }
    let jump = DVector::from_iterator(
        m,
        (0..m).map(|k| Complex64::new(boundary.plus()[k] - boundary.minus()[k], 0.0)),
    );
    let coeff = &inv * jump;
    let ys = grid.nodes();
    let n = ys.len();
    let columns: Vec<(Vec<Complex64>, Vec<Complex64>)> = lambdas
        .iter()
        .map(|&l| cumulative_kernel(l, &grid))
        .collect();
    let mut u = vec![vec![0.0; n]; m];
    let mut q = vec![vec![0.0; n]; m];
    for i in 0..n {
        let f = DVector::from_iterator(m, (0..m).map(|j| columns[j].0[i] * coeff[j]));
        let g = DVector::from_iterator(m, (0..m).map(|j| columns[j].1[i] * coeff[j]));
        let val = &vecs * f;
        let du = &vecs * g;
        for k in 0..m {
            u[k][i] = boundary.minus()[k] + val[k].re;
            q[k][i] = (0..m).map(|c| matrix[(k, c)] * du[c].re).sum();
        }
    }
    Profile::new(grid, u, q, boundary.clone())
}

type Basis = (Vec<Complex64>, DMatrix<Complex64>, DMatrix<Complex64>);

fn eigen_basis(a: &DMatrix<f64>) -> Result<Basis> {
    let m = a.nrows();
    let scale = a.norm().max(f64::MIN_POSITIVE);
    if (a - a.transpose()).norm() <= 1e-14 * scale {
        let eig = SymmetricEigen::new(a.clone());
        let vecs = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
        let inv = vecs.transpose();
        let lambdas = eig.eigenvalues.iter().map(|&l| Complex64::new(l, 0.0)).collect();
        return Ok((lambdas, vecs, inv));
    }
    let lambdas: Vec<Complex64> = a.complex_eigenvalues().iter().copied().collect();
    for i in 0..m {
        for j in 0..i {
            if (lambdas[i] - lambdas[j]).norm() <= 1e-8 * scale {
                return Err(Error::InvalidInput(
                    "repeated eigenvalues of a non-symmetric flux matrix are not supported".into(),
                ));
            }
        }
    }
    let ac = a.map(|x| Complex64::new(x, 0.0));
    let mut vecs = DMatrix::<Complex64>::zeros(m, m);
    for (j, &l) in lambdas.iter().enumerate() {
        let shifted = &ac - DMatrix::<Complex64>::identity(m, m) * l;
        let svd = shifted.svd(false, true);
        let vt = svd.v_t.expect("right singular vectors requested");
        let (idx, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, &s)| if s < best.1 { (i, s) } else { best });
        for k in 0..m {
            vecs[(k, j)] = vt[(idx, k)].conj();
        }
    }
    let inv = vecs
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidInput("flux matrix is not diagonalizable".into()))?;
    Ok((lambdas, vecs, inv))
}

/// `F(y) = ∫_{-∞}^{y} g` and `g(y) = (4πλ)^{-1/2} exp(-y²/(4λ))` at the nodes.
fn cumulative_kernel(lambda: Complex64, grid: &Grid) -> (Vec<Complex64>, Vec<Complex64>) {
    let ys = grid.nodes();
    let n = ys.len();
    let c = grid.center();
    let norm = (Complex64::new(4.0 * std::f64::consts::PI, 0.0) * lambda).sqrt().inv();
    let rate = (4.0 * lambda).inv();
    let g = |y: f64| norm * (-rate * y * y).exp();
    let gs: Vec<Complex64> = ys.iter().map(|&y| g(y)).collect();
    let mut f = vec![Complex64::new(0.0, 0.0); n];
    if lambda.im == 0.0 {
        let s = 2.0 * lambda.re.sqrt();
        for i in 0..n {
            f[i] = Complex64::new(0.5 * erfc(-ys[i] / s), 0.0);
        }
        return (f, gs);
    }
    // Panels short enough to resolve both the Gaussian and the oscillation.
    let h = grid.spacing();
    let freq = rate.im.abs() * 2.0 * grid.half_width() + rate.re.abs().sqrt();
    let sub = ((h * freq / 0.25).ceil() as usize).max(1);
    let w = h / sub as f64;
    f[c] = Complex64::new(0.5, 0.0);
    for k in 1..=c {
        let a = ys[c + k - 1];
        let mut acc = Complex64::new(0.0, 0.0);
        for s in 0..sub {
            let mid = a + (s as f64 + 0.5) * w;
            for &(x, wt) in GAUSS5.iter() {
                acc += g(mid + 0.5 * w * x) * (0.5 * w * wt);
            }
        }
        f[c + k] = f[c + k - 1] + acc;
        // g is even, and its total integral is one.
        f[c - k] = Complex64::new(1.0, 0.0) - f[c + k];
    }
    (f, gs)
}
