use std::sync::Arc;

use nalgebra::DMatrix;

use super::*;
use crate::flux::{BoxRegion, Diffusivity, LinearFlux, ScalarDiffusivity};
use crate::scalar::erf_profile;

fn linear_map(rows: &[&[f64]], boundary: &BoundaryPair) -> (VectorFluxMap, DMatrix<f64>) {
    let m = rows.len();
    let mat = DMatrix::from_fn(m, m, |i, j| rows[i][j]);
    let region = BoxRegion::around(boundary.minus(), boundary.plus(), 0.1).unwrap();
    let map = VectorFluxMap::certified(Arc::new(LinearFlux::new(mat.clone()).unwrap()), &region, 5).unwrap();
    (map, mat)
}

#[test]
fn scalar_linear_matches_erf() {
    let b = BoundaryPair::scalar(0.0, 1.0).unwrap();
    let (map, _) = linear_map(&[&[1.0]], &b);
    let cfg = VectorSolveConfig::new(Grid::new(11.0, 2001).unwrap());
    let (p, r) = solve_vector(&map, &b, &cfg).unwrap();
    let exact = erf_profile(1.0, 0.0, 1.0, cfg.grid).unwrap();
    assert!(p.sup_distance(&exact) < 1e-6, "{}", p.sup_distance(&exact));
    assert!(r.residual <= cfg.newton_tol);
    assert!(!r.regularized);
}

#[test]
fn linear_matrices_match_closed_form() {
    let b = BoundaryPair::new(vec![0.0, 1.0], vec![1.0, -0.5]).unwrap();
    for rows in [
        &[&[1.0, 0.0][..], &[0.0, 1.0][..]][..],
        &[&[1.0, 0.0][..], &[0.0, 4.0][..]][..],
        &[&[1.0, -0.3][..], &[0.3, 1.0][..]][..],
    ] {
        let (map, mat) = linear_map(rows, &b);
        let cfg = VectorSolveConfig::for_map(&map).unwrap();
        let (p, _) = solve_vector(&map, &b, &cfg).unwrap();
        let exact = linear_matrix_profile(&mat, &b, cfg.grid).unwrap();
        let err = p.sup_distance(&exact);
        println!("{rows:?}: L = {} err {err:e}", cfg.grid.half_width());
        assert!(err < 1e-5, "{rows:?}: {err}");
    }
}

#[test]
fn stretched_component() {
    let g = Grid::new(20.0, 2001).unwrap();
    let b = BoundaryPair::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
    let mat = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 4.0]);
    let p = linear_matrix_profile(&mat, &b, g).unwrap();
    // U₂(y) = U₁(y/2): node 2i - c of component 1 pairs with node i of component 2... use exact erf.
    for i in (0..2001).step_by(50) {
        let y = g.node(i);
        let u1_half = 0.5 * statrs::function::erf::erfc(-(y / 2.0) / 2.0);
        assert!((p.u[1][i] - u1_half).abs() < 1e-14);
    }
    assert!((p.u[0][g.center()] - 0.5).abs() < 1e-15);
}

#[test]
fn nonsymmetric_real_eigenvalues() {
    let g = Grid::new(16.0, 1601).unwrap();
    let b = BoundaryPair::new(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap();
    let (map, mat) = linear_map(&[&[1.0, 0.5], &[0.0, 2.0]], &b);
    let p = linear_matrix_profile(&mat, &b, g).unwrap();
    assert!(p.boundary_mismatch() < 1e-10);
    let mut cfg = VectorSolveConfig::new(g);
    cfg.newton_tol = 1e-11;
    let (s, _) = solve_vector(&map, &b, &cfg).unwrap();
    assert!(s.sup_distance(&p) < 5e-5);
}

#[test]
fn nearly_imaginary_spectrum_decays_like_one_over_y() {
    let eps = 1e-3;
    let g = Grid::new(32.0, 6401).unwrap();
    let b = BoundaryPair::new(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap();
    let mat = DMatrix::from_row_slice(2, 2, &[eps, -1.0, 1.0, eps]);
    let p = linear_matrix_profile(&mat, &b, g).unwrap();
    // The matrix acts as multiplication by λ = ε + i on u₁ + i u₂, so |U - U_+| is
    // the modulus of ½ erfc(w), w = y / (2√λ), and does not oscillate.
    let lambda = num_complex::Complex64::new(eps, 1.0);
    let ys = g.nodes();
    let mut pts = Vec::new();
    for i in (0..ys.len()).filter(|&i| ys[i] >= 5.0 && ys[i] <= 30.0).step_by(20) {
        let y = ys[i];
        let d = ((p.u[0][i] - 1.0).powi(2) + p.u[1][i].powi(2)).sqrt();
        let w = y / (2.0 * lambda.sqrt());
        let asym = ((-w * w).exp() / (2.0 * w * std::f64::consts::PI.sqrt())).norm();
        assert!((d / asym - 1.0).abs() < 1.0 / w.norm_sqr(), "y = {y}: {d} vs {asym}");
        pts.push((y.ln(), d.ln()));
    }
    let slope = crate::scalar::fit_slope(&pts);
    assert!((slope + 1.0).abs() < 0.2, "{slope}");
}

#[test]
fn refuses_non_monotone_and_imaginary_maps() {
    let b = BoundaryPair::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
    let (rot, mat) = linear_map(&[&[0.0, -1.0], &[1.0, 0.0]], &b);
    let cfg = VectorSolveConfig::new(Grid::new(10.0, 201).unwrap());
    assert!(matches!(solve_vector(&rot, &b, &cfg), Err(Error::Hypothesis(_))));
    assert!(matches!(linear_matrix_profile(&mat, &b, cfg.grid), Err(Error::Hypothesis(_))));
}

#[test]
fn g_source_support_and_scaling() {
    let g = Grid::new(4.0, 801).unwrap();
    let b = BoundaryPair::scalar(0.0, 1.0).unwrap();
    let t = TildeU::new(b.clone(), 1.0).unwrap();
    let src = g_source(&t, &g);
    let i = g.nodes().iter().position(|&y| (y - 1.5).abs() < 1e-12).unwrap();
    assert_eq!(src[0][i], 0.0);
    let flat = TildeU::new(BoundaryPair::scalar(0.4, 0.4).unwrap(), 1.0).unwrap();
    assert!(g_source(&flat, &g)[0].iter().all(|&x| x == 0.0));
    // ‖g‖_{L²} ∝ a_up^{3/4}
    let fine = Grid::new(8.0, 4001).unwrap();
    let pts: Vec<(f64, f64)> = [0.5, 1.0, 2.0, 4.0]
        .iter()
        .map(|&a: &f64| {
            let t = TildeU::new(b.clone(), a).unwrap();
            let s = g_source(&t, &fine);
            let l2 = crate::quad::integrate(&fine, &s[0].iter().map(|x| x * x).collect::<Vec<_>>()).sqrt();
            (a.ln(), l2.ln())
        })
        .collect();
    let slope = crate::scalar::fit_slope(&pts);
    assert!((slope - 0.75).abs() < 0.05, "{slope}");
}

#[test]
fn degenerate_scalar_by_continuation() {
    let grid = Grid::new(3.0, 1201).unwrap();
    let d = ScalarDiffusivity::preset(Diffusivity::DegenI, -1.0, 1.0).unwrap();
    let map = VectorFluxMap::from_scalar(&d);
    let b = BoundaryPair::scalar(-1.0, 1.0).unwrap();
    let (p, r) = solve_vector(&map, &b, &VectorSolveConfig::new(grid)).unwrap();
    let exact: Vec<f64> = grid.nodes().iter().map(|y| y.clamp(-1.0, 1.0)).collect();
    let err = p.u[0].iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 2e-2, "{err} {:?}", r.eps_used);
    assert!(r.stage_changes.windows(2).skip(1).all(|w| w[1] <= w[0] * 1.0001), "{:?}", r.stage_changes);
}

#[test]
fn checks_on_the_erf_profile() {
    let g = Grid::new(12.0, 2001).unwrap();
    let p = erf_profile(1.0, 0.0, 1.0, g).unwrap();
    let flux = LinearFlux::new(DMatrix::from_element(1, 1, 1.0)).unwrap();
    let rel = integral_relations(&p, &flux);
    assert!(rel.moment0[0].abs() < 1e-10, "{rel:?}");
    assert!(rel.moment1_residual[0].abs() < 1e-6, "{rel:?}");
    assert!(rel.decay_ok);
    let weak = verify_weak_residual(&p, &flux, 20);
    assert!(weak < 1e-5, "{weak}");
    let env = flux_envelope(&p, &flux, 1.0);
    assert!(env.worst_ratio <= 1.0 + 1e-9, "{env:?}");
    assert!(env.worst_ratio >= 1.0 - 1e-9);
}

#[test]
fn checks_on_constant_and_step_profiles() {
    let g = Grid::new(5.0, 501).unwrap();
    let b = BoundaryPair::scalar(0.7, 0.7).unwrap();
    let p = Profile::new(g, vec![vec![0.7; 501]], vec![vec![0.0; 501]], b).unwrap();
    let flux = LinearFlux::new(DMatrix::from_element(1, 1, 2.0)).unwrap();
    assert!(verify_weak_residual(&p, &flux, 10) < 1e-13);
    let rel = integral_relations(&p, &flux);
    assert_eq!(rel.moment0[0], 0.0);
    assert_eq!(rel.moment1_residual[0], 0.0);

    // A(u) = u² with U_± = ∓1 has A(U_+) = A(U_-); the step is a weak solution.
    #[derive(Debug)]
    struct Square;
    impl FluxMap for Square {
        fn dim(&self) -> usize { 1 }
        fn apply(&self, u: &[f64]) -> Vec<f64> { vec![u[0] * u[0]] }
        fn jacobian(&self, u: &[f64]) -> DMatrix<f64> { DMatrix::from_element(1, 1, 2.0 * u[0]) }
        fn label(&self) -> String { "square".into() }
    }
    let b = BoundaryPair::scalar(-1.0, 1.0).unwrap();
    let c = g.center();
    let step = |mid: f64| -> Profile {
        let u: Vec<f64> = (0..501).map(|i| if i < c { -1.0 } else if i > c { 1.0 } else { mid }).collect();
        Profile::new(g, vec![u], vec![vec![0.0; 501]], b.clone()).unwrap()
    };
    let rel = integral_relations(&step(0.0), &Square);
    assert!(rel.moment0[0].abs() < 1e-14 && rel.moment1_residual[0].abs() < 1e-14);
    let p = step(1.0);
    // A(U) is constant; only the jump of U contributes, at first order in h.
    let weak = verify_weak_residual(&p, &Square, 10);
    assert!(weak < g.spacing(), "{weak}");
}

#[test]
fn theorem_estimates_for_linear_scalar() {
    let b = BoundaryPair::scalar(0.0, 1.0).unwrap();
    let (map, _) = linear_map(&[&[1.0]], &b);
    let cfg = VectorSolveConfig::new(Grid::new(11.0, 2001).unwrap());
    let (p, _) = solve_vector(&map, &b, &cfg).unwrap();
    let est = verify_theorem_estimates(&p, &map);
    assert!(est.apriori_ratio.is_finite() && est.apriori_ratio > 0.0);
    assert!(est.envelope.worst_ratio <= 1.02, "{:?}", est.envelope);
    assert!(est.sup_ratio.unwrap() < 1.0);
    let flat = BoundaryPair::scalar(0.5, 0.5).unwrap();
    let (p, _) = solve_vector(&map, &flat, &cfg).unwrap();
    let est = verify_theorem_estimates(&p, &map);
    assert_eq!(est.apriori_ratio, 0.0);
    assert_eq!(est.sup_deviation, 0.0);
}

#[test]
fn uniqueness_from_a_perturbed_start() {
    #[derive(Debug)]
    struct Mild;
    impl FluxMap for Mild {
        fn dim(&self) -> usize { 2 }
        fn apply(&self, u: &[f64]) -> Vec<f64> {
            vec![u[0] - 0.3 * u[1] + 0.2 * u[0].tanh(), 0.3 * u[0] + u[1] + 0.2 * u[1].tanh()]
        }
        fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
            let s = |x: f64| 0.2 / x.cosh().powi(2);
            DMatrix::from_row_slice(2, 2, &[1.0 + s(u[0]), -0.3, 0.3, 1.0 + s(u[1])])
        }
        fn label(&self) -> String { "mild".into() }
    }
    let b = BoundaryPair::new(vec![1.5, 2.5], vec![2.5, 1.5]).unwrap();
    let region = BoxRegion::around(b.minus(), b.plus(), 0.5).unwrap();
    let map = VectorFluxMap::certified(Arc::new(Mild), &region, 9).unwrap();
    let cfg = VectorSolveConfig::new(Grid::new(12.0, 801).unwrap());
    let (p0, _) = solve_vector(&map, &b, &cfg).unwrap();
    let n = 801;
    let init: Vec<Vec<f64>> = (0..2)
        .map(|k| (0..n).map(|i| 0.05 * ((i as f64) * 0.37 + k as f64).sin()).collect())
        .collect();
    let (p1, _) = solve_vector_from(&map, &b, &cfg, Some(&init)).unwrap();
    assert!(p0.sup_distance(&p1) < 1e-8, "{}", p0.sup_distance(&p1));
}
