use proptest::prelude::*;

use super::*;
use crate::flux::{Diffusivity, ScalarDiffusivity};
use crate::grid::{BoundaryPair, Grid};
use crate::profile::Profile;
use crate::scalar::{erf_profile, solve_scalar, ScalarSolveConfig};

fn solved(d: Diffusivity, lo: f64, hi: f64, grid: Grid) -> Profile {
    let diff = ScalarDiffusivity::preset(d, lo, hi.max(lo + 1e-12)).unwrap();
    let (p, _) = solve_scalar(&diff, &BoundaryPair::scalar(lo, hi).unwrap(), &ScalarSolveConfig::new(grid)).unwrap();
    p
}

fn options(tau_end: f64, phi: EntropyDensity) -> EvolveOptions {
    EvolveOptions { tau_end, sample_dt: 0.1, phi, max_steps: 5_000_000 }
}

#[test]
fn density_closed_forms() {
    let e1 = EntropyDensity::e(1.0);
    assert!((e1.value(std::f64::consts::E) - 1.0).abs() < 1e-15);
    let e2 = EntropyDensity::e(2.0);
    for rho in [0.0, 0.3, 0.95, 1.05, 2.0, 7.5] {
        assert!((e2.value(rho) - 0.5 * (rho - 1.0) * (rho - 1.0)).abs() < 1e-14);
    }
    assert_eq!(EntropyDensity::e(0.0).value(0.0), f64::INFINITY);
    assert_eq!(EntropyDensity::e(-1.0).value(0.0), f64::INFINITY);
    assert_eq!(e1.value(0.0), 1.0);
    assert!((EntropyDensity::e(0.5).value(0.0) - 2.0).abs() < 1e-15);
    assert!((EntropyDensity::split(0.5, -1.0).value(0.0) - 2.0).abs() < 1e-15);
    // E_{-1}(ρ) = (ρ-1)²/(2ρ), E_{1/2}(ρ) = 2(√ρ-1)².
    for rho in [0.01, 0.5, 0.99, 1.001, 3.0, 1e3] {
        let em1 = (rho - 1.0) * (rho - 1.0) / (2.0 * rho);
        assert!((EntropyDensity::e(-1.0).value(rho) - em1).abs() <= 1e-14 * em1.max(1e-300) + 1e-300);
        let eh = 2.0 * ((rho - 1.0) / (rho.sqrt() + 1.0)).powi(2);
        assert!((EntropyDensity::e(0.5).value(rho) - eh).abs() <= 1e-13 * eh);
    }
    let m2 = EntropyDensity::phi_m(2.0);
    assert_eq!(m2, EntropyDensity::split(1.0, 0.0));
    assert_eq!(EntropyDensity::phi_m(1.5), EntropyDensity::split(0.5, 0.5));
    assert_eq!(EntropyDensity::phi_m(3.0), EntropyDensity::split(2.0, -1.0));
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(1.0), Just(0.5), Just(2.0), -2.0..3.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn density_identities(p in exponent(), q in exponent(), rho in 1e-3..50.0f64) {
        for phi in [EntropyDensity::e(p), EntropyDensity::split(p, q)] {
            prop_assert!(phi.value(1.0).abs() < 1e-16);
            prop_assert!(phi.d1(1.0).abs() < 1e-16);
            prop_assert!(phi.d2(rho) > 0.0);
            prop_assert!(phi.value(rho) >= 0.0);
        }
        let e = EntropyDensity::e(p);
        prop_assert!((e.d2(rho) - rho.powf(p - 2.0)).abs() <= 1e-14 * rho.powf(p - 2.0));
        // Second difference of the value and first difference of the slope.
        let h = 1e-4 * rho;
        let fd2 = (e.value(rho + h) - 2.0 * e.value(rho) + e.value(rho - h)) / (h * h);
        let fd1 = (e.d1(rho + h) - e.d1(rho - h)) / (2.0 * h);
        let exact = rho.powf(p - 2.0);
        prop_assert!((fd1 - exact).abs() <= 1e-6 * exact, "slope {fd1} vs {exact}");
        let scale = e.value(rho).abs() / (h * h) * 1e-15 + 1e-5 * exact;
        prop_assert!((fd2 - exact).abs() <= 10.0 * scale, "curvature {fd2} vs {exact}");
        let dv = (e.value(rho + h) - e.value(rho - h)) / (2.0 * h);
        prop_assert!((dv - e.d1(rho)).abs() <= 1e-6 * (1.0 + e.d1(rho).abs()));
    }

    #[test]
    fn series_matches_closed_form_at_the_switch(p in exponent(), s in prop::bool::ANY) {
        let e = EntropyDensity::e(p);
        let x = if s { 0.1 } else { -0.1 };
        let (a, b) = (1.0 + x * (1.0 - 1e-12), 1.0 + x * (1.0 + 1e-12));
        let jump = e.value(b) - e.value(a) - e.d1(1.0 + x) * (b - a);
        prop_assert!(jump.abs() <= 1e-12 * e.value(b), "{jump:e}");
    }
}

#[test]
fn relative_entropy_examples() {
    let grid = Grid::new(4.0, 801).unwrap();
    let ys = grid.nodes();
    let h = grid.spacing();
    let ones = vec![1.0; ys.len()];
    let phi = EntropyDensity::split(0.5, -1.0);
    assert_eq!(relative_entropy(&grid, &ones, &ones, &phi).unwrap(), 0.0);
    let u: Vec<f64> = ys.iter().map(|&y| if (0.0..=1.0).contains(&y) { 2.0 } else { 1.0 }).collect();
    let e2 = relative_entropy(&grid, &u, &ones, &EntropyDensity::e(2.0)).unwrap();
    assert!((e2 - 0.5).abs() <= 0.5 * h + 1e-12, "{e2}");
    let four: Vec<f64> = ys.iter().map(|&y| if (0.0..=1.0).contains(&y) { 4.0 } else { 1.0 }).collect();
    assert!((hellinger(&grid, &four, &ones) - 1.0).abs() <= h + 1e-12);
    assert_eq!(hellinger(&grid, &ones, &ones), 0.0);
    let mut hole = ones.clone();
    hole[400] = 0.0;
    assert_eq!(relative_entropy(&grid, &hole, &ones, &EntropyDensity::e(0.0)).unwrap(), f64::INFINITY);
    assert!(relative_entropy(&grid, &hole, &ones, &phi).unwrap().is_finite());
    assert!(relative_entropy(&grid, &ones, &hole, &phi).is_err());
}

#[test]
fn hellinger_constants() {
    // Closed forms: (√r-1)²/E_{1/2} ≡ 1/2; for φ_{1/2,-1} the supremum 2 is the limit
    // r → ∞ of 2r/(√r+1)²; for φ_2 both ends tend to 1.
    assert!((hellinger_constant(&EntropyDensity::phi_m(1.5)) - 0.5).abs() < 1e-12);
    assert!((hellinger_constant(&EntropyDensity::split(0.5, -1.0)) - 2.0).abs() < 1e-12);
    assert!((hellinger_constant(&EntropyDensity::phi_m(2.0)) - 1.0).abs() < 1e-12);
    let c3 = hellinger_constant(&EntropyDensity::phi_m(3.0));
    assert!(c3.is_finite() && c3 >= 2.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hellinger_below_scaled_entropy(
        m in prop_oneof![Just(1.5), Just(2.0), Just(3.0)],
        amp in -0.99..3.0f64,
        center in -2.0..2.0f64,
        radius in 0.2..2.0f64,
    ) {
        let grid = Grid::new(5.0, 401).unwrap();
        let big_u: Vec<f64> = grid.nodes().iter().map(|y| 1.0 + 0.5 * (1.0 + y.tanh())).collect();
        let u: Vec<f64> = grid.nodes().iter().zip(&big_u).map(|(y, b)| b * (1.0 + amp * bump((y - center) / radius))).collect();
        let phi = EntropyDensity::phi_m(m);
        let h = relative_entropy(&grid, &u, &big_u, &phi).unwrap();
        let hel = hellinger(&grid, &u, &big_u);
        prop_assert!(hel <= hellinger_constant(&phi) * h * (1.0 + 1e-12) + 1e-15);
    }
}

#[test]
fn decay_fit_examples() {
    let series: Vec<(f64, f64)> = (0..20).map(|i| (0.3 * i as f64, (-0.15 * i as f64).exp())).collect();
    let fit = decay_rate_fit(&series).unwrap();
    assert!((fit.rate - 0.5).abs() < 1e-12 && fit.residual < 1e-12);
    assert!(decay_rate_fit(&series[..9]).is_err());
    let mut bad = series.clone();
    bad[4].1 = 0.0;
    assert!(decay_rate_fit(&bad).is_err());
}

#[test]
fn sigma_examples() {
    let grid = Grid::new(8.0, 801).unwrap();
    let flat = solved(Diffusivity::Pme { m: 2.0 }, 1.3, 1.3, grid);
    for mode in [SigmaMode::Pme { m: 2.0 }, SigmaMode::Lipschitz { c_a: 3.0, a_lo: 0.1 }] {
        let r = sigma_check(&flat, mode).unwrap();
        assert!(r.sigma < 1e-25 && (r.lambda_predicted - 0.5).abs() < 1e-20 && r.hypothesis_ok, "{r:?}");
    }

    let pme = solved(Diffusivity::Pme { m: 2.0 }, 1.0, 1.2, grid);
    let r = sigma_check(&pme, SigmaMode::Pme { m: 2.0 }).unwrap();
    // Sufficient bound U_+^{m-1} Δ² / (8 m U_-^m) = 1.2 · 0.04 / 16.
    assert!(r.sigma <= 0.003, "{r:?}");
    assert!(r.hypothesis_ok && (r.threshold - 0.5).abs() < 1e-15);
    assert!((r.lambda_predicted - 0.5 * (1.0 - 2.0 * r.sigma)).abs() < 1e-15);

    let r = sigma_check(&pme, SigmaMode::Pme { m: 1.0 }).unwrap();
    assert!(r.hypothesis_ok && r.threshold == f64::INFINITY && r.lambda_predicted == 0.5);

    let steep = erf_profile(0.01, 1.0, 2.0, grid).unwrap();
    let r = sigma_check(&steep, SigmaMode::Lipschitz { c_a: 1.0, a_lo: 1.0 }).unwrap();
    assert!(!r.hypothesis_ok && r.lambda_predicted < 0.0);

    let touching = solved(Diffusivity::Pme { m: 2.0 }, 0.0, 1.0, grid);
    assert!(matches!(sigma_check(&touching, SigmaMode::Pme { m: 2.0 }), Err(crate::Error::Hypothesis(_))));
}

#[test]
fn inequality_checks() {
    let rho = logspace(1e-3, 1e3, 10_000);
    let ca = entropy_inequality_check(&EntropyDensity::split(0.5, -1.0), InequalityMode::Ca, &rho);
    assert!(ca.max_ratio <= 1.0 + 1e-9, "{ca:?}");
    assert_eq!(ca.limit_at_one, 1.0);
    for m in [1.5, 2.0, 3.0] {
        let r = entropy_inequality_check(&EntropyDensity::phi_m(m), InequalityMode::Pme { m }, &rho);
        assert!(r.max_ratio <= 1.0 + 1e-9, "m = {m}: {r:?}");
    }
    let lin = entropy_inequality_check(&EntropyDensity::phi_m(1.0), InequalityMode::Pme { m: 1.0 }, &rho);
    assert_eq!(lin.max_ratio, 0.0);
    // The quadratic density fails the first inequality for ρ > 1 (ratio ρ²).
    let bad = entropy_inequality_check(&EntropyDensity::e(2.0), InequalityMode::Ca, &rho);
    assert!((bad.max_ratio - 1e6).abs() < 1e-3 && bad.worst_rho == *rho.last().unwrap());
}

#[test]
fn ca_ratio_matches_closed_form() {
    // Below 1 the ratio is √ρ(√ρ+1)²/4, above 1 it is identically 1.
    let phi = EntropyDensity::split(0.5, -1.0);
    for rho in [1e-3f64, 0.2, 0.7, 0.999] {
        let exact = rho.sqrt() * (rho.sqrt() + 1.0).powi(2) / 4.0;
        assert!((inequality_ratio(&phi, InequalityMode::Ca, rho) - exact).abs() < 1e-12);
    }
    for rho in [1.001, 2.0, 50.0, 1e3] {
        assert!((inequality_ratio(&phi, InequalityMode::Ca, rho) - 1.0).abs() < 1e-12);
    }
    // m = 3: (ρ+1)²/4 below 1 and (ρ+1)²/(4ρ²) above.
    let phi = EntropyDensity::phi_m(3.0);
    for rho in [0.1f64, 0.9, 1.1, 10.0] {
        let exact = if rho < 1.0 { (rho + 1.0).powi(2) / 4.0 } else { (rho + 1.0).powi(2) / (4.0 * rho * rho) };
        assert!((inequality_ratio(&phi, InequalityMode::Pme { m: 3.0 }, rho) - exact).abs() < 1e-12);
    }
}

#[test]
fn stationary_profile_drifts_at_first_order() {
    let mut drift = Vec::new();
    for n in [401, 801] {
        let grid = Grid::new(10.0, n).unwrap();
        let profile = solved(Diffusivity::Linear { d: 1.0 }, 1.0, 2.0, grid);
        let state = EvolutionState::new(grid, profile.u[0].clone()).unwrap();
        let flux = Diffusivity::Linear { d: 1.0 };
        let dt = state.stable_dt(&flux);
        let one = step_pde(&state, &flux, dt).unwrap();
        let change = one.u.iter().zip(&state.u).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        assert!(change <= dt * grid.spacing(), "one step moved {change:e}");
        let tr = evolve(state, &flux, &profile, &options(0.5, EntropyDensity::split(0.5, -1.0))).unwrap();
        drift.push(tr.samples.last().unwrap().sup_deviation);
    }
    let order = (drift[0] / drift[1]).log2();
    assert!((order - 1.0).abs() < 0.15, "{drift:?}");
}

#[test]
fn linear_bump_decays_and_respects_bounds() {
    let grid = Grid::new(10.0, 801).unwrap();
    let profile = solved(Diffusivity::Linear { d: 1.0 }, 1.0, 2.0, grid);
    let flux = Diffusivity::Linear { d: 1.0 };
    let phi = EntropyDensity::split(0.5, -1.0);
    let tr = evolve(EvolutionState::perturbed(&profile, 0.2, 0.0, 2.0).unwrap(), &flux, &profile, &options(3.0, phi)).unwrap();
    assert!(!tr.final_state.clipped);
    for w in tr.samples.windows(2) {
        assert!(w[1].sup_deviation < w[0].sup_deviation);
        assert!(w[1].entropy <= w[0].entropy);
    }
    let c = hellinger_constant(&phi);
    assert!(tr.samples.iter().all(|s| s.hellinger <= c * s.entropy));

    // Data inside [U_-, U_+] stay there.
    let ys = grid.nodes();
    let u0: Vec<f64> = ys
        .iter()
        .zip(&profile.u[0])
        .map(|(&y, &u)| (u * (1.0 - 0.3 * bump(y / 3.0))).clamp(1.0, 2.0))
        .collect();
    let mut state = EvolutionState::new(grid, u0).unwrap();
    for _ in 0..2000 {
        let dt = state.stable_dt(&flux);
        state = step_pde(&state, &flux, dt).unwrap();
        assert!(state.u.iter().all(|&x| (1.0 - 1e-12..=2.0 + 1e-12).contains(&x)));
    }
}

#[test]
fn drift_follows_characteristics() {
    // With A ≡ 0 the equation is u_τ = (y/2) u_y, so u(τ, y) = u₀(y e^{τ/2}).
    let grid = Grid::new(10.0, 4001).unwrap();
    let ys = grid.nodes();
    let u0 = |y: f64| (-(y - 4.0) * (y - 4.0) / 0.5).exp();
    let mut state = EvolutionState::new(grid, ys.iter().map(|&y| u0(y)).collect()).unwrap();
    let flux = Diffusivity::Linear { d: 0.0 };
    while state.tau < 1.0 {
        let dt = state.stable_dt(&flux).min(1.0 - state.tau);
        state = step_pde(&state, &flux, dt).unwrap();
    }
    let scale = 0.5f64.exp();
    let exact: Vec<f64> = ys.iter().map(|&y| u0(y * scale)).collect();
    let peak = |v: &[f64]| ys[v.iter().enumerate().fold(0, |b, (i, x)| if *x > v[b] { i } else { b })];
    assert!((peak(&state.u) - 4.0 / scale).abs() <= 2.0 * grid.spacing(), "{}", peak(&state.u));
    let err = state.u.iter().zip(&exact).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    assert!(err < 0.05, "{err}");
    let mass = |v: &[f64]| v.iter().sum::<f64>() * grid.spacing();
    // The characteristic flow contracts by e^{-τ/2} and the equation multiplies mass by it.
    assert!((mass(&state.u) / mass(&exact) - 1.0).abs() < 1e-2);
}

#[test]
fn step_rejects_growth_and_bad_steps() {
    let grid = Grid::new(5.0, 101).unwrap();
    let flux = Diffusivity::Linear { d: 1.0 };
    let flat = EvolutionState::new(grid, vec![1.0; 101]).unwrap();
    assert!(step_pde(&flat, &flux, 0.0).is_err());
    assert!(EvolutionState::new(grid, vec![-1.0; 101]).is_err());
    // Pure drift far beyond its stable step amplifies oscillations.
    let mut u: Vec<f64> = grid.nodes().iter().map(|y| 1.0 + 0.5 * (7.0 * y).sin().abs()).collect();
    u[0] = 1.0;
    u[100] = 1.0;
    let mut s = EvolutionState::new(grid, u).unwrap();
    let drift_only = Diffusivity::Linear { d: 0.0 };
    let mut failed = false;
    for _ in 0..200 {
        match step_pde(&s, &drift_only, 50.0) {
            Ok(next) => s = next,
            Err(crate::Error::Unstable(_)) => {
                failed = true;
                break;
            }
            Err(e) => panic!("{e}"),
        }
    }
    assert!(failed);
}

#[test]
fn moment_laws_along_trajectories() {
    let flux = Diffusivity::Linear { d: 1.0 };
    let phi = EntropyDensity::split(0.5, -1.0);
    let mut res = Vec::new();
    for n in [401, 801] {
        let grid = Grid::new(10.0, n).unwrap();
        let profile = solved(Diffusivity::Linear { d: 1.0 }, 1.0, 2.0, grid);
        let tr = evolve(EvolutionState::perturbed(&profile, 0.2, 0.0, 2.0).unwrap(), &flux, &profile, &options(3.0, phi)).unwrap();
        let m = moment_odes_check(&tr.samples, 1.0).unwrap();
        let rate = m.zeroth_rate.unwrap();
        assert!((rate - 0.5).abs() < 0.02, "{m:?}");
        res.push(m);
    }
    // Both residuals are first order in h (upwind drift) on top of O(Δτ²).
    assert!(res[1].zeroth < 0.6 * res[0].zeroth && res[1].first < 0.6 * res[0].first, "{res:?}");
    assert!(res[1].zeroth < 0.01 * res[1].zeroth_scale);

    // Stationary start: both sides are constant.
    let grid = Grid::new(10.0, 801).unwrap();
    let profile = solved(Diffusivity::Linear { d: 1.0 }, 1.0, 2.0, grid);
    let tr = evolve(EvolutionState::new(grid, profile.u[0].clone()).unwrap(), &flux, &profile, &options(1.0, phi)).unwrap();
    let m = moment_odes_check(&tr.samples, 1.0).unwrap();
    assert!(m.zeroth < 1e-2 && m.first < 2e-2, "{m:?}");
    assert!(moment_odes_check(&tr.samples[..2], 1.0).is_err());
}

#[test]
fn eigen_residuals_are_second_order() {
    let mut r = Vec::new();
    for n in [501, 1001, 2001] {
        let grid = Grid::new(11.0, n).unwrap();
        let p = solved(Diffusivity::Linear { d: 1.0 }, 0.0, 1.0, grid);
        let e = eigen_residuals(&p, &Diffusivity::Linear { d: 1.0 });
        r.push((e.r1.unwrap(), e.r2.unwrap()));
    }
    for w in r.windows(2) {
        assert!(((w[0].0 / w[1].0).log2() - 2.0).abs() < 0.1, "{r:?}");
        assert!(((w[0].1 / w[1].1).log2() - 2.0).abs() < 0.1, "{r:?}");
    }
    assert!(r[2].0 <= 1e-4 && r[2].1 <= 1e-4, "{r:?}");

    let grid = Grid::new(5.0, 201).unwrap();
    let flat = Profile::new(grid, vec![vec![0.7; 201]], vec![vec![0.0; 201]], BoundaryPair::scalar(0.7, 0.7).unwrap()).unwrap();
    let e = eigen_residuals(&flat, &Diffusivity::Pme { m: 2.0 });
    assert_eq!((e.r1, e.r2), (None, None));
}

#[test]
fn adjoint_pairing() {
    let grid = Grid::new(8.0, 1601).unwrap();
    let profile = solved(Diffusivity::Pme { m: 2.0 }, 1.0, 1.5, grid);
    let flux = Diffusivity::Pme { m: 2.0 };
    let ys = grid.nodes();
    let v: Vec<f64> = ys.iter().map(|&y| bump((y + 0.5) / 2.0)).collect();
    let w: Vec<f64> = ys.iter().map(|&y| y * bump((y - 0.3) / 1.5)).collect();
    let lv = linearized_apply(&profile, &flux, &v);
    let lw = adjoint_apply(&profile, &flux, &w);
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * grid.spacing();
    let (left, right) = (dot(&lv, &w), dot(&v, &lw));
    assert!((left - right).abs() <= 1e-10 * left.abs().max(1.0), "{left} {right}");
    // Both pair to the same continuum value: compare against a refined grid.
    let fine = Grid::new(8.0, 3201).unwrap();
    let pf = solved(Diffusivity::Pme { m: 2.0 }, 1.0, 1.5, fine);
    let yf = fine.nodes();
    let vf: Vec<f64> = yf.iter().map(|&y| bump((y + 0.5) / 2.0)).collect();
    let wf: Vec<f64> = yf.iter().map(|&y| y * bump((y - 0.3) / 1.5)).collect();
    let lf = linearized_apply(&pf, &flux, &vf);
    let fine_val = lf.iter().zip(&wf).map(|(x, y)| x * y).sum::<f64>() * fine.spacing();
    let h = grid.spacing();
    assert!((left - fine_val).abs() <= 10.0 * h * h * left.abs().max(1.0), "{left} {fine_val}");
}

#[test]
fn pme_entropy_decays_at_predicted_rate() {
    let grid = Grid::new(10.0, 801).unwrap();
    let profile = solved(Diffusivity::Pme { m: 2.0 }, 1.0, 1.2, grid);
    let sigma = sigma_check(&profile, SigmaMode::Pme { m: 2.0 }).unwrap();
    let phi = EntropyDensity::phi_m(2.0);
    let flux = Diffusivity::Pme { m: 2.0 };
    let tr = evolve(EvolutionState::perturbed(&profile, 0.2, 0.0, 2.0).unwrap(), &flux, &profile, &options(4.0, phi)).unwrap();
    for w in tr.samples.windows(2) {
        assert!(w[1].entropy <= w[0].entropy);
    }
    let fit = decay_rate_fit(&tr.entropy_series(1.0, 4.0)).unwrap();
    assert!(fit.rate >= sigma.lambda_predicted - 0.02, "{fit:?} {sigma:?}");
    let c = hellinger_constant(&phi);
    assert!(tr.samples.iter().all(|s| s.hellinger <= c * s.entropy));
}

