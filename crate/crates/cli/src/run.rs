//! Command implementations. Each returns the report; files go to the output directory.

use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use selfsim::entropy::{
    decay_rate_fit, evolve, hellinger_constant, moment_odes_check, sigma_check, EntropyDensity, EvolutionState,
    EvolveOptions, SigmaMode,
};
use selfsim::flux::certify_constants;
use selfsim::reduction::{
    lagrange_multiplier, lift_profile, monotonicity_lemma_check, psi_general, reduced_flux_map, ReducedFlux,
    ReducedScalar, ReductionMap,
};
use selfsim::scalar::{
    closed_form_oracle, flux_square_bounds, q0_u0_brackets, solve_scalar, verify_gaussian_bounds, OracleExample,
    ScalarSolveConfig,
};
use selfsim::vector::{flux_envelope, integral_relations, solve_vector, verify_theorem_estimates, VectorSolveConfig};
use selfsim::{
    BoundaryPair, BoxRegion, Diffusivity, FluxMap, Grid, LinearFlux, Profile, ScalarAsVector, ScalarDiffusivity,
    ScalarFlux, VectorFluxMap,
};

use crate::csvio;
use crate::error::CliError;
use crate::problem::{BoundaryDef, FluxDef, GridDef, NetworkDef, Problem, ScalarDef, SolverDef};
use crate::report::{num, nums, Report};

/// End nodes must match the limits to this accuracy.
const BOUNDARY_TOL: f64 = 1e-6;
/// Tolerance of the equilibrium-manifold identities.
const PSI_TOL: f64 = 1e-9;
/// Default certification samples per axis for the monotonicity check.
const MONOTONICITY_PER_AXIS: usize = 17;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(vec![msg.into()])
}

fn network(p: &Problem) -> Result<&NetworkDef, CliError> {
    p.network.as_ref().ok_or_else(|| invalid("this command needs a [network] section"))
}

fn diffusion(n: &NetworkDef) -> Result<Vec<f64>, CliError> {
    n.diffusion.clone().ok_or_else(|| invalid("[network] diffusion is required"))
}

fn boundary(p: &Problem) -> Result<BoundaryPair, CliError> {
    match p.boundary.as_ref().ok_or_else(|| invalid("missing section [boundary]"))? {
        BoundaryDef::Reduced { minus, plus } => Ok(BoundaryPair::new(minus.clone(), plus.clone())?),
        BoundaryDef::Concentrations { minus, plus } => {
            let q = network(p)?.map.q();
            if minus.len() != q.ncols() {
                return Err(invalid(format!("[boundary] needs {} concentrations, got {}", q.ncols(), minus.len())));
            }
            let apply = |c: &Vec<f64>| (&q * DVector::from_column_slice(c)).iter().copied().collect::<Vec<_>>();
            Ok(BoundaryPair::new(apply(minus), apply(plus))?)
        }
    }
}

fn concentrations(p: &Problem) -> Option<(&Vec<f64>, &Vec<f64>)> {
    match &p.boundary {
        Some(BoundaryDef::Concentrations { minus, plus }) => Some((minus, plus)),
        _ => None,
    }
}

fn interval(b: &BoundaryPair) -> Result<(f64, f64), CliError> {
    if b.dim() != 1 {
        return Err(invalid(format!("a scalar problem needs scalar limits, got dimension {}", b.dim())));
    }
    let (a, c) = (b.minus()[0], b.plus()[0]);
    Ok((a.min(c), a.max(c)))
}

fn scalar_flux(p: &Problem) -> Result<Arc<dyn ScalarFlux>, CliError> {
    match &p.diffusivity {
        Some(ScalarDef::Preset(d)) => Ok(Arc::new(*d)),
        Some(ScalarDef::Reduced) => {
            let n = network(p)?;
            Ok(Arc::new(ReducedScalar(ReducedFlux::new(n.map.clone(), diffusion(n)?)?)))
        }
        None => Err(invalid("this command needs a [diffusivity] section")),
    }
}

fn scalar_diffusivity(p: &Problem, b: &BoundaryPair) -> Result<ScalarDiffusivity, CliError> {
    let (lo, hi) = interval(b)?;
    Ok(ScalarDiffusivity::new(scalar_flux(p)?, lo, hi)?)
}

fn grid(def: &GridDef, default: Grid) -> Result<Grid, CliError> {
    Ok(Grid::new(
        def.half_width.unwrap_or(default.half_width()),
        def.n_points.unwrap_or(default.n_points()),
    )?)
}

fn scalar_config(p: &Problem, d: &ScalarDiffusivity) -> Result<ScalarSolveConfig, CliError> {
    let mut cfg = ScalarSolveConfig::for_diffusivity(d)?;
    cfg.grid = grid(&p.grid, cfg.grid)?;
    if let Some(e) = &p.solver.eps_schedule {
        cfg.eps_schedule = e.clone();
    }
    if let Some(t) = p.solver.tol {
        cfg.shoot_tol = t;
    }
    if let Some(m) = p.solver.max_iter {
        cfg.max_iter = m;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn vector_config(p: &Problem, map: &VectorFluxMap) -> Result<VectorSolveConfig, CliError> {
    let mut cfg = VectorSolveConfig::for_map(map)?;
    cfg.grid = grid(&p.grid, cfg.grid)?;
    if let Some(e) = &p.solver.eps_schedule {
        cfg.eps_schedule = e.clone();
    }
    if let Some(t) = p.solver.tol {
        cfg.newton_tol = t;
    }
    if let Some(m) = p.solver.max_iter {
        cfg.newton_max_iter = m;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn region(s: &SolverDef, b: &BoundaryPair) -> Result<BoxRegion, CliError> {
    Ok(match &s.region {
        Some((lo, hi)) => BoxRegion::new(lo.clone(), hi.clone())?,
        None => BoxRegion::around(b.minus(), b.plus(), s.margin)?,
    })
}

fn vector_map(p: &Problem, b: &BoundaryPair) -> Result<VectorFluxMap, CliError> {
    let r = region(&p.solver, b)?;
    let per_axis = p.solver.per_axis.unwrap_or(9);
    Ok(match &p.fluxmap {
        Some(FluxDef::Linear(rows)) => {
            let m = rows.len();
            let mat = DMatrix::from_fn(m, m, |i, j| rows[i][j]);
            VectorFluxMap::certified(Arc::new(LinearFlux::new(mat)?), &r, per_axis)?
        }
        Some(FluxDef::Scalar(d)) => VectorFluxMap::certified(Arc::new(ScalarAsVector(Arc::new(*d))), &r, per_axis)?,
        Some(FluxDef::Reduced) => {
            let n = network(p)?;
            reduced_flux_map(n.map.clone(), diffusion(n)?, &r, per_axis)?
        }
        None => return Err(invalid("this command needs a [fluxmap] section")),
    })
}

fn relations(r: &mut Report, p: &Profile, map: &dyn FluxMap, tol: f64) {
    let rel = integral_relations(p, map);
    let (am, ap) = (map.apply(p.boundary.minus()), map.apply(p.boundary.plus()));
    let delta = p.boundary.delta();
    let m0 = rel.moment0.iter().fold(0.0f64, |a, x| a.max(x.abs())) / delta;
    let m1 = (0..p.dim())
        .filter(|&k| ap[k] != am[k])
        .map(|k| rel.moment1_residual[k].abs() / (ap[k] - am[k]).abs())
        .fold(0.0, f64::max);
    r.at_most("moment0_relative", m0, tol);
    r.at_most("moment1_relative", m1, tol);
}

/// Checks that depend only on the profile and the constitutive law, so that they can be
/// recomputed from `profile.csv`.
pub fn scalar_checks(p: &Profile, d: &ScalarDiffusivity, s: &SolverDef) -> Report {
    let mut r = Report::default();
    let c = p.grid.center();
    let (u0, q0) = (p.u[0][c], p.q[0][c]);
    r.at_most("boundary_mismatch", p.boundary_mismatch(), BOUNDARY_TOL);
    let br = q0_u0_brackets(d.d_star(), d.d_sup(), &p.boundary);
    let (ul, uh) = (br.u0.0.min(br.u0.1), br.u0.0.max(br.u0.1));
    let (ql, qh) = (br.q0.0.abs(), br.q0.1.abs());
    r.at_least("u0_lower_bracket", u0, ul);
    r.at_most("u0_upper_bracket", u0, uh);
    r.at_least("q0_lower_bracket", q0.abs(), ql);
    r.at_most("q0_upper_bracket", q0.abs(), qh);
    let sq = flux_square_bounds(d, u0);
    let v = 2.0 * q0 * q0;
    let excess = [sq.left, sq.right]
        .iter()
        .map(|&(a, b)| ((a - v) / a).max((v - b) / b))
        .fold(f64::NEG_INFINITY, f64::max);
    r.push("flux_square_bracket", excess, 0.01, sq.contains(q0, 0.01));
    r.at_most("gaussian_bound", verify_gaussian_bounds(p, d.d_sup()).worst_ratio, s.envelope_slack);
    let as_map = ScalarAsVector(d.flux().clone());
    r.at_most("flux_envelope", flux_envelope(p, &as_map, 1.0 / d.d_sup()).worst_ratio, s.envelope_slack);
    relations(&mut r, p, &as_map, s.check_tol);
    r.info("u0", num(u0));
    r.info("q0", num(q0));
    r.info("d_star", num(d.d_star()));
    r.info("d_sup", num(d.d_sup()));
    r
}

pub fn vector_checks(p: &Profile, map: &VectorFluxMap, s: &SolverDef) -> Report {
    let mut r = Report::default();
    let k = &map.constants;
    r.at_most("boundary_mismatch", p.boundary_mismatch(), BOUNDARY_TOL);
    r.push("a_lo_positive", k.a_lo, 0.0, k.a_lo > 0.0);
    let est = verify_theorem_estimates(p, map);
    if k.delta > 0.0 {
        r.at_most("flux_envelope", est.envelope.worst_ratio, s.envelope_slack);
    }
    relations(&mut r, p, map.map.as_ref(), s.check_tol);
    r.info(
        "constants",
        json!({"a_lo": num(k.a_lo), "a_up": num(k.a_up), "delta": num(k.delta), "samples": k.sample_count}),
    );
    r.info(
        "estimates",
        json!({
            "gradient_term": num(est.gradient_term),
            "deviation_term": num(est.deviation_term),
            "potential_term": num(est.potential_term),
            "apriori_ratio": num(est.apriori_ratio),
            "sup_deviation": num(est.sup_deviation),
            "sup_ratio": est.sup_ratio.map(num).unwrap_or(Value::Null),
        }),
    );
    r
}

fn solve_scalar_problem(p: &Problem, b: &BoundaryPair) -> Result<(Profile, ScalarDiffusivity, Value), CliError> {
    let d = scalar_diffusivity(p, b)?;
    let cfg = scalar_config(p, &d)?;
    let (profile, rep) = solve_scalar(&d, b, &cfg)?;
    let opt = |x: Option<f64>| x.map(num).unwrap_or(Value::Null);
    let info = json!({
        "label": d.flux().label(),
        "n_points": cfg.grid.n_points(),
        "half_width": num(cfg.grid.half_width()),
        "u0": num(rep.u0),
        "q0": num(rep.q0),
        "y_minus_star": num(rep.y_minus_star),
        "y_plus_star": num(rep.y_plus_star),
        "eps_used": nums(&rep.eps_used),
        "stage_changes": nums(&rep.stage_changes),
        "singular_nodes": rep.singular_nodes.len(),
        "free_boundary": [opt(rep.free_boundary.0), opt(rep.free_boundary.1)],
    });
    Ok((profile, d, info))
}

fn solve_vector_problem(p: &Problem, map: &VectorFluxMap, b: &BoundaryPair) -> Result<(Profile, Value), CliError> {
    let cfg = vector_config(p, map)?;
    let (profile, rep) = solve_vector(map, b, &cfg)?;
    let info = json!({
        "label": map.map.label(),
        "n_points": cfg.grid.n_points(),
        "half_width": num(cfg.grid.half_width()),
        "final_eps": num(rep.final_eps),
        "regularized": rep.regularized,
        "residual": num(rep.residual),
        "iterations": rep.iterations,
        "extrapolated": rep.extrapolated,
        "eps_used": nums(&rep.eps_used),
    });
    Ok((profile, info))
}

pub fn profile_scalar(p: &Problem, out: &Path) -> Result<Report, CliError> {
    let b = boundary(p)?;
    let (profile, d, info) = solve_scalar_problem(p, &b)?;
    csvio::write_profile(&out.join("profile.csv"), &profile)?;
    let mut r = scalar_checks(&profile, &d, &p.solver);
    r.info("solver", info);
    Ok(r)
}

pub fn profile_vector(p: &Problem, out: &Path) -> Result<Report, CliError> {
    let b = boundary(p)?;
    let map = vector_map(p, &b)?;
    let (profile, info) = solve_vector_problem(p, &map, &b)?;
    csvio::write_profile(&out.join("profile.csv"), &profile)?;
    let mut r = vector_checks(&profile, &map, &p.solver);
    r.info("solver", info);
    Ok(r)
}

pub fn verify(p: &Problem, profile_path: &Path) -> Result<Report, CliError> {
    let b = match p.boundary {
        Some(_) => Some(boundary(p)?),
        None => None,
    };
    let profile = csvio::read_profile(profile_path, b)?;
    let b = profile.boundary.clone();
    if p.fluxmap.is_some() {
        let map = vector_map(p, &b)?;
        if map.dim() != profile.dim() {
            return Err(invalid(format!("flux map has dimension {}, profile {}", map.dim(), profile.dim())));
        }
        Ok(vector_checks(&profile, &map, &p.solver))
    } else {
        let d = scalar_diffusivity(p, &b)?;
        Ok(scalar_checks(&profile, &d, &p.solver))
    }
}

fn is_three_species(map: &ReductionMap) -> bool {
    matches!(map, ReductionMap::ThreeSpecies)
}

pub fn reduce(p: &Problem, check_monotonicity: bool, seed: u64) -> Result<Report, CliError> {
    let n = network(p)?;
    let map = &n.map;
    let net = map.network()?;
    let q = map.q();
    let mut r = Report::default();
    r.info("map", json!(map.label()));
    r.info("species", json!(map.species()));
    r.info("rank", json!(net.rank()));
    r.info("conserved", json!(map.reduced_dim()));
    r.info("q", Value::Array((0..q.nrows()).map(|i| nums(&q.row(i).iter().copied().collect::<Vec<_>>())).collect()));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut id_err, mut rate_err, mut closed_err) = (0.0f64, 0.0f64, 0.0f64);
    let explicit = !matches!(map, ReductionMap::General { .. });
    for _ in 0..p.solver.samples {
        let c: Vec<f64> = (0..map.species()).map(|_| rng.gen_range(0.05..10.0)).collect();
        let u: Vec<f64> = (&q * DVector::from_column_slice(&c)).iter().copied().collect();
        let (psi, _) = map.psi(&u)?;
        let back = &q * DVector::from_column_slice(&psi);
        id_err = u.iter().zip(back.iter()).fold(id_err, |a, (x, y)| a.max((x - y).abs() / (1.0 + x.abs())));
        rate_err = net.rate(&psi).iter().fold(rate_err, |a, x| a.max(x.abs()));
        if explicit {
            let g = psi_general(&net, &q, &u)?;
            closed_err = g.c.iter().zip(&psi).fold(closed_err, |a, (x, y)| a.max((x - y).abs() / (1.0 + y.abs())));
        }
    }
    r.at_most("psi_inverse", id_err, PSI_TOL);
    r.at_most("psi_equilibrium", rate_err, PSI_TOL);
    if explicit {
        r.at_most("psi_closed_vs_general", closed_err, PSI_TOL);
    }

    if check_monotonicity {
        let d = diffusion(n)?;
        let per_axis = p.solver.per_axis.unwrap_or(MONOTONICITY_PER_AXIS);
        let dim = map.reduced_dim();
        let region = match (&p.solver.region, &p.boundary) {
            (Some(_), _) | (None, Some(_)) => region(&p.solver, &boundary(p)?)?,
            (None, None) => BoxRegion::new(vec![-1.0; dim], vec![1e4; dim])?,
        };
        let a_lo = certify_constants(&ReducedFlux::new(map.clone(), d.clone())?, &region, per_axis)?.a_lo;
        r.push("sampled_a_lo", a_lo, 0.0, a_lo > 0.0);
        r.info("region", json!({"lo": nums(&region.lo), "hi": nums(&region.hi), "per_axis": per_axis}));
        if is_three_species(map) {
            let ok = monotonicity_lemma_check(d[0], d[1], d[2]);
            let spread = [d[0], d[1]].iter().fold(0.0f64, |a, x| a.max((x / d[2]).ln().abs()));
            r.push("monotonicity_bound", spread, (3.0 + 8f64.sqrt()).ln(), ok);
            r.info(
                "monotonicity",
                json!(if ok {
                    "bound satisfied: (3 - sqrt 8) d3 < d1, d2 < (3 + sqrt 8) d3"
                } else {
                    "bound violated: d1 or d2 outside ((3 - sqrt 8) d3, (3 + sqrt 8) d3)"
                }),
            );
        }
    }
    Ok(r)
}

pub fn lift(p: &Problem, out: &Path) -> Result<Report, CliError> {
    let n = network(p)?;
    let d = diffusion(n)?;
    let b = boundary(p)?;
    let (profile, mut r, info) = if n.map.reduced_dim() == 1 {
        let (lo, hi) = interval(&b)?;
        let flux = Arc::new(ReducedScalar(ReducedFlux::new(n.map.clone(), d.clone())?));
        let sd = ScalarDiffusivity::new(flux, lo, hi)?;
        let cfg = scalar_config(p, &sd)?;
        let (profile, rep) = solve_scalar(&sd, &b, &cfg)?;
        let r = scalar_checks(&profile, &sd, &p.solver);
        (profile, r, json!({"u0": num(rep.u0), "q0": num(rep.q0)}))
    } else {
        let r0 = region(&p.solver, &b)?;
        let map = reduced_flux_map(n.map.clone(), d.clone(), &r0, p.solver.per_axis.unwrap_or(9))?;
        let (profile, info) = solve_vector_problem(p, &map, &b)?;
        let r = vector_checks(&profile, &map, &p.solver);
        (profile, r, info)
    };
    r.info("solver", info);
    csvio::write_profile(&out.join("profile.csv"), &profile)?;
    let lifted = lift_profile(&profile, &n.map)?;
    csvio::write_columns(&out.join("lifted.csv"), &lifted.grid, "C", &lifted.c)?;
    r.at_most("lift_infeasible_nodes", lifted.infeasible.len() as f64, 0.0);
    r.info("lift_clipped_nodes", json!(lifted.clipped.len()));
    if let Some((cm, cp)) = concentrations(p) {
        let last = profile.grid.n_points() - 1;
        let mismatch = (0..cm.len())
            .map(|k| (lifted.c[k][0] - cm[k]).abs().max((lifted.c[k][last] - cp[k]).abs()))
            .fold(0.0, f64::max);
        r.at_most("lifted_end_mismatch", mismatch, p.solver.lift_tol);
    }
    let net = n.map.network()?;
    match lagrange_multiplier(&lifted, &d, &net.stoichiometric_vectors()) {
        Ok(m) => {
            csvio::write_columns(&out.join("multipliers.csv"), &lifted.grid, "Lambda", &m.lambda)?;
            r.info("multiplier_sup", num(m.sup()));
            r.info("multiplier_off_range", num(m.off_gamma));
        }
        Err(e) => r.info("multiplier_error", json!(e.to_string())),
    }
    Ok(r)
}

fn default_entropy(p: &Problem) -> EntropyDensity {
    match p.diffusivity {
        Some(ScalarDef::Preset(Diffusivity::Pme { m })) => EntropyDensity::phi_m(m),
        _ => EntropyDensity::split(0.5, -1.0),
    }
}

fn sigma_mode(p: &Problem, flux: &dyn ScalarFlux, lo: f64, hi: f64) -> SigmaMode {
    if let Some(ScalarDef::Preset(Diffusivity::Pme { m })) = p.diffusivity {
        return SigmaMode::Pme { m };
    }
    // Constants certified on the range of the data only.
    let samples = 201;
    let (mut a_lo, mut c_a) = (f64::INFINITY, 0.0f64);
    for i in 0..samples {
        let u = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
        a_lo = a_lo.min(flux.diffusivity(u));
        c_a = c_a.max(flux.diffusivity_prime(u).abs());
    }
    SigmaMode::Lipschitz { c_a, a_lo }
}

pub fn run_evolve(p: &Problem, out: &Path) -> Result<Report, CliError> {
    let e = p.evolution.clone().unwrap_or_default();
    let b = boundary(p)?;
    let (profile, d, info) = solve_scalar_problem(p, &b)?;
    let phi = e.entropy.unwrap_or_else(|| default_entropy(p));
    let init = EvolutionState::perturbed(&profile, e.amplitude, e.center, e.radius)?;
    let (lo, hi) = init.u.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, c), &x| (a.min(x), c.max(x)));
    let flux = d.flux().as_ref();
    let mode = sigma_mode(p, flux, lo, hi);
    let sigma = sigma_check(&profile, mode)?;
    let opts = EvolveOptions { tau_end: e.tau_end, sample_dt: e.sample_dt, phi, max_steps: e.max_steps };
    let tr = evolve(init, flux, &profile, &opts)?;

    let header: Vec<String> =
        ["tau", "H_phi", "hellinger", "moment0", "moment1", "sup_deviation"].iter().map(|s| s.to_string()).collect();
    let rows = tr.samples.iter().map(|s| vec![s.tau, s.entropy, s.hellinger, s.moment0, s.moment1, s.sup_deviation]);
    csvio::write_table(&out.join("trajectory.csv"), &header, rows, e.flush_every)?;
    csvio::write_profile(&out.join("profile.csv"), &profile)?;

    let mut r = Report::default();
    r.push("sigma_hypothesis", sigma.sigma, sigma.threshold, sigma.hypothesis_ok);
    let fit = decay_rate_fit(&tr.entropy_series(e.fit_from, e.tau_end))?;
    r.at_least("decay_rate", fit.rate, sigma.lambda_predicted - 0.02);
    let h0 = tr.samples[0].entropy;
    let increase = tr
        .samples
        .windows(2)
        .map(|w| (w[1].entropy - w[0].entropy) / h0)
        .fold(f64::NEG_INFINITY, f64::max);
    r.at_most("entropy_increase", increase, 1e-10);
    let c_hat = hellinger_constant(&phi);
    let ordering = tr
        .samples
        .iter()
        .filter(|s| s.entropy > 0.0)
        .map(|s| s.hellinger / (c_hat * s.entropy))
        .fold(0.0, f64::max);
    r.at_most("hellinger_ordering", ordering, 1.0);
    r.at_most("clipped", tr.final_state.clipped as u8 as f64, 0.0);

    let a_jump = flux.flux(b.plus()[0]) - flux.flux(b.minus()[0]);
    let mut evo = json!({
        "entropy": phi.label(),
        "steps": tr.steps,
        "samples": tr.samples.len(),
        "lambda_predicted": num(sigma.lambda_predicted),
        "fit_residual": num(fit.residual),
        "hellinger_constant": num(c_hat),
    });
    if let Ok(m) = moment_odes_check(&tr.samples, a_jump) {
        evo["moment_residuals"] = json!({
            "zeroth": num(m.zeroth),
            "first": num(m.first),
            "zeroth_scale": num(m.zeroth_scale),
            "first_scale": num(m.first_scale),
            "zeroth_rate": m.zeroth_rate.map(num).unwrap_or(Value::Null),
        });
    }
    r.info("evolution", evo);
    r.info("solver", info);
    Ok(r)
}

fn oracle_example(p: Option<&Problem>, example: Option<&str>) -> Result<OracleExample, CliError> {
    if let Some(id) = example {
        return Ok(OracleExample::parse(id)?);
    }
    match p.and_then(|p| p.diffusivity.as_ref()) {
        Some(ScalarDef::Preset(d)) => Ok(match *d {
            Diffusivity::Linear { d } => OracleExample::Linear { d },
            Diffusivity::DegenI => OracleExample::DegenI,
            Diffusivity::DegenII => OracleExample::DegenII,
            Diffusivity::DegenIII => OracleExample::DegenIII,
            Diffusivity::GlPhase => OracleExample::GlPhase,
            other => return Err(invalid(format!("no oracle example for {other:?}"))),
        }),
        _ => Err(invalid("oracle needs --example or a built-in [diffusivity]")),
    }
}

pub fn oracle(p: Option<&Problem>, example: Option<&str>, out: &Path) -> Result<Report, CliError> {
    let ex = oracle_example(p, example)?;
    let default = Problem {
        path: String::new(),
        diffusivity: None,
        fluxmap: None,
        network: None,
        boundary: None,
        grid: GridDef::default(),
        solver: SolverDef::default(),
        evolution: None,
    };
    let p = p.unwrap_or(&default);
    let b = ex.boundary();
    let (lo, hi) = interval(&b)?;
    let d = ScalarDiffusivity::preset(ex.diffusivity(), lo, hi)?;
    let cfg = scalar_config(p, &d)?;
    let case = closed_form_oracle(ex, cfg.grid)?;
    let (profile, rep) = solve_scalar(&d, &case.boundary, &cfg)?;
    csvio::write_profile(&out.join("profile.csv"), &profile)?;
    let mut r = Report::default();
    r.at_most("boundary_mismatch", profile.boundary_mismatch(), BOUNDARY_TOL);
    r.info("example", json!(format!("{ex:?}")));
    r.info("u0", num(rep.u0));
    r.info("q0", num(rep.q0));
    match &case.profile {
        Some(exact) => {
            csvio::write_profile(&out.join("oracle.csv"), exact)?;
            let tol = p.solver.oracle_tol.unwrap_or(match ex {
                OracleExample::DegenIII => 5e-3,
                _ => 1e-3,
            });
            r.at_most("oracle_sup_error", profile.sup_distance(exact), tol);
        }
        None => r.info("oracle", json!("no closed form; solved profile only")),
    }
    Ok(r)
}
