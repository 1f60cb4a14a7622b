//! Problem files: TOML documents with the sections `[diffusivity]`, `[fluxmap]`,
//! `[network]`, `[boundary]`, `[grid]`, `[solver]` and `[evolution]`.
//!
//! Parsing collects every problem it finds instead of stopping at the first one.

use std::fs;
use std::path::{Path, PathBuf};

use selfsim::entropy::EntropyDensity;
use selfsim::reduction::{Reaction, ReactionNetwork, ReductionMap};
use selfsim::Diffusivity;
use toml::{Table, Value};

use crate::error::CliError;

const SECTIONS: &[&str] = &["diffusivity", "fluxmap", "network", "boundary", "grid", "solver", "evolution"];

#[derive(Debug, Clone, PartialEq)]
pub enum ScalarDef {
    Preset(Diffusivity),
    /// Reduced flux of a network with one conserved quantity.
    Reduced,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FluxDef {
    Linear(Vec<Vec<f64>>),
    Scalar(Diffusivity),
    Reduced,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkDef {
    pub map: ReductionMap,
    pub diffusion: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryDef {
    Reduced { minus: Vec<f64>, plus: Vec<f64> },
    /// Limits given as species concentrations; mapped through `Q`.
    Concentrations { minus: Vec<f64>, plus: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GridDef {
    pub half_width: Option<f64>,
    pub n_points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverDef {
    pub eps_schedule: Option<Vec<f64>>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    /// Samples per axis when certifying flux-map constants.
    pub per_axis: Option<usize>,
    /// Margin of the certification box around the boundary values.
    pub margin: f64,
    pub check_tol: f64,
    pub envelope_slack: f64,
    pub oracle_tol: Option<f64>,
    pub lift_tol: f64,
    pub samples: usize,
    pub region: Option<(Vec<f64>, Vec<f64>)>,
}

impl Default for SolverDef {
    fn default() -> Self {
        Self {
            eps_schedule: None,
            tol: None,
            max_iter: None,
            per_axis: None,
            margin: 0.1,
            check_tol: 1e-5,
            envelope_slack: 1.02,
            oracle_tol: None,
            lift_tol: 0.1,
            samples: 200,
            region: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionDef {
    pub tau_end: f64,
    pub sample_dt: f64,
    pub fit_from: f64,
    pub amplitude: f64,
    pub center: f64,
    pub radius: f64,
    pub entropy: Option<EntropyDensity>,
    pub flush_every: usize,
    pub max_steps: usize,
}

impl Default for EvolutionDef {
    fn default() -> Self {
        Self {
            tau_end: 6.0,
            sample_dt: 0.1,
            fit_from: 1.0,
            amplitude: 0.2,
            center: 0.0,
            radius: 2.0,
            entropy: None,
            flush_every: 10,
            max_steps: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub path: String,
    pub diffusivity: Option<ScalarDef>,
    pub fluxmap: Option<FluxDef>,
    pub network: Option<NetworkDef>,
    pub boundary: Option<BoundaryDef>,
    pub grid: GridDef,
    pub solver: SolverDef,
    pub evolution: Option<EvolutionDef>,
}

/// Reads, overrides and validates a problem file.
pub fn load(path: &Path, overrides: &[String]) -> Result<Problem, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(vec![format!("cannot read {}: {e}", path.display())]))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse(&text, &path.display().to_string(), &base, overrides)
}

pub fn parse(text: &str, name: &str, base: &Path, overrides: &[String]) -> Result<Problem, CliError> {
    let mut table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Validation(vec![format!("{name}: {}", e.message())]))?;
    let mut errs = Vec::new();
    for o in overrides {
        if let Err(e) = apply_override(&mut table, o) {
            errs.push(e);
        }
    }
    let problem = validate(&table, name, base, &mut errs);
    if errs.is_empty() {
        Ok(problem)
    } else {
        Err(CliError::Validation(errs))
    }
}

/// `section.key=value`; the value is read as a TOML value, falling back to a string.
pub fn apply_override(table: &mut Table, arg: &str) -> Result<(), String> {
    let (key, raw) = arg
        .split_once('=')
        .ok_or_else(|| format!("override `{arg}` is not of the form section.key=value"))?;
    let (section, field) = key
        .trim()
        .split_once('.')
        .ok_or_else(|| format!("override key `{key}` needs a section, as in grid.n_points"))?;
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => Value::String(raw.to_string()),
    };
    if let Value::Float(x) = value {
        if !x.is_finite() {
            return Err(format!("override {key}: `{raw}` is not a finite number"));
        }
    }
    let entry = table
        .entry(section.to_string())
        .or_insert_with(|| Value::Table(Table::new()));
    match entry {
        Value::Table(t) => {
            t.insert(field.to_string(), value);
            Ok(())
        }
        _ => Err(format!("override {key}: `{section}` is not a section")),
    }
}

struct Section<'a> {
    name: &'a str,
    table: &'a Table,
}

impl<'a> Section<'a> {
    fn check_keys(&self, allowed: &[&str], errs: &mut Vec<String>) {
        for k in self.table.keys() {
            if !allowed.contains(&k.as_str()) {
                errs.push(format!("[{}] unknown key `{k}` (allowed: {})", self.name, allowed.join(", ")));
            }
        }
    }

    fn has(&self, key: &str) -> bool {
        self.table.contains_key(key)
    }

    fn string(&self, key: &str, errs: &mut Vec<String>) -> Option<String> {
        match self.table.get(key)? {
            Value::String(s) => Some(s.clone()),
            other => {
                errs.push(format!("[{}] {key}: expected a string, got {}", self.name, other.type_str()));
                None
            }
        }
    }

    fn f64(&self, key: &str, errs: &mut Vec<String>) -> Option<f64> {
        let v = self.table.get(key)?;
        match as_f64(v) {
            Some(x) if x.is_finite() => Some(x),
            Some(_) => {
                errs.push(format!("[{}] {key}: must be finite", self.name));
                None
            }
            None => {
                errs.push(format!("[{}] {key}: expected a number, got {}", self.name, v.type_str()));
                None
            }
        }
    }

    fn positive(&self, key: &str, errs: &mut Vec<String>) -> Option<f64> {
        let x = self.f64(key, errs)?;
        if x > 0.0 {
            Some(x)
        } else {
            errs.push(format!("[{}] {key}: must be positive, got {x}", self.name));
            None
        }
    }

    fn count(&self, key: &str, min: i64, errs: &mut Vec<String>) -> Option<usize> {
        match self.table.get(key)? {
            Value::Integer(i) if *i >= min => Some(*i as usize),
            Value::Integer(i) => {
                errs.push(format!("[{}] {key}: must be at least {min}, got {i}", self.name));
                None
            }
            other => {
                errs.push(format!("[{}] {key}: expected an integer, got {}", self.name, other.type_str()));
                None
            }
        }
    }

    fn vector(&self, key: &str, errs: &mut Vec<String>) -> Option<Vec<f64>> {
        let v = self.table.get(key)?;
        match vector_of(v) {
            Ok(x) => Some(x),
            Err(e) => {
                errs.push(format!("[{}] {key}: {e}", self.name));
                None
            }
        }
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

/// A number or an array of numbers.
fn vector_of(v: &Value) -> Result<Vec<f64>, String> {
    let items: Vec<&Value> = match v {
        Value::Array(a) => a.iter().collect(),
        other => vec![other],
    };
    let out: Vec<f64> = items
        .iter()
        .map(|x| as_f64(x).ok_or_else(|| format!("expected numbers, got {}", x.type_str())))
        .collect::<Result<_, _>>()?;
    if out.is_empty() {
        return Err("empty array".into());
    }
    if out.iter().any(|x| !x.is_finite()) {
        return Err("entries must be finite".into());
    }
    Ok(out)
}

/// Splits `pme(m=2)` or `pme(2)` into the name and its argument.
fn name_and_arg(raw: &str) -> (String, Option<String>) {
    let raw = raw.trim();
    match raw.split_once('(') {
        Some((n, rest)) if rest.ends_with(')') => {
            let arg = rest[..rest.len() - 1].trim();
            let arg = arg.split_once('=').map(|(_, v)| v.trim()).unwrap_or(arg);
            (n.trim().to_string(), Some(arg.to_string()))
        }
        _ => (raw.to_string(), None),
    }
}

/// A named parameter, either inline in the name or as a key of the section.
fn parameter(s: &Section, key: &str, inline: &Option<String>, errs: &mut Vec<String>) -> Option<f64> {
    if let Some(a) = inline {
        return match a.parse::<f64>() {
            Ok(x) if x.is_finite() => Some(x),
            _ => {
                errs.push(format!("[{}] name: argument `{a}` is not a finite number", s.name));
                None
            }
        };
    }
    s.f64(key, errs)
}

/// Built-in scalar diffusivity from its name; `None` for names handled elsewhere.
fn preset(s: &Section, name: &str, arg: &Option<String>, errs: &mut Vec<String>) -> Option<Option<Diffusivity>> {
    Some(Some(match name {
        "linear" => {
            let d = parameter(s, "d", arg, errs).unwrap_or(1.0);
            if !(d > 0.0) {
                errs.push(format!("[{}] linear diffusivity must be positive, got {d}", s.name));
            }
            Diffusivity::Linear { d }
        }
        "pme" => match parameter(s, "m", arg, errs) {
            Some(m) if m >= 1.0 => Diffusivity::Pme { m },
            Some(m) => {
                errs.push(format!("[{}] pme exponent must be at least 1, got {m}", s.name));
                return None;
            }
            None => {
                errs.push(format!("[{}] pme needs the exponent m", s.name));
                return None;
            }
        },
        "degen_I" => Diffusivity::DegenI,
        "degen_II" => Diffusivity::DegenII,
        "degen_III" => Diffusivity::DegenIII,
        "gl_phase" => Diffusivity::GlPhase,
        "reduced" => return Some(None),
        _ => {
            errs.push(format!(
                "[{}] unknown name `{name}` (linear, pme(m), degen_I, degen_II, degen_III, gl_phase, reduced)",
                s.name
            ));
            return None;
        }
    }))
}

fn validate(table: &Table, name: &str, base: &Path, errs: &mut Vec<String>) -> Problem {
    let mut sections = std::collections::BTreeMap::new();
    for (k, v) in table {
        if !SECTIONS.contains(&k.as_str()) {
            errs.push(format!("unknown section [{k}] (allowed: {})", SECTIONS.join(", ")));
            continue;
        }
        match v {
            Value::Table(t) => {
                sections.insert(k.as_str(), Section { name: k, table: t });
            }
            _ => errs.push(format!("`{k}` must be a section")),
        }
    }
    if !["diffusivity", "fluxmap", "network"].iter().any(|s| sections.contains_key(s)) {
        errs.push("missing section: one of [diffusivity], [fluxmap] or [network] is required".into());
    }
    let diffusivity = sections.get("diffusivity").and_then(|s| parse_diffusivity(s, errs));
    let fluxmap = sections.get("fluxmap").and_then(|s| parse_fluxmap(s, errs));
    let network = sections.get("network").and_then(|s| parse_network(s, base, errs));
    let needs_network = matches!(diffusivity, Some(ScalarDef::Reduced)) || matches!(fluxmap, Some(FluxDef::Reduced));
    if needs_network {
        match &network {
            None if !sections.contains_key("network") => {
                errs.push("name `reduced` needs a [network] section".into())
            }
            Some(n) if n.diffusion.is_none() => errs.push("[network] diffusion is required for reduced fluxes".into()),
            _ => {}
        }
    }
    if let (Some(ScalarDef::Reduced), Some(n)) = (&diffusivity, &network) {
        if n.map.reduced_dim() != 1 {
            errs.push(format!(
                "[diffusivity] reduced scalar needs one conserved quantity, the network has {}",
                n.map.reduced_dim()
            ));
        }
    }
    let boundary = sections.get("boundary").and_then(|s| parse_boundary(s, network.is_some(), errs));
    let grid = sections.get("grid").map(|s| parse_grid(s, errs)).unwrap_or_default();
    let solver = sections.get("solver").map(|s| parse_solver(s, errs)).unwrap_or_default();
    let evolution = sections.get("evolution").map(|s| parse_evolution(s, errs));
    Problem { path: name.to_string(), diffusivity, fluxmap, network, boundary, grid, solver, evolution }
}

fn parse_diffusivity(s: &Section, errs: &mut Vec<String>) -> Option<ScalarDef> {
    s.check_keys(&["name", "d", "m"], errs);
    let Some(raw) = s.string("name", errs) else {
        if !s.has("name") {
            errs.push("[diffusivity] name is required".into());
        }
        return None;
    };
    let (name, arg) = name_and_arg(&raw);
    match preset(s, &name, &arg, errs)? {
        Some(d) => Some(ScalarDef::Preset(d)),
        None => Some(ScalarDef::Reduced),
    }
}

fn parse_fluxmap(s: &Section, errs: &mut Vec<String>) -> Option<FluxDef> {
    s.check_keys(&["name", "matrix", "d", "m"], errs);
    let Some(raw) = s.string("name", errs) else {
        if !s.has("name") {
            errs.push("[fluxmap] name is required".into());
        }
        return None;
    };
    let (name, arg) = name_and_arg(&raw);
    if name == "matrix" || name == "linear_matrix" {
        let Some(v) = s.table.get("matrix") else {
            errs.push("[fluxmap] matrix is required for a linear map".into());
            return None;
        };
        let rows: Option<Vec<Vec<f64>>> = match v {
            Value::Array(rows) => rows.iter().map(|r| vector_of(r).ok()).collect(),
            _ => None,
        };
        return match rows {
            Some(r) if !r.is_empty() && r.iter().all(|row| row.len() == r.len()) => Some(FluxDef::Linear(r)),
            _ => {
                errs.push("[fluxmap] matrix: expected a square array of numeric rows".into());
                None
            }
        };
    }
    match preset(s, &name, &arg, errs)? {
        Some(d) => Some(FluxDef::Scalar(d)),
        None => Some(FluxDef::Reduced),
    }
}

const NETWORK_KEYS: &[&str] = &["builtin", "beta", "gamma", "file", "species", "w", "reactions", "diffusion"];

fn parse_network(s: &Section, base: &Path, errs: &mut Vec<String>) -> Option<NetworkDef> {
    s.check_keys(NETWORK_KEYS, errs);
    let diffusion = s.vector("diffusion", errs);
    if let Some(d) = &diffusion {
        if d.iter().any(|x| !(*x > 0.0)) {
            errs.push(format!("[network] diffusion coefficients must be positive, got {d:?}"));
        }
    }
    let sources = ["builtin", "file", "reactions"].iter().filter(|k| s.has(k)).count();
    if sources != 1 {
        errs.push("[network] give exactly one of builtin, file or reactions".into());
        return None;
    }
    let map = if let Some(b) = s.string("builtin", errs) {
        match b.as_str() {
            "three_species" => ReductionMap::ThreeSpecies,
            "two_reactions" => ReductionMap::TwoReactions,
            "two_species" => {
                let beta = s.count("beta", 1, errs).unwrap_or(1);
                let gamma = s.count("gamma", 1, errs).unwrap_or(1);
                ReductionMap::TwoSpecies { beta: beta as f64, gamma: gamma as f64 }
            }
            other => {
                errs.push(format!("[network] unknown builtin `{other}` (three_species, two_reactions, two_species)"));
                return None;
            }
        }
    } else if let Some(f) = s.string("file", errs) {
        let path: PathBuf = base.join(&f);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) => {
                errs.push(format!("[network] cannot read {}: {e}", path.display()));
                return None;
            }
        };
        let t: Table = match text.parse() {
            Ok(t) => t,
            Err(e) => {
                errs.push(format!("{}: {}", path.display(), toml::de::Error::message(&e)));
                return None;
            }
        };
        let file = Section { name: "network file", table: &t };
        file.check_keys(&["species", "w", "reactions", "diffusion"], errs);
        let net = inline_network(&file, errs)?;
        let diffusion = diffusion.or_else(|| file.vector("diffusion", errs));
        return general(net, diffusion, errs);
    } else {
        let net = inline_network(s, errs)?;
        return general(net, diffusion, errs);
    };
    check_diffusion_len(&map, &diffusion, errs);
    Some(NetworkDef { map, diffusion })
}

fn general(net: ReactionNetwork, diffusion: Option<Vec<f64>>, errs: &mut Vec<String>) -> Option<NetworkDef> {
    // The explicit parametrizations are used whenever the network is one of the presets.
    let map = if net == ReactionNetwork::three_species() {
        ReductionMap::ThreeSpecies
    } else if net == ReactionNetwork::two_reactions() {
        ReductionMap::TwoReactions
    } else {
        match ReductionMap::general(net) {
            Ok(m) => m,
            Err(e) => {
                errs.push(format!("[network] {e}"));
                return None;
            }
        }
    };
    check_diffusion_len(&map, &diffusion, errs);
    Some(NetworkDef { map, diffusion })
}

fn check_diffusion_len(map: &ReductionMap, diffusion: &Option<Vec<f64>>, errs: &mut Vec<String>) {
    if let Some(d) = diffusion {
        if d.len() != map.species() {
            errs.push(format!("[network] diffusion has {} entries for {} species", d.len(), map.species()));
        }
    }
}

fn inline_network(s: &Section, errs: &mut Vec<String>) -> Option<ReactionNetwork> {
    let species = s.count("species", 1, errs);
    if species.is_none() && !s.has("species") {
        errs.push(format!("[{}] species is required", s.name));
    }
    let w = s.vector("w", errs);
    let reactions = match s.table.get("reactions") {
        Some(Value::Array(items)) => {
            let mut out = Vec::new();
            for (i, item) in items.iter().enumerate() {
                let Value::Table(t) = item else {
                    errs.push(format!("[{}] reactions[{i}] must be a table", s.name));
                    continue;
                };
                let r = Section { name: s.name, table: t };
                r.check_keys(&["alpha", "beta", "rate"], errs);
                let stoich = |key: &str, errs: &mut Vec<String>| -> Option<Vec<u32>> {
                    let v = r.vector(key, errs)?;
                    if v.iter().all(|x| *x >= 0.0 && x.fract() == 0.0) {
                        Some(v.iter().map(|x| *x as u32).collect())
                    } else {
                        errs.push(format!("[{}] reactions[{i}].{key}: entries must be nonnegative integers", s.name));
                        None
                    }
                };
                let alpha = stoich("alpha", errs);
                let beta = stoich("beta", errs);
                let rate = if r.has("rate") { r.positive("rate", errs) } else { Some(1.0) };
                if let (Some(alpha), Some(beta), Some(rate)) = (alpha, beta, rate) {
                    out.push(Reaction { alpha, beta, rate });
                }
            }
            Some(out)
        }
        Some(_) => {
            errs.push(format!("[{}] reactions must be an array of tables", s.name));
            None
        }
        None => {
            errs.push(format!("[{}] reactions is required", s.name));
            None
        }
    };
    let species = species?;
    let w = w.unwrap_or_else(|| vec![1.0; species]);
    match ReactionNetwork::new(species, reactions?, w) {
        Ok(n) => Some(n),
        Err(e) => {
            errs.push(format!("[{}] {e}", s.name));
            None
        }
    }
}

fn parse_boundary(s: &Section, has_network: bool, errs: &mut Vec<String>) -> Option<BoundaryDef> {
    s.check_keys(&["minus", "plus", "c_minus", "c_plus"], errs);
    let reduced = s.has("minus") || s.has("plus");
    let conc = s.has("c_minus") || s.has("c_plus");
    if reduced && conc {
        errs.push("[boundary] give either minus/plus or c_minus/c_plus, not both".into());
        return None;
    }
    let (km, kp) = if conc { ("c_minus", "c_plus") } else { ("minus", "plus") };
    for k in [km, kp] {
        if !s.has(k) {
            errs.push(format!("[boundary] {k} is required"));
        }
    }
    let minus = s.vector(km, errs);
    let plus = s.vector(kp, errs);
    let (minus, plus) = (minus?, plus?);
    if minus.len() != plus.len() {
        errs.push(format!("[boundary] {km} and {kp} have different lengths"));
        return None;
    }
    if conc {
        if !has_network {
            errs.push("[boundary] concentrations need a [network] section".into());
            return None;
        }
        return Some(BoundaryDef::Concentrations { minus, plus });
    }
    Some(BoundaryDef::Reduced { minus, plus })
}

fn parse_grid(s: &Section, errs: &mut Vec<String>) -> GridDef {
    s.check_keys(&["half_width", "n_points"], errs);
    let n_points = s.count("n_points", 5, errs);
    if let Some(n) = n_points {
        if n % 2 == 0 {
            errs.push(format!("[grid] n_points: must be odd, got {n}"));
        }
    }
    GridDef { half_width: s.positive("half_width", errs), n_points }
}

fn parse_solver(s: &Section, errs: &mut Vec<String>) -> SolverDef {
    s.check_keys(
        &[
            "eps_schedule",
            "tol",
            "max_iter",
            "per_axis",
            "margin",
            "check_tol",
            "envelope_slack",
            "oracle_tol",
            "lift_tol",
            "samples",
            "region_lo",
            "region_hi",
        ],
        errs,
    );
    let d = SolverDef::default();
    let region = match (s.vector("region_lo", errs), s.vector("region_hi", errs)) {
        (Some(lo), Some(hi)) => Some((lo, hi)),
        (None, None) => None,
        _ => {
            errs.push("[solver] region_lo and region_hi go together".into());
            None
        }
    };
    let eps_schedule = s.vector("eps_schedule", errs);
    if let Some(e) = &eps_schedule {
        if e.iter().any(|x| *x < 0.0) {
            errs.push("[solver] eps_schedule: entries must be nonnegative".into());
        }
    }
    SolverDef {
        eps_schedule,
        tol: s.positive("tol", errs),
        max_iter: s.count("max_iter", 1, errs),
        per_axis: s.count("per_axis", 2, errs),
        margin: if s.has("margin") { s.f64("margin", errs).filter(|m| *m >= 0.0).unwrap_or(d.margin) } else { d.margin },
        check_tol: s.positive("check_tol", errs).unwrap_or(d.check_tol),
        envelope_slack: s.positive("envelope_slack", errs).unwrap_or(d.envelope_slack),
        oracle_tol: s.positive("oracle_tol", errs),
        lift_tol: s.positive("lift_tol", errs).unwrap_or(d.lift_tol),
        samples: s.count("samples", 1, errs).unwrap_or(d.samples),
        region,
    }
}

fn parse_evolution(s: &Section, errs: &mut Vec<String>) -> EvolutionDef {
    s.check_keys(
        &[
            "tau_end",
            "sample_dt",
            "fit_from",
            "amplitude",
            "center",
            "radius",
            "entropy_p",
            "entropy_q",
            "flush_every",
            "max_steps",
        ],
        errs,
    );
    let d = EvolutionDef::default();
    let entropy = match (s.f64("entropy_p", errs), s.f64("entropy_q", errs)) {
        (Some(p), Some(q)) => Some(EntropyDensity::split(p, q)),
        (Some(p), None) => Some(EntropyDensity::e(p)),
        (None, Some(_)) => {
            errs.push("[evolution] entropy_q needs entropy_p".into());
            None
        }
        (None, None) => None,
    };
    let e = EvolutionDef {
        tau_end: s.positive("tau_end", errs).unwrap_or(d.tau_end),
        sample_dt: s.positive("sample_dt", errs).unwrap_or(d.sample_dt),
        fit_from: s.f64("fit_from", errs).unwrap_or(d.fit_from),
        amplitude: s.f64("amplitude", errs).unwrap_or(d.amplitude),
        center: s.f64("center", errs).unwrap_or(d.center),
        radius: s.positive("radius", errs).unwrap_or(d.radius),
        entropy,
        flush_every: s.count("flush_every", 1, errs).unwrap_or(d.flush_every),
        max_steps: s.count("max_steps", 1, errs).unwrap_or(d.max_steps),
    };
    if e.fit_from >= e.tau_end {
        errs.push(format!("[evolution] fit_from ({}) must be below tau_end ({})", e.fit_from, e.tau_end));
    }
    if e.amplitude <= -1.0 {
        errs.push(format!("[evolution] amplitude must exceed -1, got {}", e.amplitude));
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    fn errors(text: &str) -> Vec<String> {
        match parse(text, "t", Path::new("."), &[]) {
            Err(CliError::Validation(e)) => e,
            other => panic!("expected validation errors, got {other:?}"),
        }
    }

    #[test]
    fn pme_problem() {
        let p = parse(
            "[diffusivity]\nname = \"pme(m=2)\"\n[boundary]\nminus = 1\nplus = 1.2\n",
            "t",
            Path::new("."),
            &[],
        )
        .unwrap();
        assert_eq!(p.diffusivity, Some(ScalarDef::Preset(Diffusivity::Pme { m: 2.0 })));
        assert_eq!(p.boundary, Some(BoundaryDef::Reduced { minus: vec![1.0], plus: vec![1.2] }));
        let q = parse("[diffusivity]\nname = \"pme\"\nm = 2\n", "t", Path::new("."), &[]).unwrap();
        assert_eq!(q.diffusivity, p.diffusivity);
    }

    #[test]
    fn all_errors_are_reported() {
        let e = errors("[diffusivity]\nname = \"linear\"\nfoo = 1\n[grid]\nn_points = -5\n[colour]\nx = 1\n");
        assert_eq!(e.len(), 3, "{e:?}");
        assert!(e.iter().any(|m| m.contains("foo")));
        assert!(e.iter().any(|m| m.contains("n_points")));
        assert!(e.iter().any(|m| m.contains("colour")));
    }

    #[test]
    fn missing_model_section() {
        let e = errors("[boundary]\nminus = 0\nplus = 1\n");
        assert!(e[0].contains("missing section"));
    }

    #[test]
    fn inline_network_matches_preset() {
        let text = "[fluxmap]\nname = \"reduced\"\n[network]\nspecies = 3\ndiffusion = [2, 2, 10]\n\
                    [[network.reactions]]\nalpha = [0, 0, 1]\nbeta = [1, 1, 0]\n";
        let p = parse(text, "t", Path::new("."), &[]).unwrap();
        let n = p.network.unwrap();
        assert_eq!(n.map, ReductionMap::ThreeSpecies);
        assert_eq!(n.diffusion, Some(vec![2.0, 2.0, 10.0]));
    }

    #[test]
    fn overrides() {
        let p = parse(
            "[diffusivity]\nname = \"linear\"\n",
            "t",
            Path::new("."),
            &["grid.n_points=501".into(), "diffusivity.name=degen_I".into()],
        )
        .unwrap();
        assert_eq!(p.grid.n_points, Some(501));
        assert_eq!(p.diffusivity, Some(ScalarDef::Preset(Diffusivity::DegenI)));
        let e = match parse("[diffusivity]\nname = \"linear\"\n", "t", Path::new("."), &["solver.tol=nan".into()]) {
            Err(CliError::Validation(e)) => e,
            other => panic!("{other:?}"),
        };
        assert!(e[0].contains("finite"));
        assert!(parse("[diffusivity]\nname = \"linear\"\n", "t", Path::new("."), &["tol=1".into()]).is_err());
    }
}
