use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::flux::{inverse_cubic, Diffusivity};
use crate::grid::{BoundaryPair, Grid};
use crate::profile::Profile;

/// Named problems with known diffusivity and, where available, exact profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleExample {
    Linear { d: f64 },
    DegenI,
    DegenII,
    DegenIII,
    GlPhase,
}

impl OracleExample {
    /// Parses `linear`, `linear(2.5)`, `degen_I`, `degen_II`, `degen_III` or `gl_phase`.
    pub fn parse(id: &str) -> Result<Self> {
        let id = id.trim();
        match id {
            "linear" => return Ok(Self::Linear { d: 1.0 }),
            "degen_I" => return Ok(Self::DegenI),
            "degen_II" => return Ok(Self::DegenII),
            "degen_III" => return Ok(Self::DegenIII),
            "gl_phase" => return Ok(Self::GlPhase),
            _ => {}
        }
        if let Some(arg) = id.strip_prefix("linear(").and_then(|r| r.strip_suffix(')')) {
            let d: f64 = arg
                .trim()
                .parse()
                .map_err(|_| Error::UnknownExample(id.to_string()))?;
            if d > 0.0 && d.is_finite() {
                return Ok(Self::Linear { d });
            }
        }
        Err(Error::UnknownExample(id.to_string()))
    }

    pub fn diffusivity(&self) -> Diffusivity {
        match *self {
            Self::Linear { d } => Diffusivity::Linear { d },
            Self::DegenI => Diffusivity::DegenI,
            Self::DegenII => Diffusivity::DegenII,
            Self::DegenIII => Diffusivity::DegenIII,
            Self::GlPhase => Diffusivity::GlPhase,
        }
    }

    pub fn boundary(&self) -> BoundaryPair {
        let (lo, hi) = match self {
            Self::Linear { .. } => (0.0, 1.0),
            Self::GlPhase => (-0.5, 0.5),
            _ => (-1.0, 1.0),
        };
        BoundaryPair::scalar(lo, hi).expect("finite limits")
    }
}

/// An oracle problem: the diffusivity, its limits and the exact profile if known.
#[derive(Debug, Clone)]
pub struct OracleCase {
    pub example: OracleExample,
    pub diffusivity: Diffusivity,
    pub boundary: BoundaryPair,
    pub profile: Option<Profile>,
}

/// Exact grid samples for the named example.
pub fn closed_form_oracle(example: OracleExample, grid: Grid) -> Result<OracleCase> {
    let boundary = example.boundary();
    let ys = grid.nodes();
    let profile = match example {
        OracleExample::Linear { d } => Some(erf_profile(d, 0.0, 1.0, grid)?),
        OracleExample::DegenI => {
            let u = ys.iter().map(|y| y.clamp(-1.0, 1.0)).collect();
            let q = ys
                .iter()
                .map(|y| if y.abs() < 1.0 { (1.0 - y * y) / 4.0 } else { 0.0 })
                .collect();
            Some(Profile::new(grid, vec![u], vec![q], boundary.clone())?)
        }
        OracleExample::DegenII => {
            let u = ys
                .iter()
                .map(|y| {
                    let s = y.clamp(-1.0, 1.0);
                    1.5 * s - 0.5 * s * s * s
                })
                .collect();
            let q = ys
                .iter()
                .map(|y| {
                    let w = (1.0 - y * y).max(0.0);
                    3.0 / 16.0 * w * w
                })
                .collect();
            Some(Profile::new(grid, vec![u], vec![q], boundary.clone())?)
        }
        OracleExample::DegenIII => {
            let u: Vec<f64> = ys.iter().map(|&y| inverse_cubic(y)).collect();
            let q = u
                .iter()
                .map(|&v| (1.0 - v * v) * (5.0 - v * v) / 16.0)
                .collect();
            Some(Profile::new(grid, vec![u], vec![q], boundary.clone())?)
        }
        OracleExample::GlPhase => None,
    };
    Ok(OracleCase {
        example,
        diffusivity: example.diffusivity(),
        boundary,
        profile,
    })
}

/// `U(y) = U_- + (Δ/2) erfc(-y/(2√d))` with flux `Δ √(d/(4π)) exp(-y²/(4d))`.
pub fn erf_profile(d: f64, lo: f64, hi: f64, grid: Grid) -> Result<Profile> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidInput(format!("diffusivity must be positive, got {d}")));
    }
    let delta = hi - lo;
    let ys = grid.nodes();
    let scale = 2.0 * d.sqrt();
    let u = ys.iter().map(|y| lo + 0.5 * delta * erfc(-y / scale)).collect();
    let amp = delta * (d / (4.0 * std::f64::consts::PI)).sqrt();
    let q = ys.iter().map(|y| amp * (-y * y / (4.0 * d)).exp()).collect();
    Profile::new(grid, vec![u], vec![q], BoundaryPair::scalar(lo, hi)?)
}
