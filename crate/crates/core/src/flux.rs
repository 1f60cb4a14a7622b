//! Constitutive maps: scalar diffusivities `D = A'` and vector flux maps `A: R^m -> R^m`,
//! together with sampled certification of the monotonicity constants.

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// A scalar flux `A(u)` with diffusivity `D(u) = A'(u)`.
pub trait ScalarFlux: Send + Sync + Debug {
    fn flux(&self, u: f64) -> f64;
    fn diffusivity(&self, u: f64) -> f64;

    /// `D'(u)`; the default is a central difference.
    fn diffusivity_prime(&self, u: f64) -> f64 {
        let h = 1e-6 * (1.0 + u.abs());
        (self.diffusivity(u + h) - self.diffusivity(u - h)) / (2.0 * h)
    }

    fn label(&self) -> String;
}

/// A vector flux map with Jacobian.
pub trait FluxMap: Send + Sync + Debug {
    fn dim(&self) -> usize;
    fn apply(&self, u: &[f64]) -> Vec<f64>;
    fn jacobian(&self, u: &[f64]) -> DMatrix<f64>;
    fn label(&self) -> String;
}

/// Built-in scalar diffusivities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Diffusivity {
    /// `D ≡ d`.
    Linear { d: f64 },
    /// Porous medium: `A(u) = u^m`, `D(u) = m u^{m-1}` for `u ≥ 0`.
    Pme { m: f64 },
    /// `D(u) = (1 - u²)/4`, profile `clamp(y, -1, 1)`.
    DegenI,
    /// `D(u) = (1 - Y(u)²)/8` with `Y` the inverse of `y ↦ 3y/2 - y³/2`.
    DegenII,
    /// `D(u) = (3/32)(1 - u²)²(5 - u²)`, profile inverse to `y = 3u/2 - u³/2`.
    DegenIII,
    /// Phase diffusion `D(η) = (1 - 3η²)/(1 - η²)`, positive for `|η| < 1/√3`.
    GlPhase,
}

/// Inverse of `y ↦ (3y - y³)/2` on `[-1, 1]`.
pub fn inverse_cubic(u: f64) -> f64 {
    2.0 * (u.clamp(-1.0, 1.0).asin() / 3.0).sin()
}

impl ScalarFlux for Diffusivity {
    fn flux(&self, u: f64) -> f64 {
        match *self {
            Diffusivity::Linear { d } => d * u,
            Diffusivity::Pme { m } => u.max(0.0).powf(m),
            Diffusivity::DegenI => (u - u * u * u / 3.0) / 4.0,
            Diffusivity::DegenII => {
                let t = u.clamp(-1.0, 1.0).asin() / 3.0;
                0.375 * ((5.0 * t).sin() / 5.0 + t.sin() - (3.0 * t).sin() / 3.0)
            }
            Diffusivity::DegenIII => {
                let u2 = u * u;
                3.0 / 32.0 * u * (5.0 - u2 * (11.0 / 3.0 - u2 * (7.0 / 5.0 - u2 / 7.0)))
            }
            Diffusivity::GlPhase => 3.0 * u - 2.0 * u.atanh(),
        }
    }

    fn diffusivity(&self, u: f64) -> f64 {
        match *self {
            Diffusivity::Linear { d } => d,
            Diffusivity::Pme { m } => {
                if m == 1.0 {
                    1.0
                } else {
                    m * u.max(0.0).powf(m - 1.0)
                }
            }
            Diffusivity::DegenI => (1.0 - u * u) / 4.0,
            Diffusivity::DegenII => {
                let y = inverse_cubic(u);
                ((1.0 - y * y) / 8.0).max(0.0)
            }
            Diffusivity::DegenIII => {
                let w = 1.0 - u * u;
                3.0 / 32.0 * w * w * (5.0 - u * u)
            }
            Diffusivity::GlPhase => (1.0 - 3.0 * u * u) / (1.0 - u * u),
        }
    }

    fn diffusivity_prime(&self, u: f64) -> f64 {
        match *self {
            Diffusivity::Linear { .. } => 0.0,
            Diffusivity::Pme { m } => {
                if m == 1.0 {
                    0.0
                } else {
                    m * (m - 1.0) * u.max(0.0).powf(m - 2.0)
                }
            }
            Diffusivity::DegenI => -u / 2.0,
            Diffusivity::DegenIII => {
                let u2 = u * u;
                3.0 / 32.0 * u * (-22.0 + u2 * (28.0 - 6.0 * u2))
            }
            Diffusivity::GlPhase => {
                let w = 1.0 - u * u;
                -4.0 * u / (w * w)
            }
            Diffusivity::DegenII => {
                let h = 1e-6;
                (self.diffusivity(u + h) - self.diffusivity(u - h)) / (2.0 * h)
            }
        }
    }

    fn label(&self) -> String {
        match *self {
            Diffusivity::Linear { d } => format!("linear(d={d})"),
            Diffusivity::Pme { m } => format!("pme(m={m})"),
            Diffusivity::DegenI => "degen_I".into(),
            Diffusivity::DegenII => "degen_II".into(),
            Diffusivity::DegenIII => "degen_III".into(),
            Diffusivity::GlPhase => "gl_phase".into(),
        }
    }
}

const DIFFUSIVITY_SAMPLES: usize = 4097;
const ROUNDOFF_ZERO: f64 = 1e-13;

/// A scalar flux restricted to `[lo, hi]` with its extreme diffusivities.
#[derive(Debug, Clone)]
pub struct ScalarDiffusivity {
    flux: Arc<dyn ScalarFlux>,
    lo: f64,
    hi: f64,
    d_star: f64,
    d_sup: f64,
}

impl ScalarDiffusivity {
    /// Samples `D` on `[lo, hi]`; fails when `D` is negative or not finite there.
    pub fn new(flux: Arc<dyn ScalarFlux>, lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::InvalidInput(format!(
                "diffusivity interval [{lo}, {hi}] is empty or not finite"
            )));
        }
        let mut d_star = f64::INFINITY;
        let mut d_sup = f64::NEG_INFINITY;
        for i in 0..DIFFUSIVITY_SAMPLES {
            let u = if i + 1 == DIFFUSIVITY_SAMPLES {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (DIFFUSIVITY_SAMPLES - 1) as f64
            };
            let d = flux.diffusivity(u);
            if !d.is_finite() {
                return Err(Error::NonFinite("diffusivity"));
            }
            if d < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "diffusivity {} is negative at u = {u}: D = {d}",
                    flux.label()
                )));
            }
            d_star = d_star.min(d);
            d_sup = d_sup.max(d);
        }
        if d_sup <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "diffusivity {} vanishes identically on [{lo}, {hi}]",
                flux.label()
            )));
        }
        // Minima at roundoff level count as genuine zeros.
        if d_star <= ROUNDOFF_ZERO * d_sup {
            d_star = 0.0;
        }
        Ok(Self {
            flux,
            lo,
            hi,
            d_star,
            d_sup,
        })
    }

    pub fn preset(d: Diffusivity, lo: f64, hi: f64) -> Result<Self> {
        Self::new(Arc::new(d), lo, hi)
    }

    pub fn flux(&self) -> &Arc<dyn ScalarFlux> {
        &self.flux
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn d_star(&self) -> f64 {
        self.d_star
    }

    pub fn d_sup(&self) -> f64 {
        self.d_sup
    }

    /// `D` evaluated at `u` clamped into the interval; values outside are never consulted.
    pub fn d(&self, u: f64) -> f64 {
        self.flux.diffusivity(u.clamp(self.lo, self.hi))
    }

    /// `∫_a^b D(u) du` by adaptive quadrature.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        crate::quad::tanh_sinh(|u, _, _| self.d(u), a, b, 1e-13).value
    }
}

/// Linear flux `A(u) = M u`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFlux {
    pub matrix: DMatrix<f64>,
}

impl LinearFlux {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidInput("flux matrix must be square and nonempty".into()));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("flux matrix"));
        }
        Ok(Self { matrix })
    }
}

impl FluxMap for LinearFlux {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply(&self, u: &[f64]) -> Vec<f64> {
        let m = self.dim();
        (0..m)
            .map(|i| (0..m).map(|j| self.matrix[(i, j)] * u[j]).sum())
            .collect()
    }

    fn jacobian(&self, _u: &[f64]) -> DMatrix<f64> {
        self.matrix.clone()
    }

    fn label(&self) -> String {
        format!("linear_matrix({:?})", self.matrix.as_slice())
    }
}

/// A scalar flux seen as a one-component flux map.
#[derive(Debug, Clone)]
pub struct ScalarAsVector(pub Arc<dyn ScalarFlux>);

impl FluxMap for ScalarAsVector {
    fn dim(&self) -> usize {
        1
    }

    fn apply(&self, u: &[f64]) -> Vec<f64> {
        vec![self.0.flux(u[0])]
    }

    fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, self.0.diffusivity(u[0]))
    }

    fn label(&self) -> String {
        self.0.label()
    }
}

/// A scalar flux restricted to `[lo, hi]` and continued affinely outside, so that
/// regularized solvers never see values of `D` beyond the limits.
#[derive(Debug, Clone)]
pub struct ClampedScalar {
    pub flux: Arc<dyn ScalarFlux>,
    pub lo: f64,
    pub hi: f64,
}

impl FluxMap for ClampedScalar {
    fn dim(&self) -> usize {
        1
    }

    fn apply(&self, u: &[f64]) -> Vec<f64> {
        let c = u[0].clamp(self.lo, self.hi);
        vec![self.flux.flux(c) + self.flux.diffusivity(c) * (u[0] - c)]
    }

    fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        let c = u[0].clamp(self.lo, self.hi);
        DMatrix::from_element(1, 1, self.flux.diffusivity(c))
    }

    fn label(&self) -> String {
        self.flux.label()
    }
}

/// Axis-aligned box `[lo, hi]` in `R^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidInput("box bounds must be nonempty and equally long".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a.is_finite() && b.is_finite()) || a > b) {
            return Err(Error::InvalidInput(format!("empty box {lo:?} .. {hi:?}")));
        }
        Ok(Self { lo, hi })
    }

    /// Hull of the two boundary limits enlarged by `margin` on each side.
    pub fn around(minus: &[f64], plus: &[f64], margin: f64) -> Result<Self> {
        let lo = minus.iter().zip(plus).map(|(a, b)| a.min(*b) - margin).collect();
        let hi = minus.iter().zip(plus).map(|(a, b)| a.max(*b) + margin).collect();
        Self::new(lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Tensor grid with `per_axis` points per axis, corners included.
    pub fn samples(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let m = self.dim();
        let counts: Vec<usize> = (0..m)
            .map(|k| if self.lo[k] == self.hi[k] { 1 } else { per_axis.max(2) })
            .collect();
        let total: usize = counts.iter().product();
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; m];
        for _ in 0..total {
            let p = (0..m)
                .map(|k| {
                    if counts[k] == 1 {
                        self.lo[k]
                    } else if idx[k] + 1 == counts[k] {
                        self.hi[k]
                    } else {
                        self.lo[k] + (self.hi[k] - self.lo[k]) * idx[k] as f64 / (counts[k] - 1) as f64
                    }
                })
                .collect();
            out.push(p);
            for k in 0..m {
                idx[k] += 1;
                if idx[k] < counts[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        out
    }
}

/// Monotonicity constants of a flux map.
#[derive(Debug, Clone, PartialEq)]
pub struct Constants {
    /// Lower bound for the symmetric part of `DA`.
    pub a_lo: f64,
    /// Upper bound for the operator norm of `DA`.
    pub a_up: f64,
    /// Lower bound for `<v, DA v> / |DA v|²`.
    pub delta: f64,
    /// True when the constants come from sampling a box rather than from a closed form.
    pub sampled: bool,
    pub region: Option<BoxRegion>,
    pub sample_count: usize,
}

impl Constants {
    /// Exact constants for a scalar diffusivity with range `[d_star, d_sup]`.
    pub fn scalar(d_star: f64, d_sup: f64) -> Self {
        Self {
            a_lo: d_star,
            a_up: d_sup,
            delta: 1.0 / d_sup,
            sampled: false,
            region: None,
            sample_count: 0,
        }
    }

    /// Whether the existence hypothesis `a_lo + δ > 0` holds.
    pub fn admissible(&self) -> bool {
        self.a_lo + self.delta > 0.0
    }
}

/// Pointwise constants of a single Jacobian: (smallest symmetric eigenvalue,
/// operator norm, smallest ratio `<v, Jv>/|Jv|²`).
pub fn jacobian_constants(j: &DMatrix<f64>) -> (f64, f64, f64) {
    let sym = (j + j.transpose()) * 0.5;
    let a_lo = SymmetricEigen::new(sym.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let sv = j.clone().singular_values();
    let a_up = sv.iter().copied().fold(0.0, f64::max);
    let s_min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let delta = if s_min <= 1e-13 * a_up.max(1.0) {
        0.0
    } else {
        let gram = j.transpose() * j;
        match gram.cholesky() {
            Some(ch) => {
                let l = ch.l();
                let x = l
                    .solve_lower_triangular(&sym)
                    .expect("cholesky factor is invertible");
                let mm = l
                    .solve_lower_triangular(&x.transpose())
                    .expect("cholesky factor is invertible");
                let mm = (&mm + mm.transpose()) * 0.5;
                SymmetricEigen::new(mm)
                    .eigenvalues
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min)
            }
            None => 0.0,
        }
    };
    (a_lo, a_up, delta)
}

/// Sampled constants of `map` over `region` with `per_axis` points per axis.
pub fn certify_constants(map: &dyn FluxMap, region: &BoxRegion, per_axis: usize) -> Result<Constants> {
    if region.dim() != map.dim() {
        return Err(Error::InvalidInput(format!(
            "box dimension {} does not match flux dimension {}",
            region.dim(),
            map.dim()
        )));
    }
    if per_axis == 0 {
        return Err(Error::InvalidInput("at least one sample per axis is required".into()));
    }
    let samples = region.samples(per_axis);
    let (mut a_lo, mut a_up, mut delta) = (f64::INFINITY, 0.0f64, f64::INFINITY);
    for u in &samples {
        let j = map.jacobian(u);
        if j.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("flux jacobian"));
        }
        let (lo, up, de) = jacobian_constants(&j);
        a_lo = a_lo.min(lo);
        a_up = a_up.max(up);
        delta = delta.min(de);
    }
    Ok(Constants {
        a_lo,
        a_up,
        delta,
        sampled: true,
        region: Some(region.clone()),
        sample_count: samples.len(),
    })
}

/// A flux map bundled with its constants.
#[derive(Debug, Clone)]
pub struct VectorFluxMap {
    pub map: Arc<dyn FluxMap>,
    pub constants: Constants,
}

impl VectorFluxMap {
    pub fn certified(map: Arc<dyn FluxMap>, region: &BoxRegion, per_axis: usize) -> Result<Self> {
        let constants = certify_constants(map.as_ref(), region, per_axis)?;
        Ok(Self { map, constants })
    }

    /// Scalar diffusivity embedded as a one-component map with exact constants.
    pub fn from_scalar(d: &ScalarDiffusivity) -> Self {
        Self {
            map: Arc::new(ClampedScalar {
                flux: d.flux().clone(),
                lo: d.interval().0,
                hi: d.interval().1,
            }),
            constants: Constants::scalar(d.d_star(), d.d_sup()),
        }
    }

    pub fn dim(&self) -> usize {
        self.map.dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lin(rows: &[&[f64]]) -> LinearFlux {
        let m = rows.len();
        LinearFlux::new(DMatrix::from_fn(m, m, |i, j| rows[i][j])).unwrap()
    }

    fn unit_box(m: usize) -> BoxRegion {
        BoxRegion::new(vec![-1.0; m], vec![1.0; m]).unwrap()
    }

    #[test]
    fn identity_constants() {
        let c = certify_constants(&lin(&[&[1.0, 0.0], &[0.0, 1.0]]), &unit_box(2), 17).unwrap();
        assert!((c.a_lo - 1.0).abs() < 1e-14);
        assert!((c.a_up - 1.0).abs() < 1e-14);
        assert!((c.delta - 1.0).abs() < 1e-14);
        assert!(c.sampled);
        assert_eq!(c.sample_count, 289);
    }

    #[test]
    fn non_monotone_matrix_detected() {
        let c = certify_constants(&lin(&[&[1.0, 0.01], &[0.5, 0.0396]]), &unit_box(2), 17).unwrap();
        assert!(c.a_lo < 0.0);
    }

    #[test]
    fn rotation_has_zero_constants() {
        let w = 0.7;
        let c = certify_constants(&lin(&[&[0.0, -w], &[w, 0.0]]), &unit_box(2), 5).unwrap();
        assert!(c.a_lo.abs() < 1e-14);
        assert!(c.delta.abs() < 1e-14);
        assert!(!c.admissible());
    }

    #[test]
    fn delta_of_diagonal_matrix_is_inverse_largest_entry() {
        // <v, Dv>/|Dv|² ranges over [1/4, 1] for D = diag(1, 4).
        let (lo, up, de) = jacobian_constants(&DMatrix::from_diagonal(&nalgebra::dvector![1.0, 4.0]));
        assert!((lo - 1.0).abs() < 1e-14);
        assert!((up - 4.0).abs() < 1e-14);
        assert!((de - 0.25).abs() < 1e-14);
    }

    #[test]
    fn singular_jacobian_gives_zero_delta() {
        let (_, _, de) = jacobian_constants(&DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        assert_eq!(de, 0.0);
    }

    #[test]
    fn box_validation_and_corners() {
        assert!(BoxRegion::new(vec![1.0], vec![0.0]).is_err());
        assert!(BoxRegion::new(vec![], vec![]).is_err());
        let b = BoxRegion::new(vec![0.0, 2.0], vec![1.0, 3.0]).unwrap();
        let s = b.samples(3);
        assert_eq!(s.len(), 9);
        for corner in [[0.0, 2.0], [1.0, 2.0], [0.0, 3.0], [1.0, 3.0]] {
            assert!(s.iter().any(|p| p[0] == corner[0] && p[1] == corner[1]));
        }
    }

    #[test]
    fn diffusivity_presets_are_consistent() {
        let presets = [
            Diffusivity::Linear { d: 2.0 },
            Diffusivity::Pme { m: 2.5 },
            Diffusivity::DegenI,
            Diffusivity::DegenII,
            Diffusivity::DegenIII,
            Diffusivity::GlPhase,
        ];
        for p in presets {
            for &u in &[0.1, 0.3, 0.5] {
                let h = 1e-6;
                let fd = (p.flux(u + h) - p.flux(u - h)) / (2.0 * h);
                assert!((fd - p.diffusivity(u)).abs() < 1e-7, "{} at {u}", p.label());
                let fd2 = (p.diffusivity(u + h) - p.diffusivity(u - h)) / (2.0 * h);
                assert!((fd2 - p.diffusivity_prime(u)).abs() < 1e-6, "{} at {u}", p.label());
            }
        }
    }

    #[test]
    fn degenerate_profiles_solve_the_profile_equation() {
        // With y = (3U - U³)/2 the flux D(U)U' must satisfy dQ/dU = -y/2 and vanish at U = ±1.
        let d3 = Diffusivity::DegenIII;
        for &u in &[-0.8, -0.2, 0.4, 0.9] {
            let y = (3.0 * u - u * u * u) / 2.0;
            let q = |u: f64| d3.diffusivity(u) / (1.5 * (1.0 - u * u));
            let h = 1e-6;
            let dq = (q(u + h) - q(u - h)) / (2.0 * h);
            assert!((dq + y / 2.0).abs() < 1e-8);
        }
        let d2 = Diffusivity::DegenII;
        assert!((inverse_cubic(1.0) - 1.0).abs() < 1e-15);
        assert!(d2.diffusivity(1.0).abs() < 1e-15);
        assert!((d2.diffusivity(0.0) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn scalar_diffusivity_extremes() {
        let d = ScalarDiffusivity::preset(Diffusivity::DegenI, -1.0, 1.0).unwrap();
        assert_eq!(d.d_star(), 0.0);
        assert_eq!(d.d_sup(), 0.25);
        assert!((d.integral(-1.0, 1.0) - 1.0 / 3.0).abs() < 1e-13);
        assert!(ScalarDiffusivity::preset(Diffusivity::DegenI, -2.0, 1.0).is_err());
        let g = ScalarDiffusivity::preset(Diffusivity::GlPhase, -0.5, 0.5).unwrap();
        assert!(g.d_star() > 0.0);
    }

    proptest! {
        #[test]
        fn lower_constant_never_exceeds_upper(
            a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0, d in -3.0f64..3.0
        ) {
            let map = lin(&[&[a, b], &[c, d]]);
            let k = certify_constants(&map, &unit_box(2), 3).unwrap();
            prop_assert!(k.a_lo <= k.a_up + 1e-12);
        }

        #[test]
        fn regularization_shifts_lower_constant(
            a in 0.1f64..3.0, b in -1.0f64..1.0, c in -1.0f64..1.0, d in 0.1f64..3.0, eps in 0.0f64..1.0
        ) {
            let base = certify_constants(&lin(&[&[a, b], &[c, d]]), &unit_box(2), 3).unwrap();
            let reg = certify_constants(&lin(&[&[a + eps, b], &[c, d + eps]]), &unit_box(2), 3).unwrap();
            prop_assert!(reg.a_lo >= base.a_lo + eps - 1e-12);
        }
    }
}
