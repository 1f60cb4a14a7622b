use nalgebra::DMatrix;
use num_rational::Rational64;

use crate::error::{Error, Result};

/// One reversible mass-action reaction `α ⇌ β` with rate constant `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
    pub rate: f64,
}

/// Detailed-balance reaction network with equilibrium `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionNetwork {
    species: usize,
    reactions: Vec<Reaction>,
    w: Vec<f64>,
}

impl ReactionNetwork {
    pub fn new(species: usize, reactions: Vec<Reaction>, w: Vec<f64>) -> Result<Self> {
        if species == 0 {
            return Err(Error::InvalidInput("a network needs at least one species".into()));
        }
        if w.len() != species || w.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "equilibrium must have {species} positive entries, got {w:?}"
            )));
        }
        for (r, re) in reactions.iter().enumerate() {
            if re.alpha.len() != species || re.beta.len() != species {
                return Err(Error::InvalidInput(format!("reaction {r} has wrong length")));
            }
            if !(re.rate.is_finite() && re.rate > 0.0) {
                return Err(Error::InvalidInput(format!("reaction {r} has rate {}", re.rate)));
            }
            if re.alpha == re.beta {
                return Err(Error::InvalidInput(format!("reaction {r} is trivial")));
            }
        }
        let net = Self { species, reactions, w };
        if net.rank() >= species {
            return Err(Error::InvalidInput(
                "stoichiometric subspace is full-dimensional; nothing is conserved".into(),
            ));
        }
        Ok(net)
    }

    /// `γ X₁ ⇌ β X₂` with `w = (1, 1)`.
    pub fn two_species(beta: u32, gamma: u32) -> Result<Self> {
        Self::new(
            2,
            vec![Reaction { alpha: vec![gamma, 0], beta: vec![0, beta], rate: 1.0 }],
            vec![1.0, 1.0],
        )
    }

    /// `X₃ ⇌ X₁ + X₂` with `w = (1, 1, 1)`.
    pub fn three_species() -> Self {
        Self::new(
            3,
            vec![Reaction { alpha: vec![0, 0, 1], beta: vec![1, 1, 0], rate: 1.0 }],
            vec![1.0; 3],
        )
        .expect("valid preset")
    }

    /// `2X₁ ⇌ X₂`, `X₂ ⇌ X₃` with `w = (1, 1, 1)`.
    pub fn two_reactions() -> Self {
        Self::new(
            3,
            vec![
                Reaction { alpha: vec![2, 0, 0], beta: vec![0, 1, 0], rate: 1.0 },
                Reaction { alpha: vec![0, 1, 0], beta: vec![0, 0, 1], rate: 1.0 },
            ],
            vec![1.0; 3],
        )
        .expect("valid preset")
    }

    pub fn species(&self) -> usize {
        self.species
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn equilibrium(&self) -> &[f64] {
        &self.w
    }

    /// Reaction vectors `β^r - α^r`.
    pub fn stoichiometric_vectors(&self) -> Vec<Vec<i64>> {
        self.reactions
            .iter()
            .map(|r| r.beta.iter().zip(&r.alpha).map(|(&b, &a)| b as i64 - a as i64).collect())
            .collect()
    }

    /// Dimension of the stoichiometric subspace.
    pub fn rank(&self) -> usize {
        let rows: Vec<Vec<Rational64>> = self
            .stoichiometric_vectors()
            .into_iter()
            .map(|v| v.into_iter().map(Rational64::from_integer).collect())
            .collect();
        rref(rows, self.species).1.len()
    }

    /// Number of conserved quantities `m = species - rank`.
    pub fn conserved(&self) -> usize {
        self.species - self.rank()
    }

    /// Mass-action rate `R(c) = Σ k_r (c^α/w^α - c^β/w^β)(β - α)`.
    pub fn rate(&self, c: &[f64]) -> Vec<f64> {
        let mono = |e: &[u32]| -> f64 {
            e.iter()
                .enumerate()
                .map(|(i, &p)| (c[i] / self.w[i]).powi(p as i32))
                .product()
        };
        let mut out = vec![0.0; self.species];
        for (r, s) in self.reactions.iter().zip(self.stoichiometric_vectors()) {
            let flux = r.rate * (mono(&r.alpha) - mono(&r.beta));
            for i in 0..self.species {
                out[i] += flux * s[i] as f64;
            }
        }
        out
    }
}

/// Reduced row echelon form over the rationals; returns the matrix and pivot columns.
fn rref(mut rows: Vec<Vec<Rational64>>, cols: usize) -> (Vec<Vec<Rational64>>, Vec<usize>) {
    let zero = Rational64::from_integer(0);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][c] != zero) else {
            continue;
        };
        rows.swap(r, p);
        let lead = rows[r][c];
        for x in rows[r].iter_mut() {
            *x /= lead;
        }
        for i in 0..rows.len() {
            if i != r && rows[i][c] != zero {
                let f = rows[i][c];
                for j in 0..cols {
                    let v = rows[r][j];
                    rows[i][j] -= f * v;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    (rows, pivots)
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Integer matrix `Q` whose rows span the orthogonal complement of the reaction
/// vectors. The rows are the reduced echelon basis of that complement, each scaled
/// to a primitive integer vector.
pub fn build_q(network: &ReactionNetwork) -> Result<DMatrix<f64>> {
    let n = network.species();
    let s: Vec<Vec<Rational64>> = network
        .stoichiometric_vectors()
        .into_iter()
        .map(|v| v.into_iter().map(Rational64::from_integer).collect())
        .collect();
    let (red, pivots) = rref(s, n);
    if pivots.len() >= n {
        return Err(Error::InvalidInput("stoichiometric subspace is full-dimensional".into()));
    }
    // Null-space basis: one vector per free column.
    let zero = Rational64::from_integer(0);
    let one = Rational64::from_integer(1);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let basis: Vec<Vec<Rational64>> = free
        .iter()
        .map(|&f| {
            let mut v = vec![zero; n];
            v[f] = one;
            for (row, &p) in red.iter().zip(&pivots) {
                v[p] = -row[f];
            }
            v
        })
        .collect();
    let (canon, _) = rref(basis, n);
    let mut q = DMatrix::zeros(canon.len(), n);
    for (i, row) in canon.iter().enumerate() {
        let lcm = row.iter().fold(1i64, |acc, x| {
            let d = *x.denom();
            acc / gcd(acc, d) * d
        });
        let ints: Vec<i64> = row.iter().map(|x| (x * Rational64::from_integer(lcm)).to_integer()).collect();
        let g = ints.iter().fold(0i64, |acc, &x| gcd(acc, x)).max(1);
        for (j, &x) in ints.iter().enumerate() {
            q[(i, j)] = (x / g) as f64;
        }
    }
    Ok(q)
}
