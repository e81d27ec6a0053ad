use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{svd, LowRank, Matrix};
use crate::rng;
use crate::weights::LowRankWeight;
use crate::{Error, Result};

/// Floor on sampled variances.
pub const VARIANCE_FLOOR: f64 = 1e-6;

/// Uniform mixture of `k` diagonal Gaussians in `d` dimensions whose
/// variances take at most `r` distinct values per component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MogSpec {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub r: usize,
    pub seed: u64,
}

impl MogSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k == 0 || self.r == 0 || self.d < self.r {
            return Err(Error::param(format!(
                "mixture spec needs n, k, r ≥ 1 and d ≥ r, got {self:?}"
            )));
        }
        Ok(())
    }

    /// Coordinates `j` with equal `j / group_size` share a variance.
    pub fn group_size(&self) -> usize {
        self.d.div_ceil(self.r)
    }
}

#[derive(Clone, Debug)]
pub struct MogInstance {
    pub a: Matrix<f64>,
    /// `1/σ²` of the coordinate's component.
    pub w: Matrix<f64>,
    pub labels: Vec<usize>,
}

/// Samples a mixture instance.
///
/// Stream order: the `k·r` variances `max(z⁴, 1e-6)`, the `k·d` standard
/// normal means, then per row its label followed by its `d` noise draws.
pub fn gen_mog(spec: &MogSpec) -> Result<MogInstance> {
    spec.validate()?;
    let MogSpec { n, d, k, r, seed } = *spec;
    let mut g = rng::seeded(seed);
    let variances: Vec<f64> = (0..k * r)
        .map(|_| rng::normal::<f64>(&mut g).powi(4).max(VARIANCE_FLOOR))
        .collect();
    let means: Vec<f64> = (0..k * d).map(|_| rng::normal(&mut g)).collect();
    let group = spec.group_size();
    let var = |c: usize, j: usize| variances[c * r + j / group];
    let mut a = Matrix::zeros(n, d);
    let mut w = Matrix::zeros(n, d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = g.random_range(0..k);
        labels.push(c);
        for j in 0..d {
            let v = var(c, j);
            a[(i, j)] = means[c * d + j] + v.sqrt() * rng::normal::<f64>(&mut g);
            w[(i, j)] = 1.0 / v;
        }
    }
    Ok(MogInstance { a, w, labels })
}

/// Planted rank-`k` signal under a positive rank-`r` weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedSpec {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub r: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl PlantedSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > self.n.min(self.d) || self.r == 0 {
            return Err(Error::param(format!(
                "planted spec needs 1 ≤ k ≤ min(n, d) and r ≥ 1, got {self:?}"
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::param(
                "noise_sigma must be a finite non-negative number",
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct PlantedInstance {
    pub a: Matrix<f64>,
    pub w: LowRankWeight<f64>,
    pub a_true: LowRank<f64>,
}

/// `W = P Q` with entries of `P`, `Q` uniform in `[0.5, 1.5)`;
/// `A = A_true + σ·N(0, 1)` with Gaussian rank-`k` factors.
///
/// Stream order: `P`, `Q`, the left and right factors of `A_true`, then noise.
pub fn gen_planted(spec: &PlantedSpec) -> Result<PlantedInstance> {
    spec.validate()?;
    let PlantedSpec {
        n,
        d,
        k,
        r,
        noise_sigma,
        seed,
    } = *spec;
    let mut g = rng::seeded(seed);
    let p = Matrix::from_fn(n, r, |_, _| rng::uniform(&mut g, 0.5, 1.5));
    let q = Matrix::from_fn(r, d, |_, _| rng::uniform(&mut g, 0.5, 1.5));
    let w = LowRankWeight::new(LowRank::new(p, q)?)?;
    let left = Matrix::from_fn(n, k, |_, _| rng::normal(&mut g));
    let right = Matrix::from_fn(k, d, |_, _| rng::normal(&mut g));
    let a_true = LowRank::new(left, right)?;
    let mut a = a_true.to_dense();
    if noise_sigma > 0.0 {
        for x in a.as_mut_slice() {
            *x += noise_sigma * rng::normal::<f64>(&mut g);
        }
    }
    Ok(PlantedInstance { a, w, a_true })
}

/// Largest `noise_frac` for which the rank-1 mass guarantee is enforced.
pub const FISHER_MASS_NOISE_LIMIT: f64 = 0.05;
pub const FISHER_MASS_FLOOR: f64 = 0.95;

/// `W = u vᵀ + noise_frac·|G|` with `u`, `v` entrywise `|N(0, 1)|`, plus the
/// fraction `σ₁² / ‖W‖²_F`.
///
/// For `noise_frac ≤ 0.05` a fraction below 0.95 is reported as an error.
pub fn gen_fisher_like(
    n: usize,
    d: usize,
    noise_frac: f64,
    seed: u64,
) -> Result<(Matrix<f64>, f64)> {
    if !(0.0..=0.3).contains(&noise_frac) {
        return Err(Error::param(format!(
            "noise_frac {noise_frac} outside [0, 0.3]"
        )));
    }
    if n == 0 || d == 0 {
        return Err(Error::param("fisher-like weights need positive dimensions"));
    }
    let mut g = rng::seeded(seed);
    let u: Vec<f64> = (0..n).map(|_| rng::normal::<f64>(&mut g).abs()).collect();
    let v: Vec<f64> = (0..d).map(|_| rng::normal::<f64>(&mut g).abs()).collect();
    let mut w = Matrix::from_fn(n, d, |i, j| u[i] * v[j]);
    for x in w.as_mut_slice() {
        *x += noise_frac * rng::normal::<f64>(&mut g).abs();
    }
    let s = svd(&w)?;
    let mass = s.singular_values[0].powi(2) / w.frobenius_sq();
    if noise_frac <= FISHER_MASS_NOISE_LIMIT && mass < FISHER_MASS_FLOOR {
        return Err(Error::Numerical(format!(
            "first singular value holds {mass:.4} of the mass, below {FISHER_MASS_FLOOR}"
        )));
    }
    Ok((w, mass))
}
