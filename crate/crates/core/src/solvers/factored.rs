use super::{check_rank, dense_weight};
use crate::linalg::{LowRank, Matrix};
use crate::rng;
use crate::weights::WeightMatrix;
use crate::{Error, Result, Scalar};

/// Hyperparameters of the adaptive-moment factored solver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub epochs: usize,
    pub lr0: f64,
    /// The learning rate at step `s` is `lr0 · decay^(s / decay_every)`.
    pub decay: f64,
    pub decay_every: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            lr0: 1.0,
            decay: 0.7,
            decay_every: 10,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    fn validate(&self) -> Result<()> {
        let positive = [self.lr0, self.decay, self.epsilon]
            .iter()
            .all(|&x| x > 0.0 && x.is_finite());
        let betas = [self.beta1, self.beta2]
            .iter()
            .all(|&b| (0.0..1.0).contains(&b));
        if !positive || !betas || self.epochs == 0 || self.decay_every == 0 {
            return Err(Error::param(format!("invalid optimizer settings {self:?}")));
        }
        Ok(())
    }

    pub fn learning_rate(&self, step: usize) -> f64 {
        self.lr0 * self.decay.powf(step as f64 / self.decay_every as f64)
    }
}

/// Loss `Σ W²(A − UV)²` and its gradients
/// `∂/∂U = −2 (W∘W∘(A − UV)) Vᵀ`, `∂/∂V = −2 Uᵀ (W∘W∘(A − UV))`.
pub fn factored_gradients<T: Scalar>(
    a: &Matrix<T>,
    w: &Matrix<T>,
    u: &Matrix<T>,
    v: &Matrix<T>,
) -> Result<(T, Matrix<T>, Matrix<T>)> {
    let resid = a.sub(&u.matmul(v)?)?;
    let mut loss = T::zero();
    let mut g = resid;
    for (r, &wi) in g.as_mut_slice().iter_mut().zip(w.as_slice()) {
        let w2 = wi * wi;
        loss += w2 * *r * *r;
        *r *= w2 * T::of(-2.0);
    }
    let gu = g.matmul(&v.transpose())?;
    let gv = u.t_matmul(&g)?;
    Ok((loss, gu, gv))
}

struct Moments<T> {
    m: Vec<T>,
    v: Vec<T>,
}

impl<T: Scalar> Moments<T> {
    fn new(len: usize) -> Self {
        Self {
            m: vec![T::zero(); len],
            v: vec![T::zero(); len],
        }
    }

    fn step(&mut self, param: &mut [T], grad: &[T], cfg: &AdamConfig, t: i32, lr: f64) {
        let (b1, b2) = (T::of(cfg.beta1), T::of(cfg.beta2));
        let c1 = T::one() - T::of(cfg.beta1.powi(t));
        let c2 = T::one() - T::of(cfg.beta2.powi(t));
        let (lr, eps) = (T::of(lr), T::of(cfg.epsilon));
        for i in 0..param.len() {
            let gi = grad[i];
            self.m[i] = b1 * self.m[i] + (T::one() - b1) * gi;
            self.v[i] = b2 * self.v[i] + (T::one() - b2) * gi * gi;
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            param[i] -= lr * mh / (vh.sqrt() + eps);
        }
    }
}

/// Full-batch adaptive-moment descent on `U (n×k)`, `V (k×d)`, one step per
/// epoch, from entries i.i.d. `N(0, 1)/√k`.
///
/// The trace holds the loss at the initial point and after every epoch.
pub fn factored_gd_wlra<T, W>(
    a: &Matrix<T>,
    w: &W,
    k: usize,
    cfg: &AdamConfig,
    seed: u64,
) -> Result<(LowRank<T>, Vec<T>)>
where
    T: Scalar,
    W: WeightMatrix<T> + ?Sized,
{
    let (n, d) = a.shape();
    check_rank(k, n, d, "factored_gd_wlra")?;
    cfg.validate()?;
    let w = dense_weight(a, w)?;
    let mut g = rng::seeded(seed);
    let scale = T::one() / T::of_usize(k).sqrt();
    let mut u = Matrix::from_fn(n, k, |_, _| rng::normal::<T>(&mut g) * scale);
    let mut v = Matrix::from_fn(k, d, |_, _| rng::normal::<T>(&mut g) * scale);
    let (mut mu, mut mv) = (Moments::new(n * k), Moments::new(k * d));
    let mut trace = Vec::with_capacity(cfg.epochs + 1);
    for epoch in 0..cfg.epochs {
        let (loss, gu, gv) = factored_gradients(a, &w, &u, &v)?;
        trace.push(loss);
        let lr = cfg.learning_rate(epoch);
        let t = i32::try_from(epoch + 1).unwrap_or(i32::MAX);
        mu.step(u.as_mut_slice(), gu.as_slice(), cfg, t, lr);
        mv.step(v.as_mut_slice(), gv.as_slice(), cfg, t, lr);
    }
    trace.push(factored_gradients(a, &w, &u, &v)?.0);
    if trace.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("factored descent diverged".into()));
    }
    Ok((LowRank::new(u, v)?, trace))
}
