use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use super::{
    css_wlra, em_wlra, factored_gd_wlra, greedy_wlra, plain_svd_baseline, sample_wlra, svd_w,
    weighted_loss, AdamConfig, CssSelection, LraMethod, EM_DEFAULT_ITERS,
};
use crate::linalg::{power_iterations, Matrix};
use crate::rng::GENERATOR_NAME;
use crate::weights::WeightMatrix;
use crate::{Error, Result, Scalar};

/// Solvers available to the benchmark harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverKind {
    SvdW,
    SvdWRandomized,
    Em,
    Greedy,
    Sample,
    Adam,
    Svd,
    Css,
    SvdWThenEm,
}

impl SolverKind {
    pub const ALL: [SolverKind; 9] = [
        SolverKind::SvdW,
        SolverKind::SvdWRandomized,
        SolverKind::Em,
        SolverKind::Greedy,
        SolverKind::Sample,
        SolverKind::Adam,
        SolverKind::Svd,
        SolverKind::Css,
        SolverKind::SvdWThenEm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::SvdW => "svd_w",
            SolverKind::SvdWRandomized => "svd_w_randomized",
            SolverKind::Em => "em",
            SolverKind::Greedy => "greedy",
            SolverKind::Sample => "sample",
            SolverKind::Adam => "adam",
            SolverKind::Svd => "svd",
            SolverKind::Css => "css",
            SolverKind::SvdWThenEm => "svd_w_then_em",
        }
    }

    pub fn valid_names() -> String {
        Self::ALL
            .iter()
            .map(|s| s.name())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::param(format!(
                    "unknown solver '{s}'; valid solvers: {}",
                    Self::valid_names()
                ))
            })
    }
}

/// Settings shared by every solver run in a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    /// `svd_w` and `css` use rank `weight_rank·k`, capped at `min(n, d)`.
    pub weight_rank: usize,
    pub em_iters: usize,
    pub adam: AdamConfig,
    /// Rows drawn by `sample`; `None` means `10·k`.
    pub sample_t: Option<usize>,
    pub css_eps: f64,
    pub css_selection: CssSelection,
    pub randomized_eps: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            weight_rank: 1,
            em_iters: EM_DEFAULT_ITERS,
            adam: AdamConfig::default(),
            sample_t: None,
            css_eps: 0.1,
            css_selection: CssSelection::PivotedQr,
            randomized_eps: 0.1,
        }
    }
}

/// One timed solver run.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverReport {
    pub solver_name: String,
    pub rank: usize,
    pub seed: u64,
    /// Weighted squared Frobenius loss.
    pub loss: f64,
    /// Wall-clock seconds spent in the solve call.
    pub seconds: f64,
    pub iterations: usize,
    pub params: usize,
    pub generator: &'static str,
}

/// Runs one solver at rank `k` and reports its loss, time and size.
///
/// Only the solve is timed; evaluating the loss is not.
pub fn run_solver<T, W>(
    kind: SolverKind,
    a: &Matrix<T>,
    w: &W,
    k: usize,
    seed: u64,
    cfg: &SuiteConfig,
) -> Result<SolverReport>
where
    T: Scalar,
    W: WeightMatrix<T> + ?Sized,
{
    let (n, d) = a.shape();
    let budget = cfg.weight_rank.max(1).saturating_mul(k).min(n.min(d));
    let low_rank_params = (n + d) * k;
    let start = Instant::now();
    // each arm stops the clock before evaluating the loss
    let (loss, iterations, params, elapsed) = match kind {
        SolverKind::SvdW => {
            let sol = svd_w(a, w, 1, budget, LraMethod::Exact)?;
            let elapsed = start.elapsed();
            (weighted_loss(a, w, &sol)?, 1, sol.param_count(), elapsed)
        }
        SolverKind::SvdWRandomized => {
            let method = LraMethod::Randomized {
                eps: cfg.randomized_eps,
                seed,
            };
            let sol = svd_w(a, w, 1, budget, method)?;
            let elapsed = start.elapsed();
            let iters = power_iterations(cfg.randomized_eps);
            (
                weighted_loss(a, w, &sol)?,
                iters,
                sol.param_count(),
                elapsed,
            )
        }
        SolverKind::Em => {
            let (f, _) = em_wlra(a, w, k, cfg.em_iters, None)?;
            let elapsed = start.elapsed();
            (
                weighted_loss(a, w, &f)?,
                cfg.em_iters,
                low_rank_params,
                elapsed,
            )
        }
        SolverKind::Greedy => {
            let (f, _) = greedy_wlra(a, w, k)?;
            let elapsed = start.elapsed();
            (weighted_loss(a, w, &f)?, k, low_rank_params, elapsed)
        }
        SolverKind::Sample => {
            let t = cfg.sample_t.unwrap_or(10 * k);
            let res = sample_wlra(a, w, k, t, seed)?;
            let elapsed = start.elapsed();
            (
                weighted_loss(a, w, &res.truncated)?,
                t,
                low_rank_params,
                elapsed,
            )
        }
        SolverKind::Adam => {
            let (f, _) = factored_gd_wlra(a, w, k, &cfg.adam, seed)?;
            let elapsed = start.elapsed();
            (
                weighted_loss(a, w, &f)?,
                cfg.adam.epochs,
                low_rank_params,
                elapsed,
            )
        }
        SolverKind::Svd => {
            let f = plain_svd_baseline(a, k)?;
            let elapsed = start.elapsed();
            (weighted_loss(a, w, &f)?, 1, low_rank_params, elapsed)
        }
        SolverKind::Css => {
            let selection = match cfg.css_selection {
                CssSelection::PivotedQr => CssSelection::PivotedQr,
                CssSelection::AdaptiveSampling { .. } => CssSelection::AdaptiveSampling { seed },
            };
            let sol = css_wlra(a, w, 1, budget, cfg.css_eps, selection)?;
            let elapsed = start.elapsed();
            (weighted_loss(a, w, &sol)?, 1, sol.param_count(), elapsed)
        }
        SolverKind::SvdWThenEm => {
            let sol = svd_w(a, w, 1, budget, LraMethod::Exact)?;
            let (f, _) = em_wlra(a, w, k, cfg.em_iters, Some(&sol))?;
            let elapsed = start.elapsed();
            (
                weighted_loss(a, w, &f)?,
                cfg.em_iters,
                low_rank_params,
                elapsed,
            )
        }
    };
    Ok(SolverReport {
        solver_name: kind.name().to_string(),
        rank: k,
        seed,
        loss: loss.as_f64(),
        seconds: elapsed.as_secs_f64(),
        iterations,
        params,
        generator: GENERATOR_NAME,
    })
}
