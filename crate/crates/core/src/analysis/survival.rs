//! Extinction probabilities of the weighted Poisson branching process that
//! approximates forward and backward explorations, and the giant component
//! fractions built from them.
//!
//! Forward exploration: the root has `Poisson(w_out)` children; a vertex
//! reached along an arc carries a weight drawn from the `w_in`-size-biased
//! law and has `Poisson(w_out)` children of its own. The extinction
//! probability `q` of a non-root individual is the smallest solution of
//!
//! ```text
//! q = E[(W_in / mu) exp(-W_out (1 - q))]
//! ```
//!
//! and a root of weight `W` survives with probability
//! `1 - exp(-W_out (1 - q))`. Backward exploration swaps the roles of
//! `W_in` and `W_out`.

use serde::{Deserialize, Serialize};

use super::mixing::MixingSample;
use crate::error::{Error, Result};
use crate::weights::{WeightModel, WeightPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtinctionOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Size of the quadrature sample for non-deterministic laws.
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for ExtinctionOptions {
    fn default() -> Self {
        ExtinctionOptions { tol: 1e-10, max_iter: 10_000, mc_samples: 1_000_000, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtinctionSolution {
    pub q: f64,
    pub iterations: usize,
    /// Mean number of children of a non-root individual, `rho / mu`.
    pub mean_offspring: f64,
}

fn rates(p: &WeightPair, direction: Direction) -> (f64, f64) {
    // (size-bias weight, offspring rate)
    match direction {
        Direction::Forward => (p.w_in, p.w_out),
        Direction::Backward => (p.w_out, p.w_in),
    }
}

/// Monotone iteration from `q = 0` on a fixed quadrature sample.
fn iterate(mix: &MixingSample, direction: Direction, opts: &ExtinctionOptions) -> Result<(f64, usize)> {
    let norm = mix.mean_of(|p| rates(p, direction).0);
    let step = |q: f64| {
        mix.mean_of(|p| {
            let (bias, rate) = rates(p, direction);
            bias * (-rate * (1.0 - q)).exp()
        }) / norm
    };
    let mut q = 0.0;
    for it in 1..=opts.max_iter {
        let next = step(q).min(1.0);
        if (next - q).abs() < opts.tol {
            return Ok((next, it));
        }
        q = next;
    }
    Err(Error::NonConvergence { iterations: opts.max_iter, last: q })
}

/// Smallest fixed point of the extinction equation. Returns `q = 1` without
/// iterating when the mean offspring `rho / mu` is at most one.
pub fn solve_extinction(
    model: &WeightModel,
    direction: Direction,
    opts: &ExtinctionOptions,
) -> Result<ExtinctionSolution> {
    let mix = MixingSample::new(model, opts.mc_samples, opts.seed)?;
    solve_on(model, &mix, direction, opts)
}

fn solve_on(
    model: &WeightModel,
    mix: &MixingSample,
    direction: Direction,
    opts: &ExtinctionOptions,
) -> Result<ExtinctionSolution> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let m = model.moments();
    let mean_offspring = m.rho / m.mu;
    if mean_offspring <= 1.0 + 1e-12 {
        return Ok(ExtinctionSolution { q: 1.0, iterations: 0, mean_offspring });
    }
    let (q, iterations) = iterate(mix, direction, opts)?;
    Ok(ExtinctionSolution { q, iterations, mean_offspring })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Configuration {
    /// Oriented sum of two `NR(Λ)` graphs on the same capacities.
    MirroredSum,
    /// Oriented sum with independent in- and out-weight sequences.
    IndependentSum,
    /// General weights; the strong fraction is a heuristic.
    Plain,
}

impl std::str::FromStr for Configuration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mirrored-sum" => Ok(Configuration::MirroredSum),
            "independent-sum" => Ok(Configuration::IndependentSum),
            "plain" => Ok(Configuration::Plain),
            other => Err(Error::InvalidArgument(format!("unknown configuration {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalReport {
    pub configuration: Configuration,
    pub q_f: f64,
    pub q_b: f64,
    pub zeta_f: f64,
    pub zeta_b: f64,
    /// Weak giant fraction as given by the constituent graphs.
    pub zeta: f64,
    pub pi: f64,
    pub critical_ratio_in: f64,
    pub critical_ratio_out: f64,
    /// Set when `pi` is not backed by a theorem for this configuration.
    pub conjectural: bool,
}

pub fn survival_fractions(
    model: &WeightModel,
    configuration: Configuration,
    opts: &ExtinctionOptions,
) -> Result<SurvivalReport> {
    let model = model.validate()?;
    match configuration {
        Configuration::MirroredSum if !model.is_mirrored() => {
            return Err(Error::InvalidArgument(
                "mirrored-sum needs a model with w_in = w_out".into(),
            ))
        }
        Configuration::IndependentSum
            if !matches!(model, WeightModel::IndependentProduct { .. }) && !model.is_deterministic() =>
        {
            return Err(Error::InvalidArgument(
                "independent-sum needs an independent-product model".into(),
            ))
        }
        _ => {}
    }
    let mix = MixingSample::new(&model, opts.mc_samples, opts.seed)?;
    let q_f = solve_on(&model, &mix, Direction::Forward, opts)?.q;
    let q_b = solve_on(&model, &mix, Direction::Backward, opts)?.q;
    let root_f = |p: &WeightPair| 1.0 - (-p.w_out * (1.0 - q_f)).exp();
    let root_b = |p: &WeightPair| 1.0 - (-p.w_in * (1.0 - q_b)).exp();
    let zeta_f = mix.mean_of(root_f);
    let zeta_b = mix.mean_of(root_b);
    let pi = match configuration {
        Configuration::IndependentSum => zeta_f * zeta_b,
        // for mirrored weights root_f == root_b and this is E[zeta(Λ)^2]
        Configuration::MirroredSum | Configuration::Plain => mix.mean_of(|p| root_f(p) * root_b(p)),
    };
    let m = model.moments();
    Ok(SurvivalReport {
        configuration,
        q_f,
        q_b,
        zeta_f,
        zeta_b,
        zeta: zeta_f.max(zeta_b),
        pi,
        critical_ratio_in: m.nu_in / m.mu,
        critical_ratio_out: m.nu_out / m.mu,
        conjectural: configuration == Configuration::Plain,
    })
}
