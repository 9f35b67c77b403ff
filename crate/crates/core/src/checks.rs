//! The check suite run by `cpdigraph verify`.
//!
//! Every check is a deterministic function of the seed and reports one
//! statistic against one threshold.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    degree_fit_test, giant_component_experiment, independence_test, loop_test, poisson_pmf,
    solve_extinction, survival_fractions, Configuration, Direction, ExtinctionOptions, FitOptions,
};
use crate::error::Result;
use crate::graph::{components, MultiDigraph};
use crate::rng::{derive_seed, Purpose};
use crate::sampler::{
    evolve, sample_graph_fast, sample_graph_naive, sample_oriented_sum, sample_randomly_oriented_nr,
};
use crate::stats::{chi_square_gof, histogram, summarize, tv_histograms};
use crate::weights::{normalizer, sample_weights, NormalizerMode, WeightModel, WeightSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// Pass iff `statistic < threshold`.
    Below,
    /// Pass iff `statistic >= threshold`.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub relation: Relation,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, statistic: f64, threshold: f64, relation: Relation) -> Self {
        let pass = match relation {
            Relation::Below => statistic < threshold,
            Relation::AtLeast => statistic >= threshold,
        };
        CheckResult { name: name.into(), statistic, threshold, relation, pass, note: None }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Quick,
    Full,
}

impl std::str::FromStr for Suite {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Suite::Quick),
            "full" => Ok(Suite::Full),
            other => Err(crate::Error::InvalidArgument(format!("unknown suite {other:?}"))),
        }
    }
}

/// Significance levels and tolerances used by the suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub alpha: f64,
    pub tv: f64,
    pub sigmas: f64,
    pub weak_giant: f64,
    pub strong_giant: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { alpha: 0.01, tv: 0.01, sigmas: 3.0, weak_giant: 0.01, strong_giant: 0.015 }
    }
}

fn replicate_seeds(seed: u64, reps: usize) -> impl ParallelIterator<Item = u64> {
    (0..reps as u64).into_par_iter().map(move |r| derive_seed(seed, Purpose::Replicate, r))
}

/// Chi-square of each ordered pair's multiplicity against the exact
/// `Poisson(w_out[v] w_in[w] / L)`. Reports the smallest p-value.
pub fn pair_law_check<F>(name: &str, w: &WeightSequence, l_n: f64, reps: usize, seed: u64, alpha: f64, sampler: F) -> Result<CheckResult>
where
    F: Fn(u64) -> Result<MultiDigraph> + Sync,
{
    let n = w.len();
    let graphs: Vec<MultiDigraph> = replicate_seeds(seed, reps).map(&sampler).collect::<Result<_>>()?;
    let mut worst = 1.0f64;
    for v in 0..n {
        for u in 0..n {
            let lambda = w.get(v).w_out * w.get(u).w_in / l_n;
            let h = histogram(graphs.iter().map(|g| g.multiplicity(v, u)));
            worst = worst.min(chi_square_gof(&h, |j| poisson_pmf(j as u64, lambda)).p_value);
        }
    }
    Ok(CheckResult::new(name, worst, alpha, Relation::AtLeast).with_note("smallest per-pair chi-square p-value"))
}

fn total_arcs<F>(reps: usize, seed: u64, sampler: F) -> Result<Vec<u64>>
where
    F: Fn(u64) -> Result<MultiDigraph> + Sync,
{
    replicate_seeds(seed, reps).map(|s| sampler(s).map(|g| g.total_arcs())).collect()
}

/// Total-arc law of the oriented sum and the randomly oriented `NR(2Λ)`
/// against direct sampling, by TV of the empirical pmfs.
pub fn construction_check(capacities: &[f64], reps: usize, seed: u64, tv: f64) -> Result<CheckResult> {
    let w = WeightSequence::mirrored(capacities)?;
    let l_n = w.sum_in();
    let direct = histogram(total_arcs(reps, seed, |s| sample_graph_naive(&w, l_n, s))?);
    let sum = histogram(total_arcs(reps, seed ^ 1, |s| sample_oriented_sum(&w, s))?);
    let random = histogram(total_arcs(reps, seed ^ 2, |s| sample_randomly_oriented_nr(&w, s))?);
    let stat = [tv_histograms(&direct, &sum), tv_histograms(&direct, &random), tv_histograms(&sum, &random)]
        .into_iter()
        .fold(0.0, f64::max);
    Ok(CheckResult::new(format!("nr-constructions-n{}", capacities.len()), stat, tv, Relation::Below)
        .with_note("largest TV between total-arc pmfs"))
}

/// Evolve from `from` to `to` vertices and compare the total-arc law with
/// direct sampling at `to`.
pub fn evolution_check(model: &WeightModel, from: usize, to: usize, reps: usize, seed: u64, tv: f64) -> Result<CheckResult> {
    let mu = model.mean();
    let mode = NormalizerMode::DeterministicMuN;
    let chain = total_arcs(reps, seed, |s| {
        let w = sample_weights(model, to, s)?;
        let start = w.prefix(from)?;
        let mut g = sample_graph_naive(&start, normalizer(&start, mu, mode)?, s)?;
        for n in from..to {
            let l_n = normalizer(&w.prefix(n)?, mu, mode)?;
            let l_next = normalizer(&w.prefix(n + 1)?, mu, mode)?;
            g = evolve(&g, &w, l_n, l_next, s)?;
        }
        Ok(g)
    })?;
    let direct = total_arcs(reps, seed ^ 1, |s| {
        let w = sample_weights(model, to, s)?;
        sample_graph_naive(&w, normalizer(&w, mu, mode)?, s)
    })?;
    let stat = tv_histograms(&histogram(chain), &histogram(direct));
    Ok(CheckResult::new(format!("evolution-{from}-to-{to}"), stat, tv, Relation::Below))
}

/// Degree fit of a given graph against a model.
pub fn degree_check(g: &MultiDigraph, model: &WeightModel, kmax: usize, seed: u64, tv: f64) -> Result<CheckResult> {
    let opts = FitOptions { threshold: tv, ..Default::default() };
    let fit = degree_fit_test(g, model, kmax, seed, &opts)?;
    let r = CheckResult::new(format!("degree-fit-n{}", g.n()), fit.tv, tv, Relation::Below);
    Ok(match fit.warning {
        Some(w) => r.with_note(w),
        None => r,
    })
}

pub fn run_suite(suite: Suite, seed: u64, t: &Thresholds) -> Result<Vec<CheckResult>> {
    let full = suite == Suite::Full;
    let reps = 100_000;
    let mut out = Vec::new();
    let sub = |k: u64| derive_seed(seed, Purpose::Replicate, u64::MAX - k);

    // samplers against the exact pair law
    let two = WeightSequence::mirrored(&[1.0, 1.0])?;
    let three = WeightSequence::mirrored(&[0.5, 1.0, 2.0])?;
    for (label, w, l_n) in [("n2-constant", &two, 2.0), ("n3-mirrored", &three, 3.5)] {
        out.push(pair_law_check(&format!("naive-pair-law-{label}"), w, l_n, reps, sub(1), t.alpha, |s| {
            sample_graph_naive(w, l_n, s)
        })?);
        out.push(pair_law_check(&format!("fast-pair-law-{label}"), w, l_n, reps, sub(2), t.alpha, |s| {
            sample_graph_fast(w, l_n, s)
        })?);
    }

    out.push(construction_check(&[1.0, 1.0], reps, sub(3), t.tv)?);
    out.push(evolution_check(&WeightModel::constant(1.0)?, 2, 5, reps, sub(4), t.tv)?);

    let n = 100_000;
    let c2 = WeightModel::constant(2.0)?;
    let w = sample_weights(&c2, n, sub(5))?;
    let g = sample_graph_fast(&w, 2.0 * n as f64, sub(5))?;
    out.push(degree_check(&g, &c2, 30, sub(5), t.tv)?);

    let c1 = WeightModel::constant(1.0)?;
    let mode = NormalizerMode::DeterministicMuN;
    let l1 = loop_test(&c1, 1000, reps / 2, sub(6), mode, t.alpha)?;
    out.push(CheckResult::new("loops-constant1-chi-square", l1.chi_square.p_value, t.alpha, Relation::AtLeast));
    let l2 = loop_test(&c2, 10_000, 10_000, sub(7), mode, t.alpha)?;
    let z = (l2.empirical.mean - l2.expected_mean).abs() / (l2.expected_mean / l2.empirical.n as f64).sqrt();
    out.push(
        CheckResult::new("loops-constant2-mean", z, t.sigmas, Relation::Below)
            .with_note("standard errors between the empirical mean loop count and rho/mu"),
    );

    let ind = independence_test(&c1, 10_000, 2, 100_000, sub(8), mode)?;
    out.push(CheckResult::new("degree-independence-n10000", ind.statistic, t.tv, Relation::Below));

    let q = solve_extinction(&c2, Direction::Forward, &ExtinctionOptions::default())?.q;
    let resid = (q - (-2.0 * (1.0 - q)).exp()).abs();
    out.push(CheckResult::new("extinction-fixed-point-residual", resid, 1e-8, Relation::Below));

    if full {
        let reps = 10;
        let opts = ExtinctionOptions::default();
        let pred = survival_fractions(&c2, Configuration::MirroredSum, &opts)?;
        let e = giant_component_experiment(&c2, Configuration::MirroredSum, n, reps, sub(9))?;
        // weak connectivity ignores orientation: the union of the two
        // constituents is NR(2Λ), i.e. capacity 4 here
        let union = survival_fractions(&WeightModel::constant(4.0)?, Configuration::MirroredSum, &opts)?.zeta;
        out.push(
            CheckResult::new("giant-weak-mirrored-sum", (e.weak.mean - pred.zeta).abs(), t.weak_giant, Relation::Below)
                .with_note(format!(
                    "observed {:.5}, predicted {:.5}; the union NR(2Λ) gives {union:.5}",
                    e.weak.mean, pred.zeta
                )),
        );
        out.push(CheckResult::new("giant-strong-mirrored-sum", (e.strong.mean - pred.pi).abs(), t.strong_giant, Relation::Below));
        let pred = survival_fractions(&c2, Configuration::IndependentSum, &opts)?;
        let e = giant_component_experiment(&c2, Configuration::IndependentSum, n, reps, sub(10))?;
        out.push(CheckResult::new("giant-strong-independent-sum", (e.strong.mean - pred.pi).abs(), t.strong_giant, Relation::Below));
        let g = crate::analysis::sample_configuration(&c2, Configuration::MirroredSum, n, sub(11))?;
        let c = components(&g);
        out.push(CheckResult::new(
            "strong-refines-weak",
            if c.strong.refines(&c.weak) { 1.0 } else { 0.0 },
            1.0,
            Relation::AtLeast,
        ));
        let sizes: Vec<f64> = total_arcs(100, sub(12), |s| {
            let w = sample_weights(&c2, n, s)?;
            sample_graph_fast(&w, 2.0 * n as f64, s)
        })?
        .into_iter()
        .map(|k| k as f64 / n as f64)
        .collect();
        let s = summarize(&sizes);
        out.push(CheckResult::new("arcs-per-vertex", (s.mean - 2.0).abs() / s.std_error, 5.0, Relation::Below));
    }
    Ok(out)
}
