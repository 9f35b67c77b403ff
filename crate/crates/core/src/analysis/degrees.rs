//! Degree laws: conditional parameters, the mixed Poisson limit, asymptotic
//! independence of tracked vertices, and the loop count.

use rayon::prelude::*;
use serde::Serialize;

use super::pmf::mixed_poisson_pmf;
use super::poisson::poisson_pmf;
use crate::error::{Error, Result};
use crate::graph::{degrees, MultiDigraph};
use crate::rng::{derive_seed, stream, Purpose};
use crate::sampler::poisson;
use crate::stats::{chi_square_gof, histogram, summarize, ChiSquare, Summary};
use crate::weights::{normalizer, sample_weights, NormalizerMode, WeightModel, WeightSequence};

/// Exact Poisson means of `d_in`, `d_out` and the total degree of one vertex
/// given the weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionalParams {
    pub lambda_in: f64,
    pub lambda_out: f64,
    pub lambda_total: f64,
}

pub fn conditional_degree_params(w: &WeightSequence, l_n: f64, v: usize) -> Result<ConditionalParams> {
    if v >= w.len() {
        return Err(Error::VertexOutOfRange { vertex: v, n: w.len() });
    }
    let p = w.get(v);
    let lambda_in = p.w_in * (w.sum_out() - p.w_out) / l_n;
    let lambda_out = p.w_out * (w.sum_in() - p.w_in) / l_n;
    Ok(ConditionalParams {
        lambda_in,
        lambda_out,
        lambda_total: lambda_in + lambda_out + p.w_in * p.w_out / l_n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub threshold: f64,
    pub mc_samples: usize,
    /// Below this many vertices the result carries an underpowered warning.
    pub min_vertices: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { threshold: 0.01, mc_samples: 200_000, min_vertices: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeFit {
    pub n: usize,
    pub kmax: usize,
    pub tv: f64,
    pub threshold: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Total variation between the empirical joint law of `(d_in, d_out)` over
/// all vertices and the mixed Poisson limit, on `[0, kmax]^2` plus one cell
/// for everything outside.
pub fn degree_fit_test(
    g: &MultiDigraph,
    model: &WeightModel,
    kmax: usize,
    seed: u64,
    opts: &FitOptions,
) -> Result<DegreeFit> {
    let reference = mixed_poisson_pmf(model, kmax, opts.mc_samples, seed)?;
    let w = kmax + 1;
    let mut counts = vec![0u64; w * w];
    let mut outside = 0u64;
    let deg = degrees(g);
    for d in &deg {
        let (i, o) = (d.d_in as usize, d.d_out as usize);
        if i <= kmax && o <= kmax {
            counts[i * w + o] += 1;
        } else {
            outside += 1;
        }
    }
    let n = deg.len() as f64;
    let inside: f64 = counts
        .iter()
        .zip(&reference.masses)
        .map(|(&c, &p)| (c as f64 / n - p).abs())
        .sum();
    let tv = 0.5 * (inside + (outside as f64 / n - reference.tail).abs());
    let warning = (deg.len() < opts.min_vertices).then(|| {
        format!(
            "only {} vertices; the asymptotic degree test is underpowered below {}",
            deg.len(),
            opts.min_vertices
        )
    });
    Ok(DegreeFit { n: deg.len(), kmax, tv, threshold: opts.threshold, pass: tv < opts.threshold, warning })
}

/// Least-squares slope of `log P(X >= k)` against `log k` over the integers
/// in `[k_lo, k_hi]` at which the empirical tail is non-zero.
pub fn tail_slope(values: &[u64], k_lo: u64, k_hi: u64) -> Option<f64> {
    let n = values.len() as f64;
    let h = histogram(values.iter().copied());
    let mut at_least = vec![0u64; h.len() + 1];
    for k in (0..h.len()).rev() {
        at_least[k] = at_least[k + 1] + h[k];
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for k in k_lo..=k_hi {
        let c = at_least.get(k as usize).copied().unwrap_or(0);
        if c > 0 {
            xs.push((k as f64).ln());
            ys.push((c as f64 / n).ln());
        }
    }
    (xs.len() >= 2).then(|| crate::stats::ols(&xs, &ys).0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub n: usize,
    pub k: usize,
    pub reps: usize,
    /// Largest total variation between a joint law and the product of its
    /// marginals, over degree components of distinct tracked vertices.
    pub statistic: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_pair: Option<(String, String)>,
}

const CLAMP: u64 = 20;

/// Dependence between the degrees of `k` tracked vertices `0..k` under
/// repeated resampling of the graph at one fixed weight realization.
///
/// The degrees of the tracked vertices are functions of the arcs incident
/// to them only; those are independent of all other arcs, so each replicate
/// draws just these: the counts between tracked vertices pair by pair, and
/// the aggregated counts to and from the rest of the graph.
pub fn independence_test(
    model: &WeightModel,
    n: usize,
    k: usize,
    reps: usize,
    seed: u64,
    mode: NormalizerMode,
) -> Result<IndependenceReport> {
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("need 1 <= k <= N, got k={k}, N={n}")));
    }
    if reps == 0 {
        return Err(Error::InvalidArgument("reps must be positive".into()));
    }
    let w = sample_weights(model, n, seed)?;
    let l_n = normalizer(&w, model.mean(), mode)?;
    let tracked: Vec<_> = (0..k).map(|v| w.get(v)).collect();
    let t_in: f64 = tracked.iter().map(|p| p.w_in).sum();
    let t_out: f64 = tracked.iter().map(|p| p.w_out).sum();
    let (rest_in, rest_out) = (w.sum_in() - t_in, w.sum_out() - t_out);

    // per replicate: [d_in_0, d_out_0, d_in_1, d_out_1, ...]
    let samples: Vec<Vec<u64>> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, Purpose::Tracked, r);
            let mut d = vec![0u64; 2 * k];
            for (i, p) in tracked.iter().enumerate() {
                d[2 * i] += poisson(&mut rng, p.w_in * rest_out / l_n);
                d[2 * i + 1] += poisson(&mut rng, p.w_out * rest_in / l_n);
            }
            for (i, a) in tracked.iter().enumerate() {
                for (j, b) in tracked.iter().enumerate() {
                    if i != j {
                        let e = poisson(&mut rng, a.w_out * b.w_in / l_n);
                        d[2 * i + 1] += e;
                        d[2 * j] += e;
                    }
                }
            }
            d.iter_mut().for_each(|x| *x = (*x).min(CLAMP));
            d
        })
        .collect();

    let name = |c: usize| format!("{}_{}", if c.is_multiple_of(2) { "in" } else { "out" }, c / 2);
    let mut statistic = 0.0;
    let mut worst_pair = None;
    for a in 0..2 * k {
        for b in (a + 1)..2 * k {
            if a / 2 == b / 2 {
                continue;
            }
            let tv = dependence_tv(&samples, a, b);
            if tv > statistic {
                statistic = tv;
                worst_pair = Some((name(a), name(b)));
            }
        }
    }
    Ok(IndependenceReport { n, k, reps, statistic, worst_pair })
}

/// TV between the empirical joint law of components `a`, `b` and the
/// product of their empirical marginals.
fn dependence_tv(samples: &[Vec<u64>], a: usize, b: usize) -> f64 {
    let w = CLAMP as usize + 1;
    let mut joint = vec![0u64; w * w];
    let mut ma = vec![0u64; w];
    let mut mb = vec![0u64; w];
    for s in samples {
        let (x, y) = (s[a] as usize, s[b] as usize);
        joint[x * w + y] += 1;
        ma[x] += 1;
        mb[y] += 1;
    }
    let n = samples.len() as f64;
    let mut sum = 0.0;
    for x in 0..w {
        for y in 0..w {
            let p = joint[x * w + y] as f64 / n;
            let q = (ma[x] as f64 / n) * (mb[y] as f64 / n);
            sum += (p - q).abs();
        }
    }
    0.5 * sum
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopReport {
    pub expected_mean: f64,
    pub empirical: Summary,
    pub chi_square: ChiSquare,
    pub mean_within_3se: bool,
    pub pass: bool,
}

/// Total loop count over `reps` independent graphs against `Poisson(rho/mu)`.
///
/// Each replicate draws a fresh weight sequence; loops are independent of
/// all other arcs, so only the diagonal is sampled.
pub fn loop_test(
    model: &WeightModel,
    n: usize,
    reps: usize,
    seed: u64,
    mode: NormalizerMode,
    alpha: f64,
) -> Result<LoopReport> {
    let m = model.moments();
    if !m.rho.is_finite() {
        return Err(Error::InfiniteMoment(
            "E[W_in W_out] is infinite; the loop count has no Poisson limit".into(),
        ));
    }
    if reps < 2 {
        return Err(Error::InvalidArgument("need at least two replicates".into()));
    }
    let expected_mean = m.rho / m.mu;
    let loops: Vec<u64> = (0..reps as u64)
        .into_par_iter()
        .map(|r| -> Result<u64> {
            let s = derive_seed(seed, Purpose::Replicate, r);
            let w = sample_weights(model, n, s)?;
            let l_n = normalizer(&w, m.mu, mode)?;
            Ok(poisson(&mut stream(s, Purpose::NaiveRow, u64::MAX), w.sum_products() / l_n))
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = loops.iter().map(|&x| x as f64).collect();
    let empirical = summarize(&values);
    let chi = chi_square_gof(&histogram(loops.iter().copied()), |j| poisson_pmf(j as u64, expected_mean));
    let se = (expected_mean / reps as f64).sqrt();
    let mean_within_3se = (empirical.mean - expected_mean).abs() <= 3.0 * se;
    Ok(LoopReport {
        expected_mean,
        empirical,
        chi_square: chi,
        mean_within_3se,
        pass: mean_within_3se && chi.passes(alpha),
    })
}
