//! Sampling the multigraph, its N -> N+1 evolution, and the oriented
//! Norros-Reittu constructions.
//!
//! Every ordered pair `(v, w)`, loops included, carries an independent
//! `Poisson(w_out[v] * w_in[w] / L_N)` number of arcs.
//!
//! The fast samplers use Poisson superposition: the total number of arcs is
//! `Poisson(sum_out * sum_in / L_N)` and, given the total, arcs are i.i.d.
//! with source drawn proportional to `w_out` and target proportional to
//! `w_in`. Splitting a Poisson process by pair recovers the independent
//! per-pair counts.

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Arc, MultiDigraph};
use crate::rng::{stream, Purpose};
use crate::weights::{sample_weights_with, Marginal, WeightModel, WeightSequence};

/// Default vertex cap for the quadratic reference sampler.
pub const NAIVE_MAX_N: usize = 10_000;

const BLOCK: u64 = 1 << 16;

pub(crate) fn poisson<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("finite positive Poisson mean").sample(rng) as u64
}

fn check_normalizer(l_n: f64) -> Result<()> {
    if l_n > 0.0 && l_n.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("L_N must be positive and finite, got {l_n}")))
    }
}

/// Reference sampler: one Poisson draw per ordered pair. Refuses `N` above
/// [`NAIVE_MAX_N`]; see [`sample_graph_naive_with_cap`].
pub fn sample_graph_naive(w: &WeightSequence, l_n: f64, seed: u64) -> Result<MultiDigraph> {
    sample_graph_naive_with_cap(w, l_n, seed, NAIVE_MAX_N)
}

pub fn sample_graph_naive_with_cap(
    w: &WeightSequence,
    l_n: f64,
    seed: u64,
    max_n: usize,
) -> Result<MultiDigraph> {
    check_normalizer(l_n)?;
    let n = w.len();
    if n > max_n {
        return Err(Error::InvalidArgument(format!(
            "naive sampler is quadratic; N = {n} exceeds the cap {max_n}"
        )));
    }
    let pairs = w.pairs();
    let arcs: Vec<Arc> = (0..n)
        .into_par_iter()
        .flat_map_iter(|v| {
            let mut rng = stream(seed, Purpose::NaiveRow, v as u64);
            let out = pairs[v].w_out / l_n;
            let mut row = Vec::new();
            for (u, p) in pairs.iter().enumerate() {
                let m = poisson(&mut rng, out * p.w_in);
                if m > 0 {
                    row.push(Arc { src: v as u32, dst: u as u32, mult: m as u32 });
                }
            }
            row
        })
        .collect();
    Ok(MultiDigraph::from_arcs_unchecked(n, arcs))
}

/// `count` i.i.d. ordered pairs, source proportional to `src_weights` and
/// target proportional to `dst_weights`. Drawn in fixed-size blocks, each
/// with its own stream, so the output does not depend on thread count.
fn draw_pairs(
    src_weights: &[f64],
    dst_weights: &[f64],
    count: u64,
    seed: u64,
    purpose: Purpose,
) -> Vec<(u32, u32)> {
    if count == 0 {
        return Vec::new();
    }
    let src = WeightedAliasIndex::new(src_weights.to_vec()).expect("positive finite weights");
    let dst = WeightedAliasIndex::new(dst_weights.to_vec()).expect("positive finite weights");
    let blocks = count.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .flat_map_iter(|b| {
            let len = BLOCK.min(count - b * BLOCK);
            let mut rng = stream(seed, purpose, b);
            (0..len)
                .map(|_| (src.sample(&mut rng) as u32, dst.sample(&mut rng) as u32))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// `O(N + K)` sampler with the same law as [`sample_graph_naive`].
pub fn sample_graph_fast(w: &WeightSequence, l_n: f64, seed: u64) -> Result<MultiDigraph> {
    check_normalizer(l_n)?;
    let mass = w.sum_out() * w.sum_in() / l_n;
    let k = poisson(&mut stream(seed, Purpose::FastCount, 0), mass);
    let list = draw_pairs(&w.w_out(), &w.w_in(), k, seed, Purpose::FastBlock);
    Ok(MultiDigraph::from_arc_list(w.len(), list))
}

/// One step of the graph process: `g` on `N` vertices to a graph on `N + 1`.
///
/// Every existing arc survives independently with probability
/// `L_N / L_{N+1}`; then vertex `N` (0-based) receives its arcs to and from
/// all of `0..=N` at normalizer `L_{N+1}`. `w` must hold at least `N + 1`
/// weights, the first `N` being the ones `g` was sampled with.
pub fn evolve(
    g: &MultiDigraph,
    w: &WeightSequence,
    l_n: f64,
    l_next: f64,
    seed: u64,
) -> Result<MultiDigraph> {
    check_normalizer(l_n)?;
    check_normalizer(l_next)?;
    if l_next < l_n {
        return Err(Error::DecreasingNormalizer { from: l_n, to: l_next });
    }
    let n = g.n();
    if w.len() < n + 1 {
        return Err(Error::InvalidArgument(format!(
            "evolving a graph on {n} vertices needs at least {} weights, got {}",
            n + 1,
            w.len()
        )));
    }
    let keep = l_n / l_next;
    let mut arcs = Vec::with_capacity(g.support_size() + 8);
    if keep >= 1.0 {
        arcs.extend_from_slice(g.arcs());
    } else {
        let mut rng = stream(seed, Purpose::EvolveThin, n as u64);
        for a in g.arcs() {
            let m = Binomial::new(a.mult as u64, keep).expect("valid thinning").sample(&mut rng);
            if m > 0 {
                arcs.push(Arc { mult: m as u32, ..*a });
            }
        }
    }
    let mut rng = stream(seed, Purpose::EvolveGrow, n as u64);
    let new = w.get(n);
    for (u, p) in w.pairs()[..n].iter().enumerate() {
        let out = poisson(&mut rng, new.w_out * p.w_in / l_next);
        if out > 0 {
            arcs.push(Arc { src: n as u32, dst: u as u32, mult: out as u32 });
        }
        let inc = poisson(&mut rng, p.w_out * new.w_in / l_next);
        if inc > 0 {
            arcs.push(Arc { src: u as u32, dst: n as u32, mult: inc as u32 });
        }
    }
    let lp = poisson(&mut rng, new.w_out * new.w_in / l_next);
    if lp > 0 {
        arcs.push(Arc { src: n as u32, dst: n as u32, mult: lp as u32 });
    }
    Ok(MultiDigraph::from_arcs_unchecked(n + 1, arcs))
}

/// The two constituent oriented Norros-Reittu graphs and their arc-sum.
#[derive(Debug, Clone)]
pub struct OrientedSum {
    /// Edges oriented towards the higher index.
    pub first: MultiDigraph,
    /// Edges oriented towards the lower index.
    pub second: MultiDigraph,
    pub sum: MultiDigraph,
}

/// Undirected `NR_N(capacities)` edges with normalizer `l_bar`, as ordered
/// pairs in the order they were drawn.
///
/// Each unordered pair `{v, w}`, `v != w`, gets `Poisson(c_v c_w / l_bar)`
/// edges and each vertex `Poisson(c_v^2 / (2 l_bar))` self-edges: drawing
/// `Poisson(S^2 / (2 l_bar))` i.i.d. ordered pairs proportional to `c`
/// realizes both.
fn nr_edges(capacities: &[f64], l_bar: f64, seed: u64, purpose: Purpose) -> Vec<(u32, u32)> {
    let s: f64 = capacities.iter().sum();
    let mut rng = stream(seed, purpose, u64::MAX);
    let k = poisson(&mut rng, s * s / (2.0 * l_bar));
    draw_pairs(capacities, capacities, k, seed, purpose)
}

/// Sum of two independent `NR_N(Λ)` graphs, the first oriented towards the
/// higher index and the second towards the lower, with `L_N = Σ Λ`.
///
/// Each constituent contributes `Poisson(Λ_v^2 / (2 L_N))` loops at `v`, so
/// the sum has the law of the directed model on mirrored weights, diagonal
/// included.
pub fn sample_oriented_sum_parts(capacity_weights: &WeightSequence, seed: u64) -> Result<OrientedSum> {
    let caps = capacity_weights.capacities()?;
    let n = caps.len();
    let l_n = capacity_weights.sum_in();
    let up = nr_edges(&caps, l_n, seed, Purpose::NrFirst)
        .into_iter()
        .map(|(a, b)| (a.min(b), a.max(b)))
        .collect();
    let down = nr_edges(&caps, l_n, seed, Purpose::NrSecond)
        .into_iter()
        .map(|(a, b)| (a.max(b), a.min(b)))
        .collect();
    let first = MultiDigraph::from_arc_list(n, up);
    let second = MultiDigraph::from_arc_list(n, down);
    let sum = first.arc_sum(&second)?;
    Ok(OrientedSum { first, second, sum })
}

pub fn sample_oriented_sum(capacity_weights: &WeightSequence, seed: u64) -> Result<MultiDigraph> {
    Ok(sample_oriented_sum_parts(capacity_weights, seed)?.sum)
}

/// One `NR_N(2Λ)` graph (normalizer `Σ 2Λ`) with every edge oriented by an
/// independent fair coin.
pub fn sample_randomly_oriented_nr(capacity_weights: &WeightSequence, seed: u64) -> Result<MultiDigraph> {
    let caps = capacity_weights.capacities()?;
    let doubled: Vec<f64> = caps.iter().map(|c| 2.0 * c).collect();
    let l_bar: f64 = doubled.iter().sum();
    let edges = nr_edges(&doubled, l_bar, seed, Purpose::NrRandom);
    let mut coins = stream(seed, Purpose::NrRandom, u64::MAX - 1);
    let list = edges
        .into_iter()
        .map(|(a, b)| if coins.random::<bool>() { (a, b) } else { (b, a) })
        .collect();
    Ok(MultiDigraph::from_arc_list(caps.len(), list))
}

#[derive(Debug, Clone)]
pub struct IndependentSum {
    /// `w_out` from the first law, `w_in` from the second.
    pub weights: WeightSequence,
    pub l_n: f64,
    /// Arcs from lower to higher index, plus loops.
    pub first: MultiDigraph,
    /// Arcs from higher to lower index.
    pub second: MultiDigraph,
    pub sum: MultiDigraph,
}

/// Oriented sum with independently sampled weight sequences: out-weights
/// i.i.d. from `out_law`, in-weights i.i.d. from `in_law`, `L_N = μ N`.
pub fn sample_independent_sum(
    out_law: &Marginal,
    in_law: &Marginal,
    n: usize,
    seed: u64,
) -> Result<IndependentSum> {
    let model = WeightModel::independent(*in_law, *out_law)?;
    let ins = sample_weights_with(&WeightModel::mirrored(*in_law)?, n, seed, Purpose::WeightsSecond)?;
    let outs = sample_weights_with(&WeightModel::mirrored(*out_law)?, n, seed, Purpose::Weights)?;
    let weights = WeightSequence::new(
        ins.pairs()
            .iter()
            .zip(outs.pairs())
            .map(|(i, o)| crate::weights::WeightPair { w_in: i.w_in, w_out: o.w_out })
            .collect(),
    )?;
    let l_n = model.mean() * n as f64;
    let mass = weights.sum_out() * weights.sum_in() / l_n;
    let (w_out, w_in) = (weights.w_out(), weights.w_in());
    let k1 = poisson(&mut stream(seed, Purpose::NrFirst, u64::MAX), mass);
    let k2 = poisson(&mut stream(seed, Purpose::NrSecond, u64::MAX), mass);
    let up = draw_pairs(&w_out, &w_in, k1, seed, Purpose::NrFirst)
        .into_iter()
        .filter(|(a, b)| a <= b)
        .collect();
    let down = draw_pairs(&w_out, &w_in, k2, seed, Purpose::NrSecond)
        .into_iter()
        .filter(|(a, b)| a > b)
        .collect();
    let first = MultiDigraph::from_arc_list(n, up);
    let second = MultiDigraph::from_arc_list(n, down);
    let sum = first.arc_sum(&second)?;
    Ok(IndependentSum { weights, l_n, first, second, sum })
}
