use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};
use crate::weights::{Marginal, WeightModel, WeightPair};

/// A fixed sample of the weight law used as a quadrature rule for
/// expectations over `W`.
///
/// Deterministic laws are represented exactly by one atom. Otherwise each
/// non-constant marginal is drawn by stratified inversion (one uniform per
/// stratum `[i/M, (i+1)/M)`); independent marginals are paired through a
/// random permutation, i.e. a Latin hypercube sample.
#[derive(Debug, Clone)]
pub struct MixingSample {
    pairs: Vec<WeightPair>,
    exact: bool,
}

fn stratified(m: &Marginal, size: usize, seed: u64, lane: u64) -> Vec<f64> {
    let inv = 1.0 / size as f64;
    (0..size as u64)
        .into_par_iter()
        .map(|i| {
            let jitter: f64 = stream(seed, Purpose::Quadrature, (lane << 48) | i).random();
            m.quantile((i as f64 + jitter) * inv)
        })
        .collect()
}

impl MixingSample {
    pub fn new(model: &WeightModel, size: usize, seed: u64) -> Result<Self> {
        let model = model.validate()?;
        if model.is_deterministic() {
            let p = WeightPair { w_in: model.in_marginal().mean(), w_out: model.out_marginal().mean() };
            return Ok(MixingSample { pairs: vec![p], exact: true });
        }
        if size == 0 {
            return Err(Error::InvalidArgument("mixing sample size must be positive".into()));
        }
        let pairs = match model.capacity() {
            Some(cap) => stratified(&cap, size, seed, 0)
                .into_iter()
                .map(|c| WeightPair { w_in: c, w_out: c })
                .collect(),
            None => {
                let w_in = stratified(&model.in_marginal(), size, seed, 1);
                let mut w_out = stratified(&model.out_marginal(), size, seed, 2);
                w_out.shuffle(&mut stream(seed, Purpose::Quadrature, u64::MAX));
                w_in.into_iter().zip(w_out).map(|(a, b)| WeightPair { w_in: a, w_out: b }).collect()
            }
        };
        Ok(MixingSample { pairs, exact: false })
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn pairs(&self) -> &[WeightPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Sample average of `f(W)`.
    pub fn mean_of<F>(&self, f: F) -> f64
    where
        F: Fn(&WeightPair) -> f64 + Sync,
    {
        // fixed chunking keeps the summation order independent of threads
        let chunk = 1 << 14;
        let partial: Vec<f64> =
            self.pairs.par_chunks(chunk).map(|c| c.iter().map(&f).sum::<f64>()).collect();
        partial.iter().sum::<f64>() / self.pairs.len() as f64
    }
}
