use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mixing::MixingSample;
use super::poisson::poisson_pmf_vec;
use crate::error::Result;
use crate::weights::WeightModel;

/// Probability masses on `0..=kmax` plus the mass beyond `kmax`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pmf {
    pub masses: Vec<f64>,
    pub tail: f64,
}

impl Pmf {
    pub fn kmax(&self) -> usize {
        self.masses.len() - 1
    }

    pub fn mass(&self, j: usize) -> f64 {
        self.masses.get(j).copied().unwrap_or(0.0)
    }

    /// `P(X >= k)`.
    pub fn ccdf(&self, k: usize) -> f64 {
        let below: f64 = self.masses.iter().take(k).sum();
        (1.0 - below).max(0.0)
    }
}

/// Joint masses of `(d_in, d_out)` on `[0, kmax]^2`, row-major in `d_in`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BivariatePmf {
    pub kmax: usize,
    pub masses: Vec<f64>,
    pub tail: f64,
}

impl BivariatePmf {
    pub fn mass(&self, j: usize, k: usize) -> f64 {
        if j > self.kmax || k > self.kmax {
            return 0.0;
        }
        self.masses[j * (self.kmax + 1) + k]
    }

    /// Marginal of the truncated table; cells whose other coordinate exceeds
    /// `kmax` are counted in the tail.
    pub fn marginal(&self, side: Side) -> Pmf {
        let w = self.kmax + 1;
        let masses: Vec<f64> = (0..w)
            .map(|i| {
                (0..w)
                    .map(|o| match side {
                        Side::In => self.masses[i * w + o],
                        Side::Out => self.masses[o * w + i],
                    })
                    .sum()
            })
            .collect();
        let tail = (1.0 - masses.iter().sum::<f64>()).max(0.0);
        Pmf { masses, tail }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    In,
    Out,
}

/// Law of `(Poisson(W_in), Poisson(W_out))`, conditionally independent given
/// `W`. Exact for deterministic models, otherwise averaged over a stratified
/// sample of `mc_samples` weights.
pub fn mixed_poisson_pmf(
    model: &WeightModel,
    kmax: usize,
    mc_samples: usize,
    seed: u64,
) -> Result<BivariatePmf> {
    let mix = MixingSample::new(model, mc_samples, seed)?;
    let w = kmax + 1;
    let partial: Vec<Vec<f64>> = mix
        .pairs()
        .par_chunks(4096)
        .map(|chunk| {
            let mut acc = vec![0.0; w * w];
            for p in chunk {
                let a = poisson_pmf_vec(p.w_in, kmax);
                let b = if p.w_out == p.w_in { a.clone() } else { poisson_pmf_vec(p.w_out, kmax) };
                for (i, &ai) in a.iter().enumerate() {
                    if ai < 1e-300 {
                        continue;
                    }
                    let row = &mut acc[i * w..(i + 1) * w];
                    for (r, &bk) in row.iter_mut().zip(&b) {
                        *r += ai * bk;
                    }
                }
            }
            acc
        })
        .collect();
    let mut masses = vec![0.0; w * w];
    for acc in partial {
        for (m, a) in masses.iter_mut().zip(acc) {
            *m += a;
        }
    }
    let count = mix.len() as f64;
    masses.iter_mut().for_each(|m| *m /= count);
    let tail = (1.0 - masses.iter().sum::<f64>()).max(0.0);
    Ok(BivariatePmf { kmax, masses, tail })
}

/// One marginal of [`mixed_poisson_pmf`], computed directly.
pub fn mixed_poisson_marginal(
    model: &WeightModel,
    side: Side,
    kmax: usize,
    mc_samples: usize,
    seed: u64,
) -> Result<Pmf> {
    let mix = MixingSample::new(model, mc_samples, seed)?;
    let partial: Vec<Vec<f64>> = mix
        .pairs()
        .par_chunks(4096)
        .map(|chunk| {
            let mut acc = vec![0.0; kmax + 1];
            for p in chunk {
                let lambda = match side {
                    Side::In => p.w_in,
                    Side::Out => p.w_out,
                };
                for (a, q) in acc.iter_mut().zip(poisson_pmf_vec(lambda, kmax)) {
                    *a += q;
                }
            }
            acc
        })
        .collect();
    let mut masses = vec![0.0; kmax + 1];
    for acc in partial {
        for (m, a) in masses.iter_mut().zip(acc) {
            *m += a;
        }
    }
    let count = mix.len() as f64;
    masses.iter_mut().for_each(|m| *m /= count);
    let tail = (1.0 - masses.iter().sum::<f64>()).max(0.0);
    Ok(Pmf { masses, tail })
}
