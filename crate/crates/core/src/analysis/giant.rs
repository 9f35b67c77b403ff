//! Monte Carlo estimates of giant component fractions and of the growth
//! exponent of the largest components at criticality.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::survival::Configuration;
use crate::error::{Error, Result};
use crate::graph::{components, largest_forward_cluster, MultiDigraph};
use crate::rng::{derive_seed, stream, Purpose};
use crate::sampler::{sample_graph_fast, sample_independent_sum, sample_oriented_sum};
use crate::stats::{median, ols, summarize, Summary};
use crate::weights::{sample_weights, Marginal, WeightModel};

/// One graph of the given configuration.
///
/// * `MirroredSum`: the oriented sum of two `NR(Λ)` graphs, `L_N = Σ Λ`.
/// * `IndependentSum`: out-weights from the out-marginal, in-weights from the
///   in-marginal, `L_N = μ N`.
/// * `Plain`: the directed model with `L_N = μ N`.
pub fn sample_configuration(
    model: &WeightModel,
    configuration: Configuration,
    n: usize,
    seed: u64,
) -> Result<MultiDigraph> {
    match configuration {
        Configuration::MirroredSum => {
            if !model.is_mirrored() {
                return Err(Error::InvalidArgument("mirrored-sum needs w_in = w_out".into()));
            }
            sample_oriented_sum(&sample_weights(model, n, seed)?, seed)
        }
        Configuration::IndependentSum => {
            Ok(sample_independent_sum(&model.out_marginal(), &model.in_marginal(), n, seed)?.sum)
        }
        Configuration::Plain => {
            let w = sample_weights(model, n, seed)?;
            sample_graph_fast(&w, model.mean() * n as f64, seed)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GiantEstimate {
    pub n: usize,
    pub reps: usize,
    pub weak_fractions: Vec<f64>,
    pub strong_fractions: Vec<f64>,
    pub weak: Summary,
    pub strong: Summary,
}

/// Largest weak and strong component fractions over `reps` independent graphs.
pub fn giant_component_experiment(
    model: &WeightModel,
    configuration: Configuration,
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<GiantEstimate> {
    if n == 0 || reps == 0 {
        return Err(Error::InvalidArgument("n and reps must be positive".into()));
    }
    let sizes: Vec<(f64, f64)> = (0..reps as u64)
        .map(|r| {
            let g = sample_configuration(model, configuration, n, derive_seed(seed, Purpose::Replicate, r))?;
            let c = components(&g);
            Ok((c.largest_weak() as f64 / n as f64, c.largest_strong() as f64 / n as f64))
        })
        .collect::<Result<_>>()?;
    let (weak_fractions, strong_fractions): (Vec<f64>, Vec<f64>) = sizes.into_iter().unzip();
    Ok(GiantEstimate {
        n,
        reps,
        weak: summarize(&weak_fractions),
        strong: summarize(&strong_fractions),
        weak_fractions,
        strong_fractions,
    })
}

/// `min((τ - 2) / (τ - 1), 2/3)`.
pub fn theoretical_alpha(tau: f64) -> f64 {
    ((tau - 2.0) / (tau - 1.0)).min(2.0 / 3.0)
}

fn tail_exponent(model: &WeightModel) -> Option<f64> {
    [model.in_marginal(), model.out_marginal()]
        .iter()
        .filter_map(|m| match *m {
            Marginal::Pareto { tau, .. } => Some(tau),
            Marginal::Constant(_) => None,
        })
        .reduce(f64::min)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub median_weak: f64,
    pub mean_weak: f64,
    pub median_forward: f64,
    pub mean_forward: f64,
    pub median_strong: f64,
    pub mean_strong: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Slope {
    pub estimate: f64,
    /// 95% percentile bootstrap interval, resampling replicates within each N.
    pub ci: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub tau: Option<f64>,
    pub alpha: f64,
    pub reps: usize,
    pub rows: Vec<ScalingRow>,
    pub weak: Slope,
    pub forward: Slope,
    pub strong: Slope,
}

impl ScalingReport {
    /// Tab-separated `N, median and mean sizes` per row.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "n\tmedian_weak\tmean_weak\tmedian_forward\tmean_forward\tmedian_strong\tmean_strong"
        )?;
        for r in &self.rows {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.n, r.median_weak, r.mean_weak, r.median_forward, r.mean_forward, r.median_strong, r.mean_strong
            )?;
        }
        Ok(())
    }
}

const BOOTSTRAP_RESAMPLES: u64 = 2000;

fn slope_of_medians(log_n: &[f64], samples: &[Vec<f64>]) -> f64 {
    let ys: Vec<f64> = samples.iter().map(|s| median(&mut s.clone()).ln()).collect();
    ols(log_n, &ys).0
}

fn fit(log_n: &[f64], samples: &[Vec<f64>], seed: u64, lane: u64) -> Slope {
    let estimate = slope_of_medians(log_n, samples);
    let mut boot: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(seed, Purpose::Bootstrap, (lane << 32) | b);
            let resampled: Vec<Vec<f64>> = samples
                .iter()
                .map(|s| (0..s.len()).map(|_| s[rng.random_range(0..s.len())]).collect())
                .collect();
            slope_of_medians(log_n, &resampled)
        })
        .collect();
    boot.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let at = |p: f64| boot[((p * (boot.len() - 1) as f64).round()) as usize];
    Slope { estimate, ci: (at(0.025), at(0.975)) }
}

/// Growth of the largest weak, forward and strong components at criticality.
///
/// Mirrored models are sampled as oriented sums, others through the directed
/// model with `L_N = μ N`. Medians over replicates are regressed on `log N`.
pub fn scaling_exponent_experiment(
    model: &WeightModel,
    n_list: &[usize],
    reps: usize,
    seed: u64,
) -> Result<ScalingReport> {
    let model = model.validate()?;
    let m = model.moments();
    let critical = |nu: f64| nu.is_finite() && (nu / m.mu - 1.0).abs() < 1e-9;
    if !(critical(m.nu_in) && critical(m.nu_out)) {
        return Err(Error::InvalidModel(format!(
            "scaling needs a critical model with nu/mu = 1, got nu_in/mu = {}, nu_out/mu = {}",
            m.nu_in / m.mu,
            m.nu_out / m.mu
        )));
    }
    let tau = tail_exponent(&model);
    if let Some(t) = tau {
        if t <= 3.0 {
            return Err(Error::InvalidModel(format!("scaling needs tau > 3, got {t}")));
        }
    }
    if n_list.len() < 2 || reps == 0 || n_list.iter().any(|&n| n < 2) {
        return Err(Error::InvalidArgument("need at least two sizes N >= 2 and positive reps".into()));
    }
    let configuration = if model.is_mirrored() { Configuration::MirroredSum } else { Configuration::Plain };

    let mut rows = Vec::new();
    let (mut weak, mut forward, mut strong) = (Vec::new(), Vec::new(), Vec::new());
    for (i, &n) in n_list.iter().enumerate() {
        let sizes: Vec<(f64, f64, f64)> = (0..reps as u64)
            .into_par_iter()
            .map(|r| {
                let s = derive_seed(derive_seed(seed, Purpose::Replicate, i as u64), Purpose::Replicate, r);
                let g = sample_configuration(&model, configuration, n, s)?;
                let c = components(&g);
                Ok((c.largest_weak() as f64, largest_forward_cluster(&g) as f64, c.largest_strong() as f64))
            })
            .collect::<Result<_>>()?;
        let w: Vec<f64> = sizes.iter().map(|s| s.0).collect();
        let f: Vec<f64> = sizes.iter().map(|s| s.1).collect();
        let st: Vec<f64> = sizes.iter().map(|s| s.2).collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        rows.push(ScalingRow {
            n,
            median_weak: median(&mut w.clone()),
            mean_weak: mean(&w),
            median_forward: median(&mut f.clone()),
            mean_forward: mean(&f),
            median_strong: median(&mut st.clone()),
            mean_strong: mean(&st),
        });
        weak.push(w);
        forward.push(f);
        strong.push(st);
    }
    let log_n: Vec<f64> = n_list.iter().map(|&n| (n as f64).ln()).collect();
    Ok(ScalingReport {
        tau,
        alpha: tau.map_or(2.0 / 3.0, theoretical_alpha),
        reps,
        rows,
        weak: fit(&log_n, &weak, seed, 0),
        forward: fit(&log_n, &forward, seed, 1),
        strong: fit(&log_n, &strong, seed, 2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn alpha_formula() {
        assert_relative_eq!(theoretical_alpha(3.5), 0.6, epsilon = 1e-15);
        assert_relative_eq!(theoretical_alpha(4.0), 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(theoretical_alpha(10.0), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn refuses_non_critical_models() {
        let m = WeightModel::constant(2.0).unwrap();
        assert!(scaling_exponent_experiment(&m, &[100, 200], 2, 0).is_err());
        let heavy = WeightModel::pareto_mirrored(2.5, 1.0).unwrap();
        assert!(scaling_exponent_experiment(&heavy, &[100, 200], 2, 0).is_err());
    }

    #[test]
    fn critical_pareto_is_accepted() {
        let m = WeightModel::critical_pareto_mirrored(3.5).unwrap();
        let r = scaling_exponent_experiment(&m, &[256, 1024], 4, 1).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert_relative_eq!(r.alpha, 0.6, epsilon = 1e-12);
        for row in &r.rows {
            assert!(row.median_strong <= row.median_forward && row.median_forward <= row.median_weak);
        }
        assert!(r.weak.ci.0 <= r.weak.ci.1);
        let mut tsv = Vec::new();
        r.write_tsv(&mut tsv).unwrap();
        assert_eq!(String::from_utf8(tsv).unwrap().lines().count(), 3);
    }

    #[test]
    fn subcritical_has_no_giant() {
        // the weak structure is that of NR(2c), subcritical for c < 1/2
        let m = WeightModel::constant(0.3).unwrap();
        let e = giant_component_experiment(&m, Configuration::MirroredSum, 5000, 2, 0).unwrap();
        assert!(e.weak.mean < 0.02 && e.strong.mean < 0.01);
    }

    #[test]
    fn experiment_is_reproducible() {
        let m = WeightModel::constant(2.0).unwrap();
        let a = giant_component_experiment(&m, Configuration::IndependentSum, 2000, 3, 9).unwrap();
        let b = giant_component_experiment(&m, Configuration::IndependentSum, 2000, 3, 9).unwrap();
        assert_eq!(a, b);
    }
}
