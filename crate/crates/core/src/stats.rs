//! Small statistical helpers: histograms, chi-square goodness of fit, total
//! variation between empirical laws, sample moments, least squares.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Counts indexed by value.
pub fn histogram<I: IntoIterator<Item = u64>>(values: I) -> Vec<u64> {
    let mut h: Vec<u64> = Vec::new();
    for v in values {
        let v = v as usize;
        if v >= h.len() {
            h.resize(v + 1, 0);
        }
        h[v] += 1;
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquare {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// Pearson goodness of fit of a histogram against a pmf on `0, 1, 2, ...`.
///
/// Values beyond the histogram form a tail bin carrying the remaining
/// probability. Adjacent bins are pooled left to right until each has
/// expected count at least 5.
pub fn chi_square_gof(observed: &[u64], pmf: impl Fn(usize) -> f64) -> ChiSquare {
    let n: u64 = observed.iter().sum();
    let nf = n as f64;
    let mut cells: Vec<(f64, f64)> = Vec::with_capacity(observed.len() + 1);
    let mut covered = 0.0;
    for (j, &o) in observed.iter().enumerate() {
        let p = pmf(j);
        covered += p;
        cells.push((o as f64, nf * p));
    }
    cells.push((0.0, nf * (1.0 - covered).max(0.0)));

    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (o, e) in cells {
        acc.0 += o;
        acc.1 += e;
        if acc.1 >= 5.0 {
            pooled.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.0 > 0.0 || acc.1 > 0.0 {
        match pooled.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => pooled.push(acc),
        }
    }
    let statistic: f64 = pooled
        .iter()
        .map(|&(o, e)| if e > 0.0 { (o - e).powi(2) / e } else if o > 0.0 { f64::INFINITY } else { 0.0 })
        .sum();
    let dof = pooled.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else if statistic.is_infinite() {
        0.0
    } else {
        1.0 - ChiSquared::new(dof as f64).unwrap().cdf(statistic)
    };
    ChiSquare { statistic, dof, p_value }
}

/// Total variation between the empirical laws of two histograms.
pub fn tv_histograms(a: &[u64], b: &[u64]) -> f64 {
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    if na == 0 || nb == 0 {
        return if na == nb { 0.0 } else { 1.0 };
    }
    let len = a.len().max(b.len());
    let get = |h: &[u64], i: usize| h.get(i).copied().unwrap_or(0) as f64;
    0.5 * (0..len)
        .map(|i| (get(a, i) / na as f64 - get(b, i) / nb as f64).abs())
        .sum::<f64>()
}

/// Total variation between an empirical histogram and a pmf; mass of the
/// pmf beyond the histogram counts fully.
pub fn tv_histogram_pmf(h: &[u64], pmf: impl Fn(usize) -> f64) -> f64 {
    let n: u64 = h.iter().sum();
    let mut covered = 0.0;
    let mut sum = 0.0;
    for (j, &c) in h.iter().enumerate() {
        let p = pmf(j);
        covered += p;
        sum += (c as f64 / n as f64 - p).abs();
    }
    0.5 * (sum + (1.0 - covered).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    /// Standard error of the mean.
    pub std_error: f64,
}

pub fn summarize(values: &[f64]) -> Summary {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let variance = if n > 1 {
        values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    Summary { n, mean, variance, std_error: (variance / n as f64).sqrt() }
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Least-squares line `y = intercept + slope * x`, returned as `(slope, intercept)`.
pub fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
