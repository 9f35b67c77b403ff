use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};

pub fn poisson_pmf(j: u64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return if j == 0 { 1.0 } else { 0.0 };
    }
    (j as f64 * lambda.ln() - lambda - ln_factorial(j)).exp()
}

/// `P(Poisson(lambda) = j)` for `j = 0..=kmax`.
pub fn poisson_pmf_vec(lambda: f64, kmax: usize) -> Vec<f64> {
    if lambda == 0.0 {
        let mut v = vec![0.0; kmax + 1];
        v[0] = 1.0;
        return v;
    }
    let ln_l = lambda.ln();
    let mut lp = -lambda;
    let mut out = Vec::with_capacity(kmax + 1);
    out.push(lp.exp());
    for j in 1..=kmax {
        lp += ln_l - (j as f64).ln();
        out.push(lp.exp());
    }
    out
}

/// Chernoff bound on `P(Poisson(lambda) >= k)` for `k > lambda`.
pub fn upper_tail_bound(lambda: f64, k: u64) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let k = k as f64;
    if k <= lambda {
        return 1.0;
    }
    (-lambda + k - k * (k / lambda).ln()).exp().min(1.0)
}

/// Smallest `k > lambda` with `P(Poisson(lambda) >= k) < eps`.
pub fn truncation_point(lambda: f64, eps: f64) -> u64 {
    let mut k = lambda.floor() as u64 + 1;
    let step = (lambda.sqrt() / 8.0).max(1.0) as u64;
    while upper_tail_bound(lambda, k) >= eps {
        k += step;
    }
    k
}

/// Total variation distance between `Poisson(u)` and `Poisson(lambda)`.
///
/// Sums the series up to a point beyond which both upper tails are below
/// `1e-13`, so the absolute error is below `1e-12`.
pub fn poisson_tv(u: f64, lambda: f64) -> Result<f64> {
    for x in [u, lambda] {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "Poisson means must be finite and non-negative, got {x}"
            )));
        }
    }
    if u == lambda {
        return Ok(0.0);
    }
    let jmax = truncation_point(u.max(lambda), 1e-13);
    let sum: f64 = (0..jmax).map(|j| (poisson_pmf(j, u) - poisson_pmf(j, lambda)).abs()).sum();
    Ok((0.5 * sum).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pmf_values() {
        assert_relative_eq!(poisson_pmf(0, 2.0), (-2.0f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(poisson_pmf(3, 2.0), 8.0 / 6.0 * (-2.0f64).exp(), max_relative = 1e-13);
        assert_eq!(poisson_pmf(0, 0.0), 1.0);
        assert_eq!(poisson_pmf(2, 0.0), 0.0);
        let v = poisson_pmf_vec(7.3, 30);
        for (j, p) in v.iter().enumerate() {
            assert_relative_eq!(*p, poisson_pmf(j as u64, 7.3), max_relative = 1e-12);
        }
    }

    #[test]
    fn tail_bound_dominates_tail() {
        for lambda in [0.5, 3.0, 40.0] {
            let k = truncation_point(lambda, 1e-10);
            let tail: f64 = 1.0 - (0..k).map(|j| poisson_pmf(j, lambda)).sum::<f64>();
            assert!(tail <= 1e-10 + 1e-14);
        }
    }

    #[test]
    fn diagonal_is_zero() {
        for l in [0.0, 1.0, 7.3] {
            assert_eq!(poisson_tv(l, l).unwrap(), 0.0);
        }
    }

    #[test]
    fn point_mass_against_poisson() {
        for u in [0.1, 1.0, 5.0] {
            assert_relative_eq!(poisson_tv(0.0, u).unwrap(), 1.0 - (-u).exp(), epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_negative_input() {
        assert!(poisson_tv(-1.0, 1.0).is_err());
        assert!(poisson_tv(1.0, f64::NAN).is_err());
    }
}
