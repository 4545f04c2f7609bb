//! Kernel density estimation from empirical proportions `X_i / t_i`, the
//! plug-in variance estimate and normal confidence intervals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::numeric::special::normal_quantile;
use crate::sample::BinomialSample;

/// Point estimate with its standard error and a two-sided interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub u: f64,
    pub estimate: f64,
    pub se: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub h: f64,
    pub alpha: f64,
}

pub(crate) fn check_bandwidth(h: f64) -> Result<()> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::param("h", format!("bandwidth must be positive, got {h}")));
    }
    Ok(())
}

pub(crate) fn check_point(u: f64) -> Result<()> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::param(
            "u",
            format!("evaluation point must lie in (0, 1), got {u}"),
        ));
    }
    Ok(())
}

/// `(1/n) Σ K_h(v_i)` over raw points.
pub(crate) fn kde_points(points: &[f64], k: &KernelSpec, h: f64, u: f64) -> f64 {
    points.iter().map(|&v| k.scaled(v, u, h)).sum::<f64>() / points.len() as f64
}

/// `p̂_h(u) = (1/n) Σ K((X_i/t_i − u)/h) / h`.
pub fn kde_at(sample: &BinomialSample, k: &KernelSpec, h: f64, u: f64) -> Result<f64> {
    check_bandwidth(h)?;
    check_point(u)?;
    if sample.is_empty() {
        return Err(Error::NoData);
    }
    Ok(sample
        .records()
        .iter()
        .map(|r| k.scaled(r.proportion(), u, h))
        .sum::<f64>()
        / sample.len() as f64)
}

/// [`kde_at`] over `grid`, order preserved; `clamp` replaces negative values
/// by zero.
pub fn kde_grid(
    sample: &BinomialSample,
    k: &KernelSpec,
    h: f64,
    grid: &[f64],
    clamp: bool,
) -> Result<Vec<f64>> {
    grid.iter()
        .map(|&u| {
            kde_at(sample, k, h, u).map(|v| if clamp { v.max(0.0) } else { v })
        })
        .collect()
}

/// `1/(n(n−1)) Σ {K_h(X_i/t_i) − p̂_h(u)}²`.
pub fn variance_estimate(sample: &BinomialSample, k: &KernelSpec, h: f64, u: f64) -> Result<f64> {
    check_bandwidth(h)?;
    check_point(u)?;
    let n = sample.len();
    if n < 2 {
        return Err(Error::param("n", "variance estimate needs at least two records"));
    }
    let vals: Vec<f64> = sample
        .records()
        .iter()
        .map(|r| k.scaled(r.proportion(), u, h))
        .collect();
    let mean = vals.iter().sum::<f64>() / n as f64;
    let ss: f64 = vals.iter().map(|v| (v - mean).powi(2)).sum();
    Ok(ss / (n as f64 * (n as f64 - 1.0)))
}

/// `p̂_h(u) ± z_{1−α/2} sqrt(var̂)`.
pub fn confidence_interval(
    sample: &BinomialSample,
    k: &KernelSpec,
    h: f64,
    u: f64,
    alpha: f64,
) -> Result<EstimateResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", format!("level must lie in (0, 1), got {alpha}")));
    }
    let estimate = kde_at(sample, k, h, u)?;
    let se = variance_estimate(sample, k, h, u)?.sqrt();
    let (ci_lo, ci_hi) = if se > 0.0 {
        let z = normal_quantile(1.0 - alpha / 2.0);
        (estimate - z * se, estimate + z * se)
    } else {
        (estimate, estimate)
    };
    Ok(EstimateResult {
        u,
        estimate,
        se,
        ci_lo,
        ci_hi,
        h,
        alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::Record;

    fn sample(pairs: &[(u64, u64)]) -> BinomialSample {
        BinomialSample::new(pairs.iter().map(|&(x, t)| Record::new(x, t)).collect()).unwrap()
    }

    #[test]
    fn single_point_at_center() {
        let k = KernelSpec::epanechnikov();
        let v = kde_at(&sample(&[(1, 2)]), &k, 0.5, 0.5).unwrap();
        assert!((v - 1.5).abs() < 1e-15);
    }

    #[test]
    fn two_points_either_side() {
        let k = KernelSpec::epanechnikov();
        let v = kde_at(&sample(&[(0, 1), (1, 1)]), &k, 1.0, 0.5).unwrap();
        assert!((v - 0.5625).abs() < 1e-15);
    }

    #[test]
    fn argument_checks() {
        let k = KernelSpec::epanechnikov();
        let s = sample(&[(1, 2)]);
        assert!(kde_at(&s, &k, 0.0, 0.5).is_err());
        assert!(kde_at(&s, &k, 0.1, 0.0).is_err());
        assert!(kde_at(&s, &k, 0.1, 1.0).is_err());
        assert!(variance_estimate(&s, &k, 0.1, 0.5).is_err());
        assert!(confidence_interval(&sample(&[(1, 2), (1, 3)]), &k, 0.1, 0.5, 1.0).is_err());
    }

    #[test]
    fn grid_symmetry_and_singleton() {
        let k = KernelSpec::epanechnikov();
        let s = sample(&[(1, 2)]);
        let g = kde_grid(&s, &k, 0.5, &[0.3, 0.7], false).unwrap();
        assert!((g[0] - g[1]).abs() < 1e-15);
        let single = kde_grid(&s, &k, 0.5, &[0.5], false).unwrap();
        assert_eq!(single, vec![kde_at(&s, &k, 0.5, 0.5).unwrap()]);
    }

    #[test]
    fn clamp_only_affects_negative_values() {
        // order-2 Legendre kernel is negative near its edges
        let k = KernelSpec::legendre(2).unwrap();
        let s = sample(&[(1, 2)]);
        let raw = kde_grid(&s, &k, 0.2, &[0.31, 0.5], false).unwrap();
        let clamped = kde_grid(&s, &k, 0.2, &[0.31, 0.5], true).unwrap();
        assert!(raw[0] < 0.0);
        assert_eq!(clamped[0], 0.0);
        assert_eq!(clamped[1], raw[1]);
    }

    #[test]
    fn zero_outside_windows() {
        let k = KernelSpec::epanechnikov();
        let s = sample(&[(1, 10), (9, 10)]);
        assert_eq!(kde_at(&s, &k, 0.1, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn variance_examples() {
        let k = KernelSpec::epanechnikov();
        assert!(variance_estimate(&sample(&[(3, 7); 5]), &k, 0.2, 0.4).unwrap() < 1e-28);
        let s = sample(&[(1, 2), (3, 5)]);
        let a = k.scaled(0.5, 0.45, 0.2);
        let b = k.scaled(0.6, 0.45, 0.2);
        let v = variance_estimate(&s, &k, 0.2, 0.45).unwrap();
        assert!((v - (a - b).powi(2) / 4.0).abs() < 1e-14);
    }

    #[test]
    fn ci_degenerate_and_multiplier() {
        let k = KernelSpec::epanechnikov();
        let r = confidence_interval(&sample(&[(1, 2); 4]), &k, 0.2, 0.5, 0.05).unwrap();
        assert_eq!(r.se, 0.0);
        assert_eq!(r.ci_lo, r.estimate);
        assert_eq!(r.ci_hi, r.estimate);
        let r = confidence_interval(&sample(&[(1, 2), (3, 5), (2, 7)]), &k, 0.3, 0.45, 0.05).unwrap();
        let z = (r.ci_hi - r.estimate) / r.se;
        assert!((z - 1.959964).abs() < 1e-5);
        assert!(r.ci_lo <= r.estimate && r.estimate <= r.ci_hi);
    }
}
