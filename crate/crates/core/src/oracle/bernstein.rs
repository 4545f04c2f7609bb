//! Exact Bernstein-approximation quantities. The marginal mass of `X = x`
//! under mixing density `p`, `m(x) = C(t,x) ∫ q^x (1−q)^{t−x} p(q) dq`, is
//! evaluated in closed form through (incomplete) Beta functions in log space,
//! which makes the expectation of any statistic of `X/t` exact.

use std::collections::BTreeMap;

use crate::kernels::KernelSpec;
use crate::numeric::special::{beta_reg, ln_beta, ln_choose};

use super::density::{DensityForm, DensitySpec};

/// Absolute tolerance for the adaptive integrals in this module.
pub const QUAD_TOL: f64 = 1e-10;

/// `m(x)` for `x = 0..=t`.
pub fn exact_mixture_pmf(p: &DensitySpec, t: u64) -> Vec<f64> {
    assert!(t >= 1, "trials must be at least 1");
    match &p.form {
        DensityForm::Uniform => vec![1.0 / (t as f64 + 1.0); t as usize + 1],
        DensityForm::Beta { a, b } => {
            let lb = ln_beta(*a, *b);
            (0..=t)
                .map(|x| {
                    (ln_choose(t, x) + ln_beta(x as f64 + a, (t - x) as f64 + b) - lb).exp()
                })
                .collect()
        }
        DensityForm::Piecewise(pw) => (0..=t)
            .map(|x| {
                let lc = ln_choose(t, x);
                let mut mass = 0.0;
                for (i, poly) in pw.pieces().iter().enumerate() {
                    let (lo, hi) = (pw.breaks()[i], pw.breaks()[i + 1]);
                    for (k, &c) in poly.coeffs().iter().enumerate() {
                        if c == 0.0 {
                            continue;
                        }
                        let a = (x + k as u64) as f64 + 1.0;
                        let b = (t - x) as f64 + 1.0;
                        let frac = beta_reg(a, b, hi) - beta_reg(a, b, lo);
                        mass += c * (lc + ln_beta(a, b)).exp() * frac;
                    }
                }
                mass
            })
            .collect(),
    }
}

/// `Σ_x f(x/t) m(x) − ∫ f(q) p(q) dq`.
pub fn bernstein_error_exact<F: Fn(f64) -> f64>(
    f: F,
    f_breaks: &[f64],
    p: &DensitySpec,
    t: u64,
) -> f64 {
    let pmf = exact_mixture_pmf(p, t);
    bernstein_error_with_pmf(&f, f_breaks, p, t, &pmf)
}

pub(crate) fn bernstein_error_with_pmf<F: Fn(f64) -> f64>(
    f: &F,
    f_breaks: &[f64],
    p: &DensitySpec,
    t: u64,
    pmf: &[f64],
) -> f64 {
    let tf = t as f64;
    let smoothed: f64 = pmf
        .iter()
        .enumerate()
        .map(|(x, m)| f(x as f64 / tf) * m)
        .sum();
    smoothed - p.integrate_against(f, f_breaks, QUAD_TOL)
}

/// `|Σ_{x=0}^{t} f(x/t) p(x/t) / t − ∫ f p|`.
pub fn quasi_riemann_error<F: Fn(f64) -> f64>(
    f: F,
    f_breaks: &[f64],
    p: &DensitySpec,
    t: u64,
) -> f64 {
    let tf = t as f64;
    let sum: f64 = (0..=t)
        .map(|x| {
            let q = x as f64 / tf;
            f(q) * p.pdf(q)
        })
        .sum::<f64>()
        / tf;
    (sum - p.integrate_against(&f, f_breaks, QUAD_TOL)).abs()
}

/// Support edges of `K_h(·)` centered at `u`, for quadrature subdivision.
pub fn kernel_breaks(u: f64, h: f64) -> [f64; 3] {
    [u - h, u, u + h]
}

/// Multiplicity of each distinct trial count.
pub(crate) fn trial_counts(trials: &[u64]) -> BTreeMap<u64, usize> {
    let mut m = BTreeMap::new();
    for &t in trials {
        *m.entry(t).or_insert(0) += 1;
    }
    m
}

/// `E{p̂_h(u)} = (1/n) Σ_i Σ_x K_h(x/t_i) m_i(x)`, exactly.
pub fn exact_kde_expectation(
    p: &DensitySpec,
    trials: &[u64],
    k: &KernelSpec,
    h: f64,
    u: f64,
) -> f64 {
    kde_moments(p, trials, k, h, u).0
}

/// `var{p̂_h(u)} = (1/n²) Σ_i (E K_h(X_i/t_i)² − (E K_h(X_i/t_i))²)`, exactly.
pub fn exact_kde_variance(p: &DensitySpec, trials: &[u64], k: &KernelSpec, h: f64, u: f64) -> f64 {
    kde_moments(p, trials, k, h, u).1
}

fn kde_moments(p: &DensitySpec, trials: &[u64], k: &KernelSpec, h: f64, u: f64) -> (f64, f64) {
    assert!(!trials.is_empty(), "need at least one trial count");
    let n = trials.len() as f64;
    let mut mean = 0.0;
    let mut var = 0.0;
    for (&t, &count) in &trial_counts(trials) {
        let pmf = exact_mixture_pmf(p, t);
        let (mut e1, mut e2) = (0.0, 0.0);
        for (x, m) in pmf.iter().enumerate() {
            let v = k.scaled(x as f64 / t as f64, u, h);
            e1 += v * m;
            e2 += v * v * m;
        }
        mean += count as f64 * e1;
        var += count as f64 * (e2 - e1 * e1);
    }
    (mean / n, var / (n * n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::quadrature::adaptive;

    #[test]
    fn uniform_and_beta_small_cases() {
        assert_eq!(exact_mixture_pmf(&DensitySpec::uniform(), 1), vec![0.5, 0.5]);
        let m = exact_mixture_pmf(&DensitySpec::beta(2.0, 2.0).unwrap(), 2);
        for (got, want) in m.iter().zip([0.3, 0.4, 0.3]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn pmf_matches_quadrature_per_piece() {
        let p = DensitySpec::nonsmooth_example();
        let t = 10u64;
        let m = exact_mixture_pmf(&p, t);
        assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-8);
        for x in 0..=t {
            let c = ln_choose(t, x).exp();
            let f = |q: f64| c * q.powi(x as i32) * (1.0 - q).powi((t - x) as i32) * p.pdf(q);
            let quad = adaptive(f, 0.0, 1.0, &p.breakpoints(), 1e-13);
            assert!((quad - m[x as usize]).abs() < 1e-11, "x={x}");
        }
    }

    #[test]
    fn reproduces_constants_and_linears() {
        let p = DensitySpec::beta(2.0, 2.0).unwrap();
        for t in [1u64, 7, 40] {
            assert!(bernstein_error_exact(|_| 3.5, &[], &p, t).abs() < 1e-12);
            assert!(bernstein_error_exact(|q| q, &[], &p, t).abs() < 1e-12);
        }
        let err = bernstein_error_exact(|q| q * q, &[], &DensitySpec::uniform(), 10);
        assert!((err - 1.0 / 60.0).abs() < 1e-10);
    }

    #[test]
    fn quasi_riemann_examples() {
        let u = DensitySpec::uniform();
        assert!((quasi_riemann_error(|_| 1.0, &[], &u, 10) - 0.1).abs() < 1e-12);
        assert_eq!(quasi_riemann_error(|_| 0.0, &[], &u, 10), 0.0);
    }

    #[test]
    fn expectation_is_zero_far_from_mass() {
        // all mass of X/t at {0, 1} for t = 1, window (0.3, 0.7)
        let k = KernelSpec::epanechnikov();
        let e = exact_kde_expectation(&DensitySpec::beta(2.0, 2.0).unwrap(), &[1, 1], &k, 0.2, 0.5);
        assert_eq!(e, 0.0);
    }

    #[test]
    fn duplicated_trials_give_same_expectation() {
        let k = KernelSpec::epanechnikov();
        let p = DensitySpec::beta(2.0, 2.0).unwrap();
        let a = exact_kde_expectation(&p, &[10], &k, 0.3, 0.5);
        let b = exact_kde_expectation(&p, &[10; 7], &k, 0.3, 0.5);
        assert!((a - b).abs() < 1e-14);
        let v1 = exact_kde_variance(&p, &[10], &k, 0.3, 0.5);
        let v7 = exact_kde_variance(&p, &[10; 7], &k, 0.3, 0.5);
        assert!((v1 / 7.0 - v7).abs() < 1e-14);
    }
}
