//! Thin wrappers over `statrs` special functions (and `libm` for `erfc`) plus the binomial helpers the
//! exact mixture computations need.

use statrs::function::{beta, erf, gamma};

pub fn ln_gamma(x: f64) -> f64 {
    gamma::ln_gamma(x)
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    beta::ln_beta(a, b)
}

pub fn ln_choose(n: u64, k: u64) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn beta_reg(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        beta::beta_reg(a, b, x)
    }
}

/// Standard normal quantile `Φ⁻¹(p)` for `p` in (0, 1).
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "normal quantile needs p in (0, 1)");
    let x = -std::f64::consts::SQRT_2 * erf::erfc_inv(2.0 * p);
    // one Newton step on Φ(x) = p
    let density = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    x - (normal_cdf(x) - p) / density
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_reference_values() {
        assert!((normal_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-9);
        assert!((normal_quantile(0.5)).abs() < 1e-12);
        assert!((normal_quantile(0.05) + 1.644_853_626_951_472_2).abs() < 1e-9);
        assert!((normal_quantile(1e-6) + 4.753_424_308_822_899).abs() < 1e-8);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for i in 1..200 {
            let p = i as f64 / 200.0;
            let err = (normal_cdf(normal_quantile(p)) - p).abs();
            assert!(err < 1e-12, "p {p}: {err}");
        }
    }

    #[test]
    fn choose_and_beta() {
        assert!((ln_choose(10, 3).exp() - 120.0).abs() < 1e-9);
        // B(2, 4) = 1/20
        assert!((ln_beta(2.0, 4.0).exp() - 0.05).abs() < 1e-14);
        // I_x(1, 1) = x
        assert!((beta_reg(1.0, 1.0, 0.3) - 0.3).abs() < 1e-14);
        // I_x(2, 1) = x^2
        assert!((beta_reg(2.0, 1.0, 0.3) - 0.09).abs() < 1e-14);
    }
}
