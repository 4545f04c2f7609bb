//! The error-bound formulas, evaluated with user-supplied constants.

use serde::{Deserialize, Serialize};

use crate::kernels::{KernelBounds, KernelSpec};
use crate::sample::harmonic_mean;

use super::bernstein::{kernel_breaks, quasi_riemann_error, trial_counts};
use super::density::{DensitySpec, SmoothnessParams};

/// `L (0.25/(t+3))^{α/2} + L (1/(t+2))^α + p_max/t`.
pub fn g_factor(t: u64, sp: &SmoothnessParams) -> f64 {
    assert!(t >= 1, "trials must be at least 1");
    let tf = t as f64;
    sp.l * (0.25 / (tf + 3.0)).powf(sp.alpha / 2.0)
        + sp.l * (1.0 / (tf + 2.0)).powf(sp.alpha)
        + sp.p_max / tf
}

/// `Σ_x |f(x/t)| / (t+1)`.
fn abs_grid_mean<F: Fn(f64) -> f64>(f: &F, t: u64) -> f64 {
    let tf = t as f64;
    (0..=t).map(|x| f(x as f64 / tf).abs()).sum::<f64>() / (tf + 1.0)
}

/// Per-sample average `(1/n) Σ_i term(t_i)`, computed once per distinct `t`.
fn average_over_trials(trials: &[u64], mut term: impl FnMut(u64) -> f64) -> f64 {
    assert!(!trials.is_empty(), "need at least one trial count");
    let total: f64 = trial_counts(trials)
        .into_iter()
        .map(|(t, c)| c as f64 * term(t))
        .sum();
    total / trials.len() as f64
}

/// `(1/n) Σ_i { g(t_i) Σ_x |f(x/t_i)|/(t_i+1) + QR_i }` with the exact
/// quasi-Riemann error.
pub fn lemma1_bound<F: Fn(f64) -> f64>(
    f: F,
    f_breaks: &[f64],
    p: &DensitySpec,
    sp: &SmoothnessParams,
    trials: &[u64],
) -> f64 {
    average_over_trials(trials, |t| {
        g_factor(t, sp) * abs_grid_mean(&f, t) + quasi_riemann_error(&f, f_breaks, p, t)
    })
}

/// Variant of [`lemma1_bound`] for `f = K_h(· ; u)` with the quasi-Riemann
/// term replaced by [`proposition3_bound`].
pub fn lemma1_bound_analytic(
    k: &KernelSpec,
    kb: &KernelBounds,
    sp: &SmoothnessParams,
    trials: &[u64],
    h: f64,
    u: f64,
) -> f64 {
    let f = |q: f64| k.scaled(q, u, h);
    average_over_trials(trials, |t| {
        g_factor(t, sp) * abs_grid_mean(&f, t) + proposition3_bound(t, h, sp, kb)
    })
}

/// `K_max p_max/(ht) + (2 + 1/(ht)) {L K_max t^{-α} + 2 M p_max (ht)^{-β}}`.
pub fn proposition3_bound(t: u64, h: f64, sp: &SmoothnessParams, kb: &KernelBounds) -> f64 {
    let tf = t as f64;
    let ht = h * tf;
    kb.k_max * sp.p_max / ht
        + (2.0 + 1.0 / ht)
            * (sp.l * kb.k_max * (1.0 / tf).powf(sp.alpha)
                + 2.0 * kb.m * sp.p_max * (1.0 / ht).powf(kb.beta))
}

/// Largest integer strictly below `s`.
pub fn floor_strict(s: f64) -> u32 {
    (s.ceil() - 1.0).max(0.0) as u32
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// `L B h^s / ⌊s⌋!`.
pub fn smoothing_term(l: f64, b: f64, s: f64, h: f64) -> f64 {
    l * b * h.powf(s) / factorial(floor_strict(s))
}

/// Pointwise bias bound at `u`, with `B` evaluated at `sp.s`.
pub fn theorem1_bias_bound(
    sp: &SmoothnessParams,
    k: &KernelSpec,
    trials: &[u64],
    h: f64,
    u: f64,
) -> f64 {
    let kb = k.bounds_for(sp.s);
    let f = |q: f64| k.scaled(q, u, h);
    smoothing_term(sp.l, kb.b, sp.s, h)
        + average_over_trials(trials, |t| {
            g_factor(t, sp) * abs_grid_mean(&f, t) + proposition3_bound(t, h, sp, &kb)
        })
}

/// `K_max² p_max (2 + 1/(h t̃)) / (n h)`.
pub fn theorem1_variance_bound(p_max: f64, kb: &KernelBounds, n: usize, h: f64, trials: &[u64]) -> f64 {
    let tt = harmonic_mean(trials).expect("positive trial counts");
    kb.k_max * kb.k_max * p_max * (2.0 + 1.0 / (h * tt)) / (n as f64 * h)
}

/// Rate ingredients of the simplified bounds, plus the trial-count
/// thresholds of the minimax condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateProfile {
    pub smoothing: f64,
    pub hetero: f64,
    pub riemann: f64,
    pub variance: f64,
    pub t_tilde: f64,
    /// `n^{(1+1/s)/(2+1/s)}`, relevant for `s ≤ 1`.
    pub threshold_low: f64,
    /// `n^{2/(2+1/s)}`, relevant for `s > 1`.
    pub threshold_high: f64,
}

impl RateProfile {
    /// The threshold applying to the smoothness index it was built with.
    pub fn threshold(&self, s: f64) -> f64 {
        if s <= 1.0 {
            self.threshold_low
        } else {
            self.threshold_high
        }
    }
}

pub fn corollary1_rates(n: usize, trials: &[u64], h: f64, sp: &SmoothnessParams) -> RateProfile {
    let tt = harmonic_mean(trials).expect("positive trial counts");
    let nf = n as f64;
    let inv = 1.0 / sp.s;
    RateProfile {
        smoothing: h.powf(sp.s),
        hetero: 1.0 / tt.sqrt(),
        riemann: 1.0 / (h * tt),
        variance: 1.0 / (nf * h),
        t_tilde: tt,
        threshold_low: nf.powf((1.0 + inv) / (2.0 + inv)),
        threshold_high: nf.powf(2.0 / (2.0 + inv)),
    }
}

/// Constants for a density difference `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauSmoothness {
    /// Constant of the γ-smoothness condition (smoothing term).
    pub l: f64,
    /// Hölder constant of `τ` with exponent `alpha`.
    pub l_tau: f64,
    pub alpha: f64,
    pub tau_max: f64,
    pub gamma: f64,
}

impl TauSmoothness {
    /// The same constants arranged as density parameters, so that `g` and
    /// `r` can be reused with `(L_τ, τ_max)` in place of `(L, p_max)`.
    pub fn as_density_params(&self) -> SmoothnessParams {
        SmoothnessParams {
            l: self.l_tau,
            alpha: self.alpha,
            p_max: self.tau_max,
            s: self.gamma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffBounds {
    pub bias_bound: f64,
    pub variance_bound: f64,
}

pub fn corollary2_bounds(
    tau: &TauSmoothness,
    k: &KernelSpec,
    trials: &[u64],
    h: f64,
    u: f64,
    eps: f64,
) -> DiffBounds {
    let kb = k.bounds_for(tau.gamma);
    let sp = tau.as_density_params();
    let f = |q: f64| k.scaled(q, u, h);
    let n = trials.len() as f64;
    let tt = harmonic_mean(trials).expect("positive trial counts");
    DiffBounds {
        bias_bound: smoothing_term(tau.l, kb.b, tau.gamma, h)
            + average_over_trials(trials, |t| {
                g_factor(t, &sp) * abs_grid_mean(&f, t) + proposition3_bound(t, h, &sp, &kb)
            }),
        variance_bound: kb.k_max * kb.k_max * tau.tau_max * (2.0 + 1.0 / (h * tt))
            / (n * h * eps * eps),
    }
}

/// [`lemma1_bound`] for `f = K_h(·; u)` with its breakpoints filled in.
pub fn lemma1_bound_kernel(
    k: &KernelSpec,
    p: &DensitySpec,
    sp: &SmoothnessParams,
    trials: &[u64],
    h: f64,
    u: f64,
) -> f64 {
    lemma1_bound(|q| k.scaled(q, u, h), &kernel_breaks(u, h), p, sp, trials)
}
