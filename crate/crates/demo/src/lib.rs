//! Browser demo: simulate heterogeneous binomial data, draw the density
//! estimate, run Lepski selection and compare exact Bernstein errors with
//! their bounds. Every export returns a JSON string.

use binmix::lepski::{lepski_select, BandwidthGrid, LepskiConfig};
use binmix::oracle::bernstein::kernel_breaks;
use binmix::oracle::{
    bernstein_error_exact, exact_kde_expectation, lemma1_bound, theorem1_bias_bound, DensitySpec,
};
use binmix::rng::substream;
use binmix::simlab::dgp_heterogeneous;
use binmix::{kde_grid, KernelSpec};
use serde_json::json;
use wasm_bindgen::prelude::*;

const CURVE_POINTS: usize = 99;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// KDE from empirical proportions, the clipped-trials estimate and the true
/// Beta(2,2) density on an interior grid.
#[wasm_bindgen]
pub fn kde_curve(n: usize, target: f64, h: f64, seed: u64) -> Result<String, String> {
    let mut rng = substream(seed, 0);
    let draw = dgp_heterogeneous(n, target, &mut rng).map_err(err)?;
    let k = KernelSpec::epanechnikov();
    let grid: Vec<f64> = (1..=CURVE_POINTS)
        .map(|i| i as f64 / (CURVE_POINTS + 1) as f64)
        .collect();
    let est = kde_grid(&draw.sample(), &k, h, &grid, false).map_err(err)?;
    let clipped = kde_grid(&draw.clipped_sample(), &k, h, &grid, false).map_err(err)?;
    let truth = DensitySpec::beta(2.0, 2.0).map_err(err)?;
    Ok(json!({
        "u": grid,
        "estimate": est,
        "clipped": clipped,
        "truth": grid.iter().map(|&u| truth.pdf(u)).collect::<Vec<_>>(),
        "t_tilde": draw.sample().harmonic_mean_trials(),
        "t_min": draw.t_min,
        "proportions": draw.sample().proportions(),
    })
    .to_string())
}

/// Lepski selection at `u` on the same simulated data as [`kde_curve`].
#[wasm_bindgen]
pub fn lepski_trace(
    n: usize,
    target: f64,
    u: f64,
    boot_reps: usize,
    seed: u64,
) -> Result<String, String> {
    let mut rng = substream(seed, 0);
    let draw = dgp_heterogeneous(n, target, &mut rng).map_err(err)?;
    let grid = BandwidthGrid::geometric(0.5, 0.9, 0.05).map_err(err)?;
    let cfg = LepskiConfig {
        bootstrap_reps: boot_reps,
        ..LepskiConfig::new(u, seed)
    };
    let sel = lepski_select(&draw.sample(), &KernelSpec::epanechnikov(), &grid, &cfg)
        .map_err(err)?;
    Ok(json!({
        "selected_h": sel.h,
        "fallback": sel.fallback,
        "truth": DensitySpec::beta(2.0, 2.0).map_err(err)?.pdf(u),
        "trace": sel.trace,
    })
    .to_string())
}

/// Exact Bernstein error and bias of the estimator against their bounds,
/// for homogeneous trials `t`.
#[wasm_bindgen]
pub fn bernstein_check(density: &str, t: u32, h: f64, u: f64) -> Result<String, String> {
    if t == 0 {
        return Err("t must be at least 1".into());
    }
    if !(u > 0.0 && u < 1.0 && h > 0.0) {
        return Err("need u in (0, 1) and h > 0".into());
    }
    let p = DensitySpec::parse(density).map_err(err)?;
    let k = KernelSpec::epanechnikov();
    let sp = p.grid_constants(1.001);
    let t = t as u64;
    let f = |q: f64| k.scaled(q, u, h);
    let br = kernel_breaks(u, h);
    let bias = exact_kde_expectation(&p, &[t], &k, h, u) - p.pdf(u);
    Ok(json!({
        "density": p.name,
        "exact_error": bernstein_error_exact(f, &br, &p, t),
        "error_bound": lemma1_bound(f, &br, &p, &sp, &[t]),
        "bias": bias,
        "bias_bound": theorem1_bias_bound(&sp, &k, &[t], h, u),
    })
    .to_string())
}
