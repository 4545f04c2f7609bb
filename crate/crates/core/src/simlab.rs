//! Simulation drivers: heterogeneous versus clipped trials, joint versus
//! separate tuning of density differences, and CI coverage.

use rand::Rng;
use rand_distr::{Bernoulli, Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::densdiff::{select_tuning_joint, select_tuning_separate, tuning_grid};
use crate::error::{Error, Result};
use crate::estimator::{check_bandwidth, check_point, confidence_interval, kde_at};
use crate::exec::map_indexed;
use crate::kernels::KernelSpec;
use crate::oracle::DensitySpec;
use crate::rng::{child_seed, stream_id, substream, SimRng};
use crate::sample::{BinomialSample, TwoGroupSample, DEFAULT_POSITIVITY_EPS};

/// Harmonic-mean tolerance of the trial adjustment.
pub const TARGET_TOLERANCE: f64 = 0.5;
/// Iteration cap of the trial adjustment.
pub const MAX_ADJUST_ITERATIONS: usize = 1_000_000;

/// One dataset of the heterogeneous-trials design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpDraw {
    pub trials: Vec<u64>,
    pub q: Vec<f64>,
    /// `X_i ~ Bin(t_i, Q_i)`.
    pub x: Vec<u64>,
    /// `Y_i ~ Bin(t_min, Q_i)`.
    pub y: Vec<u64>,
    pub t_min: u64,
}

impl DgpDraw {
    pub fn sample(&self) -> BinomialSample {
        BinomialSample::from_counts(&self.x, &self.trials).expect("valid by construction")
    }

    pub fn clipped_sample(&self) -> BinomialSample {
        BinomialSample::from_counts(&self.y, &vec![self.t_min; self.y.len()])
            .expect("valid by construction")
    }
}

fn binomial(rng: &mut SimRng, t: u64, q: f64) -> u64 {
    Binomial::new(t, q).expect("q in [0, 1]").sample(rng)
}

/// Draws `Q_i ~ Beta(2,2)` and Poisson trial counts whose harmonic mean is
/// moved within 0.5 of `target`, with `t_1 = ceil(0.2·target)`.
pub fn dgp_heterogeneous(n: usize, target: f64, rng: &mut SimRng) -> Result<DgpDraw> {
    if n < 2 {
        return Err(Error::param("n", "need at least two units"));
    }
    if !(target >= 5.0 && target.is_finite()) {
        return Err(Error::param("target", "target harmonic mean must be at least 5"));
    }
    let beta = DensitySpec::beta(2.0, 2.0)?;
    let q: Vec<f64> = (0..n).map(|_| beta.sample(rng)).collect();
    let t_min = ((0.2 * target).ceil() as u64).max(1);
    let poisson = Poisson::new(target).map_err(|e| Error::param("target", e.to_string()))?;
    let mut trials = Vec::with_capacity(n);
    trials.push(t_min);
    for _ in 1..n {
        let t = loop {
            let draw = poisson.sample(rng) as u64;
            if draw >= 1 {
                break draw;
            }
        };
        trials.push(t);
    }
    adjust_trials(&mut trials, target, t_min, rng)?;
    let x = (0..n).map(|i| binomial(rng, trials[i], q[i])).collect();
    let y = (0..n).map(|i| binomial(rng, t_min, q[i])).collect();
    Ok(DgpDraw {
        trials,
        q,
        x,
        y,
        t_min,
    })
}

/// Moves one random `t_j` (`j ≥ 2`) at a time toward the target. A step of
/// `max(1, round(|gap|·t_j))` is halved until the gap shrinks; if no step
/// helps another index is drawn. Decreases stop at `t_min`.
fn adjust_trials(trials: &mut [u64], target: f64, t_min: u64, rng: &mut SimRng) -> Result<()> {
    let n = trials.len();
    let mut inv_sum: f64 = trials.iter().map(|&t| 1.0 / t as f64).sum();
    let hm = |s: f64| n as f64 / s;
    let mut iterations = 0usize;
    while (target - hm(inv_sum)).abs() > TARGET_TOLERANCE {
        iterations += 1;
        if iterations > MAX_ADJUST_ITERATIONS {
            return Err(Error::NonConvergence(format!(
                "harmonic mean {:.4} after {MAX_ADJUST_ITERATIONS} steps, target {target}",
                hm(inv_sum)
            )));
        }
        let gap = target - hm(inv_sum);
        let j = rng.random_range(1..n);
        let tj = trials[j];
        let mut step = ((gap.abs() * tj as f64).round() as u64).max(1);
        if gap < 0.0 {
            step = step.min(tj.saturating_sub(t_min));
        }
        while step >= 1 {
            let new_t = if gap > 0.0 { tj + step } else { tj - step };
            let candidate = inv_sum - 1.0 / tj as f64 + 1.0 / new_t as f64;
            if (target - hm(candidate)).abs() < gap.abs() {
                trials[j] = new_t;
                inv_sum = candidate;
                break;
            }
            step /= 2;
        }
    }
    Ok(())
}

/// Heterogeneous versus clipped trials at one evaluation point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sim1Config {
    pub n: usize,
    pub targets: Vec<f64>,
    pub replications: usize,
    /// Bandwidth; `n^{-1/5}` when absent.
    pub h: Option<f64>,
    pub seed: u64,
    pub u: f64,
}

impl Sim1Config {
    pub fn new(n: usize, targets: Vec<f64>, replications: usize, seed: u64) -> Self {
        Self {
            n,
            targets,
            replications,
            h: None,
            seed,
            u: 0.5,
        }
    }

    pub fn bandwidth(&self) -> f64 {
        self.h.unwrap_or_else(|| (self.n as f64).powf(-0.2))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::param("n", "need at least two units"));
        }
        if self.targets.is_empty() {
            return Err(Error::param("targets", "no target harmonic means"));
        }
        if let Some(t) = self.targets.iter().find(|t| !(**t >= 5.0 && t.is_finite())) {
            return Err(Error::param("targets", format!("target {t} is below 5")));
        }
        if self.replications == 0 {
            return Err(Error::param("replications", "must be at least 1"));
        }
        check_bandwidth(self.bandwidth())?;
        check_point(self.u)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sim1Row {
    pub t_tilde: f64,
    pub estimator: String,
    pub bias: f64,
    pub se: f64,
}

/// Mean and `n − 1` standard deviation; the deviation is 0 for one value.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Per target and replication: `kde_at` on `(X, t)` and on `(Y, t_min)` from
/// the same draw; bias against the Beta(2,2) density at `u`.
pub fn run_sim1(cfg: &Sim1Config) -> Result<Vec<Sim1Row>> {
    cfg.validate()?;
    let k = KernelSpec::epanechnikov();
    let h = cfg.bandwidth();
    let truth = DensitySpec::beta(2.0, 2.0)?.pdf(cfg.u);
    let mut rows = Vec::new();
    for (ti, &target) in cfg.targets.iter().enumerate() {
        let pairs = map_indexed(cfg.replications, |r| -> Result<(f64, f64)> {
            let mut rng = substream(cfg.seed, stream_id(ti as u32, r as u32));
            let draw = dgp_heterogeneous(cfg.n, target, &mut rng)?;
            Ok((
                kde_at(&draw.sample(), &k, h, cfg.u)?,
                kde_at(&draw.clipped_sample(), &k, h, cfg.u)?,
            ))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        for (label, values) in [
            ("kde", pairs.iter().map(|p| p.0).collect::<Vec<_>>()),
            ("clipped", pairs.iter().map(|p| p.1).collect()),
        ] {
            let (mean, se) = mean_sd(&values);
            rows.push(Sim1Row {
                t_tilde: target,
                estimator: label.into(),
                bias: mean - truth,
                se,
            });
        }
    }
    Ok(rows)
}

/// Joint versus separate tuning on two identical nonsmooth groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sim2Config {
    pub n_list: Vec<usize>,
    pub replications: usize,
    pub h_grid: Vec<f64>,
    pub order_grid: Vec<usize>,
    pub seed: u64,
    pub u: f64,
    pub eps: f64,
}

/// `{0.2, 0.3, …, 2.0}`.
pub fn default_sim2_h_grid() -> Vec<f64> {
    (2..=20).map(|i| i as f64 / 10.0).collect()
}

impl Sim2Config {
    pub fn new(n_list: Vec<usize>, replications: usize, seed: u64) -> Self {
        Self {
            n_list,
            replications,
            h_grid: default_sim2_h_grid(),
            order_grid: vec![2, 4, 6, 8],
            seed,
            u: 0.5,
            eps: DEFAULT_POSITIVITY_EPS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() || self.h_grid.is_empty() || self.order_grid.is_empty() {
            return Err(Error::param("grid", "sample sizes and tuning grids must be nonempty"));
        }
        if let Some(n) = self.n_list.iter().find(|&&n| n < 4) {
            return Err(Error::param("n", format!("sample size {n} is below 4")));
        }
        if self.replications == 0 {
            return Err(Error::param("replications", "must be at least 1"));
        }
        for &h in &self.h_grid {
            check_bandwidth(h)?;
        }
        for &o in &self.order_grid {
            KernelSpec::legendre(o)?;
        }
        check_point(self.u)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sim2Row {
    pub n: usize,
    pub method: String,
    pub bias: f64,
    pub se: f64,
}

const MAX_GROUP_DRAWS: usize = 100;

/// Nonsmooth proportions with Bernoulli(0.5) group labels; labels are
/// redrawn while the group share violates positivity.
pub fn dgp_two_group(n: usize, eps: f64, rng: &mut SimRng) -> Result<TwoGroupSample> {
    let p = DensitySpec::nonsmooth_example();
    let values: Vec<f64> = (0..n).map(|_| p.sample(rng)).collect();
    let coin = Bernoulli::new(0.5).expect("valid probability");
    let mut last = None;
    for _ in 0..MAX_GROUP_DRAWS {
        let groups: Vec<bool> = (0..n).map(|_| coin.sample(rng)).collect();
        match TwoGroupSample::from_true(values.clone(), groups, eps) {
            Ok(s) => return Ok(s),
            Err(e @ Error::Positivity { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one draw"))
}

pub fn run_sim2(cfg: &Sim2Config) -> Result<Vec<Sim2Row>> {
    cfg.validate()?;
    let grid = tuning_grid(&cfg.h_grid, &cfg.order_grid);
    let mut rows = Vec::new();
    for (ni, &n) in cfg.n_list.iter().enumerate() {
        let pairs = map_indexed(cfg.replications, |r| -> Result<(f64, f64)> {
            let mut rng = substream(cfg.seed, stream_id(ni as u32, r as u32));
            let sample = dgp_two_group(n, cfg.eps, &mut rng)?;
            let fold_seed = child_seed(&mut rng);
            let joint = select_tuning_joint(&sample, &grid, fold_seed)?;
            let separate = select_tuning_separate(&sample, &grid, fold_seed)?;
            Ok((joint.estimate(cfg.u)?, separate.estimate(cfg.u)?))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        for (label, values) in [
            ("joint", pairs.iter().map(|p| p.0).collect::<Vec<_>>()),
            ("separate", pairs.iter().map(|p| p.1).collect()),
        ] {
            let (mean, se) = mean_sd(&values);
            rows.push(Sim2Row {
                n,
                method: label.into(),
                bias: mean,
                se,
            });
        }
    }
    Ok(rows)
}

/// Undersmoothed CI coverage at `u = 0.5` under Beta(2,2) with homogeneous trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageConfig {
    pub n: usize,
    pub t: u64,
    pub h: f64,
    pub replications: usize,
    pub seed: u64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub n: usize,
    pub t: u64,
    pub h: f64,
    pub coverage: f64,
}

pub fn run_coverage(cfg: &CoverageConfig) -> Result<CoverageRow> {
    if cfg.replications == 0 {
        return Err(Error::param("replications", "must be at least 1"));
    }
    if cfg.n < 2 {
        return Err(Error::param("n", "need at least two units"));
    }
    if cfg.t == 0 {
        return Err(Error::param("t", "trials must be at least 1"));
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(Error::param("alpha", "must lie in (0, 1)"));
    }
    check_bandwidth(cfg.h)?;
    let u = 0.5;
    let p = DensitySpec::beta(2.0, 2.0)?;
    let truth = p.pdf(u);
    let k = KernelSpec::epanechnikov();
    let hits = map_indexed(cfg.replications, |r| -> Result<bool> {
        let mut rng = substream(cfg.seed, r as u64);
        let x: Vec<u64> = (0..cfg.n)
            .map(|_| {
                let q = p.sample(&mut rng);
                binomial(&mut rng, cfg.t, q)
            })
            .collect();
        let sample = BinomialSample::from_counts(&x, &vec![cfg.t; cfg.n])?;
        let ci = confidence_interval(&sample, &k, cfg.h, u, cfg.alpha)?;
        Ok(ci.ci_lo <= truth && truth <= ci.ci_hi)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let covered = hits.iter().filter(|&&b| b).count();
    Ok(CoverageRow {
        n: cfg.n,
        t: cfg.t,
        h: cfg.h,
        coverage: covered as f64 / cfg.replications as f64,
    })
}
