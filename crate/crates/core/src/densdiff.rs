//! Two-group density difference `τ(u) = p₁(u) − p₀(u)`, estimated by a
//! contrast-weighted kernel sum, with two-fold cross-validated tuning over
//! (bandwidth, kernel order) pairs either jointly for `τ` or separately for
//! each group density.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{check_bandwidth, check_point, kde_points};
use crate::kernel_sum::WindowedKernelSum;
use crate::kernels::KernelSpec;
use crate::numeric::quadrature::simpson_weights;
use crate::rng::substream;
use crate::sample::{ProportionMode, TwoGroupSample};

/// Simpson nodes used for `∫ τ̃²` and `∫ p̂²` on [0, 1].
pub const RISK_NODES: usize = 2001;

/// How many seeded fold splits are tried before positivity failure is fatal.
pub const MAX_SPLIT_ATTEMPTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningPair {
    pub h: f64,
    pub order: usize,
}

impl TuningPair {
    pub fn new(h: f64, order: usize) -> Self {
        Self { h, order }
    }
}

/// Cartesian product `hs × orders`, bandwidth-major.
pub fn tuning_grid(hs: &[f64], orders: &[usize]) -> Vec<TuningPair> {
    hs.iter()
        .flat_map(|&h| orders.iter().map(move |&order| TuningPair { h, order }))
        .collect()
}

fn diff_kde(sample: &TwoGroupSample, k: &KernelSpec, h: f64, u: f64) -> Result<f64> {
    check_bandwidth(h)?;
    let n = sample.len() as f64;
    Ok(sample
        .values()
        .iter()
        .zip(sample.contrast_weights())
        .map(|(&q, w)| w * k.scaled(q, u, h))
        .sum::<f64>()
        / n)
}

/// `(1/n) Σ (A_i/Ā − (1−A_i)/(1−Ā)) K_h(Q_i)` on true proportions.
pub fn diff_kde_true(sample: &TwoGroupSample, k: &KernelSpec, h: f64, u: f64) -> Result<f64> {
    if sample.mode() != ProportionMode::True {
        return Err(Error::param("mode", "expected true-proportion data"));
    }
    diff_kde(sample, k, h, u)
}

/// Same contrast-weighted sum with `Q_i` replaced by `X_i/t_i`.
pub fn diff_kde_binomial(sample: &TwoGroupSample, k: &KernelSpec, h: f64, u: f64) -> Result<f64> {
    if sample.mode() != ProportionMode::Binomial {
        return Err(Error::param("mode", "expected binomial data"));
    }
    diff_kde(sample, k, h, u)
}

/// Mode-agnostic contrast estimator.
pub fn diff_kde_any(sample: &TwoGroupSample, k: &KernelSpec, h: f64, u: f64) -> Result<f64> {
    diff_kde(sample, k, h, u)
}

/// Joint pseudo-risk of one tuning candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudoRisk {
    /// `∫ τ̃_h²` by composite Simpson.
    pub integral: f64,
    /// `Σ_{j ∈ eval} w_j τ̃_h(Q_j)` with eval-fold weights.
    pub cross_sum: f64,
    /// `integral − 2·cross_sum / n₂` (eval-fold normalization; used for selection).
    pub risk: f64,
    /// `integral − 2·cross_sum / n` with `n` the total size of both folds.
    pub risk_total_n: f64,
}

struct Fitted {
    sum: WindowedKernelSum,
    n: f64,
}

impl Fitted {
    fn new(points: &[f64], weights: &[f64]) -> Self {
        Self {
            sum: WindowedKernelSum::new(points, weights, 8),
            n: points.len() as f64,
        }
    }

    fn eval(&self, k: &KernelSpec, h: f64, u: f64) -> f64 {
        self.sum.eval(k, h, u) / self.n
    }
}

fn risk_terms(
    fit: &Fitted,
    eval_points: &[f64],
    eval_weights: &[f64],
    k: &KernelSpec,
    h: f64,
    nodes: &(Vec<f64>, Vec<f64>),
) -> (f64, f64) {
    let integral: f64 = nodes
        .0
        .iter()
        .zip(&nodes.1)
        .map(|(&u, &w)| w * fit.eval(k, h, u).powi(2))
        .sum();
    let cross: f64 = eval_points
        .iter()
        .zip(eval_weights)
        .map(|(&q, &w)| w * fit.eval(k, h, q))
        .sum();
    (integral, cross)
}

/// `∫ τ̃_h(u)² du − (2/n₂) Σ_{j ∈ eval} (A_j/Ā − (1−A_j)/(1−Ā)) τ̃_h(Q_j)`
/// where `τ̃_h` is fit on `fit_fold` and `Ā` is the eval-fold share.
pub fn joint_pseudo_risk(
    fit_fold: &TwoGroupSample,
    eval_fold: &TwoGroupSample,
    k: &KernelSpec,
    h: f64,
) -> Result<PseudoRisk> {
    check_bandwidth(h)?;
    let fit = Fitted::new(fit_fold.values(), &fit_fold.contrast_weights());
    let nodes = simpson_weights(0.0, 1.0, RISK_NODES);
    let (integral, cross_sum) = risk_terms(
        &fit,
        eval_fold.values(),
        &eval_fold.contrast_weights(),
        k,
        h,
        &nodes,
    );
    Ok(assemble(integral, cross_sum, eval_fold.len(), fit_fold.len() + eval_fold.len()))
}

fn assemble(integral: f64, cross_sum: f64, n_eval: usize, n_total: usize) -> PseudoRisk {
    PseudoRisk {
        integral,
        cross_sum,
        risk: integral - 2.0 * cross_sum / n_eval as f64,
        risk_total_n: integral - 2.0 * cross_sum / n_total as f64,
    }
}

/// Seeded 50/50 split: first half of a random permutation fits, second half
/// evaluates. Redrawn on positivity failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub fit: Vec<usize>,
    pub eval: Vec<usize>,
    pub attempt: usize,
}

pub fn split_folds(
    sample: &TwoGroupSample,
    seed: u64,
) -> Result<(FoldSplit, TwoGroupSample, TwoGroupSample)> {
    let n = sample.len();
    if n < 4 {
        return Err(Error::param("n", "cross-validation needs at least four units"));
    }
    let mut last_err = None;
    for attempt in 0..MAX_SPLIT_ATTEMPTS {
        let mut rng = substream(seed, attempt as u64);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let (fit_idx, eval_idx) = perm.split_at(n / 2);
        match (sample.subset(fit_idx), sample.subset(eval_idx)) {
            (Ok(fit), Ok(eval)) => {
                let split = FoldSplit {
                    fit: fit_idx.to_vec(),
                    eval: eval_idx.to_vec(),
                    attempt,
                };
                return Ok((split, fit, eval));
            }
            (Err(e), _) | (_, Err(e)) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

fn kernels_for(grid: &[TuningPair]) -> Result<BTreeMap<usize, KernelSpec>> {
    let mut out = BTreeMap::new();
    for p in grid {
        check_bandwidth(p.h)?;
        if let std::collections::btree_map::Entry::Vacant(e) = out.entry(p.order) {
            e.insert(KernelSpec::legendre(p.order)?);
        }
    }
    Ok(out)
}

/// Orders candidates by risk, then larger `h`, then smaller order.
fn best_index(grid: &[TuningPair], risks: &[f64]) -> usize {
    (0..grid.len())
        .min_by(|&a, &b| {
            risks[a]
                .total_cmp(&risks[b])
                .then(grid[b].h.total_cmp(&grid[a].h))
                .then(grid[a].order.cmp(&grid[b].order))
        })
        .expect("nonempty grid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSelection {
    pub pair: TuningPair,
    pub risks: Vec<PseudoRisk>,
    pub split: FoldSplit,
    pub fit_fold: TwoGroupSample,
}

impl JointSelection {
    /// Contrast estimator at `u` with the selected pair, fit on the fit fold.
    pub fn estimate(&self, u: f64) -> Result<f64> {
        check_point(u)?;
        let k = KernelSpec::legendre(self.pair.order)?;
        diff_kde(&self.fit_fold, &k, self.pair.h, u)
    }
}

/// Minimizes the joint pseudo-risk of the difference over `grid`.
pub fn select_tuning_joint(
    sample: &TwoGroupSample,
    grid: &[TuningPair],
    seed: u64,
) -> Result<JointSelection> {
    if grid.is_empty() {
        return Err(Error::param("grid", "tuning grid is empty"));
    }
    let kernels = kernels_for(grid)?;
    let (split, fit_fold, eval_fold) = split_folds(sample, seed)?;
    let fit = Fitted::new(fit_fold.values(), &fit_fold.contrast_weights());
    let eval_w = eval_fold.contrast_weights();
    let nodes = simpson_weights(0.0, 1.0, RISK_NODES);
    let risks: Vec<PseudoRisk> = grid
        .iter()
        .map(|p| {
            let (i, c) = risk_terms(&fit, eval_fold.values(), &eval_w, &kernels[&p.order], p.h, &nodes);
            assemble(i, c, eval_fold.len(), sample.len())
        })
        .collect();
    let plain: Vec<f64> = risks.iter().map(|r| r.risk).collect();
    let best = best_index(grid, &plain);
    Ok(JointSelection {
        pair: grid[best],
        risks,
        split,
        fit_fold,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparateSelection {
    pub group1: TuningPair,
    pub group0: TuningPair,
    pub risks1: Vec<f64>,
    pub risks0: Vec<f64>,
    pub split: FoldSplit,
    pub fit_fold: TwoGroupSample,
}

impl SeparateSelection {
    /// `p̂₁(u; pair₁) − p̂₀(u; pair₀)`, each fit on its group within the fit fold.
    pub fn estimate(&self, u: f64) -> Result<f64> {
        check_point(u)?;
        let k1 = KernelSpec::legendre(self.group1.order)?;
        let k0 = KernelSpec::legendre(self.group0.order)?;
        let g1 = self.fit_fold.group_values(true);
        let g0 = self.fit_fold.group_values(false);
        Ok(kde_points(&g1, &k1, self.group1.h, u) - kde_points(&g0, &k0, self.group0.h, u))
    }
}

/// Standard density pseudo-risk `∫ p̂_h² − (2/n₂ₐ) Σ_{eval, A=a} p̂_h(Q_j)`
/// minimized separately for each group.
pub fn select_tuning_separate(
    sample: &TwoGroupSample,
    grid: &[TuningPair],
    seed: u64,
) -> Result<SeparateSelection> {
    if grid.is_empty() {
        return Err(Error::param("grid", "tuning grid is empty"));
    }
    let kernels = kernels_for(grid)?;
    let (split, fit_fold, eval_fold) = split_folds(sample, seed)?;
    let nodes = simpson_weights(0.0, 1.0, RISK_NODES);
    let group_risks = |g: bool| -> Vec<f64> {
        let fit_pts = fit_fold.group_values(g);
        let eval_pts = eval_fold.group_values(g);
        let fit = Fitted::new(&fit_pts, &vec![1.0; fit_pts.len()]);
        let ones = vec![1.0; eval_pts.len()];
        grid.iter()
            .map(|p| {
                let (i, c) = risk_terms(&fit, &eval_pts, &ones, &kernels[&p.order], p.h, &nodes);
                i - 2.0 * c / eval_pts.len() as f64
            })
            .collect()
    };
    let risks1 = group_risks(true);
    let risks0 = group_risks(false);
    Ok(SeparateSelection {
        group1: grid[best_index(grid, &risks1)],
        group0: grid[best_index(grid, &risks0)],
        risks1,
        risks0,
        split,
        fit_fold,
    })
}
