//! Lepski-type bandwidth selection: starting from the largest bandwidth, the
//! hypothesis that no smaller bandwidth removes a significant amount of bias
//! is tested against every smaller grid element, with critical values from a
//! Gaussian multiplier bootstrap of the centered max-statistic.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{check_bandwidth, check_point};
use crate::kernels::KernelSpec;
use crate::rng::substream;
use crate::sample::BinomialSample;

/// Strictly decreasing candidate bandwidths `h_1 > h_2 > … > h_J > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthGrid {
    values: Vec<f64>,
}

impl BandwidthGrid {
    /// Accepts any order; sorts descending. Duplicates and nonpositive
    /// values are rejected.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::param("grid", "bandwidth grid is empty"));
        }
        for &h in &values {
            check_bandwidth(h)?;
        }
        values.sort_by(|a, b| b.total_cmp(a));
        if values.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::param("grid", "bandwidth grid has duplicate values"));
        }
        Ok(Self { values })
    }

    /// `start, start·ratio, start·ratio², …` down to `min` (inclusive).
    pub fn geometric(start: f64, ratio: f64, min: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::param("ratio", "geometric ratio must lie in (0, 1)"));
        }
        check_bandwidth(start)?;
        check_bandwidth(min)?;
        if min > start {
            return Err(Error::param("min", "smallest bandwidth exceeds the largest"));
        }
        let mut values = vec![start];
        loop {
            let next = values[values.len() - 1] * ratio;
            if next < min * (1.0 - 1e-12) {
                break;
            }
            values.push(next);
        }
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn index_of(&self, h: f64) -> Result<usize> {
        self.values
            .iter()
            .position(|&v| v == h)
            .ok_or_else(|| Error::param("h", format!("{h} is not a grid element")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LepskiConfig {
    pub alpha: f64,
    pub bootstrap_reps: usize,
    pub seed: u64,
    pub u: f64,
}

impl LepskiConfig {
    pub const DEFAULT_BOOTSTRAP_REPS: usize = 1000;

    pub fn new(u: f64, seed: u64) -> Self {
        Self {
            alpha: 0.05,
            bootstrap_reps: Self::DEFAULT_BOOTSTRAP_REPS,
            seed,
            u,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::param("alpha", "test level must lie in (0, 1)"));
        }
        if self.bootstrap_reps == 0 {
            return Err(Error::param("boot-reps", "need at least one bootstrap draw"));
        }
        check_point(self.u)
    }
}

/// Per-record kernel values for every grid bandwidth, centered by their
/// means. Row `j` belongs to `grid[j]`.
struct KernelTable {
    n: usize,
    means: Vec<f64>,
    centered: Vec<Vec<f64>>,
}

impl KernelTable {
    fn new(sample: &BinomialSample, k: &KernelSpec, grid: &BandwidthGrid, u: f64) -> Self {
        let props = sample.proportions();
        let n = props.len();
        let mut means = Vec::with_capacity(grid.len());
        let mut centered = Vec::with_capacity(grid.len());
        for &h in grid.values() {
            let row: Vec<f64> = props.iter().map(|&v| k.scaled(v, u, h)).collect();
            let mean = row.iter().sum::<f64>() / n as f64;
            centered.push(row.into_iter().map(|v| v - mean).collect());
            means.push(mean);
        }
        Self { n, means, centered }
    }

    /// `p̂_{h,h'}` for grid rows `j` and `jp`.
    fn pair_variance(&self, j: usize, jp: usize) -> f64 {
        let n = self.n as f64;
        let ss: f64 = self.centered[jp]
            .iter()
            .zip(&self.centered[j])
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        ss / (n * (n - 1.0))
    }
}

/// `1/(n(n−1)) Σ [{K_{h'}(X_i/t_i) − K_h(X_i/t_i)} − {p̂_{h'}(u) − p̂_h(u)}]²`.
pub fn pairwise_variance(
    sample: &BinomialSample,
    k: &KernelSpec,
    h: f64,
    h_prime: f64,
    u: f64,
) -> Result<f64> {
    check_bandwidth(h)?;
    check_bandwidth(h_prime)?;
    check_point(u)?;
    if h == h_prime {
        return Err(Error::param("h_prime", "pairwise variance needs two distinct bandwidths"));
    }
    if sample.len() < 2 {
        return Err(Error::param("n", "pairwise variance needs at least two records"));
    }
    let grid = BandwidthGrid::new(vec![h, h_prime])?;
    let table = KernelTable::new(sample, k, &grid, u);
    Ok(table.pair_variance(0, 1))
}

/// One row of the selection trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LepskiStep {
    pub h: f64,
    pub estimate: f64,
    /// `max_{h' < h} |p̂_{h'} − p̂_h| / sqrt(p̂_{h,h'})`; zero when no smaller
    /// bandwidth has positive pairwise variance.
    pub statistic: f64,
    /// Bootstrap `c_h(α)`; absent for the smallest bandwidth.
    pub critical: Option<f64>,
    pub rejected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LepskiSelection {
    pub h: f64,
    pub index: usize,
    /// True when every bandwidth with a nonempty comparison set was rejected,
    /// so the smallest grid value was returned by default.
    pub fallback: bool,
    /// Index of the first non-rejected bandwidth in the downward scan.
    pub first_accept: usize,
    pub trace: Vec<LepskiStep>,
}

/// Bootstrap engine shared by all grid elements: draw `b` uses multipliers
/// from substream `b`, and the same draw serves every pair `(h, h')`.
struct Bootstrap<'a> {
    table: &'a KernelTable,
    /// `W_b(h_j) = Σ_i e_i^{(b)} (K_{h_j}(i) − p̂_{h_j})`, indexed `[b][j]`.
    sums: Vec<Vec<f64>>,
}

impl<'a> Bootstrap<'a> {
    fn new(table: &'a KernelTable, reps: usize, seed: u64) -> Self {
        let draw = |b: usize| -> Vec<f64> {
            let mut rng = substream(seed, b as u64);
            let mut acc = vec![0.0; table.centered.len()];
            for i in 0..table.n {
                let e: f64 = StandardNormal.sample(&mut rng);
                for (a, row) in acc.iter_mut().zip(&table.centered) {
                    *a += e * row[i];
                }
            }
            acc
        };
        #[cfg(feature = "parallel")]
        let sums = {
            use rayon::prelude::*;
            (0..reps).into_par_iter().map(draw).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let sums = (0..reps).map(draw).collect();
        Self { table, sums }
    }

    /// `(1 − α)` empirical quantile of `max_{h'} |Σ e_i Z_i(h, h')| / (n sqrt(p̂_{h,h'}))`.
    fn critical_value(&self, j: usize, alpha: f64) -> f64 {
        let n = self.table.n as f64;
        let scales: Vec<(usize, f64)> = (j + 1..self.table.centered.len())
            .filter_map(|jp| {
                let v = self.table.pair_variance(j, jp);
                (v > 0.0).then(|| (jp, 1.0 / (n * v.sqrt())))
            })
            .collect();
        let mut draws: Vec<f64> = self
            .sums
            .iter()
            .map(|w| {
                scales
                    .iter()
                    .map(|&(jp, s)| (w[jp] - w[j]).abs() * s)
                    .fold(0.0, f64::max)
            })
            .collect();
        empirical_quantile(&mut draws, 1.0 - alpha)
    }
}

/// Lower empirical quantile: the `ceil(level·B)`-th order statistic.
pub(crate) fn empirical_quantile(draws: &mut [f64], level: f64) -> f64 {
    draws.sort_by(|a, b| a.total_cmp(b));
    let b = draws.len();
    let rank = ((level * b as f64).ceil() as usize).clamp(1, b);
    draws[rank - 1]
}

fn check_inputs(sample: &BinomialSample, cfg: &LepskiConfig) -> Result<()> {
    cfg.validate()?;
    if sample.len() < 2 {
        return Err(Error::param("n", "Lepski selection needs at least two records"));
    }
    Ok(())
}

/// Bootstrap critical value `c_h(α)` for grid element `h`.
pub fn bootstrap_critical_value(
    sample: &BinomialSample,
    k: &KernelSpec,
    h: f64,
    grid: &BandwidthGrid,
    cfg: &LepskiConfig,
) -> Result<f64> {
    check_inputs(sample, cfg)?;
    let j = grid.index_of(h)?;
    if j + 1 == grid.len() {
        return Err(Error::param("h", "no smaller bandwidth in the grid"));
    }
    let table = KernelTable::new(sample, k, grid, cfg.u);
    let boot = Bootstrap::new(&table, cfg.bootstrap_reps, cfg.seed);
    Ok(boot.critical_value(j, cfg.alpha))
}

/// Tests every grid bandwidth from largest to smallest and returns the first
/// (largest) one whose hypothesis is not rejected.
pub fn lepski_select(
    sample: &BinomialSample,
    k: &KernelSpec,
    grid: &BandwidthGrid,
    cfg: &LepskiConfig,
) -> Result<LepskiSelection> {
    check_inputs(sample, cfg)?;
    let table = KernelTable::new(sample, k, grid, cfg.u);
    let boot = (grid.len() > 1).then(|| Bootstrap::new(&table, cfg.bootstrap_reps, cfg.seed));
    let last = grid.len() - 1;

    let mut trace = Vec::with_capacity(grid.len());
    for (j, &h) in grid.values().iter().enumerate() {
        let statistic = (j + 1..grid.len())
            .filter_map(|jp| {
                let v = table.pair_variance(j, jp);
                (v > 0.0).then(|| (table.means[jp] - table.means[j]).abs() / v.sqrt())
            })
            .fold(0.0, f64::max);
        let critical = boot
            .as_ref()
            .filter(|_| j < last)
            .map(|b| b.critical_value(j, cfg.alpha));
        let rejected = critical.is_some_and(|c| statistic > 1.0 + c);
        trace.push(LepskiStep {
            h,
            estimate: table.means[j],
            statistic,
            critical,
            rejected,
        });
    }

    let first_accept = trace
        .iter()
        .position(|s| !s.rejected)
        .expect("smallest bandwidth is never rejected");
    Ok(LepskiSelection {
        h: grid.values()[first_accept],
        index: first_accept,
        fallback: first_accept == last && last > 0,
        first_accept,
        trace,
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
    fn grid_construction() {
        let g = BandwidthGrid::new(vec![0.1, 0.3, 0.2]).unwrap();
        assert_eq!(g.values(), &[0.3, 0.2, 0.1]);
        assert!(BandwidthGrid::new(vec![]).is_err());
        assert!(BandwidthGrid::new(vec![0.1, 0.1]).is_err());
        assert!(BandwidthGrid::new(vec![0.1, -0.1]).is_err());
        let g = BandwidthGrid::geometric(0.5, 0.9, 0.05).unwrap();
        assert!((g.values()[0] - 0.5).abs() < 1e-15);
        assert!(g.values().iter().all(|&h| h >= 0.05 * (1.0 - 1e-12)));
        assert!(g.values().last().unwrap() * 0.9 < 0.05);
    }

    #[test]
    fn pairwise_variance_guards() {
        let k = KernelSpec::epanechnikov();
        let s = sample(&[(1, 2), (2, 5), (3, 4)]);
        assert!(pairwise_variance(&s, &k, 0.2, 0.2, 0.5).is_err());
        assert!(pairwise_variance(&sample(&[(1, 2)]), &k, 0.2, 0.1, 0.5).is_err());
        // identical records: K_{h'} − K_h is constant
        let s = sample(&[(2, 5); 6]);
        assert_eq!(pairwise_variance(&s, &k, 0.3, 0.2, 0.45).unwrap(), 0.0);
    }

    #[test]
    fn singleton_grid() {
        let k = KernelSpec::epanechnikov();
        let s = sample(&[(1, 2), (2, 5), (3, 4)]);
        let g = BandwidthGrid::new(vec![0.25]).unwrap();
        let sel = lepski_select(&s, &k, &g, &LepskiConfig::new(0.5, 1)).unwrap();
        assert_eq!(sel.h, 0.25);
        assert!(!sel.trace[0].rejected);
        assert!(!sel.fallback);
        assert!(bootstrap_critical_value(&s, &k, 0.25, &g, &LepskiConfig::new(0.5, 1)).is_err());
    }

    #[test]
    fn zero_statistics_never_reject() {
        // every proportion is outside every window: all estimates are zero
        let k = KernelSpec::epanechnikov();
        let s = sample(&[(0, 10), (10, 10), (1, 10), (9, 10)]);
        let g = BandwidthGrid::new(vec![0.3, 0.2, 0.1]).unwrap();
        let sel = lepski_select(&s, &k, &g, &LepskiConfig::new(0.5, 3)).unwrap();
        assert!(sel.trace.iter().all(|st| st.statistic == 0.0 && !st.rejected));
        assert_eq!(sel.h, 0.3);
        assert_eq!(
            bootstrap_critical_value(&s, &k, 0.3, &g, &LepskiConfig::new(0.5, 3)).unwrap(),
            0.0
        );
    }

    #[test]
    fn quantile_rule() {
        let mut d = vec![3.0, 1.0, 2.0, 4.0];
        assert_eq!(empirical_quantile(&mut d, 0.5), 2.0);
        assert_eq!(empirical_quantile(&mut d, 1e-9), 1.0);
        assert_eq!(empirical_quantile(&mut d, 1.0), 4.0);
    }
}
