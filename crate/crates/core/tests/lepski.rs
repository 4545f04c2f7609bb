use binmix::kernels::KernelSpec;
use binmix::lepski::{bootstrap_critical_value, pairwise_variance};
use binmix::rng::substream;
use binmix::simlab::dgp_heterogeneous;
use binmix::{lepski_select, BandwidthGrid, BinomialSample, LepskiConfig, Record};
use rand_distr::{Distribution, StandardNormal};

/// Plain reimplementation: kernel values per bandwidth, pairwise variances,
/// one multiplier vector per bootstrap draw shared by all pairs.
struct Brute {
    hs: Vec<f64>,
    est: Vec<f64>,
    stat: Vec<f64>,
    crit: Vec<Option<f64>>,
    selected: usize,
}

fn brute(sample: &BinomialSample, k: &KernelSpec, hs_desc: &[f64], cfg: &LepskiConfig) -> Brute {
    let props = sample.proportions();
    let n = props.len();
    let m = hs_desc.len();
    let kv: Vec<Vec<f64>> = hs_desc
        .iter()
        .map(|&h| props.iter().map(|&x| k.eval((x - cfg.u) / h) / h).collect())
        .collect();
    let est: Vec<f64> = kv.iter().map(|r| r.iter().sum::<f64>() / n as f64).collect();
    let var = |a: usize, b: usize| {
        let d = est[b] - est[a];
        (0..n).map(|i| (kv[b][i] - kv[a][i] - d).powi(2)).sum::<f64>() / (n * (n - 1)) as f64
    };
    let mult: Vec<Vec<f64>> = (0..cfg.bootstrap_reps)
        .map(|b| {
            let mut rng = substream(cfg.seed, b as u64);
            (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
        })
        .collect();
    let mut stat = vec![0.0; m];
    let mut crit = vec![None; m];
    for j in 0..m {
        let pairs: Vec<usize> = (j + 1..m).filter(|&jp| var(j, jp) > 0.0).collect();
        for &jp in &pairs {
            stat[j] = f64::max(stat[j], (est[jp] - est[j]).abs() / var(j, jp).sqrt());
        }
        if j + 1 < m {
            let mut draws: Vec<f64> = mult
                .iter()
                .map(|e| {
                    pairs
                        .iter()
                        .map(|&jp| {
                            let z: f64 = (0..n)
                                .map(|i| e[i] * ((kv[jp][i] - est[jp]) - (kv[j][i] - est[j])))
                                .sum();
                            z.abs() / (n as f64 * var(j, jp).sqrt())
                        })
                        .fold(0.0, f64::max)
                })
                .collect();
            draws.sort_by(|a, b| a.total_cmp(b));
            let r = ((1.0 - cfg.alpha) * draws.len() as f64).ceil() as usize;
            crit[j] = Some(draws[r.max(1) - 1]);
        }
    }
    let selected = (0..m)
        .find(|&j| crit[j].is_none_or(|c| stat[j] <= 1.0 + c))
        .unwrap();
    Brute { hs: hs_desc.to_vec(), est, stat, crit, selected }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

#[test]
fn selection_matches_brute_force() {
    let k = KernelSpec::epanechnikov();
    let grid = BandwidthGrid::geometric(0.5, 0.8, 0.05).unwrap();
    for d in 0..6u64 {
        let mut rng = substream(4242, d);
        let draw = dgp_heterogeneous(150, 40.0, &mut rng).unwrap();
        let sample = draw.sample();
        let mut cfg = LepskiConfig::new(0.3 + 0.08 * d as f64, 900 + d);
        cfg.bootstrap_reps = 200;
        let sel = lepski_select(&sample, &k, &grid, &cfg).unwrap();
        let b = brute(&sample, &k, grid.values(), &cfg);
        assert_eq!(sel.index, b.selected, "dataset {d}");
        assert_eq!(sel.h, b.hs[b.selected]);
        for (j, s) in sel.trace.iter().enumerate() {
            assert!(close(s.estimate, b.est[j]));
            assert!(close(s.statistic, b.stat[j]));
            match (s.critical, b.crit[j]) {
                (Some(x), Some(y)) => assert!(close(x, y), "{x} vs {y}"),
                (None, None) => {}
                other => panic!("critical mismatch {other:?}"),
            }
        }
    }
}

#[test]
fn critical_value_and_pair_variance_entry_points_agree() {
    let k = KernelSpec::legendre(4).unwrap();
    let mut rng = substream(5, 5);
    let sample = dgp_heterogeneous(80, 30.0, &mut rng).unwrap().sample();
    let grid = BandwidthGrid::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
    let mut cfg = LepskiConfig::new(0.5, 17);
    cfg.bootstrap_reps = 150;
    let b = brute(&sample, &k, grid.values(), &cfg);
    for (j, &h) in grid.values()[..3].iter().enumerate() {
        let c = bootstrap_critical_value(&sample, &k, h, &grid, &cfg).unwrap();
        assert!(close(c, b.crit[j].unwrap()));
    }
    assert!(bootstrap_critical_value(&sample, &k, 0.1, &grid, &cfg).is_err());
    let v = pairwise_variance(&sample, &k, 0.4, 0.2, 0.5).unwrap();
    let direct = {
        let p = sample.proportions();
        let n = p.len() as f64;
        let d: Vec<f64> = p.iter().map(|&x| k.scaled(x, 0.5, 0.2) - k.scaled(x, 0.5, 0.4)).collect();
        let m = d.iter().sum::<f64>() / n;
        d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n * (n - 1.0))
    };
    assert!(close(v, direct));
}

#[test]
fn singleton_grid_returns_its_value() {
    let s = BinomialSample::new(vec![Record::new(3, 10), Record::new(5, 10), Record::new(6, 12)]).unwrap();
    let grid = BandwidthGrid::new(vec![0.2]).unwrap();
    let sel = lepski_select(&s, &KernelSpec::epanechnikov(), &grid, &LepskiConfig::new(0.5, 1)).unwrap();
    assert_eq!(sel.h, 0.2);
    assert!(!sel.fallback);
    assert_eq!(sel.trace.len(), 1);
    assert!(sel.trace[0].critical.is_none());
}

#[test]
fn zero_statistics_select_largest_bandwidth() {
    // all proportions far from u: every kernel value is zero
    let s = BinomialSample::new(vec![Record::new(0, 10), Record::new(1, 20), Record::new(0, 5)]).unwrap();
    let grid = BandwidthGrid::new(vec![0.3, 0.2, 0.1]).unwrap();
    let sel = lepski_select(&s, &KernelSpec::epanechnikov(), &grid, &LepskiConfig::new(0.8, 3)).unwrap();
    assert_eq!(sel.index, 0);
    assert!(sel.trace.iter().all(|s| s.statistic == 0.0 && !s.rejected));
}

#[test]
fn selection_is_reproducible() {
    let k = KernelSpec::epanechnikov();
    let mut rng = substream(8, 1);
    let sample = dgp_heterogeneous(200, 50.0, &mut rng).unwrap().sample();
    let grid = BandwidthGrid::geometric(0.5, 0.9, 0.05).unwrap();
    let cfg = LepskiConfig::new(0.5, 99);
    assert_eq!(
        lepski_select(&sample, &k, &grid, &cfg).unwrap(),
        lepski_select(&sample, &k, &grid, &cfg).unwrap()
    );
}

#[test]
fn invalid_configuration() {
    let s = BinomialSample::new(vec![Record::new(3, 10), Record::new(5, 10)]).unwrap();
    let grid = BandwidthGrid::new(vec![0.2, 0.1]).unwrap();
    let k = KernelSpec::epanechnikov();
    let mut cfg = LepskiConfig::new(0.5, 1);
    cfg.alpha = 1.0;
    assert!(lepski_select(&s, &k, &grid, &cfg).is_err());
    cfg.alpha = 0.05;
    cfg.bootstrap_reps = 0;
    assert!(lepski_select(&s, &k, &grid, &cfg).is_err());
    let one = BinomialSample::new(vec![Record::new(3, 10)]).unwrap();
    assert!(lepski_select(&one, &k, &grid, &LepskiConfig::new(0.5, 1)).is_err());
    assert!(BandwidthGrid::new(vec![]).is_err());
    assert!(BandwidthGrid::new(vec![0.1, -0.2]).is_err());
}
