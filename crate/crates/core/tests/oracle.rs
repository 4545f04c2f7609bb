use binmix::kernels::KernelSpec;
use binmix::numeric::quadrature::adaptive;
use binmix::oracle::bernstein::kernel_breaks;
use binmix::oracle::bounds::{
    corollary1_rates, corollary2_bounds, g_factor, lemma1_bound, lemma1_bound_analytic,
    proposition3_bound, theorem1_bias_bound, theorem1_variance_bound, TauSmoothness,
};
use binmix::oracle::{
    bernstein_error_exact, exact_kde_expectation, exact_mixture_pmf, quasi_riemann_error,
    DensitySpec, SmoothnessParams,
};
use binmix::rng::substream;
use proptest::prelude::*;
use rand_distr::{Distribution, Poisson};

fn densities() -> Vec<DensitySpec> {
    vec![
        DensitySpec::uniform(),
        DensitySpec::beta(2.0, 2.0).unwrap(),
        DensitySpec::beta(1.5, 3.0).unwrap(),
        DensitySpec::nonsmooth_example(),
    ]
}

/// `C(t,x) ∫ q^x (1−q)^{t−x} p(q) dq` by adaptive quadrature in log space.
fn pmf_by_quadrature(p: &DensitySpec, t: u64, x: u64) -> f64 {
    let lc = binmix::numeric::special::ln_choose(t, x);
    let f = |q: f64| {
        if q <= 0.0 || q >= 1.0 {
            let v = if (q <= 0.0 && x == 0) || (q >= 1.0 && x == t) { 1.0 } else { 0.0 };
            return v * lc.exp() * p.pdf(q);
        }
        (lc + x as f64 * q.ln() + (t - x) as f64 * (1.0 - q).ln()).exp() * p.pdf(q)
    };
    adaptive(f, 0.0, 1.0, &p.breakpoints(), 1e-14)
}

#[test]
fn pmf_matches_quadrature() {
    for p in densities() {
        for t in [1u64, 3, 17, 60] {
            let m = exact_mixture_pmf(&p, t);
            assert_eq!(m.len(), t as usize + 1);
            for x in 0..=t {
                let q = pmf_by_quadrature(&p, t, x);
                assert!((m[x as usize] - q).abs() < 1e-10, "{} t={t} x={x}", p.name);
            }
        }
    }
}

#[test]
fn pmf_sums_to_one() {
    for p in densities() {
        for t in [1u64, 2, 10, 100, 500, 2000] {
            let total: f64 = exact_mixture_pmf(&p, t).iter().sum();
            assert!((total - 1.0).abs() < 1e-10, "{} t={t}: {total}", p.name);
        }
    }
}

#[test]
fn bernstein_reproduces_affine_functions() {
    for p in densities() {
        for t in [1u64, 2, 5, 33, 200] {
            assert!(bernstein_error_exact(|_| 2.5, &[], &p, t).abs() < 1e-12);
            assert!(bernstein_error_exact(|q| 1.0 - 3.0 * q, &[], &p, t).abs() < 1e-12);
        }
    }
}

#[test]
fn quadratic_error_is_variance_term() {
    // E{(X/t)²|q} − q² = q(1−q)/t, integrated against p
    let p = DensitySpec::beta(2.0, 2.0).unwrap();
    for t in [1u64, 4, 25] {
        let want = p.integrate_against(|q| q * (1.0 - q), &[], 1e-13) / t as f64;
        assert!((bernstein_error_exact(|q| q * q, &[], &p, t) - want).abs() < 1e-12);
    }
}

#[test]
fn expectation_linear_in_kernel() {
    let p = DensitySpec::nonsmooth_example();
    let k1 = KernelSpec::epanechnikov();
    let k2 = KernelSpec::legendre(4).unwrap();
    let trials = [7u64, 12, 12, 30];
    let (h, u, a, b) = (0.2, 0.4, 0.3, -1.7);
    let e1 = exact_kde_expectation(&p, &trials, &k1, h, u);
    let e2 = exact_kde_expectation(&p, &trials, &k2, h, u);
    // direct expectation of the combined kernel from the pmfs
    let combined: f64 = trials
        .iter()
        .map(|&t| {
            exact_mixture_pmf(&p, t)
                .iter()
                .enumerate()
                .map(|(x, m)| {
                    let q = x as f64 / t as f64;
                    (a * k1.scaled(q, u, h) + b * k2.scaled(q, u, h)) * m
                })
                .sum::<f64>()
        })
        .sum::<f64>()
        / trials.len() as f64;
    assert!((a * e1 + b * e2 - combined).abs() < 1e-12);
}

#[test]
fn g_factor_halves_first_term_at_four_times_t() {
    let sp = SmoothnessParams { l: 1.0, alpha: 1.0, p_max: 0.0, s: 1.0 };
    let first = |t: u64| g_factor(t, &sp) - sp.l / (t as f64 + 2.0);
    let ratio = first(4 * 1000 + 9) / first(1000);
    assert!((ratio - 0.5).abs() < 1e-12);
}

#[test]
fn bernstein_bound_with_heterogeneous_poisson_trials() {
    let p = DensitySpec::beta(2.0, 2.0).unwrap();
    let sp = p.grid_constants(1.001);
    let k = KernelSpec::epanechnikov();
    let (h, u) = (0.2, 0.5);
    let mut rng = substream(11, 0);
    let pois = Poisson::new(50.0).unwrap();
    let trials: Vec<u64> = (0..40)
        .map(|_| loop {
            let t = pois.sample(&mut rng) as u64;
            if t > 0 {
                break t;
            }
        })
        .collect();
    let f = |q: f64| k.scaled(q, u, h);
    let br = kernel_breaks(u, h);
    let mean_err = trials
        .iter()
        .map(|&t| bernstein_error_exact(f, &br, &p, t))
        .sum::<f64>()
        / trials.len() as f64;
    let bound = lemma1_bound(f, &br, &p, &sp, &trials);
    assert!(mean_err.abs() <= bound);
    assert!(bound <= lemma1_bound_analytic(&k, &k.bounds_for(sp.s), &sp, &trials, h, u));
    assert_eq!(lemma1_bound(|_| 0.0, &[], &p, &sp, &trials), 0.0);
}

#[test]
fn bias_bound_dominates_exact_bias() {
    let p = DensitySpec::beta(2.0, 2.0).unwrap();
    let k = KernelSpec::epanechnikov();
    let trials = vec![100u64; 500];
    let bias = exact_kde_expectation(&p, &trials, &k, 0.15, 0.5) - p.pdf(0.5);
    assert!(bias.abs() <= theorem1_bias_bound(&p.smoothness, &k, &trials, 0.15, 0.5));
}

#[test]
fn quasi_riemann_error_dominated() {
    let p = DensitySpec::beta(2.0, 2.0).unwrap();
    let sp = p.grid_constants(1.001);
    let k = KernelSpec::epanechnikov();
    let kb = k.bounds_for(sp.s);
    for t in [10u64, 50, 100] {
        for h in [0.1, 0.2] {
            let qr = quasi_riemann_error(|q| k.scaled(q, 0.5, h), &kernel_breaks(0.5, h), &p, t);
            assert!(qr <= proposition3_bound(t, h, &sp, &kb));
        }
    }
}

#[test]
fn homogeneous_reduction() {
    let p = DensitySpec::nonsmooth_example();
    let sp = p.grid_constants(1.001);
    let k = KernelSpec::legendre(2).unwrap();
    let (h, u) = (0.25, 0.6);
    let f = |q: f64| k.scaled(q, u, h);
    let br = kernel_breaks(u, h);
    for t in [8u64, 40] {
        let many = vec![t; 13];
        let rel = |a: f64, b: f64| (a - b).abs() <= 1e-13 * (1.0 + a.abs());
        assert!(rel(lemma1_bound(f, &br, &p, &sp, &many), lemma1_bound(f, &br, &p, &sp, &[t])));
        assert!(rel(
            theorem1_bias_bound(&sp, &k, &many, h, u),
            theorem1_bias_bound(&sp, &k, &[t], h, u)
        ));
        assert!(rel(
            exact_kde_expectation(&p, &many, &k, h, u),
            exact_kde_expectation(&p, &[t], &k, h, u)
        ));
        let kb = k.bounds_for(sp.s);
        assert!(rel(
            theorem1_variance_bound(sp.p_max, &kb, 13, h, &many),
            theorem1_variance_bound(sp.p_max, &kb, 13, h, &[t])
        ));
    }
}

#[test]
fn rate_profile_balances_at_optimal_bandwidth() {
    let sp = SmoothnessParams { l: 1.0, alpha: 1.0, p_max: 1.0, s: 2.0 };
    let n = 10_000usize;
    let h = (n as f64).powf(-1.0 / 5.0);
    let r = corollary1_rates(n, &[200], h, &sp);
    assert!((r.smoothing - r.variance.sqrt()).abs() < 1e-12);
    assert!((r.hetero - 200f64.sqrt().recip()).abs() < 1e-15);
    assert!((r.riemann - 1.0 / (h * 200.0)).abs() < 1e-15);
}

#[test]
fn difference_bounds_match_single_density_with_tau_constants() {
    let k = KernelSpec::epanechnikov();
    let tau = TauSmoothness { l: 3.0, l_tau: 2.0, alpha: 1.0, tau_max: 0.7, gamma: 2.0 };
    let trials = [20u64, 35, 50];
    let d = corollary2_bounds(&tau, &k, &trials, 0.2, 0.5, 0.25);
    let sp = SmoothnessParams { l: 2.0, alpha: 1.0, p_max: 0.7, s: 2.0 };
    // single-density bias bound with (L_τ, τ_max) differs only in the smoothing constant
    let smoothing = |l: f64| l * k.bounds_for(2.0).b * 0.2f64.powi(2);
    let t1 = theorem1_bias_bound(&sp, &k, &trials, 0.2, 0.5);
    assert!((d.bias_bound - (t1 - smoothing(2.0) + smoothing(3.0))).abs() < 1e-13);
    let v = theorem1_variance_bound(0.7, &k.bounds_for(2.0), 3, 0.2, &trials) / 0.0625;
    assert!((d.variance_bound - v).abs() < 1e-13);
}

/// With identical groups the difference estimator is unbiased given the
/// labels, so the exact bias is zero and below any bound.
#[test]
fn zero_difference_bias_below_bound() {
    let p = DensitySpec::nonsmooth_example();
    let k = KernelSpec::legendre(2).unwrap();
    let trials1 = [30u64, 40, 50];
    let trials0 = [25u64, 45, 60, 80];
    let e1 = exact_kde_expectation(&p, &trials1, &k, 0.3, 0.5);
    let e0 = exact_kde_expectation(&p, &trials1, &k, 0.3, 0.5);
    let bias = e1 - e0;
    let all: Vec<u64> = trials1.iter().chain(&trials0).copied().collect();
    let tau = TauSmoothness { l: 0.0, l_tau: 0.0, alpha: 1.0, tau_max: 0.0, gamma: 2.0 };
    let d = corollary2_bounds(&tau, &k, &all, 0.3, 0.5, 0.3);
    assert!(bias.abs() <= d.bias_bound);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(std::env::var("ORACLE_CASES").ok().and_then(|v| v.parse().ok()).unwrap_or(48)))]

    #[test]
    fn bounds_dominate_random_configurations(
        di in 0usize..3,
        t in 5u64..300,
        h in 0.08f64..0.4,
        w in 0.0f64..1.0,
    ) {
        // the bias bound needs p smooth on the whole window, so keep it inside [0, 1]
        let u = h + w * (1.0 - 2.0 * h);
        let p = [DensitySpec::uniform(), DensitySpec::beta(2.0, 2.0).unwrap(), DensitySpec::nonsmooth_example()][di].clone();
        let sp = p.grid_constants(1.001);
        let k = KernelSpec::epanechnikov();
        let f = |q: f64| k.scaled(q, u, h);
        let br = kernel_breaks(u, h);
        prop_assert!(bernstein_error_exact(f, &br, &p, t).abs() <= lemma1_bound(f, &br, &p, &sp, &[t]));
        prop_assert!(quasi_riemann_error(f, &br, &p, t) <= proposition3_bound(t, h, &sp, &k.bounds_for(sp.s)));
        // a density jump inside the window gives bias of the order of the jump for every h
        if p.breakpoints().iter().all(|b| (b - u).abs() > h) {
            let bias = exact_kde_expectation(&p, &[t], &k, h, u) - p.pdf(u);
            prop_assert!(bias.abs() <= theorem1_bias_bound(&sp, &k, &[t], h, u));
        }
    }
}
