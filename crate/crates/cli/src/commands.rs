use std::path::Path;

use binmix::densdiff::{select_tuning_joint, select_tuning_separate, tuning_grid};
use binmix::lepski::{lepski_select, BandwidthGrid, LepskiConfig};
use binmix::oracle::bernstein::kernel_breaks;
use binmix::oracle::{
    bernstein_error_exact, exact_kde_expectation, lemma1_bound, proposition3_bound,
    quasi_riemann_error, theorem1_bias_bound, DensitySpec,
};
use binmix::simlab::{
    run_coverage, run_sim1, run_sim2, CoverageConfig, Sim1Config, Sim2Config,
};
use binmix::{
    confidence_interval, kde_grid, BinomialSample, KernelFamily, KernelSpec, TwoGroupSample,
};
use serde_json::json;

use crate::args::*;
use crate::config::{self, ListValue};
use crate::error::{CliError, CliResult};
use crate::input::{parse_input, InputSummary};
use crate::output::{emit, json_document, num, Format, Meta, Table};

/// Everything a command needs besides its own flags.
pub struct Context {
    pub args: Vec<String>,
    pub quiet: bool,
}

impl Context {
    fn diag(&self, line: &str) {
        if !self.quiet {
            eprintln!("{line}");
        }
    }

    fn load(&self, path: &Path) -> CliResult<BinomialSample> {
        let s = parse_input(path)?;
        self.diag(&InputSummary::of(&s).line());
        Ok(s)
    }
}

fn kernel(k: &KernelArgs) -> CliResult<KernelSpec> {
    let spec = match (k.kernel, k.kernel_order) {
        (KernelChoice::Epanechnikov, None) => KernelSpec::epanechnikov(),
        (KernelChoice::Epanechnikov, Some(o)) => {
            KernelSpec::from_choice(KernelFamily::Epanechnikov, o)?
        }
        (KernelChoice::Legendre, o) => KernelSpec::legendre(o.unwrap_or(2))?,
    };
    Ok(spec)
}

fn eval_points(e: &EvalArgs) -> CliResult<Vec<f64>> {
    let mut pts = match &e.grid {
        Some(g) => parse_real_grid(g, "grid")?,
        None => Vec::new(),
    };
    pts.extend_from_slice(&e.point);
    if pts.is_empty() {
        pts = parse_real_grid("0.05:0.95:0.05", "grid")?;
    }
    if let Some(u) = pts.iter().find(|u| !(**u > 0.0 && **u < 1.0)) {
        return Err(CliError::Usage(format!(
            "evaluation point {u} is outside (0, 1)"
        )));
    }
    Ok(pts)
}

fn check_h(h: f64) -> CliResult<()> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--h must be positive, got {h}")))
    }
}

fn check_alpha(alpha: f64) -> CliResult<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--alpha must lie in (0, 1), got {alpha}")))
    }
}

fn render(
    table: &Table,
    meta: &Meta,
    format: Format,
    extra: Option<serde_json::Value>,
) -> CliResult<String> {
    match format {
        Format::Csv => table.to_csv(meta),
        Format::Json => {
            let mut body = extra.unwrap_or_else(|| json!({}));
            body["rows"] = table.to_json_rows();
            json_document(meta, body)
        }
    }
}

fn finish(content: String, out: &OutputArgs) -> CliResult<()> {
    emit(&content, out.out.as_deref())
}

pub fn estimate(ctx: &Context, a: &EstimateArgs) -> CliResult<()> {
    check_h(a.h)?;
    let k = kernel(&a.kernel)?;
    let pts = eval_points(&a.eval)?;
    let sample = ctx.load(&a.input)?;
    let values = kde_grid(&sample, &k, a.h, &pts, a.clamp_nonneg)?;
    let mut t = Table::new(vec!["u", "estimate"]);
    for (u, v) in pts.iter().zip(values) {
        t.push(vec![num(*u), num(v)]);
    }
    let meta = Meta::new("estimate", ctx.args.clone(), None);
    finish(render(&t, &meta, a.output.format.unwrap_or(Format::Csv), None)?, &a.output)
}

pub fn ci(ctx: &Context, a: &CiArgs) -> CliResult<()> {
    check_h(a.h)?;
    check_alpha(a.alpha)?;
    let k = kernel(&a.kernel)?;
    let pts = eval_points(&a.eval)?;
    let sample = ctx.load(&a.input)?;
    let mut t = Table::new(vec!["u", "estimate", "se", "ci_lo", "ci_hi"]);
    for &u in &pts {
        let r = confidence_interval(&sample, &k, a.h, u, a.alpha)?;
        t.push(vec![num(u), num(r.estimate), num(r.se), num(r.ci_lo), num(r.ci_hi)]);
    }
    let meta = Meta::new("ci", ctx.args.clone(), None);
    finish(render(&t, &meta, a.output.format.unwrap_or(Format::Csv), None)?, &a.output)
}

pub fn lepski(ctx: &Context, a: &LepskiArgs) -> CliResult<()> {
    check_alpha(a.alpha)?;
    let k = kernel(&a.kernel)?;
    let grid = BandwidthGrid::new(parse_real_grid(&a.grid_h, "grid-h")?)?;
    let cfg = LepskiConfig {
        alpha: a.alpha,
        bootstrap_reps: a.boot_reps,
        seed: a.seed,
        u: a.point,
    };
    let sample = ctx.load(&a.input)?;
    let sel = lepski_select(&sample, &k, &grid, &cfg)?;
    let mut t = Table::new(vec!["h", "estimate", "statistic", "critical", "rejected", "selected"]);
    for (j, s) in sel.trace.iter().enumerate() {
        t.push(vec![
            num(s.h),
            num(s.estimate),
            num(s.statistic),
            s.critical.map_or(String::new(), num),
            s.rejected.to_string(),
            (j == sel.index).to_string(),
        ]);
    }
    let meta = Meta::new("lepski", ctx.args.clone(), Some(a.seed));
    let extra = json!({
        "u": a.point,
        "alpha": a.alpha,
        "bootstrap_reps": a.boot_reps,
        "selected_h": sel.h,
        "selected_index": sel.index,
        "fallback": sel.fallback,
    });
    let content = match a.output.format.unwrap_or(Format::Json) {
        Format::Csv => t.to_csv(&meta)?,
        Format::Json => {
            let mut body = extra;
            body["trace"] = t.to_json_rows();
            json_document(&meta, body)?
        }
    };
    finish(content, &a.output)
}

pub fn diff(ctx: &Context, a: &DiffArgs) -> CliResult<()> {
    let pts = eval_points(&a.eval)?;
    let (estimates, selection) = match a.tune {
        Tune::None => {
            let h = a
                .h
                .ok_or_else(|| CliError::Usage("--tune none requires --h".into()))?;
            check_h(h)?;
            let k = KernelSpec::legendre(a.kernel_order.unwrap_or(2))?;
            let sample = TwoGroupSample::from_binomial(&ctx.load(&a.input)?, a.eps)?;
            let est = pts
                .iter()
                .map(|&u| binmix::densdiff::diff_kde_binomial(&sample, &k, h, u))
                .collect::<binmix::Result<Vec<f64>>>()?;
            (est, json!({"h": h, "order": k.order()}))
        }
        tune => {
            let seed = a
                .seed
                .ok_or_else(|| CliError::Usage("tuning requires --seed".into()))?;
            let hs = parse_real_grid(&a.grid_h, "grid-h")?;
            let orders = parse_int_grid::<usize>(&a.grid_order, "grid-order")?;
            let grid = tuning_grid(&hs, &orders);
            let sample = TwoGroupSample::from_binomial(&ctx.load(&a.input)?, a.eps)?;
            if tune == Tune::Joint {
                let sel = select_tuning_joint(&sample, &grid, seed)?;
                let est = pts
                    .iter()
                    .map(|&u| sel.estimate(u))
                    .collect::<binmix::Result<Vec<f64>>>()?;
                let risks: Vec<_> = grid
                    .iter()
                    .zip(&sel.risks)
                    .map(|(p, r)| json!({"h": p.h, "order": p.order, "risk": r.risk}))
                    .collect();
                (
                    est,
                    json!({"h": sel.pair.h, "order": sel.pair.order, "split_attempt": sel.split.attempt, "risks": risks}),
                )
            } else {
                let sel = select_tuning_separate(&sample, &grid, seed)?;
                let est = pts
                    .iter()
                    .map(|&u| sel.estimate(u))
                    .collect::<binmix::Result<Vec<f64>>>()?;
                (
                    est,
                    json!({
                        "group1": {"h": sel.group1.h, "order": sel.group1.order},
                        "group0": {"h": sel.group0.h, "order": sel.group0.order},
                        "split_attempt": sel.split.attempt,
                    }),
                )
            }
        }
    };
    let mut t = Table::new(vec!["u", "tau_hat"]);
    for (u, v) in pts.iter().zip(&estimates) {
        t.push(vec![num(*u), num(*v)]);
    }
    let meta = Meta::new("diff", ctx.args.clone(), a.seed);
    let tune = format!("{:?}", a.tune).to_lowercase();
    let extra = json!({"tune": tune, "selection": selection});
    finish(
        render(&t, &meta, a.output.format.unwrap_or(Format::Csv), Some(extra))?,
        &a.output,
    )
}

fn list_f64(flag: &Option<String>, file: Option<ListValue<f64>>, name: &str) -> CliResult<Option<Vec<f64>>> {
    if let Some(s) = flag {
        return parse_real_grid(s, name).map(Some);
    }
    match file {
        Some(ListValue::Items(v)) => Ok(Some(v)),
        Some(ListValue::Text(s)) => parse_real_grid(&s, name).map(Some),
        None => Ok(None),
    }
}

fn list_usize(flag: &Option<String>, file: Option<ListValue<usize>>, name: &str) -> CliResult<Option<Vec<usize>>> {
    if let Some(s) = flag {
        return parse_int_grid(s, name).map(Some);
    }
    match file {
        Some(ListValue::Items(v)) => Ok(Some(v)),
        Some(ListValue::Text(s)) => parse_int_grid(&s, name).map(Some),
        None => Ok(None),
    }
}

fn require_seed(flag: Option<u64>, file: Option<u64>) -> CliResult<u64> {
    flag.or(file)
        .ok_or_else(|| CliError::Usage("this command is stochastic and requires --seed".into()))
}

pub fn sim1(ctx: &Context, a: &Sim1Args) -> CliResult<()> {
    let f: config::Sim1File = config::load(a.config.as_deref())?;
    let seed = require_seed(a.seed, f.seed)?;
    let targets = list_f64(&a.targets, f.targets, "targets")?
        .unwrap_or_else(|| (6..=20).map(|i| 5.0 * i as f64).collect());
    let cfg = Sim1Config {
        n: a.n.or(f.n).unwrap_or(200),
        targets,
        replications: a.replications.or(f.replications).unwrap_or(200),
        h: a.h.or(f.h),
        seed,
        u: a.point.or(f.point).unwrap_or(0.5),
    };
    cfg.validate()?;
    let rows = run_sim1(&cfg)?;
    let mut t = Table::new(vec!["t_tilde", "estimator", "bias", "se"]);
    for r in rows {
        t.push(vec![num(r.t_tilde), r.estimator, num(r.bias), num(r.se)]);
    }
    let meta = Meta::new("sim1", ctx.args.clone(), Some(seed));
    let extra = json!({"n": cfg.n, "h": cfg.bandwidth(), "replications": cfg.replications, "u": cfg.u});
    finish(
        render(&t, &meta, a.output.format.unwrap_or(Format::Csv), Some(extra))?,
        &a.output,
    )
}

pub fn sim2(ctx: &Context, a: &Sim2Args) -> CliResult<()> {
    let f: config::Sim2File = config::load(a.config.as_deref())?;
    let seed = require_seed(a.seed, f.seed)?;
    let mut cfg = Sim2Config::new(
        list_usize(&a.n_list, f.n_list, "n-list")?.unwrap_or_else(|| vec![500, 1000, 2000]),
        a.replications.or(f.replications).unwrap_or(100),
        seed,
    );
    if let Some(h) = list_f64(&a.grid_h, f.grid_h, "grid-h")? {
        cfg.h_grid = h;
    }
    if let Some(o) = list_usize(&a.grid_order, f.grid_order, "grid-order")? {
        cfg.order_grid = o;
    }
    cfg.u = a.point.or(f.point).unwrap_or(cfg.u);
    cfg.eps = a.eps.or(f.eps).unwrap_or(cfg.eps);
    cfg.validate()?;
    let rows = run_sim2(&cfg)?;
    let mut t = Table::new(vec!["n", "method", "bias", "se"]);
    for r in rows {
        t.push(vec![r.n.to_string(), r.method, num(r.bias), num(r.se)]);
    }
    let meta = Meta::new("sim2", ctx.args.clone(), Some(seed));
    let extra = json!({"replications": cfg.replications, "u": cfg.u});
    finish(
        render(&t, &meta, a.output.format.unwrap_or(Format::Csv), Some(extra))?,
        &a.output,
    )
}

pub fn coverage(ctx: &Context, a: &CoverageArgs) -> CliResult<()> {
    let f: config::CoverageFile = config::load(a.config.as_deref())?;
    let seed = require_seed(a.seed, f.seed)?;
    let cfg = CoverageConfig {
        n: a.n.or(f.n).unwrap_or(300),
        t: a.t.or(f.t).unwrap_or(3000),
        h: a.h.or(f.h).unwrap_or(0.08),
        replications: a.replications.or(f.replications).unwrap_or(500),
        seed,
        alpha: a.alpha.or(f.alpha).unwrap_or(0.05),
    };
    let r = run_coverage(&cfg)?;
    let mut t = Table::new(vec!["n", "t", "h", "coverage"]);
    t.push(vec![r.n.to_string(), r.t.to_string(), num(r.h), num(r.coverage)]);
    let meta = Meta::new("coverage", ctx.args.clone(), Some(seed));
    let extra = json!({"replications": cfg.replications, "alpha": cfg.alpha});
    finish(
        render(&t, &meta, a.output.format.unwrap_or(Format::Csv), Some(extra))?,
        &a.output,
    )
}

/// One configuration of the bound check.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub t: u64,
    pub h: f64,
    pub u: f64,
    pub exact_error: f64,
    pub bound: f64,
    pub riemann_error: f64,
    pub riemann_bound: f64,
    pub bias_error: f64,
    pub bias_bound: f64,
}

impl BoundRow {
    pub fn pass(&self) -> bool {
        self.exact_error <= self.bound
            && self.riemann_error <= self.riemann_bound
            && self.bias_error <= self.bias_bound
    }
}

/// Exact errors and bounds at homogeneous trials `t` with constants from
/// the density's grid with the given safety factor.
pub fn bound_rows(
    p: &DensitySpec,
    k: &KernelSpec,
    ts: &[u64],
    hs: &[f64],
    us: &[f64],
    safety: f64,
) -> Vec<BoundRow> {
    let sp = p.grid_constants(safety);
    let kb = k.bounds_for(sp.s);
    let mut rows = Vec::new();
    for &t in ts {
        for &h in hs {
            for &u in us {
                let f = |q: f64| k.scaled(q, u, h);
                let br = kernel_breaks(u, h);
                rows.push(BoundRow {
                    t,
                    h,
                    u,
                    exact_error: bernstein_error_exact(f, &br, p, t).abs(),
                    bound: lemma1_bound(f, &br, p, &sp, &[t]),
                    riemann_error: quasi_riemann_error(f, &br, p, t),
                    riemann_bound: proposition3_bound(t, h, &sp, &kb),
                    bias_error: (exact_kde_expectation(p, &[t], k, h, u) - p.pdf(u)).abs(),
                    bias_bound: theorem1_bias_bound(&sp, k, &[t], h, u),
                });
            }
        }
    }
    rows
}

pub fn bernstein_check(ctx: &Context, a: &BernsteinArgs) -> CliResult<()> {
    let p = DensitySpec::parse(&a.density)?;
    let k = kernel(&a.kernel)?;
    let ts = parse_int_grid::<u64>(&a.t_grid, "t-grid")?;
    if ts.contains(&0) {
        return Err(CliError::Usage("--t-grid values must be at least 1".into()));
    }
    let hs = parse_real_grid(&a.h_grid, "h-grid")?;
    for &h in &hs {
        check_h(h)?;
    }
    let us = parse_real_grid(&a.u_grid, "u-grid")?;
    if let Some(u) = us.iter().find(|u| !(**u > 0.0 && **u < 1.0)) {
        return Err(CliError::Usage(format!("--u-grid value {u} is outside (0, 1)")));
    }
    if !(a.safety >= 1.0 && a.safety.is_finite()) {
        return Err(CliError::Usage("--safety must be at least 1".into()));
    }
    let rows = bound_rows(&p, &k, &ts, &hs, &us, a.safety);
    let mut t = Table::new(vec![
        "density",
        "t",
        "h",
        "u",
        "exact_error",
        "bound",
        "ratio",
        "riemann_error",
        "riemann_bound",
        "bias_error",
        "bias_bound",
        "pass",
    ]);
    let failures = rows.iter().filter(|r| !r.pass()).count();
    for r in &rows {
        t.push(vec![
            p.name.clone(),
            r.t.to_string(),
            num(r.h),
            num(r.u),
            num(r.exact_error),
            num(r.bound),
            num(r.exact_error / r.bound),
            num(r.riemann_error),
            num(r.riemann_bound),
            num(r.bias_error),
            num(r.bias_bound),
            r.pass().to_string(),
        ]);
    }
    ctx.diag(&format!("# configurations={} failures={failures}", rows.len()));
    let meta = Meta::new("bernstein-check", ctx.args.clone(), None);
    let sp = p.grid_constants(a.safety);
    let extra = json!({"constants": {"l": sp.l, "alpha": sp.alpha, "p_max": sp.p_max, "s": sp.s}});
    finish(
        render(&t, &meta, a.output.format.unwrap_or(Format::Csv), Some(extra))?,
        &a.output,
    )
}
