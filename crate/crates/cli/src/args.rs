use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{CliError, CliResult};
use crate::output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "binmix",
    version,
    about = "Kernel density estimation for binomial mixing densities"
)]
pub struct Cli {
    /// Worker threads for the parallel sections (not recorded in outputs).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Point estimates of the mixing density on a grid.
    Estimate(EstimateArgs),
    /// Estimates with standard errors and normal confidence intervals.
    Ci(CiArgs),
    /// Lepski bandwidth selection at one point (JSON trace by default).
    Lepski(LepskiArgs),
    /// Two-group density difference, optionally tuned by cross-validation.
    Diff(DiffArgs),
    /// Heterogeneous versus clipped trials simulation.
    Sim1(Sim1Args),
    /// Joint versus separate tuning simulation.
    Sim2(Sim2Args),
    /// Confidence interval coverage simulation.
    Coverage(CoverageArgs),
    /// Exact Bernstein errors against the error bounds.
    BernsteinCheck(BernsteinArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelChoice {
    Epanechnikov,
    Legendre,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Tune {
    Joint,
    Separate,
    None,
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    #[arg(long, value_enum, default_value = "epanechnikov")]
    pub kernel: KernelChoice,
    /// Order of the Legendre kernel (2, 4, 6 or 8).
    #[arg(long)]
    pub kernel_order: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Evaluation grid, `a:b:step` or a comma list.
    #[arg(long)]
    pub grid: Option<String>,
    /// Single evaluation point; may be repeated.
    #[arg(long)]
    pub point: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long)]
    pub h: f64,
    #[command(flatten)]
    pub eval: EvalArgs,
    /// Replace negative estimates by zero.
    #[arg(long)]
    pub clamp_nonneg: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CiArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long)]
    pub h: f64,
    #[command(flatten)]
    pub eval: EvalArgs,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct LepskiArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Candidate bandwidths, `a:b:step` or a comma list.
    #[arg(long)]
    pub grid_h: String,
    #[arg(long, default_value_t = 0.5)]
    pub point: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1000)]
    pub boot_reps: usize,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DiffArgs {
    /// CSV with `successes`, `trials` and `group` (1 is the minuend).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "joint")]
    pub tune: Tune,
    /// Bandwidth when `--tune none`.
    #[arg(long)]
    pub h: Option<f64>,
    /// Legendre kernel order when `--tune none`.
    #[arg(long)]
    pub kernel_order: Option<usize>,
    #[arg(long, default_value = "0.2:2:0.1")]
    pub grid_h: String,
    #[arg(long, default_value = "2,4,6,8")]
    pub grid_order: String,
    #[command(flatten)]
    pub eval: EvalArgs,
    /// Positivity bound on the group share.
    #[arg(long, default_value_t = binmix::sample::DEFAULT_POSITIVITY_EPS)]
    pub eps: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct Sim1Args {
    /// TOML file with any of the flag names as keys; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Target harmonic means, `a:b:step` or a comma list.
    #[arg(long)]
    pub targets: Option<String>,
    #[arg(long)]
    pub replications: Option<usize>,
    /// Bandwidth; `n^(-1/5)` when absent.
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub point: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct Sim2Args {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n_list: Option<String>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub grid_h: Option<String>,
    #[arg(long)]
    pub grid_order: Option<String>,
    #[arg(long)]
    pub point: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CoverageArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub t: Option<u64>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BernsteinArgs {
    /// `uniform`, `nonsmooth` or `beta:a,b`.
    #[arg(long, default_value = "beta:2,2")]
    pub density: String,
    #[arg(long, default_value = "10,25,50,100,250")]
    pub t_grid: String,
    #[arg(long, default_value = "0.1,0.15,0.2,0.3")]
    pub h_grid: String,
    #[arg(long, default_value = "0.3,0.5,0.7")]
    pub u_grid: String,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Inflation applied to the grid-computed density constants.
    #[arg(long, default_value_t = 1.001)]
    pub safety: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// `a:b:step` (inclusive, rounded to 12 decimals) or a comma list.
pub fn parse_real_grid(text: &str, name: &str) -> CliResult<Vec<f64>> {
    let text = text.trim();
    let bad = |why: String| CliError::Usage(format!("invalid --{name} `{text}`: {why}"));
    let values = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected a:b:step".into()));
        }
        let nums = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|e| bad(e.to_string())))
            .collect::<CliResult<Vec<f64>>>()?;
        let (a, b, step) = (nums[0], nums[1], nums[2]);
        if !(step > 0.0 && step.is_finite() && a.is_finite() && b.is_finite()) || b < a {
            return Err(bad("need a ≤ b and a positive step".into()));
        }
        let count = ((b - a) / step + 1e-9).floor() as usize + 1;
        if count > 1_000_000 {
            return Err(bad("grid too large".into()));
        }
        (0..count)
            .map(|i| ((a + i as f64 * step) * 1e12).round() / 1e12)
            .collect()
    } else {
        text.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| bad(e.to_string())))
            .collect::<CliResult<Vec<f64>>>()?
    };
    if values.is_empty() {
        return Err(bad("empty grid".into()));
    }
    Ok(values)
}

/// Comma list (or `a:b:step`) of positive integers.
pub fn parse_int_grid<T: TryFrom<u64>>(text: &str, name: &str) -> CliResult<Vec<T>> {
    let bad = || CliError::Usage(format!("invalid --{name} `{text}`: expected integers"));
    parse_real_grid(text, name)?
        .into_iter()
        .map(|v| {
            if v.fract() != 0.0 || v < 0.0 {
                return Err(bad());
            }
            T::try_from(v as u64).map_err(|_| bad())
        })
        .collect()
}
