//! Kernel density estimation of binomial mixing densities from empirical
//! proportions `X_i / t_i` with heterogeneous trial counts.
//!
//! The crate covers the point estimator and its undersmoothed confidence
//! intervals ([`estimator`]), Lepski-type bandwidth selection with
//! multiplier-bootstrap critical values ([`lepski`]), two-group density
//! differences tuned by joint cross-validation ([`densdiff`]), exact
//! Bernstein-error oracles with the matching error bounds ([`oracle`]) and
//! the simulation drivers ([`simlab`]).
//!
//! ```
//! use binmix::{kde_at, BinomialSample, KernelSpec};
//!
//! let sample = BinomialSample::from_counts(&[3, 5, 9, 4], &[10, 12, 20, 8]).unwrap();
//! let k = KernelSpec::epanechnikov();
//! let p = kde_at(&sample, &k, 0.3, 0.4).unwrap();
//! assert!(p > 0.0);
//! ```

pub mod densdiff;
pub mod error;
pub mod estimator;
mod exec;
pub mod kernel_sum;
pub mod kernels;
pub mod lepski;
pub mod numeric;
pub mod oracle;
pub mod rng;
pub mod sample;
pub mod simlab;

pub use densdiff::{
    joint_pseudo_risk, select_tuning_joint, select_tuning_separate, tuning_grid, JointSelection,
    SeparateSelection, TuningPair,
};
pub use error::{Error, Result};
pub use estimator::{confidence_interval, kde_at, kde_grid, variance_estimate, EstimateResult};
pub use kernels::{KernelBounds, KernelFamily, KernelSpec};
pub use lepski::{lepski_select, BandwidthGrid, LepskiConfig, LepskiSelection};
pub use oracle::{DensitySpec, SmoothnessParams};
pub use sample::{BinomialSample, ProportionMode, Record, TwoGroupSample};
