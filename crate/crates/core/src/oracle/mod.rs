//! Exact oracles and bound formulas for verifying the estimators.

pub mod bernstein;
pub mod bounds;
pub mod density;

pub use bernstein::{
    bernstein_error_exact, exact_kde_expectation, exact_kde_variance, exact_mixture_pmf,
    quasi_riemann_error,
};
pub use bounds::{
    corollary1_rates, corollary2_bounds, g_factor, lemma1_bound, lemma1_bound_analytic,
    lemma1_bound_kernel, proposition3_bound, theorem1_bias_bound, theorem1_variance_bound,
    DiffBounds, RateProfile, TauSmoothness,
};
pub use density::{DensityForm, DensitySpec, PiecewisePolynomial, SmoothnessParams};
