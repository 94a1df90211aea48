//! Precision analysis for interlaboratory studies under the one-way
//! random-effects model.
//!
//! The crate covers the whole pipeline used to evaluate repeatability,
//! between-laboratory and reproducibility variances from a balanced
//! `k × n` study:
//!
//! - [`model`]: ANOVA sums of squares, unbiased variance-component
//!   estimators and their analytic standard errors.
//! - [`dist`]: normal, chi-square and F quantiles built on the regularized
//!   incomplete gamma and beta functions.
//! - [`rng`]: deterministic, splittable random streams.
//! - [`resampling`]: the five bootstrap schemes, bias-corrected and
//!   adjusted estimators.
//! - [`intervals`]: chi-square, Moriguchi and Satterthwaite intervals plus
//!   normal, percentile and BCa bootstrap intervals.
//! - [`simulation`]: Monte Carlo harness reporting bias, SE and coverage.
//! - [`analysis`]: the complete case-study workflow for one dataset.
//! - [`io`] and [`report`]: CSV ingestion and table rendering used by the
//!   `interlab` binary.

pub mod analysis;
pub mod dist;
pub mod error;
pub mod intervals;
pub mod io;
pub mod model;
pub mod report;
pub mod resampling;
pub mod rng;
pub mod simulation;

pub use error::{DataError, Error, Result};
pub use intervals::{BootMethod, Interval, IntervalFlag, IntervalMethod};
pub use model::{
    anova_estimates, anova_standard_errors, compute_sums, AnovaStandardErrors, AnovaSums,
    Component, Dataset, PerComponent, SeTriple, VarianceComponents,
};
pub use resampling::{run_bootstrap, BootstrapDistribution, Flavor, Scheme};
pub use rng::SeedSpec;
