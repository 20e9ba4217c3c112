//! Gaussian mixture modelling of financial-index log returns.
//!
//! The crate fits univariate Gaussian mixtures to log daily differences of
//! closing prices by expectation-maximization, scores the fit with the
//! one-sample Kolmogorov-Smirnov statistic, and produces the table and
//! plot data a report needs:
//!
//! - [`mixture`]: mixture densities, CDFs, log-likelihood, posterior
//!   responsibilities, model JSON (de)serialization.
//! - [`em`]: quantile initialization, E/M steps, the log-likelihood
//!   decomposition identity, the stop rule, multi-restart [`em::fit`].
//! - [`ks`]: empirical CDF, exact KS sup-distance, asymptotic p-value.
//! - [`returns`]: price CSV ingestion, period slicing, log returns.
//! - [`sample`]: seeded mixture sampling and synthetic price paths.
//! - [`plot`]: histogram and density-curve grids for charts.
//!
//! All operations are pure functions of immutable inputs and are safe to
//! call concurrently. Fitting is deterministic: a sample, a configuration,
//! and a seed reproduce the result bit for bit.

pub mod em;
mod error;
pub mod ks;
mod math;
pub mod mixture;
pub mod plot;
pub mod returns;
pub mod sample;

pub use em::{fit, FitConfig, FitResult};
pub use error::{Error, Result};
pub use ks::{ks_pvalue, ks_statistic, ks_test, EmpiricalCdf, KsResult};
pub use math::{kahan_sum, logsumexp, mean, population_std, quantile_sorted, standard_normal_cdf};
pub use mixture::{
    gaussian_cdf, gaussian_pdf, GaussianComponent, MixtureModel, ResponsibilityMatrix,
};
pub use plot::PlotData;
pub use returns::{load_prices, PriceSeries, ReturnSample};
