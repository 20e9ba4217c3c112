//! Kolmogorov-Smirnov goodness-of-fit: empirical CDF, the exact
//! sup-distance of a continuous model CDF from the sample, and the
//! asymptotic p-value.
//!
//! The p-value is the plain one-sample asymptotic value with the standard
//! small-sample lambda correction. When the model was fitted to the same
//! data the true null distribution differs, so treat the p-value as a
//! comparative diagnostic rather than a calibrated test level.

use crate::error::{Error, Result};
use crate::math::sorted_copy;
use crate::mixture::MixtureModel;
use crate::returns::ReturnSample;

/// Terms of the Kolmogorov series smaller than this are dropped.
const SERIES_TERM_FLOOR: f64 = 1e-12;

/// Below this lambda the Kolmogorov tail sum is 1 to far beyond double
/// precision; short-circuiting also avoids summing thousands of terms.
const LAMBDA_FLOOR: f64 = 1e-3;

/// A Kolmogorov-Smirnov evaluation of a model against a sample.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Right-continuous empirical distribution function of a sample:
/// F(x) = (number of observations <= x) / n. Tied observations merge into
/// a single taller step.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(sample: &ReturnSample) -> Self {
        EmpiricalCdf {
            sorted: sorted_copy(sample.values()),
        }
    }

    /// Builds directly from raw values; empty or non-finite input is
    /// rejected.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteReturn {
                index,
                value: values[index],
            });
        }
        Ok(EmpiricalCdf {
            sorted: sorted_copy(values),
        })
    }

    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    /// F(x), the fraction of observations at or below `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let count = self.sorted.partition_point(|&v| v <= x);
        count as f64 / self.sorted.len() as f64
    }

    /// The step points of the function: distinct observation values paired
    /// with the cumulative height reached at each.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        let n = self.sorted.len() as f64;
        let mut steps: Vec<(f64, f64)> = Vec::new();
        for (i, &x) in self.sorted.iter().enumerate() {
            let height = (i + 1) as f64 / n;
            match steps.last_mut() {
                Some(last) if last.0 == x => last.1 = height,
                _ => steps.push((x, height)),
            }
        }
        steps
    }
}

/// The exact sup-distance between the model CDF and the empirical CDF:
/// over the sorted sample, the larger of the gaps to the step heights on
/// either side of each observation.
pub fn ks_statistic(model: &MixtureModel, sample: &ReturnSample) -> f64 {
    let sorted = sorted_copy(sample.values());
    let n = sorted.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = model.cdf(x);
        let above = ((i + 1) as f64 / n - f).abs();
        let below = (f - i as f64 / n).abs();
        sup = sup.max(above.max(below));
    }
    sup
}

/// Asymptotic p-value of a one-sample KS statistic: the Kolmogorov tail
/// sum Q(lambda) = 2 * sum_{j>=1} (-1)^(j-1) exp(-2 j^2 lambda^2) at
/// lambda = (sqrt(n) + 0.12 + 0.11/sqrt(n)) * statistic, clamped to [0, 1].
pub fn ks_pvalue(statistic: f64, n: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&statistic) {
        return Err(Error::StatisticOutOfRange(statistic));
    }
    if n == 0 {
        return Err(Error::ZeroSampleSize);
    }
    let sqrt_n = (n as f64).sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * statistic;
    Ok(kolmogorov_tail(lambda))
}

/// Q(lambda), the asymptotic probability that the scaled statistic
/// exceeds `lambda`.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < LAMBDA_FLOOR {
        return 1.0;
    }
    let neg_two_lambda_sq = -2.0 * lambda * lambda;
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100_000u64 {
        let j = j as f64;
        let term = sign * 2.0 * (neg_two_lambda_sq * j * j).exp();
        sum += term;
        if term.abs() < SERIES_TERM_FLOOR {
            break;
        }
        sign = -sign;
    }
    sum.clamp(0.0, 1.0)
}

/// Statistic and p-value of `model` against `sample` in one call.
pub fn ks_test(model: &MixtureModel, sample: &ReturnSample) -> KsResult {
    let statistic = ks_statistic(model, sample);
    let n = sample.n();
    let p_value = ks_pvalue(statistic, n).expect("statistic is in range by construction");
    KsResult {
        statistic,
        p_value,
        n,
    }
}
