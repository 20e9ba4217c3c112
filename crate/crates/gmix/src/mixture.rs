//! Gaussian mixture densities, CDFs, log-likelihood, and posterior
//! responsibilities.
//!
//! Everything here is a pure function of immutable inputs; all likelihood
//! work happens in log space with a max shift so that observations far from
//! every component still produce well-defined responsibilities.

use crate::error::{Error, Result};
use crate::math::{kahan_sum, standard_normal_cdf, LN_SQRT_TWO_PI};
use crate::returns::ReturnSample;
use serde::{Deserialize, Serialize};

/// Weight sums within this distance of 1 are silently renormalized;
/// anything farther is rejected. The window is wide enough to accept
/// weights rounded to three decimals, whose sum can stray to 0.999-1.001.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-2;

/// Density of the normal distribution with the given mean and standard
/// deviation, evaluated at `x`.
pub fn gaussian_pdf(x: f64, mean: f64, std: f64) -> Result<f64> {
    if !std.is_finite() || std <= 0.0 {
        return Err(Error::NonPositiveStd(std));
    }
    Ok(gaussian_pdf_raw(x, mean, std))
}

/// Cumulative distribution of the normal law with the given mean and
/// standard deviation, evaluated at `x`.
pub fn gaussian_cdf(x: f64, mean: f64, std: f64) -> Result<f64> {
    if !std.is_finite() || std <= 0.0 {
        return Err(Error::NonPositiveStd(std));
    }
    Ok(standard_normal_cdf((x - mean) / std))
}

#[inline]
fn gaussian_pdf_raw(x: f64, mean: f64, std: f64) -> f64 {
    let z = (x - mean) / std;
    (-0.5 * z * z).exp() / (std * (2.0 * std::f64::consts::PI).sqrt())
}

#[inline]
fn gaussian_ln_pdf_raw(x: f64, mean: f64, std: f64) -> f64 {
    let z = (x - mean) / std;
    -0.5 * z * z - std.ln() - LN_SQRT_TWO_PI
}

/// One mixture component: a weight together with the mean and standard
/// deviation of its Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawComponent", into = "RawComponent")]
pub struct GaussianComponent {
    weight: f64,
    mean: f64,
    std: f64,
}

/// Serialization shape of a component; field names are the on-disk schema.
#[derive(Serialize, Deserialize)]
struct RawComponent {
    weight: f64,
    mean: f64,
    std: f64,
}

impl From<GaussianComponent> for RawComponent {
    fn from(c: GaussianComponent) -> Self {
        RawComponent {
            weight: c.weight,
            mean: c.mean,
            std: c.std,
        }
    }
}

impl TryFrom<RawComponent> for GaussianComponent {
    type Error = Error;

    fn try_from(raw: RawComponent) -> Result<Self> {
        GaussianComponent::new(raw.weight, raw.mean, raw.std)
    }
}

impl GaussianComponent {
    pub fn new(weight: f64, mean: f64, std: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::WeightOutOfRange(weight));
        }
        if !mean.is_finite() {
            return Err(Error::NonFiniteMean(mean));
        }
        if !std.is_finite() || std <= 0.0 {
            return Err(Error::NonPositiveStd(std));
        }
        Ok(GaussianComponent { weight, mean, std })
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn std(&self) -> f64 {
        self.std
    }

    /// Unweighted density of this component at `x`.
    pub fn pdf(&self, x: f64) -> f64 {
        gaussian_pdf_raw(x, self.mean, self.std)
    }

    /// Unweighted log-density of this component at `x`.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        gaussian_ln_pdf_raw(x, self.mean, self.std)
    }

    /// Unweighted CDF of this component at `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        standard_normal_cdf((x - self.mean) / self.std)
    }

    fn with_weight(self, weight: f64) -> Self {
        GaussianComponent { weight, ..self }
    }
}

/// A convex combination of Gaussian components.
///
/// Construction renormalizes weights whose sum is within
/// [`WEIGHT_SUM_TOLERANCE`] of 1 and rejects anything farther off, so a
/// valid model always carries weights summing to 1 up to float rounding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct MixtureModel {
    components: Vec<GaussianComponent>,
}

/// Serialization shape of a model: `{"components": [...]}`.
#[derive(Serialize, Deserialize)]
struct RawModel {
    components: Vec<GaussianComponent>,
}

impl From<MixtureModel> for RawModel {
    fn from(m: MixtureModel) -> Self {
        RawModel {
            components: m.components,
        }
    }
}

impl TryFrom<RawModel> for MixtureModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        MixtureModel::new(raw.components)
    }
}

impl MixtureModel {
    pub fn new(components: Vec<GaussianComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::NoComponents);
        }
        let sum = kahan_sum(components.iter().map(|c| c.weight));
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::WeightSumOutOfRange {
                sum,
                tolerance: WEIGHT_SUM_TOLERANCE,
            });
        }
        // Dividing by a sum already equal to 1 at float precision would
        // only inject one-ulp noise and break round trips, so skip it.
        let components = if (sum - 1.0).abs() <= 1e-12 {
            components
        } else {
            components
                .into_iter()
                .map(|c| c.with_weight(c.weight / sum))
                .collect()
        };
        Ok(MixtureModel { components })
    }

    /// Convenience constructor from `(weight, mean, std)` triples.
    pub fn from_triples(triples: &[(f64, f64, f64)]) -> Result<Self> {
        let components = triples
            .iter()
            .map(|&(w, m, s)| GaussianComponent::new(w, m, s))
            .collect::<Result<Vec<_>>>()?;
        MixtureModel::new(components)
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    /// Number of components, the `k` of the mixture.
    pub fn k(&self) -> usize {
        self.components.len()
    }

    /// Mixture density at `x`.
    pub fn pdf(&self, x: f64) -> f64 {
        self.components.iter().map(|c| c.weight * c.pdf(x)).sum()
    }

    /// Mixture CDF at `x`. The weighted sum is clamped: rounding can
    /// push it an ulp past 1.
    pub fn cdf(&self, x: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * c.cdf(x))
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    /// Log of the mixture density at `x`, evaluated in log space so heavy
    /// tails do not underflow.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        let terms = self.ln_terms();
        ln_pdf_with_terms(&terms, x)
    }

    /// Log-likelihood of the sample under this model: the sum over
    /// observations of the log mixture density.
    pub fn log_likelihood(&self, sample: &ReturnSample) -> f64 {
        let terms = self.ln_terms();
        kahan_sum(
            sample
                .values()
                .iter()
                .map(|&x| ln_pdf_with_terms(&terms, x)),
        )
    }

    /// Posterior responsibilities of every component for every observation.
    ///
    /// Each row is the exponent form of the weighted-density ratio with a
    /// max shift, so rows are well defined even when an observation sits
    /// dozens of standard deviations from every component.
    pub fn posterior(&self, sample: &ReturnSample) -> ResponsibilityMatrix {
        let terms = self.ln_terms();
        let n = sample.n();
        let k = self.k();
        let mut entries = Vec::with_capacity(n * k);
        let mut scores = vec![0.0; k];
        for &x in sample.values() {
            for (j, t) in terms.iter().enumerate() {
                scores[j] = t.score(x);
            }
            let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for s in scores.iter_mut() {
                *s = (*s - max).exp();
                total += *s;
            }
            entries.extend(scores.iter().map(|&e| e / total));
        }
        ResponsibilityMatrix { entries, n, k }
    }

    /// Copy of this model with components ordered by ascending weight
    /// (ties broken by mean, then standard deviation). Presentation order
    /// only; the mixture itself is unchanged.
    pub fn sorted_by_weight(&self) -> MixtureModel {
        let mut components = self.components.clone();
        components.sort_by(|a, b| {
            (a.weight, a.mean, a.std)
                .partial_cmp(&(b.weight, b.mean, b.std))
                .expect("component parameters are finite")
        });
        MixtureModel { components }
    }

    /// Serializes to the model JSON document.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialization cannot fail")
    }

    /// Parses and validates a model JSON document.
    pub fn from_json(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }

    /// Per-component terms of the log-density, precomputed once per pass
    /// over a sample.
    fn ln_terms(&self) -> Vec<LnTerm> {
        self.components
            .iter()
            .map(|c| LnTerm {
                // ln(w) + ln N(x; mean, std) = bias - inv_two_var * (x - mean)^2
                bias: c.weight.ln() - c.std.ln() - LN_SQRT_TWO_PI,
                inv_two_var: 0.5 / (c.std * c.std),
                mean: c.mean,
            })
            .collect()
    }
}

/// Precomputed pieces of ln(weight * N(x; mean, std)).
struct LnTerm {
    bias: f64,
    inv_two_var: f64,
    mean: f64,
}

impl LnTerm {
    #[inline]
    fn score(&self, x: f64) -> f64 {
        let d = x - self.mean;
        self.bias - d * d * self.inv_two_var
    }
}

#[inline]
fn ln_pdf_with_terms(terms: &[LnTerm], x: f64) -> f64 {
    let mut max = f64::NEG_INFINITY;
    for t in terms {
        max = max.max(t.score(x));
    }
    // max is finite: weights sum to 1, so at least one is positive.
    let sum: f64 = terms.iter().map(|t| (t.score(x) - max).exp()).sum();
    max + sum.ln()
}

/// Posterior probabilities: entry (i, j) is the probability that
/// observation i was generated by component j. Rows sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponsibilityMatrix {
    entries: Vec<f64>,
    n: usize,
    k: usize,
}

impl ResponsibilityMatrix {
    /// Validating constructor for externally assembled responsibilities
    /// (row-major, `n * k` entries, rows summing to 1 within 1e-12).
    pub fn new(entries: Vec<f64>, n: usize, k: usize) -> Result<Self> {
        if entries.len() != n * k || k == 0 || n == 0 {
            return Err(Error::ResponsibilityShape {
                len: entries.len(),
                n,
                k,
            });
        }
        for (idx, &value) in entries.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::ResponsibilityOutOfRange {
                    row: idx / k,
                    col: idx % k,
                    value,
                });
            }
        }
        for (row, chunk) in entries.chunks_exact(k).enumerate() {
            let sum = kahan_sum(chunk.iter().copied());
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::ResponsibilityRowSum { row, sum });
            }
        }
        Ok(ResponsibilityMatrix { entries, n, k })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.k..(i + 1) * self.k]
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.k + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks_exact(self.k)
    }

    /// Sum of column `j` over all observations (compensated).
    pub fn column_sum(&self, j: usize) -> f64 {
        kahan_sum(self.entries.iter().skip(j).step_by(self.k).copied())
    }
}
