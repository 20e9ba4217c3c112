//! Small numeric helpers shared across the crate.

/// ln(sqrt(2*pi)), the normalization constant of the Gaussian log-density.
pub(crate) const LN_SQRT_TWO_PI: f64 = 0.918_938_533_204_672_7;

/// Streaming compensated (Kahan) sum.
///
/// The EM statistics and the log-likelihood are long sums whose rounding
/// error would otherwise grow with the sample size; compensation keeps the
/// error independent of `n`, which the monotone-trace checks rely on.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum
    }
}

/// Compensated sum of an iterator.
pub fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut acc = KahanSum::default();
    for v in values {
        acc.add(v);
    }
    acc.total()
}

/// log(sum(exp(terms))) with a max shift so that nothing overflows and the
/// largest term survives even when all terms are far below the exp underflow
/// threshold.
pub fn logsumexp(terms: &[f64]) -> f64 {
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = terms.iter().map(|&t| (t - max).exp()).sum();
    max + sum.ln()
}

/// Arithmetic mean (compensated).
pub fn mean(values: &[f64]) -> f64 {
    kahan_sum(values.iter().copied()) / values.len() as f64
}

/// Population standard deviation: sqrt of the mean squared deviation (the
/// 1/n form, matching the maximum-likelihood estimate for a Gaussian).
pub fn population_std(values: &[f64]) -> f64 {
    let m = mean(values);
    let var = kahan_sum(values.iter().map(|&x| (x - m) * (x - m))) / values.len() as f64;
    var.sqrt()
}

/// Linear-interpolation quantile (the common "type 7" estimator) of an
/// already sorted slice, for `level` in [0, 1].
pub fn quantile_sorted(sorted: &[f64], level: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    debug_assert!((0.0..=1.0).contains(&level));
    let pos = level * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Standard normal CDF via the complementary error function, which keeps
/// full relative accuracy in the lower tail.
pub fn standard_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Sorts a copy of `values` ascending. Inputs are validated to be finite
/// before they reach this point, so total order is safe.
pub(crate) fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("non-finite value in sample"));
    sorted
}
