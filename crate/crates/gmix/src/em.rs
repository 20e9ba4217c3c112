//! Expectation-maximization fitting of Gaussian mixtures: quantile
//! initialization, E/M alternation, the three-term log-likelihood
//! decomposition, the log-likelihood-gain stop rule, and multi-restart
//! orchestration.

use crate::error::{Error, Result};
use crate::math::{kahan_sum, quantile_sorted, KahanSum};
use crate::mixture::{GaussianComponent, MixtureModel, ResponsibilityMatrix};
use crate::returns::ReturnSample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Relative floor applied to every component standard deviation in the
/// M-step, as a multiple of the sample standard deviation. Guards against
/// a component collapsing onto a single observation.
pub const STD_FLOOR_FACTOR: f64 = 1e-8;

/// A responsibility column summing below this is treated as a collapsed
/// component and aborts the restart.
const COLUMN_SUM_FLOOR: f64 = 1e-300;

/// Fit parameters. `epsilon` bounds the log-likelihood gain below which
/// iteration stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub k: usize,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            k: 4,
            epsilon: 1e-8,
            max_iterations: 1000,
            restarts: 8,
            seed: 0,
        }
    }
}

impl FitConfig {
    fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidConfig("k must be at least 1"));
        }
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(Error::InvalidConfig("epsilon must be positive"));
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1"));
        }
        if self.restarts < 1 {
            return Err(Error::InvalidConfig("restarts must be at least 1"));
        }
        Ok(())
    }
}

/// Outcome of a fit: the winning model plus its iteration history.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: MixtureModel,
    /// Log-likelihood after each iteration; nondecreasing up to float noise.
    pub loglik_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub seed_used: u64,
    /// Index of the restart that won.
    pub restart_index: usize,
}

impl FitResult {
    /// Log-likelihood of the final model.
    pub fn final_log_likelihood(&self) -> f64 {
        *self
            .loglik_trace
            .last()
            .expect("trace has at least one entry")
    }
}

/// Deterministic starting model: component means at the (2r-1)/(2k)
/// sample quantiles for r = 1..k, each perturbed by seeded uniform jitter
/// of +/- 0.25 * (sample std)/k scaled by the restart index; all standard
/// deviations equal to the sample std; uniform weights.
///
/// Restart 0 carries zero jitter, so its means are exactly the quantiles.
pub fn init_model(
    sample: &ReturnSample,
    k: usize,
    seed: u64,
    restart_index: usize,
) -> Result<MixtureModel> {
    if k < 1 {
        return Err(Error::InvalidConfig("k must be at least 1"));
    }
    if sample.n() < k {
        return Err(Error::SampleSmallerThanK { n: sample.n(), k });
    }
    let std = sample.std();
    if std == 0.0 {
        return Err(Error::DegenerateSample);
    }
    let sorted = crate::math::sorted_copy(sample.values());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart_index as u64);
    let amplitude = 0.25 * std / k as f64 * restart_index as f64;

    let weight = 1.0 / k as f64;
    let components = (1..=k)
        .map(|r| {
            let level = (2 * r - 1) as f64 / (2 * k) as f64;
            let jitter = amplitude * rng.random_range(-1.0..1.0);
            GaussianComponent::new(weight, quantile_sorted(&sorted, level) + jitter, std)
        })
        .collect::<Result<Vec<_>>>()?;
    MixtureModel::new(components)
}

/// Expectation step: posterior responsibilities of the current model.
/// A named alias for [`MixtureModel::posterior`], kept so the fit loop
/// reads as the E/M alternation it implements.
pub fn e_step(model: &MixtureModel, sample: &ReturnSample) -> ResponsibilityMatrix {
    model.posterior(sample)
}

/// Maximization step: closed-form parameter updates from responsibilities.
///
/// Weights are the column means, component means the responsibility-
/// weighted sample means, and each standard deviation the square root of
/// the responsibility-weighted mean squared deviation, floored at
/// [`STD_FLOOR_FACTOR`] times the sample standard deviation.
pub fn m_step(resp: &ResponsibilityMatrix, sample: &ReturnSample) -> Result<MixtureModel> {
    if resp.n() != sample.n() {
        return Err(Error::ResponsibilitySampleMismatch {
            n: resp.n(),
            sample_len: sample.n(),
        });
    }
    let values = sample.values();
    let n = values.len() as f64;
    let std_floor = STD_FLOOR_FACTOR * sample.std();

    let components = (0..resp.k())
        .map(|j| {
            let column = || resp.rows().map(move |row| row[j]);
            let col_sum = kahan_sum(column());
            if col_sum.is_nan() || col_sum <= COLUMN_SUM_FLOOR {
                return Err(Error::ComponentCollapse { component: j });
            }
            let weight = col_sum / n;
            let mean = kahan_sum(column().zip(values).map(|(g, &x)| g * x)) / col_sum;
            let var = kahan_sum(
                column()
                    .zip(values)
                    .map(|(g, &x)| g * (x - mean) * (x - mean)),
            ) / col_sum;
            let std = var.sqrt().max(std_floor);
            GaussianComponent::new(weight.clamp(0.0, 1.0), mean, std)
        })
        .collect::<Result<Vec<_>>>()?;
    MixtureModel::new(components)
}

/// The three pieces of the log-likelihood split across responsibilities:
/// a prior-weight term, a density term, and an entropy term. At a
/// self-consistent point (responsibilities equal to the posterior of the
/// same model) `weights + density - entropy` equals the log-likelihood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLikTerms {
    pub weights: f64,
    pub density: f64,
    pub entropy: f64,
}

impl LogLikTerms {
    /// Recombined value: `weights + density - entropy`.
    pub fn total(&self) -> f64 {
        self.weights + self.density - self.entropy
    }
}

/// Splits the log-likelihood into its weight, density, and entropy terms.
/// Entries with zero responsibility contribute zero to every term (the
/// x ln x -> 0 limit).
pub fn loglik_decomposition(
    model: &MixtureModel,
    resp: &ResponsibilityMatrix,
    sample: &ReturnSample,
) -> LogLikTerms {
    let mut weights = KahanSum::default();
    let mut density = KahanSum::default();
    let mut entropy = KahanSum::default();
    for (row, &x) in resp.rows().zip(sample.values()) {
        for (&g, component) in row.iter().zip(model.components()) {
            if g <= 0.0 {
                continue;
            }
            weights.add(g * component.weight().ln());
            density.add(g * component.ln_pdf(x));
            entropy.add(g * g.ln());
        }
    }
    LogLikTerms {
        weights: weights.total(),
        density: density.total(),
        entropy: entropy.total(),
    }
}

/// Fits a `config.k`-component mixture by expectation-maximization with
/// `config.restarts` independently initialized runs, returning the restart
/// with the highest final log-likelihood (ties keep the lowest restart
/// index). Components of the returned model are sorted by ascending
/// weight, a presentation order only.
///
/// A restart whose responsibilities collapse is discarded with a warning;
/// if every restart collapses the fit fails.
///
/// The sample is sorted internally before iterating, which makes the
/// result exactly invariant under permutations of the input.
pub fn fit(sample: &ReturnSample, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    if sample.n() < config.k {
        return Err(Error::SampleSmallerThanK {
            n: sample.n(),
            k: config.k,
        });
    }
    let sorted = sample.sorted();

    let mut best: Option<FitResult> = None;
    for restart in 0..config.restarts {
        match run_restart(&sorted, config, restart) {
            Ok(candidate) => {
                let better = match &best {
                    Some(current) => {
                        candidate.final_log_likelihood() > current.final_log_likelihood()
                    }
                    None => true,
                };
                if better {
                    best = Some(candidate);
                }
            }
            Err(Error::ComponentCollapse { component }) => {
                log::warn!("restart {restart}: component {component} collapsed; restart discarded");
            }
            Err(other) => return Err(other),
        }
    }

    let mut result = best.ok_or(Error::AllRestartsCollapsed)?;
    result.model = result.model.sorted_by_weight();
    Ok(result)
}

fn run_restart(sample: &ReturnSample, config: &FitConfig, restart: usize) -> Result<FitResult> {
    let mut model = init_model(sample, config.k, config.seed, restart)?;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut previous = f64::NEG_INFINITY;

    for iteration in 1..=config.max_iterations {
        let resp = e_step(&model, sample);
        model = m_step(&resp, sample)?;
        let loglik = model.log_likelihood(sample);
        if !loglik.is_finite() {
            // Numerically broken run; treat like a collapse so the restart
            // is discarded rather than winning with a NaN.
            return Err(Error::ComponentCollapse { component: 0 });
        }
        trace.push(loglik);
        if iteration >= 2 && loglik - previous < config.epsilon {
            converged = true;
            break;
        }
        previous = loglik;
    }

    Ok(FitResult {
        iterations: trace.len(),
        model,
        loglik_trace: trace,
        converged,
        seed_used: config.seed,
        restart_index: restart,
    })
}
