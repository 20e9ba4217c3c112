//! Seeded sampling from a mixture and synthetic price-path generation.

use crate::error::Result;
use crate::mixture::MixtureModel;
use crate::returns::PriceSeries;
use chrono::{Datelike, NaiveDate, Weekday};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Draws one return: a component chosen by weight, then a Gaussian draw
/// (Box-Muller). Consumes exactly three uniforms per call, so output is a
/// pure function of the generator state.
pub fn draw_return<R: Rng>(model: &MixtureModel, rng: &mut R) -> f64 {
    let pick: f64 = rng.random();
    let mut acc = 0.0;
    let components = model.components();
    let mut chosen = &components[components.len() - 1];
    for c in components {
        acc += c.weight();
        if pick < acc {
            chosen = c;
            break;
        }
    }
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
    chosen.mean() + chosen.std() * z
}

/// `n` seeded draws from the mixture.
pub fn draw_returns<R: Rng>(model: &MixtureModel, n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| draw_return(model, rng)).collect()
}

/// Deterministic convenience wrapper: `n` draws from a fresh generator
/// seeded with `seed`.
pub fn sample_returns(model: &MixtureModel, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    draw_returns(model, n, &mut rng)
}

/// Generates a synthetic closing-price series of `n_prices` observations:
/// `n_prices - 1` returns drawn from the model, accumulated from
/// `initial_price` as P_t = P_0 * exp(sum of returns), dated on
/// consecutive weekdays from `start_date`.
pub fn synthetic_prices(
    model: &MixtureModel,
    n_prices: usize,
    seed: u64,
    initial_price: f64,
    start_date: NaiveDate,
    source_name: &str,
) -> Result<PriceSeries> {
    let returns = sample_returns(model, n_prices.saturating_sub(1), seed);
    let mut date = next_weekday_inclusive(start_date);
    let mut log_price = 0.0;
    let mut observations = Vec::with_capacity(n_prices);
    observations.push((date, initial_price));
    for r in &returns {
        log_price += r;
        date = next_weekday(date);
        observations.push((date, initial_price * log_price.exp()));
    }
    PriceSeries::new(observations, source_name)
}

fn next_weekday_inclusive(date: NaiveDate) -> NaiveDate {
    match date.weekday() {
        Weekday::Sat => date + chrono::Days::new(2),
        Weekday::Sun => date + chrono::Days::new(1),
        _ => date,
    }
}

fn next_weekday(date: NaiveDate) -> NaiveDate {
    next_weekday_inclusive(date + chrono::Days::new(1))
}
