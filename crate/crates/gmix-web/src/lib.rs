//! Browser bindings for the mixture toolkit. Three operations drive the
//! demo page: draw a synthetic return sample from a model, fit a mixture
//! to the current sample (returning table, diagnostics, and chart curves),
//! and score a hand-edited model against the sample.
//!
//! Results cross the boundary as JSON strings; the page parses them with
//! `JSON.parse`.

use gmix::{em, ks, plot::PlotData, FitConfig, KsResult, MixtureModel, ReturnSample};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct FitSummary {
    model: MixtureModel,
    loglik_trace: Vec<f64>,
    iterations: usize,
    converged: bool,
    restart_index: usize,
    ks: KsResult,
    baseline: BaselineSummary,
    curves: PlotData,
}

#[derive(Serialize)]
struct BaselineSummary {
    mean: f64,
    std: f64,
    ks: KsResult,
}

fn err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// A starting model for the page: four overlapping components on the
/// scale of daily index returns.
#[wasm_bindgen]
pub fn default_model_json() -> String {
    MixtureModel::from_triples(&[
        (0.152, -0.002, 0.018),
        (0.223, 0.001, 0.017),
        (0.287, 0.004, 0.014),
        (0.337, 0.001, 0.009),
    ])
    .expect("static model is valid")
    .to_json()
}

/// Draws `n` seeded returns from the model described by `model_json`.
#[wasm_bindgen]
pub fn generate_sample(model_json: &str, n: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    let model = MixtureModel::from_json(model_json).map_err(err)?;
    if n == 0 {
        return Err(JsError::new("sample size must be at least 1"));
    }
    Ok(gmix::sample::sample_returns(&model, n, seed))
}

/// Fits a `k`-component mixture and a single-Gaussian baseline to
/// `values`, returning a JSON summary with the fitted table, KS
/// diagnostics, the log-likelihood trace, and chart curves.
#[wasm_bindgen]
pub fn fit_sample(
    values: &[f64],
    k: usize,
    restarts: usize,
    seed: u64,
    epsilon: f64,
    max_iterations: usize,
) -> Result<String, JsError> {
    let sample = ReturnSample::from_values(values.to_vec(), "demo").map_err(err)?;
    let config = FitConfig {
        k,
        epsilon,
        max_iterations,
        restarts,
        seed,
    };
    let fitted = em::fit(&sample, &config).map_err(err)?;
    let baseline = em::fit(
        &sample,
        &FitConfig {
            k: 1,
            restarts: 1,
            ..config
        },
    )
    .map_err(err)?;

    let summary = FitSummary {
        ks: ks::ks_test(&fitted.model, &sample),
        baseline: BaselineSummary {
            mean: baseline.model.components()[0].mean(),
            std: baseline.model.components()[0].std(),
            ks: ks::ks_test(&baseline.model, &sample),
        },
        curves: PlotData::compute(&fitted.model, &baseline.model, &sample),
        loglik_trace: fitted.loglik_trace.clone(),
        iterations: fitted.iterations,
        converged: fitted.converged,
        restart_index: fitted.restart_index,
        model: fitted.model,
    };
    serde_json::to_string(&summary).map_err(err)
}

/// Scores a hand-edited model against `values`: KS statistic, p-value,
/// and log-likelihood, as JSON.
#[wasm_bindgen]
pub fn evaluate_model(model_json: &str, values: &[f64]) -> Result<String, JsError> {
    let model = MixtureModel::from_json(model_json).map_err(err)?;
    let sample = ReturnSample::from_values(values.to_vec(), "demo").map_err(err)?;

    #[derive(Serialize)]
    struct Evaluation {
        ks: KsResult,
        log_likelihood: f64,
    }
    let evaluation = Evaluation {
        ks: ks::ks_test(&model, &sample),
        log_likelihood: model.log_likelihood(&sample),
    };
    serde_json::to_string(&evaluation).map_err(err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_model_parses_and_round_trips() {
        let json = default_model_json();
        let model = MixtureModel::from_json(&json).unwrap();
        assert_eq!(model.k(), 4);
    }

    #[test]
    fn generate_fit_evaluate_cycle_works() {
        let json = default_model_json();
        let values = generate_sample(&json, 500, 9).unwrap();
        assert_eq!(values.len(), 500);

        let summary = fit_sample(&values, 2, 2, 0, 1e-8, 300).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&summary).unwrap();
        assert_eq!(parsed["model"]["components"].as_array().unwrap().len(), 2);
        assert_eq!(parsed["curves"]["x"].as_array().unwrap().len(), 512);
        assert!(parsed["ks"]["statistic"].as_f64().unwrap() < 0.2);

        let evaluation = evaluate_model(&json, &values).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&evaluation).unwrap();
        assert!(parsed["ks"]["p_value"].as_f64().unwrap() > 0.0);
    }
}
