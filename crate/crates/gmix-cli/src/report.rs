//! The fit report: a component table in the style of the published index
//! tables plus KS diagnostics for the mixture and a single-Gaussian
//! baseline.

use gmix::{FitResult, KsResult, MixtureModel, ReturnSample};
use serde::Serialize;
use std::fmt::Write;

#[derive(Debug, Serialize)]
pub struct ComponentRow {
    pub weight: f64,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Serialize)]
pub struct BaselineReport {
    pub mean: f64,
    pub std: f64,
    pub ks: KsResult,
}

/// Everything the `fit` subcommand prints, serializable as-is for
/// `--report json`.
#[derive(Debug, Serialize)]
pub struct ReportTable {
    pub source_name: String,
    pub n: usize,
    pub period: Option<(String, String)>,
    pub k: usize,
    pub seed: u64,
    pub converged: bool,
    pub iterations: usize,
    pub restart_index: usize,
    pub log_likelihood: f64,
    pub components: Vec<ComponentRow>,
    pub ks: KsResult,
    pub baseline: BaselineReport,
}

impl ReportTable {
    pub fn build(
        sample: &ReturnSample,
        fitted: &FitResult,
        ks: KsResult,
        baseline_model: &MixtureModel,
        baseline_ks: KsResult,
    ) -> ReportTable {
        let baseline_component = &baseline_model.components()[0];
        ReportTable {
            source_name: sample.source_name().to_string(),
            n: sample.n(),
            period: sample
                .period()
                .map(|(start, end)| (start.to_string(), end.to_string())),
            k: fitted.model.k(),
            seed: fitted.seed_used,
            converged: fitted.converged,
            iterations: fitted.iterations,
            restart_index: fitted.restart_index,
            log_likelihood: fitted.final_log_likelihood(),
            components: fitted
                .model
                .components()
                .iter()
                .map(|c| ComponentRow {
                    weight: c.weight(),
                    mean: c.mean(),
                    std: c.std(),
                })
                .collect(),
            ks,
            baseline: BaselineReport {
                mean: baseline_component.mean(),
                std: baseline_component.std(),
                ks: baseline_ks,
            },
        }
    }

    /// Plain-text table: parameters to three decimals, diagnostics to six.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Gaussian mixture fit for {}", self.source_name);
        match &self.period {
            Some((start, end)) => {
                let _ = writeln!(
                    out,
                    "n = {} log returns, period {} to {}, k = {}, seed = {}",
                    self.n, start, end, self.k, self.seed
                );
            }
            None => {
                let _ = writeln!(
                    out,
                    "n = {} log returns, k = {}, seed = {}",
                    self.n, self.k, self.seed
                );
            }
        }
        let _ = writeln!(
            out,
            "{} after {} iterations (restart {}), log-likelihood = {:.6}",
            if self.converged {
                "converged"
            } else {
                "stopped"
            },
            self.iterations,
            self.restart_index,
            self.log_likelihood
        );
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<14}{:>8}{:>9}{:>21}",
            "", "Weight", "Mean", "Standard deviation"
        );
        for (i, row) in self.components.iter().enumerate() {
            let _ = writeln!(
                out,
                "Component {:<4}{:>8.3}{:>9.3}{:>21.3}",
                i + 1,
                row.weight,
                row.mean,
                row.std
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "Mixture:           KS statistic = {:.6}, p-value = {:.6}",
            self.ks.statistic, self.ks.p_value
        );
        let _ = writeln!(
            out,
            "Gaussian baseline: KS statistic = {:.6}, p-value = {:.6}",
            self.baseline.ks.statistic, self.baseline.ks.p_value
        );
        out
    }

    pub fn render_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}
