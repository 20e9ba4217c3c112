//! Density-curve and histogram data for chart rendering: an evaluation
//! grid spanning the sample, a density-normalized histogram, the mixture
//! and per-component curves, and a single-Gaussian baseline curve.

use crate::math::{quantile_sorted, sorted_copy};
use crate::mixture::MixtureModel;
use crate::returns::ReturnSample;
use std::io::{self, Write};

/// Number of grid points (rows of the TSV output).
pub const GRID_POINTS: usize = 512;

/// Tabulated curves over a fixed grid. `x` holds the centers of
/// [`GRID_POINTS`] equal cells spanning the sample range widened by three
/// sample standard deviations on each side.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PlotData {
    pub x: Vec<f64>,
    /// Freedman-Diaconis histogram of the sample, density-normalized, 0
    /// outside the data range.
    pub hist_density: Vec<f64>,
    pub mixture_pdf: Vec<f64>,
    /// Weighted per-component densities; summing them recovers
    /// `mixture_pdf`.
    pub components: Vec<Vec<f64>>,
    /// Density of the single-Gaussian baseline model.
    pub baseline_pdf: Vec<f64>,
}

impl PlotData {
    /// Evaluates all curves for `model` and `baseline` against `sample`.
    pub fn compute(model: &MixtureModel, baseline: &MixtureModel, sample: &ReturnSample) -> Self {
        let sorted = sorted_copy(sample.values());
        let pad = 3.0 * sample.std();
        let lo = sorted[0] - pad;
        let hi = sorted[sorted.len() - 1] + pad;
        let cell = (hi - lo) / GRID_POINTS as f64;
        let x: Vec<f64> = (0..GRID_POINTS)
            .map(|i| lo + (i as f64 + 0.5) * cell)
            .collect();

        let histogram = Histogram::freedman_diaconis(&sorted);
        let hist_density = x.iter().map(|&v| histogram.density(v)).collect();
        let mixture_pdf = x.iter().map(|&v| model.pdf(v)).collect();
        let components = model
            .components()
            .iter()
            .map(|c| x.iter().map(|&v| c.weight() * c.pdf(v)).collect())
            .collect();
        let baseline_pdf = x.iter().map(|&v| baseline.pdf(v)).collect();

        PlotData {
            x,
            hist_density,
            mixture_pdf,
            components,
            baseline_pdf,
        }
    }

    /// Writes the tab-separated table:
    /// `x  hist_density  mixture_pdf  component_1..component_k  gaussian_baseline`.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "x\thist_density\tmixture_pdf")?;
        for j in 1..=self.components.len() {
            write!(out, "\tcomponent_{j}")?;
        }
        writeln!(out, "\tgaussian_baseline")?;
        for i in 0..self.x.len() {
            write!(
                out,
                "{:e}\t{:e}\t{:e}",
                self.x[i], self.hist_density[i], self.mixture_pdf[i]
            )?;
            for component in &self.components {
                write!(out, "\t{:e}", component[i])?;
            }
            writeln!(out, "\t{:e}", self.baseline_pdf[i])?;
        }
        Ok(())
    }
}

/// A density-normalized histogram with equal-width bins.
#[derive(Debug, Clone)]
struct Histogram {
    lo: f64,
    bin_width: f64,
    /// Height of each bin in density units (count / (n * width)).
    densities: Vec<f64>,
}

impl Histogram {
    /// Freedman-Diaconis binning: width 2*IQR/n^(1/3), falling back to
    /// Scott's rule when the interquartile range vanishes and to a single
    /// bin when the sample has no spread at all.
    fn freedman_diaconis(sorted: &[f64]) -> Histogram {
        let n = sorted.len();
        let lo = sorted[0];
        let span = sorted[n - 1] - lo;
        if span == 0.0 {
            return Histogram {
                lo,
                bin_width: 1.0,
                densities: vec![1.0],
            };
        }
        let iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
        let cube_root = (n as f64).powf(1.0 / 3.0);
        let mut width = 2.0 * iqr / cube_root;
        if width <= 0.0 {
            let std = crate::math::population_std(sorted);
            width = 3.49 * std / cube_root;
        }
        if width <= 0.0 {
            width = span;
        }
        let bins = ((span / width).ceil() as usize).clamp(1, 100_000);
        let bin_width = span / bins as f64;

        let mut counts = vec![0usize; bins];
        for &v in sorted {
            let idx = (((v - lo) / bin_width) as usize).min(bins - 1);
            counts[idx] += 1;
        }
        let densities = counts
            .iter()
            .map(|&c| c as f64 / (n as f64 * bin_width))
            .collect();
        Histogram {
            lo,
            bin_width,
            densities,
        }
    }

    /// Density at `x`: the height of the containing bin, 0 outside.
    fn density(&self, x: f64) -> f64 {
        if x < self.lo {
            return 0.0;
        }
        let idx = ((x - self.lo) / self.bin_width) as usize;
        if idx >= self.densities.len() {
            // The sample maximum belongs to the last bin.
            if x <= self.lo + self.bin_width * self.densities.len() as f64 {
                return self.densities[self.densities.len() - 1];
            }
            return 0.0;
        }
        self.densities[idx]
    }
}
