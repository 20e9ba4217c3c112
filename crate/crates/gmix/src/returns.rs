//! Price CSV ingestion and conversion to log daily returns.

use crate::error::{Error, Result};
use crate::math;
use chrono::NaiveDate;
use std::io::Read;

/// An ordered series of daily closing prices for one index.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    observations: Vec<(NaiveDate, f64)>,
    source_name: String,
}

impl PriceSeries {
    /// Builds a series from (date, close) pairs, which must be strictly
    /// increasing in date with positive closes.
    pub fn new(
        observations: Vec<(NaiveDate, f64)>,
        source_name: impl Into<String>,
    ) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::EmptyPrices);
        }
        for window in observations.windows(2) {
            if window[0].0 >= window[1].0 {
                if window[0].0 == window[1].0 {
                    return Err(Error::DuplicateDate(window[0].0));
                }
                return Err(Error::UnsortedPrices);
            }
        }
        for &(date, close) in &observations {
            if !close.is_finite() || close <= 0.0 {
                return Err(Error::InvalidPrice { date, value: close });
            }
        }
        Ok(PriceSeries {
            observations,
            source_name: source_name.into(),
        })
    }

    pub fn observations(&self) -> &[(NaiveDate, f64)] {
        &self.observations
    }

    pub fn source_name(&self) -> &str {
        &self.source_name
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn first_date(&self) -> NaiveDate {
        self.observations[0].0
    }

    pub fn last_date(&self) -> NaiveDate {
        self.observations[self.observations.len() - 1].0
    }

    /// Observations with `start <= date <= end`, bounds inclusive.
    pub fn slice_period(&self, start: NaiveDate, end: NaiveDate) -> Result<PriceSeries> {
        if start > end {
            return Err(Error::InvalidPeriod { start, end });
        }
        let observations: Vec<_> = self
            .observations
            .iter()
            .filter(|(date, _)| *date >= start && *date <= end)
            .cloned()
            .collect();
        if observations.len() < 2 {
            return Err(Error::InsufficientObservations {
                have: observations.len(),
                need: 2,
            });
        }
        Ok(PriceSeries {
            observations,
            source_name: self.source_name.clone(),
        })
    }

    /// Log daily differences of consecutive closes. Calendar gaps
    /// (weekends, holidays) are treated as consecutive trading days.
    pub fn log_returns(&self) -> Result<ReturnSample> {
        if self.observations.len() < 2 {
            return Err(Error::InsufficientObservations {
                have: self.observations.len(),
                need: 2,
            });
        }
        let values: Vec<f64> = self
            .observations
            .windows(2)
            .map(|w| (w[1].1 / w[0].1).ln())
            .collect();
        Ok(ReturnSample {
            values,
            source_name: self.source_name.clone(),
            period: Some((self.first_date(), self.last_date())),
        })
    }
}

/// Parses a price CSV: a header row containing "date" (ISO-8601) and
/// "close" (decimal) columns, case-insensitive, extra columns ignored.
/// Rows are sorted by date; duplicate dates are rejected.
pub fn load_prices<R: Read>(input: R, source_name: &str) -> Result<PriceSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);

    let headers = reader.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let date_col = find("date").ok_or(Error::MissingColumn("date"))?;
    let close_col = find("close").ok_or(Error::MissingColumn("close"))?;

    let mut observations = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let date_field = record.get(date_col).ok_or_else(|| Error::CsvRow {
            line,
            message: "missing date field".into(),
        })?;
        let date =
            NaiveDate::parse_from_str(date_field, "%Y-%m-%d").map_err(|e| Error::CsvRow {
                line,
                message: format!("cannot parse date {date_field:?}: {e}"),
            })?;
        let close_field = record.get(close_col).ok_or_else(|| Error::CsvRow {
            line,
            message: "missing close field".into(),
        })?;
        let close: f64 = close_field.parse().map_err(|e| Error::CsvRow {
            line,
            message: format!("cannot parse close {close_field:?}: {e}"),
        })?;
        if !close.is_finite() || close <= 0.0 {
            return Err(Error::NonPositivePrice { line, value: close });
        }
        observations.push((date, close));
    }
    if observations.is_empty() {
        return Err(Error::EmptyPrices);
    }

    observations.sort_by_key(|(date, _)| *date);
    for window in observations.windows(2) {
        if window[0].0 == window[1].0 {
            return Err(Error::DuplicateDate(window[0].0));
        }
    }
    Ok(PriceSeries {
        observations,
        source_name: source_name.into(),
    })
}

/// A sample of log daily returns with provenance metadata; the object the
/// mixture is fitted to.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSample {
    values: Vec<f64>,
    source_name: String,
    period: Option<(NaiveDate, NaiveDate)>,
}

impl ReturnSample {
    /// Builds a sample from raw return values (synthetic data, tests).
    /// Values must be finite and nonempty.
    pub fn from_values(values: Vec<f64>, source_name: impl Into<String>) -> Result<Self> {
        Self::new(values, source_name, None)
    }

    pub fn new(
        values: Vec<f64>,
        source_name: impl Into<String>,
        period: Option<(NaiveDate, NaiveDate)>,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFiniteReturn { index, value });
            }
        }
        Ok(ReturnSample {
            values,
            source_name: source_name.into(),
            period,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn source_name(&self) -> &str {
        &self.source_name
    }

    pub fn period(&self) -> Option<(NaiveDate, NaiveDate)> {
        self.period
    }

    pub fn mean(&self) -> f64 {
        math::mean(&self.values)
    }

    /// Population (1/n) standard deviation of the returns.
    pub fn std(&self) -> f64 {
        math::population_std(&self.values)
    }

    /// Copy of this sample with values sorted ascending. The statistics of
    /// every operation in this crate are order-free, so the sorted sample
    /// is interchangeable with the original.
    pub fn sorted(&self) -> ReturnSample {
        ReturnSample {
            values: math::sorted_copy(&self.values),
            source_name: self.source_name.clone(),
            period: self.period,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn date(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    #[test]
    fn parses_a_two_row_csv() {
        let csv = "date,close\n2003-04-14,2831.01\n2003-04-15,2870.40\n";
        let series = load_prices(csv.as_bytes(), "DAX").unwrap();
        assert_eq!(series.len(), 2);
        assert_eq!(series.observations()[0], (date("2003-04-14"), 2831.01));
        assert_eq!(series.observations()[1], (date("2003-04-15"), 2870.40));
        assert_eq!(series.source_name(), "DAX");
    }

    #[test]
    fn reversed_rows_sort_to_the_same_series() {
        let forward = "date,close\n2003-04-14,2831.01\n2003-04-15,2870.40\n";
        let reversed = "date,close\n2003-04-15,2870.40\n2003-04-14,2831.01\n";
        let a = load_prices(forward.as_bytes(), "DAX").unwrap();
        let b = load_prices(reversed.as_bytes(), "DAX").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn extra_columns_are_ignored_and_headers_are_case_insensitive() {
        let csv = "Date,Open,Close\n2003-04-14,2800.0,2831.01\n2003-04-15,2830.0,2870.40\n";
        let series = load_prices(csv.as_bytes(), "DAX").unwrap();
        assert_eq!(series.observations()[0].1, 2831.01);
    }

    #[test]
    fn rejects_non_positive_price() {
        let csv = "date,close\n2003-04-14,0\n";
        let err = load_prices(csv.as_bytes(), "DAX").unwrap_err();
        assert!(
            matches!(err, Error::NonPositivePrice { line: 2, .. }),
            "{err}"
        );
    }

    #[test]
    fn rejects_duplicate_dates() {
        let csv = "date,close\n2003-04-14,100\n2003-04-14,101\n";
        let err = load_prices(csv.as_bytes(), "DAX").unwrap_err();
        assert!(matches!(err, Error::DuplicateDate(_)), "{err}");
    }

    #[test]
    fn reports_the_line_of_an_unparsable_row() {
        let csv = "date,close\n2003-04-14,100\nnot-a-date,101\n";
        let err = load_prices(csv.as_bytes(), "DAX").unwrap_err();
        match err {
            Error::CsvRow { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn rejects_empty_and_missing_columns() {
        assert!(matches!(
            load_prices("date,close\n".as_bytes(), "X"),
            Err(Error::EmptyPrices)
        ));
        assert!(matches!(
            load_prices("date,open\n2003-04-14,1\n".as_bytes(), "X"),
            Err(Error::MissingColumn("close"))
        ));
    }

    #[test]
    fn slice_covering_everything_is_identity() {
        let csv = "date,close\n2003-04-14,100\n2003-04-15,101\n2003-04-16,102\n";
        let series = load_prices(csv.as_bytes(), "X").unwrap();
        let sliced = series
            .slice_period(date("2000-01-01"), date("2010-01-01"))
            .unwrap();
        assert_eq!(series, sliced);
    }

    #[test]
    fn slice_bounds_are_inclusive() {
        let csv = "date,close\n2003-04-14,2831.01\n2003-04-15,2870.40\n";
        let series = load_prices(csv.as_bytes(), "X").unwrap();
        let sliced = series
            .slice_period(date("2003-04-14"), date("2003-04-15"))
            .unwrap();
        assert_eq!(sliced.len(), 2);
    }

    #[test]
    fn slice_covering_nothing_is_an_error() {
        let csv = "date,close\n2003-04-14,100\n2003-04-15,101\n";
        let series = load_prices(csv.as_bytes(), "X").unwrap();
        let err = series
            .slice_period(date("2005-01-01"), date("2005-12-31"))
            .unwrap_err();
        assert!(matches!(
            err,
            Error::InsufficientObservations { have: 0, need: 2 }
        ));
        assert!(matches!(
            series.slice_period(date("2005-01-01"), date("2004-01-01")),
            Err(Error::InvalidPeriod { .. })
        ));
    }

    #[test]
    fn log_returns_of_flat_prices_are_zero() {
        let series = PriceSeries::new(
            vec![(date("2020-01-01"), 100.0), (date("2020-01-02"), 100.0)],
            "X",
        )
        .unwrap();
        let returns = series.log_returns().unwrap();
        assert_eq!(returns.values(), &[0.0]);
        assert_eq!(returns.n(), 1);
    }

    #[test]
    fn log_return_of_e_fold_increase_is_one() {
        let series = PriceSeries::new(
            vec![
                (date("2020-01-01"), 100.0),
                (date("2020-01-02"), 100.0 * std::f64::consts::E),
            ],
            "X",
        )
        .unwrap();
        let returns = series.log_returns().unwrap();
        assert_relative_eq!(returns.values()[0], 1.0, max_relative = 1e-15);
    }

    #[test]
    fn log_returns_match_high_precision_reference() {
        // Closes (100, 105, 99.75): reference logs from a 50-digit
        // evaluation of ln(1.05) and ln(0.95).
        let series = PriceSeries::new(
            vec![
                (date("2020-01-01"), 100.0),
                (date("2020-01-02"), 105.0),
                (date("2020-01-03"), 99.75),
            ],
            "X",
        )
        .unwrap();
        let returns = series.log_returns().unwrap();
        assert_relative_eq!(
            returns.values()[0],
            0.048_790_164_169_432,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            returns.values()[1],
            -0.051_293_294_387_550_53,
            max_relative = 1e-13
        );
        assert_eq!(
            returns.period(),
            Some((date("2020-01-01"), date("2020-01-03")))
        );
    }

    #[test]
    fn telescoping_sum_of_log_returns() {
        let closes = [100.0, 103.5, 99.2, 101.7, 108.3, 97.5];
        let observations: Vec<_> = closes
            .iter()
            .enumerate()
            .map(|(i, &c)| (date("2020-01-01") + chrono::Days::new(i as u64), c))
            .collect();
        let series = PriceSeries::new(observations, "X").unwrap();
        let returns = series.log_returns().unwrap();
        let total: f64 = returns.values().iter().sum();
        assert_abs_diff_eq!(total, (97.5f64 / 100.0).ln(), epsilon = 1e-12);
        assert_eq!(returns.n(), closes.len() - 1);
    }

    #[test]
    fn return_sample_rejects_empty_and_non_finite() {
        assert!(matches!(
            ReturnSample::from_values(vec![], "X"),
            Err(Error::EmptySample)
        ));
        assert!(matches!(
            ReturnSample::from_values(vec![0.0, f64::NAN], "X"),
            Err(Error::NonFiniteReturn { index: 1, .. })
        ));
    }
}
