//! Price ingestion and lagged returns.

use std::io::Read;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Calendar gap (days) above which a series is flagged as gappy.
pub const GAP_FLAG_DAYS: i64 = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PriceError {
    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("price series is empty")]
    EmptySeries,
    #[error("row {row}: date {date} does not follow {previous}")]
    NonMonotoneDates {
        row: usize,
        date: NaiveDate,
        previous: NaiveDate,
    },
    #[error("series of length {len} is too short for lag {lag}")]
    SeriesTooShort { len: usize, lag: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    pub ticker: String,
    pub dates: Vec<NaiveDate>,
    pub adj_close: Vec<f64>,
    /// Some consecutive dates are more than [`GAP_FLAG_DAYS`] apart.
    pub has_gaps: bool,
}

impl PriceSeries {
    /// Validate and assemble a series from parallel vectors.
    pub fn new(ticker: impl Into<String>, dates: Vec<NaiveDate>, adj_close: Vec<f64>) -> Result<Self, PriceError> {
        assert_eq!(dates.len(), adj_close.len(), "dates and prices differ in length");
        if dates.is_empty() {
            return Err(PriceError::EmptySeries);
        }
        for (i, &p) in adj_close.iter().enumerate() {
            if !(p.is_finite() && p > 0.0) {
                return Err(PriceError::Parse {
                    row: i + 1,
                    message: format!("price must be positive, got {p}"),
                });
            }
        }
        for i in 1..dates.len() {
            if dates[i] <= dates[i - 1] {
                return Err(PriceError::NonMonotoneDates {
                    row: i + 1,
                    date: dates[i],
                    previous: dates[i - 1],
                });
            }
        }
        let has_gaps = dates.windows(2).any(|w| (w[1] - w[0]).num_days() > GAP_FLAG_DAYS);
        Ok(Self {
            ticker: ticker.into(),
            dates,
            adj_close,
            has_gaps,
        })
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Same series with every price multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            adj_close: self.adj_close.iter().map(|p| p * factor).collect(),
            ..self.clone()
        }
    }
}

/// Read a `date,adj_close` CSV with a header row. Rows are numbered from 1
/// for the first data row.
pub fn load_prices<R: Read>(ticker: &str, source: R) -> Result<PriceSeries, PriceError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(source);
    let mut dates = Vec::new();
    let mut prices = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| PriceError::Parse {
            row,
            message: e.to_string(),
        })?;
        if record.len() != 2 {
            return Err(PriceError::Parse {
                row,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d").map_err(|e| PriceError::Parse {
            row,
            message: format!("bad date {:?}: {e}", &record[0]),
        })?;
        let price: f64 = record[1].parse().map_err(|_| PriceError::Parse {
            row,
            message: format!("bad price {:?}", &record[1]),
        })?;
        if !(price.is_finite() && price > 0.0) {
            return Err(PriceError::Parse {
                row,
                message: format!("price must be positive, got {:?}", &record[1]),
            });
        }
        if let Some(&previous) = dates.last() {
            if date <= previous {
                return Err(PriceError::NonMonotoneDates { row, date, previous });
            }
        }
        dates.push(date);
        prices.push(price);
    }
    PriceSeries::new(ticker, dates, prices)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub ticker: String,
    /// End date of each return interval.
    pub dates: Vec<NaiveDate>,
    pub returns: Vec<f64>,
    pub lag_days: usize,
}

/// Overlapping returns `(X[i] - X[i-lag]) / X[i-lag]` of a price slice.
pub fn lagged_returns(prices: &[f64], lag: usize) -> Result<Vec<f64>, PriceError> {
    if lag == 0 || prices.len() <= lag {
        return Err(PriceError::SeriesTooShort { len: prices.len(), lag });
    }
    Ok(prices.windows(lag + 1).map(|w| (w[lag] - w[0]) / w[0]).collect())
}

pub fn compute_returns(prices: &PriceSeries, lag_days: usize) -> Result<ReturnSeries, PriceError> {
    let returns = lagged_returns(&prices.adj_close, lag_days)?;
    Ok(ReturnSeries {
        ticker: prices.ticker.clone(),
        dates: prices.dates[lag_days..].to_vec(),
        returns,
        lag_days,
    })
}
