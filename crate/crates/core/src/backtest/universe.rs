//! The market series plus constituents aligned to the market's calendar.

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use super::prices::{load_prices, PriceError, PriceSeries};

#[derive(Debug, Error)]
pub enum UniverseError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("manifest row {row}: {message}")]
    Manifest { row: usize, message: String },
    #[error("manifest has no market row (constituent = false)")]
    NoMarket,
    #[error("manifest has more than one market row: {0} and {1}")]
    MultipleMarkets(String, String),
    #[error("duplicate ticker {0}")]
    DuplicateTicker(String),
    #[error("{path}: {source}")]
    Price { path: PathBuf, source: PriceError },
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct ManifestEntry {
    pub ticker: String,
    pub path: PathBuf,
    pub constituent: bool,
}

/// Parse a `ticker,path,constituent` manifest. Relative paths are resolved
/// against the manifest's directory.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>, UniverseError> {
    let file = File::open(path).map_err(|e| UniverseError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let mut entries = Vec::new();
    for (i, row) in reader.deserialize::<ManifestEntry>().enumerate() {
        let mut entry = row.map_err(|e| UniverseError::Manifest {
            row: i + 1,
            message: e.to_string(),
        })?;
        if entry.path.is_relative() {
            entry.path = base.join(&entry.path);
        }
        entries.push(entry);
    }
    Ok(entries)
}

/// A constituent's prices on the market calendar; `None` where it has no
/// quote on a market date.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedSeries {
    pub ticker: String,
    pub prices: Vec<Option<f64>>,
    /// Own dates absent from the market calendar (dropped).
    pub off_calendar: usize,
    /// `missing_before[i]` counts `None` in `prices[..i]`.
    missing_before: Vec<usize>,
}

impl AlignedSeries {
    pub fn align(series: &PriceSeries, market: &PriceSeries) -> Self {
        let mut prices = vec![None; market.len()];
        let mut off_calendar = 0;
        let mut j = 0;
        for (date, &price) in series.dates.iter().zip(&series.adj_close) {
            while j < market.len() && market.dates[j] < *date {
                j += 1;
            }
            if j < market.len() && market.dates[j] == *date {
                prices[j] = Some(price);
            } else {
                off_calendar += 1;
            }
        }
        let mut missing_before = Vec::with_capacity(prices.len() + 1);
        missing_before.push(0);
        for p in &prices {
            missing_before.push(missing_before.last().unwrap() + usize::from(p.is_none()));
        }
        Self {
            ticker: series.ticker.clone(),
            prices,
            off_calendar,
            missing_before,
        }
    }

    /// Every price in `[from, to]` is present.
    pub fn complete(&self, from: usize, to: usize) -> bool {
        to < self.prices.len() && self.missing_before[to + 1] == self.missing_before[from]
    }

    /// Prices over `[from, to]`, if all are present.
    pub fn slice(&self, from: usize, to: usize) -> Option<Vec<f64>> {
        self.complete(from, to).then(|| self.prices[from..=to].iter().map(|p| p.unwrap()).collect())
    }

    pub fn price(&self, index: usize) -> Option<f64> {
        self.prices.get(index).copied().flatten()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Universe {
    pub market: PriceSeries,
    /// Sorted by ticker.
    pub tickers: Vec<AlignedSeries>,
}

impl Universe {
    pub fn new(market: PriceSeries, constituents: &[PriceSeries]) -> Result<Self, UniverseError> {
        let mut tickers: Vec<AlignedSeries> = constituents.iter().map(|s| AlignedSeries::align(s, &market)).collect();
        tickers.sort_by(|a, b| a.ticker.cmp(&b.ticker));
        if let Some(w) = tickers.windows(2).find(|w| w[0].ticker == w[1].ticker) {
            return Err(UniverseError::DuplicateTicker(w[0].ticker.clone()));
        }
        if tickers.iter().any(|t| t.ticker == market.ticker) {
            return Err(UniverseError::DuplicateTicker(market.ticker.clone()));
        }
        Ok(Self { market, tickers })
    }

    pub fn market_slice(&self, from: usize, to: usize) -> &[f64] {
        &self.market.adj_close[from..=to]
    }
}

/// Load a universe from a manifest; also returns the resolved input paths
/// in manifest order.
pub fn load_universe(manifest: &Path) -> Result<(Universe, Vec<ManifestEntry>), UniverseError> {
    let entries = read_manifest(manifest)?;
    let mut market: Option<PriceSeries> = None;
    let mut constituents = Vec::new();
    for entry in &entries {
        let file = File::open(&entry.path).map_err(|e| UniverseError::Io {
            path: entry.path.clone(),
            message: e.to_string(),
        })?;
        let series = load_prices(&entry.ticker, file).map_err(|source| UniverseError::Price {
            path: entry.path.clone(),
            source,
        })?;
        if entry.constituent {
            constituents.push(series);
        } else if let Some(existing) = &market {
            return Err(UniverseError::MultipleMarkets(existing.ticker.clone(), entry.ticker.clone()));
        } else {
            market = Some(series);
        }
    }
    let market = market.ok_or(UniverseError::NoMarket)?;
    Ok((Universe::new(market, &constituents)?, entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn series(ticker: &str, days: &[u32], prices: &[f64]) -> PriceSeries {
        let dates = days.iter().map(|d| NaiveDate::from_ymd_opt(2021, 3, *d).unwrap()).collect();
        PriceSeries::new(ticker, dates, prices.to_vec()).unwrap()
    }

    #[test]
    fn aligns_to_market_calendar() {
        let market = series("MKT", &[1, 2, 3, 4, 5], &[1.0, 2.0, 3.0, 4.0, 5.0]);
        let other = series("A", &[2, 3, 5, 6], &[20.0, 30.0, 50.0, 60.0]);
        let aligned = AlignedSeries::align(&other, &market);
        assert_eq!(aligned.prices, vec![None, Some(20.0), Some(30.0), None, Some(50.0)]);
        assert_eq!(aligned.off_calendar, 1);
        assert!(aligned.complete(1, 2));
        assert!(!aligned.complete(1, 4));
        assert!(!aligned.complete(4, 5));
        assert_eq!(aligned.slice(1, 2), Some(vec![20.0, 30.0]));
        assert_eq!(aligned.price(3), None);
    }

    #[test]
    fn sorts_and_rejects_duplicates() {
        let market = series("MKT", &[1, 2], &[1.0, 2.0]);
        let u = Universe::new(market.clone(), &[series("B", &[1], &[1.0]), series("A", &[1], &[1.0])]).unwrap();
        assert_eq!(u.tickers[0].ticker, "A");
        assert!(matches!(
            Universe::new(market.clone(), &[series("A", &[1], &[1.0]), series("A", &[2], &[1.0])]),
            Err(UniverseError::DuplicateTicker(_))
        ));
        assert!(matches!(
            Universe::new(market, &[series("MKT", &[1], &[1.0])]),
            Err(UniverseError::DuplicateTicker(_))
        ));
    }

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("m.csv"), "date,adj_close\n2021-03-01,1\n2021-03-02,2\n").unwrap();
        std::fs::write(dir.path().join("a.csv"), "date,adj_close\n2021-03-02,5\n").unwrap();
        let manifest = dir.path().join("manifest.csv");
        std::fs::write(&manifest, "ticker,path,constituent\nMKT,m.csv,false\nA,a.csv,true\n").unwrap();
        let (u, entries) = load_universe(&manifest).unwrap();
        assert_eq!(u.market.ticker, "MKT");
        assert_eq!(u.tickers[0].prices, vec![None, Some(5.0)]);
        assert_eq!(entries[1].path, dir.path().join("a.csv"));

        std::fs::write(&manifest, "ticker,path,constituent\nMKT,m.csv,false\nA,missing.csv,true\n").unwrap();
        let err = load_universe(&manifest).unwrap_err();
        assert!(err.to_string().contains("missing.csv"), "{err}");
        std::fs::write(&manifest, "ticker,path,constituent\nA,a.csv,true\n").unwrap();
        assert!(matches!(load_universe(&manifest), Err(UniverseError::NoMarket)));
        std::fs::write(&manifest, "ticker,path,constituent\nA,a.csv,maybe\n").unwrap();
        assert!(matches!(load_universe(&manifest), Err(UniverseError::Manifest { row: 1, .. })));
    }
}
