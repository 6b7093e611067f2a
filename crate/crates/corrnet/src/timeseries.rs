//! Price ingestion, date alignment, and logarithmic returns.
//!
//! Price files are UTF-8 text, one record per line, `date,symbol,close` with
//! an ISO-8601 date and a positive decimal close. A header line
//! `date,symbol,close` is required and lines starting with `#` are ignored.
//! A record with an empty close field marks an explicit gap (the symbol did
//! not trade that day); a missing `(date, symbol)` line means the same thing.
//!
//! Dates are opaque ordered labels: the analysis never does calendar
//! arithmetic on them, and window shifts count records, not days. Gaps are
//! kept explicit and only removed by [`align_common_dates`], which restricts
//! a table to the dates on which every chosen symbol traded. Silent
//! forward-filling is deliberately not offered.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use ndarray::{Array2, ArrayView1};
use thiserror::Error;

/// Errors from parsing, aligning, or differencing price data.
#[derive(Debug, Error)]
pub enum TimeseriesError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: non-positive price {value} for {symbol} on {date}")]
    NonPositivePrice {
        line: usize,
        symbol: String,
        date: String,
        value: f64,
    },
    #[error("line {line}: duplicate record for {symbol} on {date}")]
    DuplicateRecord {
        line: usize,
        symbol: String,
        date: String,
    },
    #[error("symbol {symbol} has fewer than 2 price records")]
    TooFewRecords { symbol: String },
    #[error("unknown symbol {symbol}")]
    UnknownSymbol { symbol: String },
    #[error("no symbols selected")]
    EmptySelection,
    #[error("no date on which all selected symbols traded")]
    EmptyIntersection,
    #[error("gap for {symbol} on {date}: align dates before taking returns")]
    Gap { symbol: String, date: String },
    #[error("need at least 2 aligned dates, got {got}")]
    TooFewDates { got: usize },
    #[error("invalid return matrix: {0}")]
    InvalidReturns(String),
    #[error("failed to read price data: {0}")]
    Io(#[from] std::io::Error),
}

/// Dated closing prices per symbol, possibly with gaps.
///
/// Symbols are stored in lexicographic order and dates strictly increasing.
/// `prices[date][symbol]` is `None` where the symbol did not trade.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceTable {
    symbols: Vec<String>,
    dates: Vec<String>,
    prices: Vec<Vec<Option<f64>>>,
}

impl PriceTable {
    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn dates(&self) -> &[String] {
        &self.dates
    }

    pub fn n_symbols(&self) -> usize {
        self.symbols.len()
    }

    pub fn n_dates(&self) -> usize {
        self.dates.len()
    }

    /// Closing price of symbol `symbol_idx` on date `date_idx`, if it traded.
    pub fn price(&self, date_idx: usize, symbol_idx: usize) -> Option<f64> {
        self.prices[date_idx][symbol_idx]
    }

    pub fn symbol_index(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }

    /// Restricts the table to dates in `[from, to]` (inclusive, either bound
    /// optional). Bounds compare as strings, which orders ISO dates
    /// chronologically.
    pub fn restrict_dates(&self, from: Option<&str>, to: Option<&str>) -> PriceTable {
        let keep: Vec<usize> = (0..self.dates.len())
            .filter(|&i| {
                let d = self.dates[i].as_str();
                from.map_or(true, |f| d >= f) && to.map_or(true, |t| d <= t)
            })
            .collect();
        PriceTable {
            symbols: self.symbols.clone(),
            dates: keep.iter().map(|&i| self.dates[i].clone()).collect(),
            prices: keep.iter().map(|&i| self.prices[i].clone()).collect(),
        }
    }
}

/// Aligned log-return records: N series over T observations.
///
/// `values[[i, t]]` is the return of series `i` from aligned date `t` to
/// `t + 1` of the source prices; the date label for column `t` is the later
/// of the two, so a window's end date is the date of its last observation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnMatrix {
    symbols: Vec<String>,
    dates: Vec<String>,
    values: Array2<f64>,
}

impl ReturnMatrix {
    /// Builds a return matrix, checking that every value is finite, dates
    /// are strictly increasing, and dimensions agree (N x T, T >= 1).
    pub fn new(
        symbols: Vec<String>,
        dates: Vec<String>,
        values: Array2<f64>,
    ) -> Result<Self, TimeseriesError> {
        let bad = |reason: &str| TimeseriesError::InvalidReturns(reason.to_string());
        if symbols.is_empty() {
            return Err(bad("no series"));
        }
        if dates.is_empty() {
            return Err(bad("no records"));
        }
        if values.nrows() != symbols.len() || values.ncols() != dates.len() {
            return Err(bad("value shape does not match symbols x dates"));
        }
        let mut seen = BTreeSet::new();
        if !symbols.iter().all(|s| seen.insert(s)) {
            return Err(bad("duplicate symbol"));
        }
        if !dates.windows(2).all(|w| w[0] < w[1]) {
            return Err(bad("dates not strictly increasing"));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(bad("non-finite value"));
        }
        Ok(ReturnMatrix {
            symbols,
            dates,
            values,
        })
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    /// Date labels, one per return record.
    pub fn dates(&self) -> &[String] {
        &self.dates
    }

    pub fn n_series(&self) -> usize {
        self.symbols.len()
    }

    pub fn n_records(&self) -> usize {
        self.dates.len()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    /// The full return series of one asset.
    pub fn series(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.row(i)
    }
}

fn valid_date(s: &str) -> bool {
    let b = s.as_bytes();
    if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
        return false;
    }
    if ![0, 1, 2, 3, 5, 6, 8, 9]
        .iter()
        .all(|&i| b[i].is_ascii_digit())
    {
        return false;
    }
    let month: u32 = s[5..7].parse().unwrap();
    let day: u32 = s[8..10].parse().unwrap();
    (1..=12).contains(&month) && (1..=31).contains(&day)
}

/// Parses a price file into a [`PriceTable`].
///
/// Input lines may appear in any order; records are keyed by `(date,
/// symbol)` and duplicates are rejected. Every symbol must carry at least
/// two price records.
pub fn parse_prices<R: BufRead>(input: R) -> Result<PriceTable, TimeseriesError> {
    let mut by_date: BTreeMap<String, BTreeMap<String, Option<f64>>> = BTreeMap::new();
    let mut symbols: BTreeSet<String> = BTreeSet::new();
    let mut saw_header = false;

    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != "date,symbol,close" {
                return Err(TimeseriesError::Malformed {
                    line: line_no,
                    reason: "expected header `date,symbol,close`".to_string(),
                });
            }
            saw_header = true;
            continue;
        }

        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(TimeseriesError::Malformed {
                line: line_no,
                reason: format!("expected 3 comma-separated fields, got {}", fields.len()),
            });
        }
        let (date, symbol, close) = (fields[0], fields[1], fields[2]);
        if !valid_date(date) {
            return Err(TimeseriesError::Malformed {
                line: line_no,
                reason: format!("invalid date `{date}` (want YYYY-MM-DD)"),
            });
        }
        if symbol.is_empty() {
            return Err(TimeseriesError::Malformed {
                line: line_no,
                reason: "empty symbol".to_string(),
            });
        }

        // An empty close field is an explicit gap marker.
        let price = if close.is_empty() {
            None
        } else {
            let value: f64 = close.parse().map_err(|_| TimeseriesError::Malformed {
                line: line_no,
                reason: format!("invalid close `{close}`"),
            })?;
            if !value.is_finite() || value <= 0.0 {
                return Err(TimeseriesError::NonPositivePrice {
                    line: line_no,
                    symbol: symbol.to_string(),
                    date: date.to_string(),
                    value,
                });
            }
            Some(value)
        };

        let row = by_date.entry(date.to_string()).or_default();
        if row.insert(symbol.to_string(), price).is_some() {
            return Err(TimeseriesError::DuplicateRecord {
                line: line_no,
                symbol: symbol.to_string(),
                date: date.to_string(),
            });
        }
        symbols.insert(symbol.to_string());
    }

    if !saw_header {
        return Err(TimeseriesError::Malformed {
            line: 1,
            reason: "missing header `date,symbol,close`".to_string(),
        });
    }

    let symbols: Vec<String> = symbols.into_iter().collect();
    let dates: Vec<String> = by_date.keys().cloned().collect();
    let prices: Vec<Vec<Option<f64>>> = by_date
        .values()
        .map(|row| {
            symbols
                .iter()
                .map(|s| row.get(s).copied().flatten())
                .collect()
        })
        .collect();

    for (j, symbol) in symbols.iter().enumerate() {
        let count = prices.iter().filter(|row| row[j].is_some()).count();
        if count < 2 {
            return Err(TimeseriesError::TooFewRecords {
                symbol: symbol.clone(),
            });
        }
    }

    Ok(PriceTable {
        symbols,
        dates,
        prices,
    })
}

/// Restricts `prices` to the chosen symbols and to exactly those dates on
/// which every chosen symbol has a price. Date order is preserved; the
/// symbol list is treated as a set (sorted, duplicates dropped).
pub fn align_common_dates(
    prices: &PriceTable,
    symbols: &[String],
) -> Result<PriceTable, TimeseriesError> {
    if symbols.is_empty() {
        return Err(TimeseriesError::EmptySelection);
    }
    let mut chosen: Vec<String> = symbols.to_vec();
    chosen.sort();
    chosen.dedup();
    let indices: Vec<usize> = chosen
        .iter()
        .map(|s| {
            prices
                .symbol_index(s)
                .ok_or_else(|| TimeseriesError::UnknownSymbol { symbol: s.clone() })
        })
        .collect::<Result<_, _>>()?;

    let keep: Vec<usize> = (0..prices.n_dates())
        .filter(|&t| indices.iter().all(|&j| prices.prices[t][j].is_some()))
        .collect();
    if keep.is_empty() {
        return Err(TimeseriesError::EmptyIntersection);
    }

    Ok(PriceTable {
        symbols: chosen,
        dates: keep.iter().map(|&t| prices.dates[t].clone()).collect(),
        prices: keep
            .iter()
            .map(|&t| indices.iter().map(|&j| prices.prices[t][j]).collect())
            .collect(),
    })
}

/// Logarithmic returns `ln P(t+1) - ln P(t)` of a fully aligned table.
///
/// The input must be gap-free (run [`align_common_dates`] first) with at
/// least two dates; the output has one record fewer than the input has
/// dates.
pub fn log_returns(prices: &PriceTable) -> Result<ReturnMatrix, TimeseriesError> {
    for (t, row) in prices.prices.iter().enumerate() {
        for (j, price) in row.iter().enumerate() {
            if price.is_none() {
                return Err(TimeseriesError::Gap {
                    symbol: prices.symbols[j].clone(),
                    date: prices.dates[t].clone(),
                });
            }
        }
    }
    let t_in = prices.n_dates();
    if t_in < 2 {
        return Err(TimeseriesError::TooFewDates { got: t_in });
    }

    let n = prices.n_symbols();
    let mut values = Array2::zeros((n, t_in - 1));
    for i in 0..n {
        for t in 0..t_in - 1 {
            let p0 = prices.prices[t][i].unwrap();
            let p1 = prices.prices[t + 1][i].unwrap();
            values[[i, t]] = p1.ln() - p0.ln();
        }
    }
    ReturnMatrix::new(
        prices.symbols.clone(),
        prices.dates[1..].to_vec(),
        values,
    )
}
