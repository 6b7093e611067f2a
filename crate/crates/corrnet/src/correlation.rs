//! Pearson correlation matrices over full or rolling windows.
//!
//! For return series `x` and `y` the coefficient is
//!
//! ```text
//! c = (<xy> - <x><y>) / sqrt((<x^2> - <x>^2)(<y^2> - <y>^2))
//! ```
//!
//! with plain arithmetic means over the window. Population and sample
//! normalization cancel in the ratio; the computation centers both series
//! first, which is the numerically stable evaluation of the same quantity.
//! Results are clamped to `[-1, 1]` so roundoff at the boundary can never
//! produce an invalid correlation (or, later, a negative squared distance).
//!
//! Windows are half-open index ranges `[start, end)` over return records,
//! never calendar spans. [`rolling_apply`] slides such a window across the
//! data and applies an observable to each window's correlation matrix;
//! distinct windows are evaluated in parallel with results identical to
//! sequential evaluation.

use ndarray::Array2;
use rayon::prelude::*;
use thiserror::Error;

use crate::timeseries::ReturnMatrix;

#[derive(Debug, Error)]
pub enum CorrelationError {
    #[error("length mismatch: {x} vs {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error("need at least 2 observations, got {got}")]
    TooShort { got: usize },
    #[error("zero variance in input sequence")]
    ZeroVariance,
    #[error("series {symbol} is constant on the window")]
    ConstantSeries { symbol: String },
    #[error("window ({start}, {end}) invalid for {records} records")]
    WindowOutOfRange {
        start: usize,
        end: usize,
        records: usize,
    },
    #[error("window length {window} exceeds {records} return records")]
    WindowExceedsData { window: usize, records: usize },
    #[error("step must be at least 1")]
    ZeroStep,
    #[error("invalid correlation matrix: {0}")]
    InvalidMatrix(String),
}

/// Symmetric N x N matrix of Pearson coefficients with window metadata.
///
/// The diagonal is exactly 1, off-diagonal entries lie in `[-1, 1]`, and the
/// matrix is mirrored on construction so `values[[i, j]]` equals
/// `values[[j, i]]` bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    symbols: Vec<String>,
    values: Array2<f64>,
    window: (usize, usize),
    window_length: usize,
}

impl CorrelationMatrix {
    /// Wraps an externally built matrix after checking the invariants.
    /// The window metadata is set to `(0, 0)` with length 0, meaning "no
    /// window provenance".
    pub fn new(symbols: Vec<String>, values: Array2<f64>) -> Result<Self, CorrelationError> {
        let bad = |reason: &str| CorrelationError::InvalidMatrix(reason.to_string());
        let n = symbols.len();
        if n == 0 {
            return Err(bad("no symbols"));
        }
        if values.nrows() != n || values.ncols() != n {
            return Err(bad("shape does not match symbol count"));
        }
        for i in 0..n {
            if values[[i, i]] != 1.0 {
                return Err(bad("diagonal entry is not 1"));
            }
            for j in 0..i {
                let v = values[[i, j]];
                if v != values[[j, i]] {
                    return Err(bad("matrix is not symmetric"));
                }
                if !(-1.0..=1.0).contains(&v) {
                    return Err(bad("entry outside [-1, 1]"));
                }
            }
        }
        Ok(CorrelationMatrix {
            symbols,
            values,
            window: (0, 0),
            window_length: 0,
        })
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn n(&self) -> usize {
        self.symbols.len()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[[i, j]]
    }

    /// Half-open `(start, end)` record range this matrix was computed on.
    pub fn window(&self) -> (usize, usize) {
        self.window
    }

    pub fn window_length(&self) -> usize {
        self.window_length
    }
}

/// A date-indexed sequence of per-window observables.
#[derive(Debug, Clone, PartialEq)]
pub struct RollingSeries<T> {
    dates: Vec<String>,
    values: Vec<T>,
}

impl<T> RollingSeries<T> {
    pub fn new(dates: Vec<String>, values: Vec<T>) -> Result<Self, CorrelationError> {
        if dates.len() != values.len() {
            return Err(CorrelationError::InvalidMatrix(
                "dates and values differ in length".to_string(),
            ));
        }
        if !dates.windows(2).all(|w| w[0] < w[1]) {
            return Err(CorrelationError::InvalidMatrix(
                "dates not strictly increasing".to_string(),
            ));
        }
        Ok(RollingSeries { dates, values })
    }

    pub fn dates(&self) -> &[String] {
        &self.dates
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &T)> {
        self.dates.iter().map(String::as_str).zip(self.values.iter())
    }

    pub fn into_parts(self) -> (Vec<String>, Vec<T>) {
        (self.dates, self.values)
    }
}

impl<T, E> RollingSeries<Result<T, E>> {
    /// Lifts per-window failures out of the series.
    pub fn transpose(self) -> Result<RollingSeries<T>, E> {
        let mut values = Vec::with_capacity(self.values.len());
        for v in self.values {
            values.push(v?);
        }
        Ok(RollingSeries {
            dates: self.dates,
            values,
        })
    }
}

/// Mean and centered values of a window slice; `None` if the slice is
/// constant (zero variance).
fn center(xs: &[f64]) -> Option<(Vec<f64>, f64)> {
    if xs.iter().all(|&v| v == xs[0]) {
        return None;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let devs: Vec<f64> = xs.iter().map(|&v| v - mean).collect();
    let sumsq: f64 = devs.iter().map(|d| d * d).sum();
    if sumsq == 0.0 {
        return None;
    }
    Some((devs, sumsq))
}

fn correlate(dx: &[f64], sx: f64, dy: &[f64], sy: f64) -> f64 {
    let cov: f64 = dx.iter().zip(dy).map(|(a, b)| a * b).sum();
    (cov / (sx * sy).sqrt()).clamp(-1.0, 1.0)
}

/// Pearson correlation coefficient of two equal-length sequences.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, CorrelationError> {
    if x.len() != y.len() {
        return Err(CorrelationError::LengthMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(CorrelationError::TooShort { got: x.len() });
    }
    let (dx, sx) = center(x).ok_or(CorrelationError::ZeroVariance)?;
    let (dy, sy) = center(y).ok_or(CorrelationError::ZeroVariance)?;
    Ok(correlate(&dx, sx, &dy, sy))
}

/// Pearson correlation matrix of `returns` over the record window
/// `[start, end)`.
///
/// Every pairwise entry equals `pearson` on the corresponding window
/// slices; a series that is constant on the window is reported by symbol.
pub fn correlation_matrix(
    returns: &ReturnMatrix,
    window: (usize, usize),
) -> Result<CorrelationMatrix, CorrelationError> {
    let (start, end) = window;
    let records = returns.n_records();
    if start >= end || end > records {
        return Err(CorrelationError::WindowOutOfRange {
            start,
            end,
            records,
        });
    }
    if end - start < 2 {
        return Err(CorrelationError::TooShort { got: end - start });
    }

    let n = returns.n_series();
    let mut centered = Vec::with_capacity(n);
    for i in 0..n {
        let slice: Vec<f64> = returns.series(i).slice(ndarray::s![start..end]).to_vec();
        let c = center(&slice).ok_or_else(|| CorrelationError::ConstantSeries {
            symbol: returns.symbols()[i].clone(),
        })?;
        centered.push(c);
    }

    let mut values = Array2::zeros((n, n));
    for i in 0..n {
        values[[i, i]] = 1.0;
        let (dx, sx) = &centered[i];
        for j in i + 1..n {
            let (dy, sy) = &centered[j];
            let c = correlate(dx, *sx, dy, *sy);
            values[[i, j]] = c;
            values[[j, i]] = c;
        }
    }

    Ok(CorrelationMatrix {
        symbols: returns.symbols().to_vec(),
        values,
        window,
        window_length: end - start,
    })
}

/// Mean of the N(N-1)/2 distinct coefficients.
///
/// Requires at least two series.
pub fn mean_correlation(c: &CorrelationMatrix) -> f64 {
    let n = c.n();
    assert!(n >= 2, "mean_correlation requires at least 2 series");
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            sum += c.get(i, j);
        }
    }
    sum / (n * (n - 1) / 2) as f64
}

/// Population variance of the N(N-1)/2 distinct coefficients around
/// [`mean_correlation`].
pub fn correlation_variance(c: &CorrelationMatrix) -> f64 {
    let n = c.n();
    assert!(n >= 2, "correlation_variance requires at least 2 series");
    let mean = mean_correlation(c);
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d = c.get(i, j) - mean;
            sum += d * d;
        }
    }
    sum / (n * (n - 1) / 2) as f64
}

/// Slides a window of `window_length` records across the data in steps of
/// `step` and applies `observable` to each window's correlation matrix.
///
/// Window ends run over `{window_length, window_length + step, ...}` up to
/// the record count; each series entry is indexed by the date of the last
/// record in its window. Windows are evaluated in parallel; the result is
/// identical to sequential evaluation.
pub fn rolling_apply<O, F>(
    returns: &ReturnMatrix,
    window_length: usize,
    step: usize,
    observable: F,
) -> Result<RollingSeries<O>, CorrelationError>
where
    F: Fn(&CorrelationMatrix) -> O + Sync,
    O: Send,
{
    if step == 0 {
        return Err(CorrelationError::ZeroStep);
    }
    let records = returns.n_records();
    if window_length > records {
        return Err(CorrelationError::WindowExceedsData {
            window: window_length,
            records,
        });
    }

    let ends: Vec<usize> = (window_length..=records).step_by(step).collect();
    let computed: Vec<Result<(String, O), CorrelationError>> = ends
        .par_iter()
        .map(|&end| {
            let c = correlation_matrix(returns, (end - window_length, end))?;
            Ok((returns.dates()[end - 1].clone(), observable(&c)))
        })
        .collect();

    let mut dates = Vec::with_capacity(computed.len());
    let mut values = Vec::with_capacity(computed.len());
    for item in computed {
        let (date, value) = item?;
        dates.push(date);
        values.push(value);
    }
    Ok(RollingSeries { dates, values })
}
