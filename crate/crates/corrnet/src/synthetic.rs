//! Seeded synthetic return generators for experiments and tests.
//!
//! All generators draw from a ChaCha stream seeded explicitly, so identical
//! calls produce identical data on every platform. Returns are scaled to a
//! daily-ish 1% volatility; correlation observables are scale invariant, so
//! the factor only matters when turning returns back into prices.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::timeseries::{PriceTable, ReturnMatrix};

const VOLATILITY: f64 = 0.01;

/// Zero-padded symbol labels `S0000, S0001, ...` whose lexicographic order
/// matches their index order.
pub fn symbol_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("S{i:04}")).collect()
}

/// `count` consecutive calendar dates starting 2000-01-03.
pub fn date_labels(count: usize) -> Vec<String> {
    let (mut y, mut m, mut d) = (2000u32, 1u32, 3u32);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(format!("{y:04}-{m:02}-{d:02}"));
        d += 1;
        if d > days_in_month(y, m) {
            d = 1;
            m += 1;
            if m > 12 {
                m = 1;
                y += 1;
            }
        }
    }
    out
}

fn days_in_month(y: u32, m: u32) -> u32 {
    match m {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        _ => {
            if y % 4 == 0 && (y % 100 != 0 || y % 400 == 0) {
                29
            } else {
                28
            }
        }
    }
}

fn build(n: usize, t: usize, values: Array2<f64>) -> ReturnMatrix {
    debug_assert_eq!(values.dim(), (n, t));
    ReturnMatrix::new(symbol_labels(n), date_labels(t), values).unwrap()
}

/// `n` mutually independent Gaussian return series of length `t`.
pub fn gaussian_returns(n: usize, t: usize, seed: u64) -> ReturnMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Array2::zeros((n, t));
    for i in 0..n {
        for k in 0..t {
            let z: f64 = rng.sample(StandardNormal);
            values[[i, k]] = VOLATILITY * z;
        }
    }
    build(n, t, values)
}

/// One-factor returns with per-series loadings:
/// `r_i = b_i * m + sqrt(1 - b_i^2) * e_i`, so the population correlation of
/// series `i` and `j` is `b_i * b_j`.
///
/// Every loading must lie in `[-1, 1]`.
pub fn factor_returns(loadings: &[f64], t: usize, seed: u64) -> ReturnMatrix {
    assert!(
        loadings.iter().all(|b| b.abs() <= 1.0),
        "factor loadings must lie in [-1, 1]"
    );
    let n = loadings.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let market: Vec<f64> = (0..t).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let mut values = Array2::zeros((n, t));
    for (i, &b) in loadings.iter().enumerate() {
        let residual = (1.0 - b * b).sqrt();
        for k in 0..t {
            let z: f64 = rng.sample(StandardNormal);
            values[[i, k]] = VOLATILITY * (b * market[k] + residual * z);
        }
    }
    build(n, t, values)
}

/// One-factor returns with a uniform loading.
pub fn one_factor_returns(n: usize, t: usize, loading: f64, seed: u64) -> ReturnMatrix {
    factor_returns(&vec![loading; n], t, seed)
}

/// Two back-to-back regimes: `t_independent` records of independent noise
/// followed by `t_factor` records of a uniform one-factor model.
pub fn two_regime_returns(
    n: usize,
    t_independent: usize,
    t_factor: usize,
    loading: f64,
    seed: u64,
) -> ReturnMatrix {
    assert!(loading.abs() <= 1.0, "factor loading must lie in [-1, 1]");
    let t = t_independent + t_factor;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Array2::zeros((n, t));
    for i in 0..n {
        for k in 0..t_independent {
            let z: f64 = rng.sample(StandardNormal);
            values[[i, k]] = VOLATILITY * z;
        }
    }
    let market: Vec<f64> = (0..t_factor)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let residual = (1.0 - loading * loading).sqrt();
    for i in 0..n {
        for k in 0..t_factor {
            let z: f64 = rng.sample(StandardNormal);
            values[[i, t_independent + k]] = VOLATILITY * (loading * market[k] + residual * z);
        }
    }
    build(n, t, values)
}

/// Turns returns into a gap-free price table by compounding from
/// `initial_price`. The table gets a fresh synthetic date axis of
/// `n_records() + 1` labels; its log returns reproduce the input values.
pub fn price_table(returns: &ReturnMatrix, initial_price: f64) -> PriceTable {
    assert!(initial_price > 0.0, "initial price must be positive");
    let n = returns.n_series();
    let t = returns.n_records();
    let dates = date_labels(t + 1);
    let mut log_prices = vec![initial_price.ln(); n];
    let mut lines = String::from("date,symbol,close\n");
    for (k, date) in dates.iter().enumerate() {
        for i in 0..n {
            if k > 0 {
                log_prices[i] += returns.values()[[i, k - 1]];
            }
            lines.push_str(&format!(
                "{date},{sym},{price:.17e}\n",
                sym = returns.symbols()[i],
                price = log_prices[i].exp()
            ));
        }
    }
    crate::timeseries::parse_prices(lines.as_bytes()).expect("synthetic prices are well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::{correlation_matrix, mean_correlation};
    use crate::timeseries::log_returns;

    #[test]
    fn generators_are_deterministic() {
        let a = gaussian_returns(4, 20, 99);
        let b = gaussian_returns(4, 20, 99);
        assert_eq!(a, b);
        assert_ne!(a, gaussian_returns(4, 20, 100));
    }

    #[test]
    fn date_labels_are_strictly_increasing_across_years() {
        let labels = date_labels(800);
        assert!(labels.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(labels[0], "2000-01-03");
        // 2000 is a leap year: Jan 3 + 57 days = Feb 29.
        assert_eq!(labels[57], "2000-02-29");
    }

    #[test]
    fn factor_loading_sets_pair_correlation() {
        let r = one_factor_returns(6, 4000, 0.8, 5);
        let c = correlation_matrix(&r, (0, 4000)).unwrap();
        // Population value 0.64; allow sampling noise.
        assert!((mean_correlation(&c) - 0.64).abs() < 0.05);
    }

    #[test]
    fn price_table_round_trips_returns() {
        let r = gaussian_returns(3, 50, 17);
        let prices = price_table(&r, 100.0);
        let back = log_returns(&prices).unwrap();
        for (a, b) in r.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
