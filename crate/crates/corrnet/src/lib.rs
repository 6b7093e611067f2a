//! Correlation-network analysis for multi-asset daily price series.
//!
//! The pipeline runs price files through four stages:
//!
//! 1. [`timeseries`] — parse `date,symbol,close` files, align every symbol
//!    onto the dates where all of them traded, and take logarithmic returns.
//! 2. [`correlation`] — Pearson correlation matrices over full or rolling
//!    windows, with the scalar summaries mean correlation and coefficient
//!    variance.
//! 3. [`spectral`] — symmetric eigendecomposition (cyclic Jacobi), the
//!    random-matrix-theory eigenvalue bounds for uncorrelated series, and
//!    market-mode observables.
//! 4. [`network`] — the correlation distance `d = sqrt(2(1 - c))`, minimal
//!    spanning trees by Prim's algorithm, and per-node observables: strength,
//!    degree, betweenness centrality, and the mean occupation layer.
//!
//! [`driver`] orchestrates the stages behind the `corrnet` command-line tool
//! and serializes every observable to flat CSV (plus DOT for trees).
//! [`synthetic`] generates seeded Gaussian and factor-model return data for
//! experiments and tests.
//!
//! All types are immutable after construction and all operations are pure
//! functions, so everything can be shared freely across threads. Rolling
//! analyses evaluate windows in parallel with results identical to
//! sequential evaluation.
//!
//! # Quick start
//!
//! ```
//! use corrnet::correlation::{correlation_matrix, mean_correlation};
//! use corrnet::network::{distance_matrix, mst_prim};
//! use corrnet::synthetic;
//!
//! // 8 series, 500 records, one common factor with loading 0.6.
//! let returns = synthetic::one_factor_returns(8, 500, 0.6, 42);
//! let corr = correlation_matrix(&returns, (0, 500)).unwrap();
//! let tree = mst_prim(&distance_matrix(&corr)).unwrap();
//!
//! assert_eq!(tree.edges().len(), 7);
//! assert!(mean_correlation(&corr) > 0.2);
//! ```

pub mod correlation;
pub mod driver;
pub mod network;
pub mod spectral;
pub mod synthetic;
pub mod timeseries;

pub use correlation::{CorrelationMatrix, RollingSeries};
pub use network::{DistanceMatrix, SpanningTree};
pub use spectral::{EigenDecomposition, RmtBounds};
pub use timeseries::{PriceTable, ReturnMatrix};
