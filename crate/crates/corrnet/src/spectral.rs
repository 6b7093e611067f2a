//! Eigendecomposition of correlation matrices and random-matrix noise bounds.
//!
//! The engine is a cyclic Jacobi rotation scheme: every sweep visits all
//! index pairs `(p, q)` in a fixed order and applies the plane rotation that
//! annihilates the off-diagonal entry `a[p][q]`, accumulating the rotations
//! into the eigenvector matrix. Successive sweeps disturb earlier zeros but
//! the off-diagonal mass shrinks quadratically; iteration stops once the
//! off-diagonal Frobenius norm falls below `1e-12 * N`. For the small
//! symmetric matrices of this domain (N up to a few hundred) Jacobi gives
//! orthogonality at machine precision from directly checkable code.
//!
//! Eigenpairs are sorted by descending eigenvalue, and each eigenvector is
//! normalized to the sign convention "component of largest magnitude is
//! positive" (ties broken by lowest index). Signs of eigenvectors are
//! otherwise arbitrary, and rolling analyses that track signed components
//! would flip erratically without a fixed convention.
//!
//! For `N` *uncorrelated* Gaussian series of length `T`, random matrix
//! theory confines the correlation eigenvalues to
//!
//! ```text
//! lambda_{min,max} = 1 + 1/Q -+ 2 sqrt(1/Q),      Q = T / N
//! ```
//!
//! so eigenvalues outside `[lambda_min, lambda_max]` carry genuine
//! structure rather than sampling noise.

use std::collections::BTreeMap;

use ndarray::{Array2, ArrayView1};
use thiserror::Error;

use crate::correlation::CorrelationMatrix;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("Jacobi iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("unknown symbol {symbol}")]
    UnknownSymbol { symbol: String },
    #[error("no eigenvector {index} in a decomposition of size {n}")]
    NoSuchEigenvector { index: usize, n: usize },
}

/// Eigenvalues (descending) and orthonormal eigenvectors of a correlation
/// matrix, with the symbols they were computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    symbols: Vec<String>,
    eigenvalues: Vec<f64>,
    // Column k holds the eigenvector of eigenvalues[k].
    vectors: Array2<f64>,
}

impl EigenDecomposition {
    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues sorted descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// The `k`-th eigenvector (0 is the leading one), components in symbol
    /// order.
    pub fn eigenvector(&self, k: usize) -> ArrayView1<'_, f64> {
        self.vectors.column(k)
    }
}

/// Random-matrix-theory eigenvalue bounds for uncorrelated series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmtBounds {
    /// Aspect ratio T / N.
    pub q: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

const MAX_SWEEPS: usize = 100;

fn off_diagonal_norm(a: &Array2<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for p in 0..n {
        for q in p + 1..n {
            sum += a[[p, q]] * a[[p, q]];
        }
    }
    (2.0 * sum).sqrt()
}

/// One cyclic sweep over all pairs, keeping `a` symmetric and accumulating
/// rotations into `v`.
fn jacobi_sweep(a: &mut Array2<f64>, v: &mut Array2<f64>) {
    let n = a.nrows();
    for p in 0..n {
        for q in p + 1..n {
            let apq = a[[p, q]];
            if apq == 0.0 {
                continue;
            }
            let app = a[[p, p]];
            let aqq = a[[q, q]];
            // Smaller root of t^2 + 2 t theta - 1 = 0 for stability.
            let theta = (aqq - app) / (2.0 * apq);
            let t = if theta >= 0.0 {
                1.0 / (theta + (1.0 + theta * theta).sqrt())
            } else {
                -1.0 / (-theta + (1.0 + theta * theta).sqrt())
            };
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = t * c;

            a[[p, p]] = app - t * apq;
            a[[q, q]] = aqq + t * apq;
            a[[p, q]] = 0.0;
            a[[q, p]] = 0.0;
            for j in 0..n {
                if j == p || j == q {
                    continue;
                }
                let ajp = a[[j, p]];
                let ajq = a[[j, q]];
                a[[j, p]] = c * ajp - s * ajq;
                a[[p, j]] = a[[j, p]];
                a[[j, q]] = s * ajp + c * ajq;
                a[[q, j]] = a[[j, q]];
            }
            for j in 0..n {
                let vjp = v[[j, p]];
                let vjq = v[[j, q]];
                v[[j, p]] = c * vjp - s * vjq;
                v[[j, q]] = s * vjp + c * vjq;
            }
        }
    }
}

/// Full eigendecomposition of a correlation matrix by cyclic Jacobi
/// rotations.
///
/// Fails only if the off-diagonal norm has not dropped below `1e-12 * N`
/// after 100 sweeps, which signals a corrupted input; valid symmetric
/// matrices converge in a handful of sweeps.
pub fn eigendecompose(c: &CorrelationMatrix) -> Result<EigenDecomposition, SpectralError> {
    let n = c.n();
    let mut a = c.values().clone();
    let mut v = Array2::eye(n);
    let tolerance = 1e-12 * n as f64;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) < tolerance {
            converged = true;
            break;
        }
        jacobi_sweep(&mut a, &mut v);
    }
    if !converged && off_diagonal_norm(&a) >= tolerance {
        return Err(SpectralError::NoConvergence { sweeps: MAX_SWEEPS });
    }

    // Sort descending by eigenvalue; stable, so ties keep diagonal order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[[j, j]].partial_cmp(&a[[i, i]]).unwrap());

    let eigenvalues: Vec<f64> = order.iter().map(|&k| a[[k, k]]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (col, &k) in order.iter().enumerate() {
        // Largest-magnitude component positive, ties by lowest index.
        let mut arg = 0;
        for i in 1..n {
            if v[[i, k]].abs() > v[[arg, k]].abs() {
                arg = i;
            }
        }
        let flip = if v[[arg, k]] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vectors[[i, col]] = flip * v[[i, k]];
        }
    }

    Ok(EigenDecomposition {
        symbols: c.symbols().to_vec(),
        eigenvalues,
        vectors,
    })
}

/// Eigenvalue bounds for `n` uncorrelated Gaussian series of `t_len`
/// records.
pub fn rmt_bounds(t_len: usize, n: usize) -> RmtBounds {
    assert!(t_len >= 1 && n >= 1, "rmt_bounds requires T >= 1 and N >= 1");
    let q = t_len as f64 / n as f64;
    let center = 1.0 + 1.0 / q;
    let width = 2.0 * (1.0 / q).sqrt();
    RmtBounds {
        q,
        lambda_min: center - width,
        lambda_max: center + width,
    }
}

/// Fraction of eigenvalues strictly outside `[lambda_min, lambda_max]`.
pub fn fraction_outside_rmt(d: &EigenDecomposition, b: &RmtBounds) -> f64 {
    let outside = d
        .eigenvalues
        .iter()
        .filter(|&&l| l < b.lambda_min || l > b.lambda_max)
        .count();
    outside as f64 / d.n() as f64
}

/// Largest eigenvalue normalized by the sum of all eigenvalues: the
/// fraction of variance carried by the leading factor.
pub fn normalized_largest_eigenvalue(d: &EigenDecomposition) -> f64 {
    let sum: f64 = d.eigenvalues.iter().sum();
    d.eigenvalues[0] / sum
}

/// Components of eigenvector `index` for the requested symbols, under the
/// fixed sign convention.
pub fn eigenvector_components(
    d: &EigenDecomposition,
    index: usize,
    symbols: &[String],
) -> Result<BTreeMap<String, f64>, SpectralError> {
    if index >= d.n() {
        return Err(SpectralError::NoSuchEigenvector { index, n: d.n() });
    }
    let mut out = BTreeMap::new();
    for s in symbols {
        let i = d
            .symbols
            .iter()
            .position(|x| x == s)
            .ok_or_else(|| SpectralError::UnknownSymbol { symbol: s.clone() })?;
        out.insert(s.clone(), d.vectors[[i, index]]);
    }
    Ok(out)
}

/// Components of the leading eigenvector (the market mode) for the
/// requested symbols.
pub fn leading_eigenvector_components(
    d: &EigenDecomposition,
    symbols: &[String],
) -> Result<BTreeMap<String, f64>, SpectralError> {
    eigenvector_components(d, 0, symbols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::correlation_matrix;
    use crate::synthetic;
    use ndarray::array;
    use proptest::prelude::*;

    fn corr(values: Array2<f64>) -> CorrelationMatrix {
        let n = values.nrows();
        CorrelationMatrix::new(synthetic::symbol_labels(n), values).unwrap()
    }

    fn equicorrelated(n: usize, rho: f64) -> CorrelationMatrix {
        let mut values = Array2::from_elem((n, n), rho);
        for i in 0..n {
            values[[i, i]] = 1.0;
        }
        corr(values)
    }

    #[test]
    fn identity_decomposes_to_unit_spectrum() {
        let d = eigendecompose(&corr(Array2::eye(4))).unwrap();
        assert_eq!(d.eigenvalues(), [1.0, 1.0, 1.0, 1.0]);
        for k in 0..4 {
            let v = d.eigenvector(k);
            let mut ones = 0;
            for i in 0..4 {
                if v[i] == 1.0 {
                    ones += 1;
                } else {
                    assert_eq!(v[i], 0.0);
                }
            }
            assert_eq!(ones, 1);
        }
    }

    #[test]
    fn two_by_two_closed_form() {
        let rho = 0.5;
        let d = eigendecompose(&corr(array![[1.0, rho], [rho, 1.0]])).unwrap();
        assert!((d.eigenvalues()[0] - (1.0 + rho)).abs() < 1e-14);
        assert!((d.eigenvalues()[1] - (1.0 - rho)).abs() < 1e-14);
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = d.eigenvector(0);
        let v1 = d.eigenvector(1);
        assert!((v0[0] - inv_sqrt2).abs() < 1e-14 && (v0[1] - inv_sqrt2).abs() < 1e-14);
        assert!((v1[0] - inv_sqrt2).abs() < 1e-14 && (v1[1] + inv_sqrt2).abs() < 1e-14);
    }

    fn check_invariants(c: &CorrelationMatrix, d: &EigenDecomposition) {
        let n = c.n();
        let trace: f64 = d.eigenvalues().iter().sum();
        assert!((trace - n as f64).abs() < 1e-9, "trace {trace} != {n}");
        for k in 0..n {
            let vk = d.eigenvector(k);
            let norm: f64 = vk.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-10);
            for l in k + 1..n {
                let dot: f64 = vk.iter().zip(d.eigenvector(l)).map(|(a, b)| a * b).sum();
                assert!(dot.abs() < 1e-9);
            }
            // Residual ||C v - lambda v||.
            let mut residual = 0.0;
            for i in 0..n {
                let mut cv = 0.0;
                for j in 0..n {
                    cv += c.get(i, j) * vk[j];
                }
                let r = cv - d.eigenvalues()[k] * vk[i];
                residual += r * r;
            }
            assert!(residual.sqrt() < 1e-9);
        }
    }

    #[test]
    fn random_matrices_satisfy_invariants() {
        for seed in 0..5 {
            let r = synthetic::gaussian_returns(6, 30, seed);
            let c = correlation_matrix(&r, (0, 30)).unwrap();
            check_invariants(&c, &eigendecompose(&c).unwrap());
        }
    }

    #[test]
    fn decomposition_is_bitwise_deterministic() {
        let r = synthetic::one_factor_returns(8, 50, 0.4, 3);
        let c = correlation_matrix(&r, (0, 50)).unwrap();
        let a = eigendecompose(&c).unwrap();
        let b = eigendecompose(&c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_eigenspace_projector_is_stable() {
        // Equicorrelated 3x3 with rho = 0.5: spectrum {2, 0.5, 0.5}. The
        // repeated eigenspace is the plane orthogonal to (1,1,1)/sqrt(3);
        // individual vectors are arbitrary but the projector is not.
        let d = eigendecompose(&equicorrelated(3, 0.5)).unwrap();
        assert!((d.eigenvalues()[0] - 2.0).abs() < 1e-12);
        assert!((d.eigenvalues()[1] - 0.5).abs() < 1e-12);
        assert!((d.eigenvalues()[2] - 0.5).abs() < 1e-12);
        for i in 0..3 {
            for j in 0..3 {
                let projector: f64 = (1..3).map(|k| d.eigenvector(k)[i] * d.eigenvector(k)[j]).sum();
                let expected = if i == j { 1.0 - 1.0 / 3.0 } else { -1.0 / 3.0 };
                assert!((projector - expected).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rmt_bounds_reference_case() {
        let b = rmt_bounds(2190, 35);
        assert!((b.q - 62.57).abs() < 0.01);
        assert!((b.lambda_min - 0.76).abs() < 0.01);
        assert!((b.lambda_max - 1.27).abs() < 0.01);
    }

    #[test]
    fn rmt_bounds_plug_in_values() {
        let square = rmt_bounds(10, 10);
        assert_eq!(square.lambda_min, 0.0);
        assert_eq!(square.lambda_max, 4.0);
        let four = rmt_bounds(40, 10);
        assert_eq!(four.lambda_min, 0.25);
        assert_eq!(four.lambda_max, 2.25);
    }

    #[test]
    fn fraction_outside_edge_cases() {
        let d = eigendecompose(&corr(Array2::eye(4))).unwrap();
        let b = rmt_bounds(2190, 35);
        assert_eq!(fraction_outside_rmt(&d, &b), 0.0);

        let strong = eigendecompose(&equicorrelated(2, 0.9)).unwrap();
        // Eigenvalues {1.9, 0.1} are both outside [0.76, 1.27].
        assert_eq!(fraction_outside_rmt(&strong, &b), 1.0);
    }

    #[test]
    fn normalized_largest_eigenvalue_examples() {
        let identity = eigendecompose(&corr(Array2::eye(4))).unwrap();
        assert_eq!(normalized_largest_eigenvalue(&identity), 0.25);

        let d = eigendecompose(&equicorrelated(3, 0.5)).unwrap();
        assert!((normalized_largest_eigenvalue(&d) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn normalized_largest_eigenvalue_grows_with_loading() {
        let mut last = 0.0;
        for loading in [0.2, 0.4, 0.6, 0.8] {
            let r = synthetic::one_factor_returns(10, 2000, loading, 77);
            let c = correlation_matrix(&r, (0, 2000)).unwrap();
            let value = normalized_largest_eigenvalue(&eigendecompose(&c).unwrap());
            assert!(value > last, "loading {loading}: {value} <= {last}");
            last = value;
        }
    }

    #[test]
    fn leading_components_of_identity_are_a_basis_vector() {
        let c = corr(Array2::eye(3));
        let d = eigendecompose(&c).unwrap();
        let comps = leading_eigenvector_components(&d, c.symbols().as_ref()).unwrap();
        let values: Vec<f64> = comps.values().copied().collect();
        assert_eq!(values.iter().filter(|&&v| v == 1.0).count(), 1);
        assert_eq!(values.iter().filter(|&&v| v == 0.0).count(), 2);
    }

    #[test]
    fn equicorrelated_components_are_uniform() {
        let d = eigendecompose(&equicorrelated(4, 0.3)).unwrap();
        let comps =
            leading_eigenvector_components(&d, &synthetic::symbol_labels(4)).unwrap();
        for v in comps.values() {
            assert!((v - 0.5).abs() < 1e-9); // 1/sqrt(4)
        }
    }

    #[test]
    fn leading_vector_tracks_factor_loadings() {
        let loadings = [0.3, 0.4, 0.5, 0.6, 0.7, 0.45, 0.55, 0.35, 0.65, 0.5];
        let n = loadings.len();
        let r = synthetic::factor_returns(&loadings, 200 * n, 31);
        let c = correlation_matrix(&r, (0, 200 * n)).unwrap();
        let d = eigendecompose(&c).unwrap();
        let v = d.eigenvector(0);
        let dot: f64 = v.iter().zip(loadings.iter()).map(|(a, b)| a * b).sum();
        let nv: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = loadings.iter().map(|x| x * x).sum::<f64>().sqrt();
        let cosine = dot / (nv * nb);
        assert!(cosine > 0.99, "cosine similarity {cosine}");
    }

    #[test]
    fn component_lookup_rejects_unknowns() {
        let d = eigendecompose(&equicorrelated(3, 0.2)).unwrap();
        assert!(matches!(
            eigenvector_components(&d, 0, &["nope".to_string()]),
            Err(SpectralError::UnknownSymbol { .. })
        ));
        assert!(matches!(
            eigenvector_components(&d, 3, &[]),
            Err(SpectralError::NoSuchEigenvector { .. })
        ));
    }

    proptest! {
        // The bound width is the algebraic identity 4 sqrt(1/Q).
        #[test]
        fn rmt_band_width_identity(t in 1usize..5000, n in 1usize..200) {
            let b = rmt_bounds(t, n);
            let width = 4.0 * (1.0 / b.q).sqrt();
            prop_assert!((b.lambda_max - b.lambda_min - width).abs() < 1e-12);
        }
    }
}
