// SPDX-License-Identifier: Apache-2.0

//! Dense kernels: column-major storage, the two-output pivoted LU used to
//! normalize every basis block, pivot-row solves, norms and small
//! eigendecompositions.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{dims, Error, Result};

/// Column-major dense matrix of doubles.
pub type Dense = DMatrix<f64>;

/// Column-major dense complex matrix.
pub type ComplexDense = DMatrix<Complex64>;

/// Relative pivot threshold below which a column is treated as dependent.
pub const DEFAULT_BREAKDOWN_TOL: f64 = 1e-13;

/// Largest dimension accepted by the dense eigensolver.
pub const SMALL_DIM_LIMIT: usize = 4096;

const SPECTRAL_TOL: f64 = 1e-10;
const SPECTRAL_MAX_ITER: usize = 5000;

/// Result of a partial-pivoting LU of a tall matrix, returned in the
/// "permuted lower" form: `permuted_unit_lower * upper` reproduces the input
/// without any explicit permutation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotedLuFactor {
    pub permuted_unit_lower: Dense,
    pub upper: Dense,
    /// Row index chosen as pivot for each column, in elimination order.
    pub pivot_rows: Vec<usize>,
}

impl PivotedLuFactor {
    /// Reassemble `permuted_unit_lower * upper`.
    pub fn reconstruct(&self) -> Dense {
        &self.permuted_unit_lower * &self.upper
    }
}

/// Pivoted LU of a tall matrix; the breakdown reference for each column is
/// the column's own largest entry.
pub fn plu_factor(m: &Dense) -> Result<PivotedLuFactor> {
    plu_factor_scaled(m, None, DEFAULT_BREAKDOWN_TOL)
}

/// Pivoted LU with caller-supplied per-column reference magnitudes.
///
/// A pivot is rejected when it is below `tol * max(ref_j, max_i |m_ij|)`.
/// Passing the magnitudes of a block *before* an oblique projection lets
/// the caller detect cancellation that the projected block alone cannot
/// reveal.
pub fn plu_factor_scaled(
    m: &Dense,
    reference: Option<&[f64]>,
    tol: f64,
) -> Result<PivotedLuFactor> {
    let (n, k) = m.shape();
    if n < k {
        return Err(Error::DimensionMismatch {
            expected: format!("rows >= cols ({k})"),
            got: dims(n, k),
        });
    }
    if let Some(r) = reference {
        if r.len() != k {
            return Err(Error::DimensionMismatch {
                expected: format!("{k} reference magnitudes"),
                got: r.len().to_string(),
            });
        }
    }

    let mut work = m.clone();
    let mut lower = Dense::zeros(n, k);
    let mut upper = Dense::zeros(k, k);
    let mut pivot_rows = Vec::with_capacity(k);
    let mut used = vec![false; n];

    for j in 0..k {
        let col_scale = m.column(j).amax();
        let scale = reference.map_or(col_scale, |r| r[j].max(col_scale));

        let mut piv = usize::MAX;
        let mut best = -1.0;
        for i in 0..n {
            if !used[i] {
                let v = work[(i, j)].abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
        }
        let threshold = tol * scale;
        if !(best > threshold) || best == 0.0 {
            return Err(Error::RankDeficient {
                column: j,
                pivot: best.max(0.0),
                threshold,
            });
        }
        used[piv] = true;
        pivot_rows.push(piv);

        let pivot = work[(piv, j)];
        for c in j..k {
            upper[(j, c)] = work[(piv, c)];
        }
        lower[(piv, j)] = 1.0;
        for i in 0..n {
            if used[i] {
                continue;
            }
            let l = work[(i, j)] / pivot;
            lower[(i, j)] = l;
            if l != 0.0 {
                for c in (j + 1)..k {
                    work[(i, c)] -= l * upper[(j, c)];
                }
            }
        }
    }

    Ok(PivotedLuFactor {
        permuted_unit_lower: lower,
        upper,
        pivot_rows,
    })
}

/// Row index of the unit entry in each column, found by scanning for the
/// column maximum. Mirrors the max-scan used to recover pivots from a
/// permuted lower factor; only reliable on inputs without ties.
pub fn pivots_by_max_scan(lower: &Dense) -> Vec<usize> {
    lower
        .column_iter()
        .map(|c| {
            let mut best = 0;
            for i in 0..c.len() {
                if c[i].abs() > c[best].abs() {
                    best = i;
                }
            }
            best
        })
        .collect()
}

/// Copy the listed rows of `m` into a new matrix.
pub fn gather_rows(m: &Dense, rows: &[usize]) -> Dense {
    Dense::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)])
}

/// Solve `vk(pk,:) * H = w(pk,:)` for the `p x p` coefficient `H`.
pub fn pivot_block_solve(vk: &Dense, pk: &[usize], w: &Dense) -> Result<Dense> {
    let p = vk.ncols();
    if pk.len() != p || w.nrows() != vk.nrows() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} pivots and {} rows", p, vk.nrows()),
            got: format!("{} pivots and {} rows", pk.len(), w.nrows()),
        });
    }
    if pk.iter().any(|&r| r >= vk.nrows()) {
        return Err(Error::DimensionMismatch {
            expected: format!("pivot rows < {}", vk.nrows()),
            got: format!("{pk:?}"),
        });
    }
    let block = gather_rows(vk, pk);
    let rhs = gather_rows(w, pk);
    lu_solve(block, &rhs).ok_or(Error::SingularPivotBlock)
}

/// Solve a small square system with partial-pivoting LU, rejecting
/// matrices whose pivots collapse to rounding level.
pub(crate) fn lu_solve(a: Dense, rhs: &Dense) -> Option<Dense> {
    let scale = a.amax();
    let n = a.nrows();
    let lu = a.lu();
    let u = lu.u();
    let min_piv = (0..n).map(|i| u[(i, i)].abs()).fold(f64::INFINITY, f64::min);
    if n > 0 && !(min_piv > f64::EPSILON * scale * n as f64) {
        return None;
    }
    lu.solve(rhs)
}

/// Frobenius and spectral norm of a matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub frobenius: f64,
    pub spectral: f64,
}

pub fn norms(m: &Dense) -> Norms {
    Norms {
        frobenius: m.norm(),
        spectral: spectral_norm(m),
    }
}

/// Largest singular value by power iteration on `MᵀM` (or `MMᵀ`, whichever
/// is smaller), from a fixed start vector.
pub fn spectral_norm(m: &Dense) -> f64 {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return 0.0;
    }
    let gram = if c <= r {
        m.transpose() * m
    } else {
        m * m.transpose()
    };
    let k = gram.nrows();
    // deterministic, not orthogonal to any coordinate direction
    let mut x = nalgebra::DVector::from_fn(k, |i, _| 1.0 + 0.1 * ((i * 7919 % 13) as f64));
    x /= x.norm();
    let mut lambda = 0.0;
    for _ in 0..SPECTRAL_MAX_ITER {
        let y = &gram * &x;
        let ny = y.norm();
        if ny == 0.0 {
            return 0.0;
        }
        let next = x.dot(&y);
        x = y / ny;
        if (next - lambda).abs() <= SPECTRAL_TOL * next.abs() {
            lambda = next;
            break;
        }
        lambda = next;
    }
    // one Rayleigh quotient on the converged vector
    let rq = x.dot(&(&gram * &x));
    rq.max(lambda).max(0.0).sqrt()
}

/// Spectral norm computed exactly through the eigenvalues of the smaller
/// Gram matrix; used where an underestimate would be unsafe.
pub fn spectral_norm_exact(m: &Dense) -> f64 {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return 0.0;
    }
    let gram = if c <= r {
        m.transpose() * m
    } else {
        m * m.transpose()
    };
    let ev = gram.symmetric_eigenvalues();
    ev.max().max(0.0).sqrt()
}

/// Eigenvalues, eigenvectors (unit columns) and the 2-norm condition
/// number of the eigenvector matrix.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<Complex64>,
    pub eigenvectors: ComplexDense,
    pub condition_estimate: f64,
}

const SCHUR_MAX_SWEEPS: usize = 10_000;
const SCHUR_DEFLATION_LADDER: [f64; 3] = [f64::EPSILON, 1e-14, 1e-12];

/// Eigenvalues of a small square matrix from its real Schur form.
pub fn eigenvalues(m: &Dense) -> Result<Vec<Complex64>> {
    square_guard(m)?;
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    // nalgebra's deflation test at machine epsilon can stall on clustered
    // spectra; a slightly looser test still deflates at rounding level
    for eps in SCHUR_DEFLATION_LADDER {
        if let Some(schur) = Schur::try_new(m.clone(), eps, SCHUR_MAX_SWEEPS) {
            return Ok(schur.complex_eigenvalues().iter().copied().collect());
        }
    }
    Err(Error::NoConvergence { sweeps: SCHUR_MAX_SWEEPS })
}

fn square_guard(m: &Dense) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: "square".into(),
            got: dims(m.nrows(), m.ncols()),
        });
    }
    if m.nrows() > SMALL_DIM_LIMIT {
        return Err(Error::SizeLimit {
            dim: m.nrows(),
            limit: SMALL_DIM_LIMIT,
        });
    }
    Ok(())
}

/// Full eigendecomposition of a small real matrix.
///
/// Eigenvalues come from the real Schur form; each eigenvector is refined
/// by shifted inverse iteration in complex arithmetic. Conjugate pairs share
/// one solve.
pub fn eig_dense(m: &Dense) -> Result<EigenDecomposition> {
    let lambdas = eigenvalues(m)?;
    let n = m.nrows();
    let mc: ComplexDense = m.map(|x| Complex64::new(x, 0.0));
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let mut vectors = ComplexDense::zeros(n, n);

    let mut j = 0;
    while j < n {
        let lam = lambdas[j];
        let v = inverse_iteration(&mc, lam, scale, j)?;
        vectors.set_column(j, &v);
        // nalgebra returns conjugate pairs adjacently
        if lam.im != 0.0 && j + 1 < n && (lambdas[j + 1] - lam.conj()).norm() <= 1e-12 * scale {
            vectors.set_column(j + 1, &v.map(|z| z.conj()));
            j += 2;
        } else {
            j += 1;
        }
    }

    let condition_estimate = complex_condition(&vectors);
    Ok(EigenDecomposition {
        eigenvalues: lambdas,
        eigenvectors: vectors,
        condition_estimate,
    })
}

fn inverse_iteration(
    m: &ComplexDense,
    lambda: Complex64,
    scale: f64,
    seed: usize,
) -> Result<nalgebra::DVector<Complex64>> {
    let n = m.nrows();
    let mut x = nalgebra::DVector::from_fn(n, |i, _| {
        Complex64::new(1.0 + ((i + seed) * 2654435761 % 97) as f64 / 97.0, 0.0)
    });
    x /= Complex64::new(x.norm(), 0.0);
    let mut delta = 1e-13 * scale;
    for _ in 0..12 {
        let mut shifted = m.clone();
        for i in 0..n {
            shifted[(i, i)] -= lambda + Complex64::new(delta, 0.0);
        }
        let lu = shifted.lu();
        match lu.solve(&x) {
            Some(y) => {
                let ny = y.norm();
                if !ny.is_finite() || ny == 0.0 {
                    delta *= 10.0;
                    continue;
                }
                x = y / Complex64::new(ny, 0.0);
                let resid = (m * &x - &x * lambda).norm();
                if resid <= 1e-11 * scale {
                    return Ok(x);
                }
            }
            None => delta *= 10.0,
        }
    }
    let resid = (m * &x - &x * lambda).norm();
    if resid <= 1e-10 * scale {
        Ok(x)
    } else {
        Err(Error::NoConvergence { sweeps: 12 })
    }
}

fn complex_condition(x: &ComplexDense) -> f64 {
    if x.nrows() == 0 {
        return 1.0;
    }
    let sv = x.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

/// 2-norm condition number from the singular values.
pub fn cond2(m: &Dense) -> f64 {
    let sv = m.clone().singular_values();
    let smin = sv.min();
    if smin == 0.0 {
        f64::INFINITY
    } else {
        sv.max() / smin
    }
}

/// `‖a − b‖_F / ‖b‖_F`, falling back to the absolute difference when `b = 0`.
pub fn rel_diff(a: &Dense, b: &Dense) -> f64 {
    let d = (a - b).norm();
    let nb = b.norm();
    if nb == 0.0 {
        d
    } else {
        d / nb
    }
}

/// Orthonormal basis of the column span (thin QR).
pub fn orthonormal_basis(m: &Dense) -> Dense {
    m.clone().qr().q()
}

/// Sine of the largest principal angle between two column spans of equal
/// dimension, `‖(I − QₐQₐᵀ)Q_b‖₂`.
pub fn subspace_sine(a: &Dense, b: &Dense) -> f64 {
    let qa = orthonormal_basis(a);
    let qb = orthonormal_basis(b);
    let resid = &qb - &qa * (qa.transpose() * &qb);
    spectral_norm_exact(&resid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn dm(r: usize, c: usize, v: &[f64]) -> Dense {
        Dense::from_row_slice(r, c, v)
    }

    #[test]
    fn plu_identity() {
        let f = plu_factor(&Dense::identity(3, 3)).unwrap();
        assert_eq!(f.permuted_unit_lower, Dense::identity(3, 3));
        assert_eq!(f.upper, Dense::identity(3, 3));
        assert_eq!(f.pivot_rows, vec![0, 1, 2]);
    }

    #[test]
    fn plu_two_by_two_swaps() {
        let m = dm(2, 2, &[0.0, 1.0, 2.0, 3.0]);
        let f = plu_factor(&m).unwrap();
        assert_eq!(f.permuted_unit_lower, dm(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        assert_eq!(f.upper, dm(2, 2, &[2.0, 3.0, 0.0, 1.0]));
        assert_eq!(f.pivot_rows, vec![1, 0]);
        assert_eq!(f.reconstruct(), m);
    }

    #[test]
    fn plu_single_column() {
        let m = dm(3, 1, &[1.0, 3.0, 2.0]);
        let f = plu_factor(&m).unwrap();
        assert_relative_eq!(f.permuted_unit_lower[(0, 0)], 1.0 / 3.0, epsilon = 1e-16);
        assert_eq!(f.permuted_unit_lower[(1, 0)], 1.0);
        assert_relative_eq!(f.permuted_unit_lower[(2, 0)], 2.0 / 3.0, epsilon = 1e-16);
        assert_eq!(f.upper[(0, 0)], 3.0);
        assert_eq!(f.pivot_rows, vec![1]);
        assert_relative_eq!(f.reconstruct(), m, epsilon = 1e-15);
    }

    #[test]
    fn plu_rank_deficient() {
        let m = dm(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        assert!(matches!(plu_factor(&m), Err(Error::RankDeficient { column: 1, .. })));
        let z = Dense::zeros(4, 1);
        assert!(matches!(plu_factor(&z), Err(Error::RankDeficient { column: 0, .. })));
    }

    #[test]
    fn plu_reference_scale_detects_cancellation() {
        let m = dm(2, 1, &[1e-17, 3e-17]);
        assert!(plu_factor(&m).is_ok());
        assert!(plu_factor_scaled(&m, Some(&[1.0]), DEFAULT_BREAKDOWN_TOL).is_err());
    }

    #[test]
    fn pivot_block_identity_and_forward_substitution() {
        let vk = dm(3, 2, &[1.0, 0.0, 0.3, 0.7, 0.0, 1.0]);
        let w = dm(3, 2, &[4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
        let h = pivot_block_solve(&vk, &[0, 2], &w).unwrap();
        assert_eq!(h, dm(2, 2, &[4.0, 5.0, 8.0, 9.0]));

        let vk = dm(2, 2, &[1.0, 0.0, 0.5, 1.0]);
        let w = dm(2, 2, &[2.0, 0.0, 2.0, 1.0]);
        let h = pivot_block_solve(&vk, &[0, 1], &w).unwrap();
        assert_relative_eq!(h, dm(2, 2, &[2.0, 0.0, 1.0, 1.0]), epsilon = 1e-15);
    }

    #[test]
    fn pivot_block_singular() {
        let vk = dm(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let w = Dense::identity(2, 2);
        assert_eq!(pivot_block_solve(&vk, &[0, 1], &w), Err(Error::SingularPivotBlock));
    }

    #[test]
    fn eig_diag_and_rotation() {
        let d = Dense::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0]));
        let e = eig_dense(&d).unwrap();
        let mut re: Vec<f64> = e.eigenvalues.iter().map(|z| z.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_relative_eq!(re.as_slice(), [1.0, 2.0, 3.0].as_slice(), epsilon = 1e-14);
        for j in 0..3 {
            let col = e.eigenvectors.column(j);
            let nz = col.iter().filter(|z| z.norm() > 1e-10).count();
            assert_eq!(nz, 1);
        }
        assert_relative_eq!(e.condition_estimate, 1.0, epsilon = 1e-10);

        let r = dm(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let e = eig_dense(&r).unwrap();
        let mut im: Vec<f64> = e.eigenvalues.iter().map(|z| z.im).collect();
        im.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_relative_eq!(im.as_slice(), [-1.0, 1.0].as_slice(), epsilon = 1e-14);
        assert!(e.eigenvalues.iter().all(|z| z.re.abs() < 1e-14));
    }

    #[test]
    fn eig_residual_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::SmallRng::seed_from_u64(3);
        let m = Dense::from_fn(8, 8, |_, _| rng.random::<f64>() - 0.5);
        let e = eig_dense(&m).unwrap();
        let mc = m.map(|x| Complex64::new(x, 0.0));
        let lam = ComplexDense::from_diagonal(&nalgebra::DVector::from_vec(e.eigenvalues.clone()));
        let resid = (&mc * &e.eigenvectors - &e.eigenvectors * lam).norm();
        assert!(resid <= 1e-10 * m.norm(), "residual {resid}");
    }

    #[test]
    fn eig_size_guard() {
        let big = Dense::zeros(SMALL_DIM_LIMIT + 1, SMALL_DIM_LIMIT + 1);
        assert!(matches!(eig_dense(&big), Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn norms_small() {
        let n = norms(&Dense::identity(2, 2));
        assert_relative_eq!(n.frobenius, 2f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(n.spectral, 1.0, epsilon = 1e-12);
        let d = Dense::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 4.0]));
        let n = norms(&d);
        assert_relative_eq!(n.frobenius, 5.0, epsilon = 1e-15);
        assert_relative_eq!(n.spectral, 4.0, epsilon = 1e-9);
    }

    #[test]
    fn spectral_matches_svd() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::SmallRng::seed_from_u64(11);
        let m = Dense::from_fn(20, 5, |_, _| rng.random::<f64>());
        // oracle: largest eigenvalue of MᵀM via symmetric eigensolver
        let oracle = (m.transpose() * &m).symmetric_eigenvalues().max().sqrt();
        let s = spectral_norm(&m);
        assert!((s - oracle).abs() <= 1e-8 * oracle, "{s} vs {oracle}");
        assert_relative_eq!(spectral_norm_exact(&m), oracle, max_relative = 1e-12);
    }

    fn tall_matrix() -> impl Strategy<Value = Dense> {
        (1usize..6, 0usize..6).prop_flat_map(|(c, extra)| {
            let r = c + extra;
            proptest::collection::vec(-10.0f64..10.0, r * c)
                .prop_map(move |v| Dense::from_column_slice(r, c, &v))
        })
    }

    proptest! {
        #[test]
        fn plu_invariants(m in tall_matrix()) {
            if let Ok(f) = plu_factor(&m) {
                let err = (f.reconstruct() - &m).norm();
                prop_assert!(err <= 1e-12 * m.norm().max(1e-300));
                prop_assert!(f.permuted_unit_lower.amax() <= 1.0 + 1e-12);
                let sq = gather_rows(&f.permuted_unit_lower, &f.pivot_rows);
                for i in 0..sq.nrows() {
                    prop_assert_eq!(sq[(i, i)], 1.0);
                    for j in (i + 1)..sq.ncols() {
                        prop_assert_eq!(sq[(i, j)], 0.0);
                    }
                }
                let w = Dense::from_fn(m.nrows(), 2, |i, j| (i * 3 + j) as f64 - 2.5);
                let h = pivot_block_solve(&f.permuted_unit_lower, &f.pivot_rows, &w).unwrap();
                let back = &sq * &h;
                let target = gather_rows(&w, &f.pivot_rows);
                prop_assert!((back - &target).norm() <= 1e-12 * target.norm().max(1.0));
            }
        }

        #[test]
        fn max_scan_parity(v in proptest::collection::vec(-1.0f64..1.0, 30)) {
            // continuous random entries: ties have probability zero
            let m = Dense::from_column_slice(10, 3, &v);
            if let Ok(f) = plu_factor(&m) {
                let scanned = pivots_by_max_scan(&f.permuted_unit_lower);
                let strict = f.permuted_unit_lower.column_iter().all(|c| {
                    c.iter().filter(|x| (x.abs() - 1.0).abs() < 1e-15).count() == 1
                });
                if strict {
                    prop_assert_eq!(scanned, f.pivot_rows);
                }
            }
        }
    }
}
