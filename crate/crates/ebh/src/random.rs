// SPDX-License-Identifier: Apache-2.0

//! Seeded random blocks and test operators.

use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

use crate::dense::Dense;
use crate::error::Result;
use crate::operators::{FactorizedOperator, SparseCsr};

pub fn rng(seed: u64) -> SmallRng {
    SmallRng::seed_from_u64(seed)
}

/// `n × p` block with independent uniform entries in `[0, 1]`.
pub fn uniform_block(n: usize, p: usize, rng: &mut SmallRng) -> Dense {
    Dense::from_fn(n, p, |_, _| rng.random::<f64>())
}

/// Random nonsymmetric sparse matrix with about `per_row` off-diagonal
/// entries per row, uniform in `[−1, 1]`, and a diagonal that dominates its
/// row so the matrix is nonsingular.
pub fn random_sparse(n: usize, per_row: usize, rng: &mut SmallRng) -> SparseCsr {
    let mut t = Vec::with_capacity(n * (per_row + 1));
    let mut row_sum = vec![0.0; n];
    for (i, sum) in row_sum.iter_mut().enumerate() {
        for _ in 0..per_row {
            let j = rng.random_range(0..n);
            if j != i {
                let v = rng.random_range(-1.0..1.0);
                *sum += f64::abs(v);
                t.push((i, j, v));
            }
        }
    }
    for (i, sum) in row_sum.iter().enumerate() {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        t.push((i, i, sign * (sum + rng.random_range(0.5..2.0))));
    }
    SparseCsr::from_triplets(n, &t).expect("indices in range")
}

/// Random sparse matrix with negative semidefinite symmetric part:
/// `−(D + GGᵀ) + (K − Kᵀ)` with `D ≥ 0` diagonal, `G` and `K` sparse.
pub fn random_dissipative(n: usize, per_row: usize, rng: &mut SmallRng) -> SparseCsr {
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, -rng.random_range(0.1..3.0)));
    }
    let mut g = Vec::new();
    for i in 0..n {
        for _ in 0..per_row.div_ceil(2) {
            g.push((i, rng.random_range(0..n), rng.random_range(-1.0..1.0)));
        }
    }
    let g = SparseCsr::from_triplets(n, &g).expect("indices in range").to_dense();
    let ggt = &g * g.transpose();
    for i in 0..n {
        for j in 0..n {
            if ggt[(i, j)] != 0.0 {
                t.push((i, j, -ggt[(i, j)]));
            }
        }
    }
    for i in 0..n {
        for _ in 0..per_row {
            let j = rng.random_range(0..n);
            if j != i {
                let v = rng.random_range(-2.0..2.0);
                t.push((i, j, v));
                t.push((j, i, -v));
            }
        }
    }
    SparseCsr::from_triplets(n, &t).expect("indices in range")
}

pub fn factorize(a: SparseCsr, label: &str) -> Result<FactorizedOperator> {
    Ok(FactorizedOperator::from_csr(a)?.with_label(label))
}
