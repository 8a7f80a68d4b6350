// SPDX-License-Identifier: Apache-2.0

//! Extended block Arnoldi: an orthonormal basis of the same extended Krylov
//! space, built by block classical Gram–Schmidt with one reorthogonalization
//! pass over `V, A⁻¹V, AU₁, A⁻¹U₂, …`.

use crate::dense::{Dense, DEFAULT_BREAKDOWN_TOL};
use crate::error::{dims, Error, Result};
use crate::operators::FactorizedOperator;

#[derive(Debug, Clone)]
pub struct OrthoBasis {
    n: usize,
    p: usize,
    m: usize,
    blocks: Vec<Dense>,
    /// `𝕌₂ₘᵀ A 𝕌₂ₘ`.
    pub t: Dense,
    /// `V = U₁Λ₁₁`.
    pub lambda11: Dense,
}

impl OrthoBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block_size(&self) -> usize {
        self.p
    }

    pub fn steps(&self) -> usize {
        self.m
    }

    pub fn blocks(&self) -> &[Dense] {
        &self.blocks
    }

    pub fn basis_matrix(&self, k: usize) -> Dense {
        let mut out = Dense::zeros(self.n, k * self.p);
        for (b, blk) in self.blocks[..k].iter().enumerate() {
            out.columns_mut(b * self.p, self.p).copy_from(blk);
        }
        out
    }
}

/// Orthogonalize `w` against `basis` twice, then take a thin QR.
fn next_block(w: Dense, basis: &[Dense], block: usize) -> Result<(Dense, Dense)> {
    let reference: Vec<f64> = w.column_iter().map(|c| c.norm()).collect();
    let mut w = w;
    for _ in 0..2 {
        for u in basis {
            let h = u.transpose() * &w;
            w -= u * h;
        }
    }
    let qr = w.qr();
    let r = qr.r();
    for (j, reference) in reference.iter().enumerate() {
        let d = r[(j, j)].abs();
        let threshold = DEFAULT_BREAKDOWN_TOL * reference.max(f64::MIN_POSITIVE);
        if !(d > threshold) {
            return Err(Error::Breakdown {
                block,
                source_detail: format!("column {j} has norm {d:e} after orthogonalization"),
            });
        }
    }
    Ok((qr.q(), r))
}

pub fn eba_run(a: &FactorizedOperator, v: &Dense, m: usize) -> Result<OrthoBasis> {
    let n = a.n();
    let p = v.ncols();
    if v.nrows() != n || p == 0 {
        return Err(Error::DimensionMismatch {
            expected: format!("{n} x p block with p >= 1"),
            got: dims(v.nrows(), p),
        });
    }
    if m == 0 || 2 * (m + 1) * p > n {
        return Err(Error::DimensionMismatch {
            expected: format!("1 <= m and 2(m+1)p <= n = {n}"),
            got: format!("m = {m}, p = {p}"),
        });
    }
    let mut blocks: Vec<Dense> = Vec::with_capacity(2 * m + 2);
    let (u1, lambda11) = next_block(v.clone(), &blocks, 1)?;
    blocks.push(u1);
    let (u2, _) = next_block(a.solve(v)?, &blocks, 2)?;
    blocks.push(u2);
    for j in 1..=m {
        let w = a.apply(&blocks[2 * j - 2])?;
        let (u, _) = next_block(w, &blocks, 2 * j + 1)?;
        blocks.push(u);
        let w = a.solve(&blocks[2 * j - 1])?;
        let (u, _) = next_block(w, &blocks, 2 * j + 2)?;
        blocks.push(u);
    }
    let mut basis = OrthoBasis {
        n,
        p,
        m,
        blocks,
        t: Dense::zeros(0, 0),
        lambda11,
    };
    let u = basis.basis_matrix(2 * m);
    basis.t = u.transpose() * a.apply(&u)?;
    Ok(basis)
}
