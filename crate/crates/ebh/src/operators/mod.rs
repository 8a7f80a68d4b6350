// SPDX-License-Identifier: Apache-2.0

//! The large matrix `A` seen through two block actions: `A·B` and `A⁻¹·B`.
//! The inverse action is factorized once at construction.

mod banded;
mod csr;
mod flops;
mod gallery;
mod market;

pub use banded::BandedLu;
pub use csr::SparseCsr;
pub use flops::{flop_estimate, FlopCount, FlopEstimate};
pub use gallery::{gallery, GallerySpec};
pub use market::{read_matrix_market, write_matrix_market, MarketMatrix};

use nalgebra::{Dyn, LU};

use crate::dense::Dense;
use crate::error::{dims, Error, Result};

/// Dimension at or below which general sparse matrices are factored densely.
pub const DENSE_FALLBACK_DIM: usize = 2000;

/// Storage used for the forward product.
#[derive(Debug, Clone)]
pub enum ForwardForm {
    Csr(SparseCsr),
    Dense(Dense),
    /// Row-major 2×2 diagonal blocks `[a, b, c, d]`.
    BlockDiag2(Vec<[f64; 4]>),
}

#[derive(Debug, Clone)]
enum InverseAction {
    DenseLu(Box<LU<f64, Dyn, Dyn>>),
    Banded(BandedLu),
    BlockDiag2(Vec<[f64; 4]>),
}

/// Which factorization backs the inverse action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InverseKind {
    DenseLu,
    BandedLu { lower: usize, upper: usize, reordered: bool },
    BlockDiag2,
}

/// Nonsingular `A` with precomputed inverse action.
#[derive(Debug, Clone)]
pub struct FactorizedOperator {
    n: usize,
    nnz: usize,
    forward: ForwardForm,
    inverse: InverseAction,
    label: String,
}

impl FactorizedOperator {
    /// Choose a factorization for a sparse matrix from its bandwidth: the
    /// natural ordering if already narrow, otherwise reverse Cuthill–McKee;
    /// small matrices that stay wide are factored densely.
    pub fn from_csr(a: SparseCsr) -> Result<Self> {
        a.validate()?;
        let n = a.n;
        let narrow = |kl: usize, ku: usize| {
            let band_cost = (n as f64) * (kl as f64) * ((kl + ku) as f64 + 1.0);
            band_cost * 4.0 < (n as f64).powi(3) / 3.0
        };
        let (kl, ku) = a.bandwidths();
        let inverse = if narrow(kl, ku) {
            InverseAction::Banded(BandedLu::factor(&a, None)?)
        } else {
            let perm = a.reverse_cuthill_mckee();
            let (pkl, pku) = a.permute(&perm).bandwidths();
            if narrow(pkl, pku) || n > DENSE_FALLBACK_DIM {
                InverseAction::Banded(BandedLu::factor(&a, Some(perm))?)
            } else {
                InverseAction::DenseLu(Box::new(dense_lu(a.to_dense())?))
            }
        };
        Ok(Self {
            n,
            nnz: a.nnz(),
            forward: ForwardForm::Csr(a),
            inverse,
            label: "csr".into(),
        })
    }

    /// Banded LU in the natural ordering, regardless of size.
    pub fn from_csr_banded(a: SparseCsr) -> Result<Self> {
        a.validate()?;
        let inverse = InverseAction::Banded(BandedLu::factor(&a, None)?);
        Ok(Self {
            n: a.n,
            nnz: a.nnz(),
            forward: ForwardForm::Csr(a),
            inverse,
            label: "csr".into(),
        })
    }

    pub fn from_dense(a: Dense) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch {
                expected: "square".into(),
                got: dims(a.nrows(), a.ncols()),
            });
        }
        let n = a.nrows();
        let nnz = a.iter().filter(|v| **v != 0.0).count();
        let lu = dense_lu(a.clone())?;
        Ok(Self {
            n,
            nnz,
            forward: ForwardForm::Dense(a),
            inverse: InverseAction::DenseLu(Box::new(lu)),
            label: "dense".into(),
        })
    }

    /// Block diagonal operator with row-major 2×2 blocks, inverted in closed form.
    pub fn block_diag2(blocks: Vec<[f64; 4]>) -> Result<Self> {
        let mut inv = Vec::with_capacity(blocks.len());
        for (k, b) in blocks.iter().enumerate() {
            let det = b[0] * b[3] - b[1] * b[2];
            let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if !(det.abs() > f64::EPSILON * scale * scale) {
                return Err(Error::SingularOperator { row: 2 * k });
            }
            inv.push([b[3] / det, -b[1] / det, -b[2] / det, b[0] / det]);
        }
        let n = 2 * blocks.len();
        let nnz = blocks.iter().map(|b| b.iter().filter(|v| **v != 0.0).count()).sum();
        Ok(Self {
            n,
            nnz,
            forward: ForwardForm::BlockDiag2(blocks),
            inverse: InverseAction::BlockDiag2(inv),
            label: "block_diag2".into(),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.nnz
    }

    pub fn forward(&self) -> &ForwardForm {
        &self.forward
    }

    pub fn inverse_kind(&self) -> InverseKind {
        match &self.inverse {
            InverseAction::DenseLu(_) => InverseKind::DenseLu,
            InverseAction::Banded(b) => {
                let (lower, upper) = b.bandwidths();
                InverseKind::BandedLu {
                    lower,
                    upper,
                    reordered: b.is_reordered(),
                }
            }
            InverseAction::BlockDiag2(_) => InverseKind::BlockDiag2,
        }
    }

    fn check_rows(&self, b: &Dense) -> Result<()> {
        if b.nrows() != self.n {
            return Err(Error::DimensionMismatch {
                expected: format!("{} rows", self.n),
                got: dims(b.nrows(), b.ncols()),
            });
        }
        Ok(())
    }

    /// `A·B`.
    pub fn apply(&self, b: &Dense) -> Result<Dense> {
        self.check_rows(b)?;
        Ok(match &self.forward {
            ForwardForm::Csr(a) => a.mul_dense(b),
            ForwardForm::Dense(a) => a * b,
            ForwardForm::BlockDiag2(blocks) => block_diag_mul(blocks, b),
        })
    }

    /// `Aᵀ·B`.
    pub fn apply_transpose(&self, b: &Dense) -> Result<Dense> {
        self.check_rows(b)?;
        Ok(match &self.forward {
            ForwardForm::Csr(a) => a.transpose_mul_dense(b),
            ForwardForm::Dense(a) => a.tr_mul(b),
            ForwardForm::BlockDiag2(blocks) => {
                let t: Vec<[f64; 4]> = blocks.iter().map(|k| [k[0], k[2], k[1], k[3]]).collect();
                block_diag_mul(&t, b)
            }
        })
    }

    /// `A⁻¹·B` through the stored factorization.
    pub fn solve(&self, b: &Dense) -> Result<Dense> {
        self.check_rows(b)?;
        Ok(match &self.inverse {
            InverseAction::DenseLu(lu) => lu
                .solve(b)
                .ok_or(Error::SingularOperator { row: 0 })?,
            InverseAction::Banded(lu) => lu.solve(b),
            InverseAction::BlockDiag2(inv) => block_diag_mul(inv, b),
        })
    }

    /// Densified copy of `A`.
    pub fn to_dense(&self) -> Dense {
        match &self.forward {
            ForwardForm::Csr(a) => a.to_dense(),
            ForwardForm::Dense(a) => a.clone(),
            ForwardForm::BlockDiag2(blocks) => {
                let mut d = Dense::zeros(self.n, self.n);
                for (k, b) in blocks.iter().enumerate() {
                    let r = 2 * k;
                    d[(r, r)] = b[0];
                    d[(r, r + 1)] = b[1];
                    d[(r + 1, r)] = b[2];
                    d[(r + 1, r + 1)] = b[3];
                }
                d
            }
        }
    }
}

fn block_diag_mul(blocks: &[[f64; 4]], b: &Dense) -> Dense {
    let mut out = Dense::zeros(b.nrows(), b.ncols());
    for c in 0..b.ncols() {
        for (k, m) in blocks.iter().enumerate() {
            let (x, y) = (b[(2 * k, c)], b[(2 * k + 1, c)]);
            out[(2 * k, c)] = m[0] * x + m[1] * y;
            out[(2 * k + 1, c)] = m[2] * x + m[3] * y;
        }
    }
    out
}

fn dense_lu(a: Dense) -> Result<LU<f64, Dyn, Dyn>> {
    let scale = a.amax();
    let n = a.nrows();
    let lu = a.lu();
    let u = lu.u();
    for i in 0..n {
        if !(u[(i, i)].abs() > f64::EPSILON * scale * 1e-3) {
            return Err(Error::SingularOperator { row: i });
        }
    }
    Ok(lu)
}
