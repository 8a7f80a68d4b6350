// SPDX-License-Identifier: Apache-2.0

//! Test operators: a symmetric Toeplitz matrix, a block diagonal matrix of
//! 2×2 rotation-like blocks, a scaled 1D Laplacian, two 2D
//! convection–diffusion operators, and Matrix Market files.

use std::path::PathBuf;

use super::csr::SparseCsr;
use super::market::read_matrix_market;
use super::FactorizedOperator;
use crate::dense::Dense;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum GallerySpec {
    /// Dense `a_ij = 1/(1+|i-j|)`.
    ToeplitzInvDist { n: usize },
    /// `n/2` blocks `[[a_i, 1/2], [-1/2, a_i]]` with `a_i = (2i-1)/(n+1)`.
    Rot2BlockDiag { n: usize },
    /// `n² · tridiag(-1, 2, -1)`.
    TridiagScaled { n: usize },
    /// `-Δu + 10 u_x` on a `grid × grid` interior mesh of the unit square.
    ConvDiffL1 { grid: usize },
    /// `-Δu + 50(x+y) u_x + 50(x+y) u_y` on the same mesh.
    ConvDiffL2 { grid: usize },
    MatrixMarket { path: PathBuf },
}

impl GallerySpec {
    /// Parse a gallery name with a size parameter (`n`, or grid points per
    /// side for the convection–diffusion operators).
    pub fn from_name(name: &str, size: usize, path: Option<PathBuf>) -> Result<Self> {
        Ok(match name.to_ascii_lowercase().as_str() {
            "toeplitz" | "toeplitz_inv_dist" => Self::ToeplitzInvDist { n: size },
            "rot2" | "rot2_blockdiag" => Self::Rot2BlockDiag { n: size },
            "tridiag" | "tridiag_scaled" => Self::TridiagScaled { n: size },
            "convdiff_l1" | "l1" => Self::ConvDiffL1 { grid: size },
            "convdiff_l2" | "l2" => Self::ConvDiffL2 { grid: size },
            "matrix_market" | "mtx" => Self::MatrixMarket {
                path: path.ok_or_else(|| Error::BadConfig("matrix_market needs a path".into()))?,
            },
            other => return Err(Error::UnknownGallery(other.to_string())),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::ToeplitzInvDist { .. } => "toeplitz_inv_dist",
            Self::Rot2BlockDiag { .. } => "rot2_blockdiag",
            Self::TridiagScaled { .. } => "tridiag_scaled",
            Self::ConvDiffL1 { .. } => "convdiff_l1",
            Self::ConvDiffL2 { .. } => "convdiff_l2",
            Self::MatrixMarket { .. } => "matrix_market",
        }
    }
}

pub fn gallery(spec: &GallerySpec) -> Result<FactorizedOperator> {
    let op = match spec {
        GallerySpec::ToeplitzInvDist { n } => {
            positive(*n)?;
            FactorizedOperator::from_dense(toeplitz_inv_dist(*n))?
        }
        GallerySpec::Rot2BlockDiag { n } => {
            positive(*n)?;
            if n % 2 != 0 {
                return Err(Error::BadDimension(format!("rot2_blockdiag needs even n, got {n}")));
            }
            FactorizedOperator::block_diag2(rot2_blocks(*n))?
        }
        GallerySpec::TridiagScaled { n } => {
            positive(*n)?;
            FactorizedOperator::from_csr_banded(tridiag_scaled(*n))?
        }
        GallerySpec::ConvDiffL1 { grid } => {
            positive(*grid)?;
            FactorizedOperator::from_csr(convection_diffusion(*grid, |_, _| (10.0, 0.0)))?
        }
        GallerySpec::ConvDiffL2 { grid } => {
            positive(*grid)?;
            FactorizedOperator::from_csr(convection_diffusion(*grid, |x, y| {
                (50.0 * (x + y), 50.0 * (x + y))
            }))?
        }
        GallerySpec::MatrixMarket { path } => {
            if !path.exists() {
                return Err(Error::Io(format!("{} does not exist", path.display())));
            }
            FactorizedOperator::from_csr(read_matrix_market(path)?.csr)?
        }
    };
    Ok(op.with_label(spec.name()))
}

fn positive(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::BadDimension("size must be positive".into()))
    } else {
        Ok(())
    }
}

pub(crate) fn toeplitz_inv_dist(n: usize) -> Dense {
    Dense::from_fn(n, n, |i, j| 1.0 / (1.0 + i.abs_diff(j) as f64))
}

pub(crate) fn rot2_blocks(n: usize) -> Vec<[f64; 4]> {
    let c = 0.5;
    (1..=n / 2)
        .map(|i| {
            let a = (2 * i - 1) as f64 / (n + 1) as f64;
            [a, c, -c, a]
        })
        .collect()
}

pub(crate) fn tridiag_scaled(n: usize) -> SparseCsr {
    let s = (n as f64) * (n as f64);
    let mut t = Vec::with_capacity(3 * n);
    for i in 0..n {
        if i > 0 {
            t.push((i, i - 1, -s));
        }
        t.push((i, i, 2.0 * s));
        if i + 1 < n {
            t.push((i, i + 1, -s));
        }
    }
    SparseCsr::from_triplets(n, &t).expect("indices in range")
}

/// Centered differences for `-Δu + b₁ u_x + b₂ u_y` with homogeneous
/// Dirichlet data; unknowns are numbered with `x` varying fastest.
pub(crate) fn convection_diffusion(k: usize, coeff: impl Fn(f64, f64) -> (f64, f64)) -> SparseCsr {
    let h = 1.0 / (k + 1) as f64;
    let d = 1.0 / (h * h);
    let mut t = Vec::with_capacity(5 * k * k);
    for row in 0..k {
        for col in 0..k {
            let i = row * k + col;
            let (x, y) = ((col + 1) as f64 * h, (row + 1) as f64 * h);
            let (bx, by) = coeff(x, y);
            let cx = bx / (2.0 * h);
            let cy = by / (2.0 * h);
            t.push((i, i, 4.0 * d));
            if col > 0 {
                t.push((i, i - 1, -d - cx));
            }
            if col + 1 < k {
                t.push((i, i + 1, -d + cx));
            }
            if row > 0 {
                t.push((i, i - k, -d - cy));
            }
            if row + 1 < k {
                t.push((i, i + k, -d + cy));
            }
        }
    }
    SparseCsr::from_triplets(k * k, &t).expect("indices in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::InverseKind;
    use rand::{Rng, SeedableRng};

    #[test]
    fn toeplitz_entries_and_symmetry() {
        let a = toeplitz_inv_dist(4);
        assert_eq!(a[(0, 2)], 1.0 / 3.0);
        assert_eq!((&a - a.transpose()).norm(), 0.0);
    }

    #[test]
    fn rot2_first_block_and_skew_part() {
        let op = gallery(&GallerySpec::Rot2BlockDiag { n: 4 }).unwrap();
        let a = op.to_dense();
        assert_eq!(a[(0, 0)], 0.2);
        assert_eq!(a[(0, 1)], 0.5);
        assert_eq!(a[(1, 0)], -0.5);
        assert_eq!(a[(1, 1)], 0.2);
        let sym = &a + a.transpose();
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert_eq!(sym[(i, j)], 0.0);
                }
            }
        }
        assert_eq!(sym[(2, 2)], 2.0 * 0.6);
        assert!(matches!(op.inverse_kind(), InverseKind::BlockDiag2));
    }

    #[test]
    fn rot2_rejects_odd_dimension() {
        assert!(matches!(
            gallery(&GallerySpec::Rot2BlockDiag { n: 5 }),
            Err(Error::BadDimension(_))
        ));
    }

    #[test]
    fn tridiag_scaled_first_column() {
        let op = gallery(&GallerySpec::TridiagScaled { n: 4 }).unwrap();
        let mut e1 = Dense::zeros(4, 1);
        e1[0] = 1.0;
        let y = op.apply(&e1).unwrap();
        assert_eq!(y.as_slice(), &[32.0, -16.0, 0.0, 0.0]);
        assert_eq!(op.inverse_kind(), InverseKind::BandedLu { lower: 1, upper: 1, reordered: false });
    }

    #[test]
    fn convdiff_l1_stencil_by_hand() {
        // h = 1/4: diffusion 1/h² = 16, convection 10/(2h) = 20
        let a = convection_diffusion(3, |_, _| (10.0, 0.0)).to_dense();
        let center = 4; // grid point (x=2h, y=2h)
        assert_eq!(a[(center, center)], 64.0);
        assert_eq!(a[(center, center + 1)], -16.0 + 20.0);
        assert_eq!(a[(center, center - 1)], -16.0 - 20.0);
        assert_eq!(a[(center, center + 3)], -16.0);
        assert_eq!(a[(center, center - 3)], -16.0);
        // corner has only two neighbours
        assert_eq!(a.row(0).iter().filter(|v| **v != 0.0).count(), 3);
    }

    #[test]
    fn convdiff_l2_coefficients_vary_with_position() {
        let a = convection_diffusion(3, |x, y| (50.0 * (x + y), 50.0 * (x + y))).to_dense();
        // point (x=h, y=h): b = 50·(1/2) = 25, 25/(2h) = 50
        assert_eq!(a[(0, 1)], -16.0 + 50.0);
        assert_eq!(a[(0, 3)], -16.0 + 50.0);
        // point (x=3h, y=3h): b = 50·(3/2) = 75, 75/(2h) = 150
        assert_eq!(a[(8, 7)], -16.0 - 150.0);
    }

    #[test]
    fn convdiff_solve_residual() {
        let op = gallery(&GallerySpec::ConvDiffL1 { grid: 10 }).unwrap();
        let mut rng = rand::rngs::SmallRng::seed_from_u64(9);
        let b = Dense::from_fn(100, 3, |_, _| rng.random::<f64>());
        let x = op.solve(&b).unwrap();
        let r = op.apply(&x).unwrap() - &b;
        assert!(r.norm() <= 1e-10 * b.norm());
    }

    #[test]
    fn solve_inverts_apply_for_every_gallery() {
        let specs = [
            GallerySpec::ToeplitzInvDist { n: 40 },
            GallerySpec::Rot2BlockDiag { n: 40 },
            GallerySpec::TridiagScaled { n: 40 },
            GallerySpec::ConvDiffL1 { grid: 7 },
            GallerySpec::ConvDiffL2 { grid: 7 },
        ];
        let mut rng = rand::rngs::SmallRng::seed_from_u64(1);
        for spec in &specs {
            let op = gallery(spec).unwrap();
            let b = Dense::from_fn(op.n(), 4, |_, _| rng.random::<f64>());
            let x = op.solve(&op.apply(&b).unwrap()).unwrap();
            assert!((&x - &b).norm() <= 1e-10 * b.norm(), "{}", spec.name());
            let y = op.apply(&op.solve(&b).unwrap()).unwrap();
            assert!((&y - &b).norm() <= 1e-10 * b.norm(), "{}", spec.name());
        }
    }

    #[test]
    fn unknown_names() {
        assert!(matches!(GallerySpec::from_name("hilbert", 4, None), Err(Error::UnknownGallery(_))));
        assert_eq!(
            GallerySpec::from_name("toeplitz", 4, None).unwrap(),
            GallerySpec::ToeplitzInvDist { n: 4 }
        );
    }
}
