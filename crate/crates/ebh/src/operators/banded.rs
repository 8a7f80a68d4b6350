// SPDX-License-Identifier: Apache-2.0

//! Banded LU with partial pivoting, stored column-wise in the layout used by
//! LAPACK's `gbtrf`: row interchanges widen the upper band to `kl + ku`.

use super::csr::SparseCsr;
use crate::dense::Dense;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    /// Column `j` holds rows `j - (kl+ku) ..= j + kl`.
    band: Vec<f64>,
    ipiv: Vec<usize>,
    /// Symmetric reordering applied before factoring: new row `i` is old row `perm[i]`.
    perm: Option<Vec<usize>>,
}

impl BandedLu {
    fn width(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.width() + (i + self.ku + self.kl - j)
    }

    /// Factor `a`, optionally after the symmetric permutation `perm`.
    pub fn factor(a: &SparseCsr, perm: Option<Vec<usize>>) -> Result<Self> {
        let owned;
        let a = match &perm {
            Some(p) => {
                owned = a.permute(p);
                &owned
            }
            None => a,
        };
        let n = a.n;
        let (kl, ku) = a.bandwidths();
        let mut lu = BandedLu {
            n,
            kl,
            ku,
            band: vec![0.0; (2 * kl + ku + 1) * n],
            ipiv: vec![0; n],
            perm,
        };
        for i in 0..n {
            for (j, v) in a.row(i) {
                let k = lu.idx(i, j);
                lu.band[k] += v;
            }
        }
        lu.eliminate()?;
        Ok(lu)
    }

    fn eliminate(&mut self) -> Result<()> {
        let (n, kl) = (self.n, self.kl);
        let uw = self.kl + self.ku;
        let scale = self.band.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + uw).min(n - 1);
            let mut piv = k;
            let mut best = self.band[self.idx(k, k)].abs();
            for i in (k + 1)..=last_row {
                let v = self.band[self.idx(i, k)].abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if !(best > f64::EPSILON * scale * 1e-3) {
                return Err(Error::SingularOperator { row: k });
            }
            self.ipiv[k] = piv;
            if piv != k {
                for j in k..=last_col {
                    let (a, b) = (self.idx(k, j), self.idx(piv, j));
                    self.band.swap(a, b);
                }
            }
            let pivot = self.band[self.idx(k, k)];
            for i in (k + 1)..=last_row {
                let ik = self.idx(i, k);
                let l = self.band[ik] / pivot;
                self.band[ik] = l;
                if l == 0.0 {
                    continue;
                }
                for j in (k + 1)..=last_col {
                    let kj = self.band[self.idx(k, j)];
                    let ij = self.idx(i, j);
                    self.band[ij] -= l * kj;
                }
            }
        }
        Ok(())
    }

    pub fn solve(&self, b: &Dense) -> Dense {
        let n = self.n;
        let uw = self.kl + self.ku;
        let mut x = match &self.perm {
            Some(p) => Dense::from_fn(n, b.ncols(), |i, j| b[(p[i], j)]),
            None => b.clone(),
        };
        for c in 0..x.ncols() {
            let mut col = x.column_mut(c);
            for k in 0..n {
                let piv = self.ipiv[k];
                if piv != k {
                    col.swap_rows(k, piv);
                }
                let xk = col[k];
                if xk != 0.0 {
                    for i in (k + 1)..=(k + self.kl).min(n - 1) {
                        col[i] -= self.band[self.idx(i, k)] * xk;
                    }
                }
            }
            for k in (0..n).rev() {
                let mut s = col[k];
                for j in (k + 1)..=(k + uw).min(n - 1) {
                    s -= self.band[self.idx(k, j)] * col[j];
                }
                col[k] = s / self.band[self.idx(k, k)];
            }
        }
        match &self.perm {
            Some(p) => {
                let mut out = Dense::zeros(n, x.ncols());
                for i in 0..n {
                    for c in 0..x.ncols() {
                        out[(p[i], c)] = x[(i, c)];
                    }
                }
                out
            }
            None => x,
        }
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    pub fn is_reordered(&self) -> bool {
        self.perm.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_needing_row_interchanges() {
        // tiny diagonal forces pivoting inside the band
        let t = [
            (0, 0, 1e-8),
            (0, 1, 2.0),
            (1, 0, 3.0),
            (1, 1, 1.0),
            (1, 2, -1.0),
            (2, 1, 4.0),
            (2, 2, 0.5),
            (2, 3, 1.0),
            (3, 2, -2.0),
            (3, 3, 5.0),
        ];
        let a = SparseCsr::from_triplets(4, &t).unwrap();
        let lu = BandedLu::factor(&a, None).unwrap();
        let b = Dense::from_fn(4, 2, |i, j| (i as f64 + 1.0) * (j as f64 + 1.0));
        let x = lu.solve(&b);
        let r = a.mul_dense(&x) - &b;
        assert!(r.norm() <= 1e-12 * b.norm());
    }

    #[test]
    fn permuted_factor_solves_original_system() {
        let t = [(0, 0, 4.0), (0, 3, 1.0), (3, 0, 1.0), (3, 3, 4.0), (1, 1, 2.0), (2, 2, 3.0), (1, 2, -1.0)];
        let a = SparseCsr::from_triplets(4, &t).unwrap();
        let perm = a.reverse_cuthill_mckee();
        let lu = BandedLu::factor(&a, Some(perm)).unwrap();
        let b = Dense::from_fn(4, 1, |i, _| i as f64 - 1.0);
        let x = lu.solve(&b);
        assert!((a.mul_dense(&x) - &b).norm() <= 1e-14);
    }

    #[test]
    fn singular_band_is_rejected() {
        let a = SparseCsr::from_triplets(2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 4.0)]).unwrap();
        assert!(matches!(BandedLu::factor(&a, None), Err(Error::SingularOperator { row: 1 })));
    }
}
