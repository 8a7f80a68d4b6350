// SPDX-License-Identifier: Apache-2.0

use std::collections::VecDeque;

use crate::dense::Dense;
use crate::error::{dims, Error, Result};

/// Square compressed-sparse-row matrix with 0-based indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCsr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseCsr {
    /// Build from `(row, col, value)` triplets. Duplicates are summed and
    /// columns sorted within each row.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::DimensionMismatch {
                    expected: format!("indices < {n}"),
                    got: format!("({i}, {j})"),
                });
            }
            rows[i].push((j, v));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (j, v) in row {
                if last == Some(j) {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                    last = Some(j);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            n,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_dense(d: &Dense) -> Result<Self> {
        if d.nrows() != d.ncols() {
            return Err(Error::DimensionMismatch {
                expected: "square".into(),
                got: dims(d.nrows(), d.ncols()),
            });
        }
        let mut t = Vec::new();
        for i in 0..d.nrows() {
            for j in 0..d.ncols() {
                if d[(i, j)] != 0.0 {
                    t.push((i, j, d[(i, j)]));
                }
            }
        }
        Self::from_triplets(d.nrows(), &t)
    }

    pub fn nnz(&self) -> usize {
        self.row_ptr[self.n] - self.row_ptr[0]
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    /// Structural checks: monotone row pointers, in-range and strictly
    /// increasing columns per row.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::BadDimension(m.to_string()));
        if self.row_ptr.len() != self.n + 1 {
            return bad("row_ptr length must be n+1");
        }
        if self.row_ptr.windows(2).any(|w| w[0] > w[1]) {
            return bad("row_ptr must be nondecreasing");
        }
        if self.col_idx.len() != self.values.len() || self.col_idx.len() != self.nnz() {
            return bad("col_idx/values length must equal nnz");
        }
        for i in 0..self.n {
            let cols = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
            if cols.iter().any(|&c| c >= self.n) || cols.windows(2).any(|w| w[0] >= w[1]) {
                return bad("columns must be in range and strictly increasing per row");
            }
        }
        Ok(())
    }

    pub fn to_dense(&self) -> Dense {
        let mut d = Dense::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[(i, j)] += v;
            }
        }
        d
    }

    pub fn mul_dense(&self, b: &Dense) -> Dense {
        let mut out = Dense::zeros(self.n, b.ncols());
        for c in 0..b.ncols() {
            let bc = b.column(c);
            let mut oc = out.column_mut(c);
            for i in 0..self.n {
                let mut s = 0.0;
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    s += self.values[k] * bc[self.col_idx[k]];
                }
                oc[i] = s;
            }
        }
        out
    }

    pub fn transpose_mul_dense(&self, b: &Dense) -> Dense {
        let mut out = Dense::zeros(self.n, b.ncols());
        for c in 0..b.ncols() {
            for i in 0..self.n {
                let bi = b[(i, c)];
                if bi == 0.0 {
                    continue;
                }
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    out[(self.col_idx[k], c)] += self.values[k] * bi;
                }
            }
        }
        out
    }

    /// Lower and upper bandwidth `(max i-j, max j-i)` over stored entries.
    pub fn bandwidths(&self) -> (usize, usize) {
        let (mut kl, mut ku) = (0, 0);
        for i in 0..self.n {
            for (j, _) in self.row(i) {
                if i > j {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
        (kl, ku)
    }

    /// Symmetric permutation `B = A(perm, perm)`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        let mut inv = vec![0; self.n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut t = Vec::with_capacity(self.nnz());
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                t.push((inv[i], inv[j], v));
            }
        }
        Self::from_triplets(self.n, &t).expect("permutation keeps indices in range")
    }

    /// Reverse Cuthill–McKee ordering of the symmetrized sparsity pattern.
    pub fn reverse_cuthill_mckee(&self) -> Vec<usize> {
        let n = self.n;
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            for (j, _) in self.row(i) {
                if i != j {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
        let mut visited = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut by_degree: Vec<usize> = (0..n).collect();
        by_degree.sort_by_key(|&i| degree[i]);

        for &start in &by_degree {
            if visited[start] {
                continue;
            }
            let root = pseudo_peripheral(&adj, start);
            let mut queue = VecDeque::new();
            visited[root] = true;
            queue.push_back(root);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                let mut nb: Vec<usize> = adj[v].iter().copied().filter(|&u| !visited[u]).collect();
                nb.sort_by_key(|&u| degree[u]);
                for u in nb {
                    visited[u] = true;
                    queue.push_back(u);
                }
            }
        }
        order.reverse();
        order
    }
}

fn bfs_levels(adj: &[Vec<usize>], root: usize) -> (usize, usize) {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[root] = 0;
    let mut queue = VecDeque::from([root]);
    let mut far = root;
    while let Some(v) = queue.pop_front() {
        if dist[v] > dist[far] || (dist[v] == dist[far] && adj[v].len() < adj[far].len()) {
            far = v;
        }
        for &u in &adj[v] {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    (far, dist[far])
}

fn pseudo_peripheral(adj: &[Vec<usize>], start: usize) -> usize {
    let mut root = start;
    let (mut far, mut ecc) = bfs_levels(adj, root);
    for _ in 0..8 {
        let (next_far, next_ecc) = bfs_levels(adj, far);
        if next_ecc <= ecc {
            break;
        }
        root = far;
        far = next_far;
        ecc = next_ecc;
    }
    root
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates_and_sort() {
        let a = SparseCsr::from_triplets(2, &[(0, 1, 1.0), (0, 0, 2.0), (0, 1, 3.0), (1, 1, 5.0)]).unwrap();
        assert_eq!(a.row_ptr, vec![0, 2, 3]);
        assert_eq!(a.col_idx, vec![0, 1, 1]);
        assert_eq!(a.values, vec![2.0, 4.0, 5.0]);
        assert_eq!(a.nnz(), 3);
        a.validate().unwrap();
    }

    #[test]
    fn validate_rejects_unsorted() {
        let a = SparseCsr {
            n: 2,
            row_ptr: vec![0, 2, 2],
            col_idx: vec![1, 0],
            values: vec![1.0, 1.0],
        };
        assert!(a.validate().is_err());
    }

    #[test]
    fn rcm_reduces_bandwidth_of_shuffled_path() {
        // path graph 0-1-2-...-9 under a scrambled labelling
        let labels = [3, 7, 0, 9, 5, 1, 8, 2, 6, 4];
        let mut t = Vec::new();
        for k in 0..10 {
            t.push((labels[k], labels[k], 2.0));
            if k + 1 < 10 {
                t.push((labels[k], labels[k + 1], -1.0));
                t.push((labels[k + 1], labels[k], -1.0));
            }
        }
        let a = SparseCsr::from_triplets(10, &t).unwrap();
        assert!(a.bandwidths().0 > 1);
        let perm = a.reverse_cuthill_mckee();
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..10).collect::<Vec<_>>());
        assert_eq!(a.permute(&perm).bandwidths(), (1, 1));
    }

    #[test]
    fn transpose_product_matches_dense() {
        let a = SparseCsr::from_triplets(3, &[(0, 2, 1.5), (1, 0, -2.0), (2, 1, 4.0), (2, 2, 1.0)]).unwrap();
        let b = Dense::from_fn(3, 2, |i, j| (i + 2 * j) as f64 + 1.0);
        let d = a.to_dense();
        assert_eq!(a.transpose_mul_dense(&b), d.transpose() * &b);
        assert_eq!(a.mul_dense(&b), d * &b);
    }
}
