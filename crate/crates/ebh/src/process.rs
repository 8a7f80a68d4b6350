// SPDX-License-Identifier: Apache-2.0

//! Extended block Hessenberg process with partial pivoting.
//!
//! Starting from `V = V₁Γ₁₁`, the process alternates products with `A` and
//! `A⁻¹` and normalizes each new block by a pivoted LU, producing a unit lower
//! trapezoidal basis `𝕍 = [V₁, …, V₂ₘ₊₂]` of the extended block Krylov space
//! `span{V, A⁻¹V, AV, A⁻²V, …}`. Each candidate block is made to vanish on the
//! pivot rows of all earlier blocks, an oblique projection whose coefficients
//! come from `p×p` pivot-row solves rather than inner products.
//!
//! Block indices in this module are 1-based in docs (to match the usual
//! `V₁, V₂, …` notation) and 0-based in code.

use crate::dense::{gather_rows, lu_solve, pivot_block_solve, plu_factor_scaled, Dense, DEFAULT_BREAKDOWN_TOL};
use crate::error::{dims, Error, Result};
use crate::operators::FactorizedOperator;

/// How `V₁` and `V₂` are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StartMode {
    /// `plu(V)` then `plu(A⁻¹V − V₁Γ₁₂)`.
    #[default]
    Sequential,
    /// One `2p`-column `plu([V, A⁻¹V])`.
    Joint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EbhaOptions {
    pub breakdown_tol: f64,
    /// Repeat the oblique projection once more on every candidate block.
    pub reorthogonalize: bool,
    pub start: StartMode,
}

impl Default for EbhaOptions {
    fn default() -> Self {
        Self {
            breakdown_tol: DEFAULT_BREAKDOWN_TOL,
            reorthogonalize: false,
            start: StartMode::Sequential,
        }
    }
}

/// Basis blocks, pivot rows and recursion coefficients after `m` steps.
#[derive(Debug, Clone)]
pub struct ExtendedBasis {
    n: usize,
    p: usize,
    m: usize,
    blocks: Vec<Dense>,
    pivot_sets: Vec<Vec<usize>>,
    /// `forward[j-1][i-1] = H_{i,2j-1}` for `i = 1..=2j+1`.
    forward: Vec<Vec<Dense>>,
    /// `inverse[j-1][i-1] = H_{i,2j}` for `i = 1..=2j+2`.
    inverse: Vec<Vec<Dense>>,
    gamma11: Dense,
    gamma12: Dense,
    gamma22: Dense,
}

impl ExtendedBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block_size(&self) -> usize {
        self.p
    }

    pub fn steps(&self) -> usize {
        self.m
    }

    /// All `2m+2` blocks.
    pub fn blocks(&self) -> &[Dense] {
        &self.blocks
    }

    /// Block `V_k` (1-based).
    pub fn block(&self, k: usize) -> &Dense {
        &self.blocks[k - 1]
    }

    pub fn pivot_sets(&self) -> &[Vec<usize>] {
        &self.pivot_sets
    }

    pub fn gamma11(&self) -> &Dense {
        &self.gamma11
    }

    pub fn gamma12(&self) -> &Dense {
        &self.gamma12
    }

    pub fn gamma22(&self) -> &Dense {
        &self.gamma22
    }

    /// `H_{i,2j-1}`, from projecting `A·V_{2j-1}` (1-based).
    pub fn forward_coeff(&self, i: usize, j: usize) -> &Dense {
        &self.forward[j - 1][i - 1]
    }

    /// `H_{i,2j}`, from projecting `A⁻¹·V_{2j}` (1-based).
    pub fn inverse_coeff(&self, i: usize, j: usize) -> &Dense {
        &self.inverse[j - 1][i - 1]
    }

    /// `[V₁, …, V_k]` as one `n × kp` matrix.
    pub fn basis_matrix(&self, k: usize) -> Dense {
        let mut out = Dense::zeros(self.n, k * self.p);
        for (b, blk) in self.blocks[..k].iter().enumerate() {
            out.columns_mut(b * self.p, self.p).copy_from(blk);
        }
        out
    }

    /// Concatenated pivot rows `p₁, …, p_k`.
    pub fn pivot_rows(&self, k: usize) -> Vec<usize> {
        self.pivot_sets[..k].iter().flatten().copied().collect()
    }

    /// The unit lower triangular `𝕃_k = ℙ_kᵀ𝕍_k`.
    pub fn pivot_lower(&self, k: usize) -> Dense {
        gather_rows(&self.basis_matrix(k), &self.pivot_rows(k))
    }
}

fn column_maxima(w: &Dense) -> Vec<f64> {
    w.column_iter().map(|c| c.amax()).collect()
}

fn breakdown(block: usize) -> impl Fn(Error) -> Error {
    move |e| Error::Breakdown {
        block,
        source_detail: e.to_string(),
    }
}

/// Project `w` against blocks `0..count` so that it vanishes on their pivot
/// rows; returns the coefficients.
fn oblique_project(
    w: &mut Dense,
    blocks: &[Dense],
    pivots: &[Vec<usize>],
    count: usize,
    second_pass: bool,
) -> Result<Vec<Dense>> {
    let mut coeffs = Vec::with_capacity(count + 1);
    for i in 0..count {
        let h = pivot_block_solve(&blocks[i], &pivots[i], w)?;
        *w -= &blocks[i] * &h;
        coeffs.push(h);
    }
    if second_pass {
        for i in 0..count {
            let h = pivot_block_solve(&blocks[i], &pivots[i], w)?;
            *w -= &blocks[i] * &h;
            coeffs[i] += h;
        }
    }
    // the remaining entries on earlier pivot rows are rounding residue
    for set in &pivots[..count] {
        for &r in set {
            w.row_mut(r).fill(0.0);
        }
    }
    Ok(coeffs)
}

/// Run `m` steps of the process on `(A, V)`.
pub fn ebha_run(a: &FactorizedOperator, v: &Dense, m: usize, opts: &EbhaOptions) -> Result<ExtendedBasis> {
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
    let tol = opts.breakdown_tol;
    let mut blocks = Vec::with_capacity(2 * m + 2);
    let mut pivots: Vec<Vec<usize>> = Vec::with_capacity(2 * m + 2);

    let ainv_v = a.solve(v)?;
    let (gamma11, gamma12, gamma22) = match opts.start {
        StartMode::Sequential => {
            let f1 = plu_factor_scaled(v, None, tol).map_err(breakdown(1))?;
            blocks.push(f1.permuted_unit_lower);
            pivots.push(f1.pivot_rows);
            let mut w = ainv_v.clone();
            let reference = column_maxima(&w);
            let g12 = oblique_project(&mut w, &blocks, &pivots, 1, opts.reorthogonalize)
                .map_err(breakdown(2))?
                .remove(0);
            let f2 = plu_factor_scaled(&w, Some(&reference), tol).map_err(breakdown(2))?;
            blocks.push(f2.permuted_unit_lower);
            pivots.push(f2.pivot_rows);
            (f1.upper, g12, f2.upper)
        }
        StartMode::Joint => {
            let mut joint = Dense::zeros(n, 2 * p);
            joint.columns_mut(0, p).copy_from(v);
            joint.columns_mut(p, p).copy_from(&ainv_v);
            let f = plu_factor_scaled(&joint, None, tol).map_err(|e| match e {
                Error::RankDeficient { column, .. } => breakdown(1 + column / p)(e),
                other => other,
            })?;
            let l = &f.permuted_unit_lower;
            let mut v2 = l.columns(p, p).into_owned();
            for &r in &f.pivot_rows[..p] {
                v2.row_mut(r).fill(0.0);
            }
            blocks.push(l.columns(0, p).into_owned());
            blocks.push(v2);
            pivots.push(f.pivot_rows[..p].to_vec());
            pivots.push(f.pivot_rows[p..].to_vec());
            let u = &f.upper;
            (
                u.view((0, 0), (p, p)).into_owned(),
                u.view((0, p), (p, p)).into_owned(),
                u.view((p, p), (p, p)).into_owned(),
            )
        }
    };

    let mut forward = Vec::with_capacity(m);
    let mut inverse = Vec::with_capacity(m);
    for j in 1..=m {
        // odd block 2j+1 from A·V_{2j-1}
        let mut w = a.apply(&blocks[2 * j - 2])?;
        let reference = column_maxima(&w);
        let mut h = oblique_project(&mut w, &blocks, &pivots, 2 * j, opts.reorthogonalize)
            .map_err(breakdown(2 * j + 1))?;
        let f = plu_factor_scaled(&w, Some(&reference), tol).map_err(breakdown(2 * j + 1))?;
        blocks.push(f.permuted_unit_lower);
        pivots.push(f.pivot_rows);
        h.push(f.upper);
        forward.push(h);

        // even block 2j+2 from A⁻¹·V_{2j}
        let mut w = a.solve(&blocks[2 * j - 1])?;
        let reference = column_maxima(&w);
        let mut h = oblique_project(&mut w, &blocks, &pivots, 2 * j + 1, opts.reorthogonalize)
            .map_err(breakdown(2 * j + 2))?;
        let f = plu_factor_scaled(&w, Some(&reference), tol).map_err(breakdown(2 * j + 2))?;
        blocks.push(f.permuted_unit_lower);
        pivots.push(f.pivot_rows);
        h.push(f.upper);
        inverse.push(h);
    }

    Ok(ExtendedBasis {
        n,
        p,
        m,
        blocks,
        pivot_sets: pivots,
        forward,
        inverse,
        gamma11,
        gamma12,
        gamma22,
    })
}

/// `𝕍_kᴸ W = 𝕃_k⁻¹ ℙ_kᵀ W`: gather the pivot rows, then forward-substitute
/// with the unit lower triangular pivot matrix.
pub fn left_apply(basis: &ExtendedBasis, w: &Dense, k_blocks: usize) -> Result<Dense> {
    if w.nrows() != basis.n {
        return Err(Error::DimensionMismatch {
            expected: format!("{} rows", basis.n),
            got: dims(w.nrows(), w.ncols()),
        });
    }
    if k_blocks == 0 || k_blocks > basis.blocks.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("1..={} blocks", basis.blocks.len()),
            got: k_blocks.to_string(),
        });
    }
    let rows = basis.pivot_rows(k_blocks);
    let lower = basis.pivot_lower(k_blocks);
    let mut x = gather_rows(w, &rows);
    // unit diagonal: plain forward substitution
    let kp = rows.len();
    for c in 0..x.ncols() {
        for i in 0..kp {
            let mut s = x[(i, c)];
            for j in 0..i {
                s -= lower[(i, j)] * x[(j, c)];
            }
            x[(i, c)] = s;
        }
    }
    Ok(x)
}

/// Projected matrix and the coupling block to the next basis vector.
#[derive(Debug, Clone)]
pub struct ProjectedData {
    /// `𝕋₂ₘ = 𝕍ᴸA𝕍`, `2mp × 2mp`.
    pub t: Dense,
    /// `τₘ = [T_{2m+1,2m-1}, T_{2m+1,2m}]`, `p × 2p`.
    pub tau: Dense,
    /// `[S_{2m+1,2m}; S_{2m+2,2m}]`, `2p × p`; these are the last two
    /// coefficients of the final inverse step.
    pub s_tail: Dense,
    pub gamma11: Dense,
    pub p: usize,
    pub m: usize,
}

impl ProjectedData {
    pub fn dim(&self) -> usize {
        2 * self.m * self.p
    }

    /// `τₘ Eₘᵀ Y`: the trailing `2p` rows of `y` mapped through `τₘ`.
    pub fn tau_times_tail(&self, y: &Dense) -> Dense {
        let d = self.dim();
        let tail = y.rows(d - 2 * self.p, 2 * self.p);
        &self.tau * tail
    }
}

/// `X⁻¹` applied from the right.
fn right_solve(b: &Dense, x: &Dense, what: &str) -> Result<Dense> {
    let bt = b.transpose();
    lu_solve(x.transpose(), &bt)
        .map(|y| y.transpose())
        .ok_or_else(|| Error::SingularCoefficient(what.to_string()))
}

/// Assemble `𝕋₂ₘ` and `τₘ` from the recursion coefficients alone, without
/// touching `A`.
///
/// Odd block columns are the forward coefficients directly. Even block
/// columns follow from `A V₂ = (V₁Γ₁₁ − A V₁ Γ₁₂) Γ₂₂⁻¹` and
/// `A V_{2j+2} = (V_{2j} − Σ_{i≤2j+1} A V_i H_{i,2j}) H_{2j+2,2j}⁻¹`,
/// projected with `𝕍ᴸ V_k = Ê_k`.
pub fn build_t(basis: &ExtendedBasis) -> Result<ProjectedData> {
    let p = basis.p;
    let m = basis.m;
    let rows = (2 * m + 1) * p;
    let cols = 2 * m * p;
    // extended matrix with one extra block row; its last row block holds τₘ
    let mut tt = Dense::zeros(rows, cols);

    for j in 1..=m {
        let c = 2 * j - 2;
        for (i, h) in basis.forward[j - 1].iter().enumerate() {
            tt.view_mut((i * p, c * p), (p, p)).copy_from(h);
        }
    }

    // column block 2 (0-based 1)
    {
        let mut col = Dense::zeros(rows, p);
        col.view_mut((0, 0), (p, p)).copy_from(&basis.gamma11);
        col -= tt.columns(0, p) * &basis.gamma12;
        let col = right_solve(&col, &basis.gamma22, "Γ₂₂")?;
        tt.columns_mut(p, p).copy_from(&col);
    }

    for j in 1..m {
        // column block 2j+2 (0-based 2j+1)
        let mut col = Dense::zeros(rows, p);
        let target = 2 * j - 1;
        col.view_mut((target * p, 0), (p, p)).fill_with_identity();
        for i in 0..=(2 * j) {
            col -= tt.columns(i * p, p) * &basis.inverse[j - 1][i];
        }
        let col = right_solve(&col, &basis.inverse[j - 1][2 * j + 1], &format!("H_{{{},{}}}", 2 * j + 2, 2 * j))?;
        tt.columns_mut((2 * j + 1) * p, p).copy_from(&col);
    }

    let t = tt.rows(0, cols).into_owned();
    let tau = tt.view((cols, cols - 2 * p), (p, 2 * p)).into_owned();
    let last = &basis.inverse[m - 1];
    let mut s_tail = Dense::zeros(2 * p, p);
    s_tail.rows_mut(0, p).copy_from(&last[2 * m]);
    s_tail.rows_mut(p, p).copy_from(&last[2 * m + 1]);
    Ok(ProjectedData {
        t,
        tau,
        s_tail,
        gamma11: basis.gamma11.clone(),
        p,
        m,
    })
}

/// `𝕍₂ₘᴸ A 𝕍₂ₘ` by explicit products with `A`. Verification only.
pub fn build_t_direct(basis: &ExtendedBasis, a: &FactorizedOperator) -> Result<Dense> {
    let v = basis.basis_matrix(2 * basis.m);
    left_apply(basis, &a.apply(&v)?, 2 * basis.m)
}

/// `𝕊₂ₘ = 𝕍ᴸA⁻¹𝕍` with the two trailing blocks `[S_{2m+1,2m}; S_{2m+2,2m}]`.
#[derive(Debug, Clone)]
pub struct InverseProjection {
    pub s: Dense,
    /// `2p × p`.
    pub tail: Dense,
}

pub fn build_s(basis: &ExtendedBasis, a: &FactorizedOperator) -> Result<InverseProjection> {
    let m = basis.m;
    let p = basis.p;
    let v = basis.basis_matrix(2 * m);
    let ainv_v = a.solve(&v)?;
    let s = left_apply(basis, &ainv_v, 2 * m)?;
    let last = ainv_v.columns((2 * m - 1) * p, p).into_owned();
    let full = left_apply(basis, &last, 2 * m + 2)?;
    let tail = full.rows(2 * m * p, 2 * p).into_owned();
    Ok(InverseProjection { s, tail })
}

/// Largest principal-angle sine between the spans of `[V₁, V₂]` built
/// sequentially and from one joint factorization of `[V, A⁻¹V]`.
pub fn start_parity(a: &FactorizedOperator, v: &Dense) -> Result<f64> {
    let n = a.n();
    let p = v.ncols();
    let one = |start| -> Result<Dense> {
        let opts = EbhaOptions {
            start,
            ..EbhaOptions::default()
        };
        // only the first two blocks are compared; m = 1 is the smallest run
        let b = ebha_run(a, v, 1, &opts)?;
        Ok(b.basis_matrix(2))
    };
    if 4 * p > n {
        return Err(Error::DimensionMismatch {
            expected: format!("4p <= n = {n}"),
            got: format!("p = {p}"),
        });
    }
    Ok(crate::dense::subspace_sine(&one(StartMode::Sequential)?, &one(StartMode::Joint)?))
}
