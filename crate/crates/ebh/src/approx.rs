// SPDX-License-Identifier: Apache-2.0

//! `f(A)V` through a projected matrix: `f(A)V ≈ 𝕍₂ₘ f(𝕋₂ₘ) E₁ Γ₁₁`,
//! reference values for the error, and the a posteriori bound for `exp`.

use std::time::Instant;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::arnoldi::eba_run;
use crate::dense::{spectral_norm_exact, Dense, SMALL_DIM_LIMIT};
use crate::error::{dims, Error, Result};
use crate::matfun::{expm, funm, FunctionSpec};
use crate::operators::{FactorizedOperator, ForwardForm};
use crate::process::{build_t, ebha_run, EbhaOptions, ExtendedBasis, ProjectedData};

/// Threshold above which `μ₂(A)` is treated as positive.
pub const MU2_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct ApproxResult {
    pub approximation: Dense,
    pub m: usize,
    pub relative_error: Option<f64>,
    pub bound: Option<ExpBound>,
    pub wall_time: f64,
}

impl ApproxResult {
    /// Record `‖approximation − exact‖_F / ‖exact‖_F`.
    pub fn compare(&mut self, exact: &Dense) -> f64 {
        let e = crate::dense::rel_diff(&self.approximation, exact);
        self.relative_error = Some(e);
        e
    }
}

/// Ingredients and value of the `exp` error bound.
///
/// The error is `∫₀¹ exp((1−λ)A) R(λ) dλ` with
/// `R(λ) = V₂ₘ₊₁τₘEₘᵀ exp(λ𝕋₂ₘ) E₁Γ₁₁`. `bound` uses `‖R(1)‖₂` in place of
/// `max_λ ‖R(λ)‖₂`, which is not an upper bound in general; `sampled_bound`
/// takes the maximum over a uniform grid of `λ` instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpBound {
    pub bound: f64,
    pub c2m: f64,
    pub mu2: f64,
    /// `max ‖R(λ)‖₂` over the sampled `λ`.
    pub c2m_sampled: f64,
    pub sampled_bound: f64,
}

/// Grid points in `[0, 1]` for the sampled maximum.
pub const BOUND_SAMPLES: usize = 64;

/// Run the process, then project `f`.
pub fn mf_ebh(a: &FactorizedOperator, v: &Dense, m: usize, spec: &FunctionSpec) -> Result<ApproxResult> {
    mf_ebh_with(a, v, m, spec, &EbhaOptions::default()).map(|(r, _, _)| r)
}

/// As [`mf_ebh`], also returning the basis and projected data.
pub fn mf_ebh_with(
    a: &FactorizedOperator,
    v: &Dense,
    m: usize,
    spec: &FunctionSpec,
    opts: &EbhaOptions,
) -> Result<(ApproxResult, ExtendedBasis, ProjectedData)> {
    let start = Instant::now();
    let basis = ebha_run(a, v, m, opts)?;
    let proj = build_t(&basis)?;
    let approximation = project_back(&basis, &proj, spec)?;
    let result = ApproxResult {
        approximation,
        m,
        relative_error: None,
        bound: None,
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok((result, basis, proj))
}

/// `𝕍₂ₘ f(𝕋₂ₘ) E₁ Γ₁₁` for an existing basis.
pub fn project_back(basis: &ExtendedBasis, proj: &ProjectedData, spec: &FunctionSpec) -> Result<Dense> {
    let p = proj.p;
    let f = funm(spec, &proj.t)?;
    let small = f.columns(0, p) * &proj.gamma11;
    Ok(basis.basis_matrix(2 * proj.m) * small)
}

/// The same projection with the orthonormal extended Arnoldi basis.
pub fn mf_eba(a: &FactorizedOperator, v: &Dense, m: usize, spec: &FunctionSpec) -> Result<ApproxResult> {
    let start = Instant::now();
    let basis = eba_run(a, v, m)?;
    let p = v.ncols();
    let f = funm(spec, &basis.t)?;
    let small = f.columns(0, p) * &basis.lambda11;
    let approximation = basis.basis_matrix(2 * m) * small;
    Ok(ApproxResult {
        approximation,
        m,
        relative_error: None,
        bound: None,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

fn size_guard(n: usize) -> Result<()> {
    if n > SMALL_DIM_LIMIT {
        Err(Error::SizeLimit {
            dim: n,
            limit: SMALL_DIM_LIMIT,
        })
    } else {
        Ok(())
    }
}

fn is_symmetric(a: &Dense) -> bool {
    let scale = a.amax();
    (0..a.nrows()).all(|i| (0..i).all(|j| (a[(i, j)] - a[(j, i)]).abs() <= 1e-15 * scale))
}

/// `f(A)V` for a small dense `A`: symmetric matrices go through their
/// eigendecomposition, everything else through [`funm`].
pub fn exact_dense(a: &Dense, v: &Dense, spec: &FunctionSpec) -> Result<Dense> {
    size_guard(a.nrows())?;
    if !a.is_square() || v.nrows() != a.nrows() {
        return Err(Error::DimensionMismatch {
            expected: format!("square A and {} rows in V", a.nrows()),
            got: format!("A {}, V {}", dims(a.nrows(), a.ncols()), dims(v.nrows(), v.ncols())),
        });
    }
    if is_symmetric(a) {
        let eig = SymmetricEigen::new(a.clone());
        let mut fl = Vec::with_capacity(a.nrows());
        for &l in eig.eigenvalues.iter() {
            let z = spec.eval_scalar(Complex64::new(l, 0.0));
            if matches!(spec, FunctionSpec::Sqrt | FunctionSpec::Log | FunctionSpec::ExpNegSqrt) && l <= 0.0 {
                return Err(Error::BranchCutViolation { re: l, im: 0.0 });
            }
            if !z.re.is_finite() {
                return Err(Error::SingularArgument);
            }
            fl.push(z.re);
        }
        let q = &eig.eigenvectors;
        let mut qtv = q.transpose() * v;
        for (i, f) in fl.iter().enumerate() {
            qtv.row_mut(i).scale_mut(*f);
        }
        return Ok(q * qtv);
    }
    Ok(funm(spec, a)? * v)
}

/// `f` of one block `[[a, c], [−c, a]] = aI + cJ` with `J² = −I`: the
/// subalgebra is a copy of ℂ, so `f(aI + cJ) = Re f(a+ic) I + Im f(a+ic) J`.
fn rotation_block_function(b: &[f64; 4], spec: &FunctionSpec) -> Option<[f64; 4]> {
    let [a, c, minus_c, d] = *b;
    if a != d || c != -minus_c {
        return None;
    }
    let z = spec.eval_scalar(Complex64::new(a, c));
    Some([z.re, z.im, -z.im, z.re])
}

/// Reference `f(A)V` using whatever structure the operator exposes: 2×2
/// rotation blocks in closed form, otherwise the dense route.
pub fn exact_reference(a: &FactorizedOperator, v: &Dense, spec: &FunctionSpec) -> Result<Dense> {
    if let ForwardForm::BlockDiag2(blocks) = a.forward() {
        let mut out = Dense::zeros(v.nrows(), v.ncols());
        for (k, b) in blocks.iter().enumerate() {
            let f = match rotation_block_function(b, spec) {
                Some(f) => f,
                None => {
                    let fb = funm(spec, &Dense::from_row_slice(2, 2, b))?;
                    [fb[(0, 0)], fb[(0, 1)], fb[(1, 0)], fb[(1, 1)]]
                }
            };
            let (i, j) = (2 * k, 2 * k + 1);
            for c in 0..v.ncols() {
                let (x, y) = (v[(i, c)], v[(j, c)]);
                out[(i, c)] = f[0] * x + f[1] * y;
                out[(j, c)] = f[2] * x + f[3] * y;
            }
        }
        return Ok(out);
    }
    size_guard(a.n())?;
    exact_dense(&a.to_dense(), v, spec)
}

const MU2_POWER_ITER: usize = 20_000;
const MU2_POWER_TOL: f64 = 1e-12;

/// `μ₂(A) = ½λ_max(A + Aᵀ)`.
pub fn log_norm2(a: &FactorizedOperator) -> Result<f64> {
    if let ForwardForm::BlockDiag2(blocks) = a.forward() {
        // symmetric part of each block: [[a, s], [s, d]] with s = (b + c)/2
        return Ok(blocks
            .iter()
            .map(|&[a, b, c, d]| {
                let s = 0.5 * (b + c);
                let mid = 0.5 * (a + d);
                mid + (0.25 * (a - d) * (a - d) + s * s).sqrt()
            })
            .fold(f64::NEG_INFINITY, f64::max));
    }
    let n = a.n();
    if n <= SMALL_DIM_LIMIT {
        let d = a.to_dense();
        let sym = (&d + d.transpose()) * 0.5;
        return Ok(sym.symmetric_eigenvalues().max());
    }
    // power iteration on S + cI, with c a bound on ‖S‖ so the spectrum is
    // shifted to be nonnegative
    let sym_apply = |x: &Dense| -> Result<Dense> { Ok((a.apply(x)? + a.apply_transpose(x)?) * 0.5) };
    let mut x = Dense::from_fn(n, 1, |i, _| 1.0 + (i % 7) as f64 / 7.0);
    x /= x.norm();
    let mut c = 0.0;
    for _ in 0..30 {
        let y = sym_apply(&x)?;
        c = f64::max(c, y.norm());
        x = &y / y.norm().max(f64::MIN_POSITIVE);
    }
    c *= 1.01;
    let mut lambda = 0.0;
    for _ in 0..MU2_POWER_ITER {
        let y = sym_apply(&x)? + &x * c;
        let next = (x.transpose() * &y)[0];
        x = &y / y.norm();
        if (next - lambda).abs() <= MU2_POWER_TOL * next.abs() {
            lambda = next;
            break;
        }
        lambda = next;
    }
    Ok(lambda - c)
}

/// `C₂ₘ (1 − e^{μ₂})/(−μ₂)` with `C₂ₘ = ‖V₂ₘ₊₁τₘEₘᵀ exp(𝕋₂ₘ) E₁Γ₁₁‖₂`.
pub fn exp_error_bound(a: &FactorizedOperator, basis: &ExtendedBasis, proj: &ProjectedData) -> Result<ExpBound> {
    let mu2 = log_norm2(a)?;
    if mu2 > MU2_TOLERANCE {
        return Err(Error::AssumptionViolated { mu2 });
    }
    let coupling_norm = |lambda: f64| -> Result<f64> {
        let y = expm(&(&proj.t * lambda))?.columns(0, proj.p) * &proj.gamma11;
        Ok(spectral_norm_exact(&(basis.block(2 * proj.m + 1) * proj.tau_times_tail(&y))))
    };
    let c2m = coupling_norm(1.0)?;
    let mut c2m_sampled = c2m;
    for k in 0..BOUND_SAMPLES {
        c2m_sampled = c2m_sampled.max(coupling_norm(k as f64 / BOUND_SAMPLES as f64)?);
    }
    let factor = bound_factor(mu2);
    Ok(ExpBound {
        bound: c2m * factor,
        c2m,
        mu2,
        c2m_sampled,
        sampled_bound: c2m_sampled * factor,
    })
}

/// `(1 − e^{μ})/(−μ)`, continuous at `μ = 0`.
pub fn bound_factor(mu: f64) -> f64 {
    if mu == 0.0 {
        1.0
    } else {
        mu.exp_m1() / mu
    }
}
