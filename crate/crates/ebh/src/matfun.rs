// SPDX-License-Identifier: Apache-2.0

//! Functions of small dense matrices.
//!
//! `expm` is scaling and squaring with the degree-13 diagonal Padé
//! approximant. `sqrtm` is the product form of the Denman–Beavers iteration
//! with determinant scaling. `logm` takes repeated square roots until the
//! argument is near the identity, then sums a Gauss–Legendre partial
//! fraction form of the diagonal Padé approximant. Anything else goes
//! through a guarded complex eigendecomposition.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::dense::{eig_dense, eigenvalues, lu_solve, ComplexDense, Dense};
use crate::error::{dims, Error, Result};
use crate::operators::FactorizedOperator;

/// Largest acceptable 2-norm condition number of an eigenvector basis.
pub const EIGENBASIS_COND_LIMIT: f64 = 1e8;

pub type ScalarFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Which function to apply. All multivalued functions use the principal
/// branch.
#[derive(Clone)]
pub enum FunctionSpec {
    Exp,
    Sqrt,
    Log,
    /// `exp(−√x)`.
    ExpNegSqrt,
    /// `exp(−x)/x`.
    ExpNegOverX,
    /// `(x + σ)⁻¹`.
    Resolvent(f64),
    /// `Σ coeffs[k] · x^(lowest + k)`.
    Laurent { lowest: i32, coeffs: Vec<f64> },
    Custom { name: String, f: ScalarFn },
}

impl fmt::Debug for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Resolvent(s) => write!(f, "Resolvent({s})"),
            Self::Laurent { lowest, coeffs } => write!(f, "Laurent {{ lowest: {lowest}, coeffs: {coeffs:?} }}"),
            Self::Custom { name, .. } => write!(f, "Custom({name})"),
            other => f.write_str(other.name()),
        }
    }
}

impl FunctionSpec {
    /// Parse one of `exp`, `sqrt`, `log`, `expnegsqrt`, `expinvx`,
    /// `resolvent:<σ>`.
    pub fn from_name(name: &str) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        Ok(match lower.as_str() {
            "exp" => Self::Exp,
            "sqrt" => Self::Sqrt,
            "log" => Self::Log,
            "expnegsqrt" | "exp_neg_sqrt" => Self::ExpNegSqrt,
            "expinvx" | "exp_neg_over_x" => Self::ExpNegOverX,
            other => match other.strip_prefix("resolvent:") {
                Some(s) => Self::Resolvent(
                    s.parse()
                        .map_err(|_| Error::BadConfig(format!("bad resolvent shift '{s}'")))?,
                ),
                None => return Err(Error::BadConfig(format!("unknown function '{name}'"))),
            },
        })
    }

    pub fn name(&self) -> &str {
        match self {
            Self::Exp => "exp",
            Self::Sqrt => "sqrt",
            Self::Log => "log",
            Self::ExpNegSqrt => "expnegsqrt",
            Self::ExpNegOverX => "expinvx",
            Self::Resolvent(_) => "resolvent",
            Self::Laurent { .. } => "laurent",
            Self::Custom { name, .. } => name,
        }
    }

    /// The five functions of the comparison tables.
    pub fn standard_set() -> Vec<Self> {
        vec![Self::Exp, Self::Sqrt, Self::ExpNegSqrt, Self::Log, Self::ExpNegOverX]
    }

    pub fn eval_scalar(&self, z: Complex64) -> Complex64 {
        match self {
            Self::Exp => z.exp(),
            Self::Sqrt => z.sqrt(),
            Self::Log => z.ln(),
            Self::ExpNegSqrt => (-z.sqrt()).exp(),
            Self::ExpNegOverX => (-z).exp() / z,
            Self::Resolvent(s) => (z + s).inv(),
            Self::Laurent { lowest, coeffs } => coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| z.powi(lowest + k as i32) * c)
                .sum(),
            Self::Custom { f, .. } => f(z),
        }
    }
}

fn check_square(m: &Dense) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: "square matrix".into(),
            got: dims(m.nrows(), m.ncols()),
        })
    }
}

fn one_norm(m: &Dense) -> f64 {
    m.column_iter().map(|c| c.lp_norm(1)).fold(0.0, f64::max)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;
const MAX_SQUARINGS: i32 = 1000;

pub fn expm(m: &Dense) -> Result<Dense> {
    check_square(m)?;
    let n = m.nrows();
    let norm = one_norm(m);
    if !norm.is_finite() {
        return Err(Error::Overflow { norm });
    }
    if n == 0 {
        return Ok(m.clone());
    }
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    if s > MAX_SQUARINGS {
        return Err(Error::Overflow { norm });
    }
    let a = m * 0.5f64.powi(s);
    let b = &PADE13;
    let id = Dense::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]) + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &id * b[1];
    let u = &a * inner_u;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]) + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &id * b[0];
    let mut r = lu_solve(&v - &u, &(&v + &u)).ok_or(Error::Overflow { norm })?;
    for _ in 0..s {
        r = &r * &r;
    }
    if r.iter().all(|x| x.is_finite()) {
        Ok(r)
    } else {
        Err(Error::Overflow { norm })
    }
}

/// Refuse arguments with an eigenvalue on the closed negative real axis.
fn branch_guard(m: &Dense) -> Result<()> {
    let scale = m.norm().max(f64::MIN_POSITIVE);
    for z in eigenvalues(m)? {
        if z.re <= 0.0 && z.im.abs() <= 1e-14 * scale {
            return Err(Error::BranchCutViolation { re: z.re, im: z.im });
        }
    }
    Ok(())
}

const DB_MAX_ITER: usize = 100;

/// Principal square root.
pub fn sqrtm(m: &Dense) -> Result<Dense> {
    check_square(m)?;
    branch_guard(m)?;
    sqrtm_unchecked(m)
}

fn sqrtm_unchecked(m: &Dense) -> Result<Dense> {
    let n = m.nrows();
    if n == 0 {
        return Ok(m.clone());
    }
    let id = Dense::identity(n, n);
    // X → M^½ while E → I
    let mut x = m.clone();
    let mut e = m.clone();
    let mut scaling = true;
    let mut finishing = false;
    for _ in 0..DB_MAX_ITER {
        let lu = e.clone().lu();
        let mu = if scaling {
            let u = lu.u();
            let ld: f64 = (0..n).map(|i| u[(i, i)].abs().ln()).sum();
            (-ld / (2.0 * n as f64)).exp()
        } else {
            1.0
        };
        let e_inv = lu.try_inverse().ok_or(Error::SingularArgument)?;
        let mu2 = mu * mu;
        let x_next = &x * (&id + &e_inv / mu2) * (0.5 * mu);
        let e_next = (&id * 2.0 + &e * mu2 + &e_inv / mu2) * 0.25;
        let change = (&x_next - &x).norm() / x_next.norm();
        x = x_next;
        e = e_next;
        if finishing {
            return Ok(x);
        }
        if change < 1e-2 {
            scaling = false;
        }
        // quadratic convergence: one more step after this lands at rounding level
        if !scaling && (&e - &id).norm() <= 1e-8 {
            finishing = true;
        }
    }
    Err(Error::NoConvergence { sweeps: DB_MAX_ITER })
}

/// Nodes and weights of the `k`-point Gauss–Legendre rule on `[0, 1]`.
fn gauss_legendre01(k: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(k);
    for i in 1..=k {
        let mut t = (std::f64::consts::PI * (i as f64 - 0.25) / (k as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for j in 2..=k {
                let p2 = ((2 * j - 1) as f64 * t * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = k as f64 * (t * p1 - p0) / (t * t - 1.0);
            let step = p1 / dp;
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - t * t) * dp * dp);
        out.push(((t + 1.0) / 2.0, w / 2.0));
    }
    out
}

const LOG_PADE_NODES: usize = 8;
const LOG_SQRT_TARGET: f64 = 0.25;
const LOG_MAX_ROOTS: usize = 64;

/// Principal logarithm.
pub fn logm(m: &Dense) -> Result<Dense> {
    check_square(m)?;
    branch_guard(m)?;
    let n = m.nrows();
    let id = Dense::identity(n, n);
    let mut x = m.clone();
    let mut k = 0;
    while one_norm(&(&x - &id)) > LOG_SQRT_TARGET {
        if k == LOG_MAX_ROOTS {
            return Err(Error::NoConvergence { sweeps: k });
        }
        x = sqrtm_unchecked(&x)?;
        k += 1;
    }
    let e = &x - &id;
    let mut out = Dense::zeros(n, n);
    for (node, weight) in gauss_legendre01(LOG_PADE_NODES) {
        let denom = &id + &e * node;
        out += lu_solve(denom, &e).ok_or(Error::SingularArgument)? * weight;
    }
    Ok(out * 2f64.powi(k as i32))
}

/// Laurent polynomial `Σ c_k M^(lowest+k)`.
fn laurent_dense(m: &Dense, lowest: i32, coeffs: &[f64]) -> Result<Dense> {
    let n = m.nrows();
    let id = Dense::identity(n, n);
    let highest = lowest + coeffs.len() as i32 - 1;
    let coeff = |e: i32| coeffs.get((e - lowest) as usize).copied().unwrap_or(0.0);
    let mut out = Dense::zeros(n, n);
    if lowest <= 0 && highest >= 0 {
        out += &id * coeff(0);
    }
    let mut power = id.clone();
    for e in 1..=highest.max(0) {
        power = m * power;
        if e >= lowest {
            out += &power * coeff(e);
        }
    }
    if lowest < 0 {
        let inv = lu_solve(m.clone(), &id).ok_or(Error::SingularArgument)?;
        let mut power = id;
        for e in 1..=-lowest {
            power = &inv * power;
            if -e <= highest {
                out += &power * coeff(-e);
            }
        }
    }
    Ok(out)
}

/// Apply `f` through the eigendecomposition, refusing ill-conditioned bases.
fn funm_eig(m: &Dense, f: impl Fn(Complex64) -> Complex64) -> Result<Dense> {
    let n = m.nrows();
    if n == 0 {
        return Ok(m.clone());
    }
    let eig = eig_dense(m)?;
    if !(eig.condition_estimate <= EIGENBASIS_COND_LIMIT) {
        return Err(Error::IllConditionedEigenbasis {
            cond: eig.condition_estimate,
            limit: EIGENBASIS_COND_LIMIT,
        });
    }
    let w = &eig.eigenvectors;
    let w_inv = w.clone().try_inverse().ok_or(Error::IllConditionedEigenbasis {
        cond: f64::INFINITY,
        limit: EIGENBASIS_COND_LIMIT,
    })?;
    let mut scaled: ComplexDense = w.clone();
    for (j, lam) in eig.eigenvalues.iter().enumerate() {
        let fl = f(*lam);
        for i in 0..n {
            scaled[(i, j)] *= fl;
        }
    }
    let x = scaled * w_inv;
    Ok(x.map(|z| z.re))
}

/// `f(M)` in the primary-function sense.
pub fn funm(spec: &FunctionSpec, m: &Dense) -> Result<Dense> {
    check_square(m)?;
    let n = m.nrows();
    match spec {
        FunctionSpec::Exp => expm(m),
        FunctionSpec::Sqrt => sqrtm(m),
        FunctionSpec::Log => logm(m),
        FunctionSpec::ExpNegSqrt => expm(&-sqrtm(m)?),
        FunctionSpec::ExpNegOverX => {
            let e = expm(&-m)?;
            lu_solve(m.clone(), &e).ok_or(Error::SingularArgument)
        }
        FunctionSpec::Resolvent(s) => {
            let shifted = m + Dense::identity(n, n) * *s;
            lu_solve(shifted, &Dense::identity(n, n)).ok_or(Error::SingularArgument)
        }
        FunctionSpec::Laurent { lowest, coeffs } => laurent_dense(m, *lowest, coeffs),
        FunctionSpec::Custom { f, .. } => funm_eig(m, |z| f(z)),
    }
}

/// `Σ c_k A^(lowest+k) V` by repeated products and solves.
pub fn laurent_apply(lowest: i32, coeffs: &[f64], a: &FactorizedOperator, v: &Dense) -> Result<Dense> {
    if v.nrows() != a.n() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} rows", a.n()),
            got: dims(v.nrows(), v.ncols()),
        });
    }
    let mut out = Dense::zeros(v.nrows(), v.ncols());
    let highest = lowest + coeffs.len() as i32 - 1;
    let coeff = |e: i32| -> f64 {
        let k = e - lowest;
        if k >= 0 && (k as usize) < coeffs.len() {
            coeffs[k as usize]
        } else {
            0.0
        }
    };
    if lowest <= 0 && highest >= 0 {
        out += v * coeff(0);
    }
    let mut w = v.clone();
    for e in 1..=highest.max(0) {
        w = a.apply(&w)?;
        if e >= lowest {
            out += &w * coeff(e);
        }
    }
    let mut w = v.clone();
    for e in 1..=(-lowest).max(0) {
        w = a.solve(&w)?;
        if -e <= highest {
            out += &w * coeff(-e);
        }
    }
    Ok(out)
}
