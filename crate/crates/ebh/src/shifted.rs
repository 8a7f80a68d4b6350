// SPDX-License-Identifier: Apache-2.0

//! Restarted solver for the family `(A + σI) X = C`, one shared basis per
//! cycle for all shifts.
//!
//! Every residual of a cycle lies in `range(V₂ₘ₊₁)`, with
//! `R = −V₂ₘ₊₁ τₘ Eₘᵀ Y`, so its norm is known without touching `A` and
//! the next cycle starts from `V₂ₘ₊₁` with per-shift right-hand sides.

use crate::dense::{lu_solve, pivot_block_solve, Dense};
use crate::error::{dims, Error, Result};
use crate::operators::FactorizedOperator;
use crate::process::{build_t, ebha_run, left_apply, EbhaOptions};

#[derive(Debug, Clone)]
pub struct ShiftedProblem<'a> {
    pub a: &'a FactorizedOperator,
    pub c: Dense,
    pub shifts: Vec<f64>,
    pub eps: f64,
    pub m: usize,
    /// Largest number of cycles; the first cycle counts.
    pub max_restarts: usize,
}

#[derive(Debug, Clone, Default)]
pub struct ShiftedOptions {
    pub ebha: EbhaOptions,
    /// Shift indices whose residual is also computed explicitly each cycle.
    pub audit: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ShiftState {
    pub sigma: f64,
    pub x: Dense,
    /// Reduced right-hand side coefficient for the current `V₁`.
    pub beta0: Dense,
    pub converged: bool,
    pub residual_history: Vec<f64>,
    /// The reduced matrix was singular in the latest cycle that tried it.
    pub stalled: bool,
}

/// One residual evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualEvent {
    pub cycle: usize,
    pub shift: usize,
    /// `‖V₂ₘ₊₁τₘEₘᵀY‖_F`.
    pub formula: f64,
    /// `‖C − (A+σI)X‖_F`, audited shifts only.
    pub direct: Option<f64>,
    /// `‖𝕍ᴸR‖_F`, audited shifts only.
    pub galerkin: Option<f64>,
    /// `‖R − V₂ₘ₊₁Z‖_F` with `Z` from the pivot rows of `V₂ₘ₊₁`, audited
    /// shifts only.
    pub off_block: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ShiftedState {
    pub shifts: Vec<ShiftState>,
    /// Shift indices in the order they converged.
    pub converged_set: Vec<usize>,
    /// Cycles executed.
    pub restart_count: usize,
    pub events: Vec<ResidualEvent>,
    pub c_norm: f64,
}

impl ShiftedState {
    pub fn all_converged(&self) -> bool {
        self.shifts.iter().all(|s| s.converged)
    }

    pub fn unconverged(&self) -> Vec<f64> {
        self.shifts.iter().filter(|s| !s.converged).map(|s| s.sigma).collect()
    }

    pub fn stalled(&self) -> Vec<f64> {
        self.shifts
            .iter()
            .filter(|s| !s.converged && s.stalled)
            .map(|s| s.sigma)
            .collect()
    }

    pub fn max_final_residual(&self) -> f64 {
        self.shifts
            .iter()
            .filter_map(|s| s.residual_history.last().copied())
            .fold(0.0, f64::max)
    }
}

/// `‖C − (A+σI)X‖_F`.
pub fn residual_direct(a: &FactorizedOperator, c: &Dense, sigma: f64, x: &Dense) -> Result<f64> {
    Ok(shifted_residual(a, c, sigma, x)?.norm())
}

fn shifted_residual(a: &FactorizedOperator, c: &Dense, sigma: f64, x: &Dense) -> Result<Dense> {
    Ok(c - a.apply(x)? - x * sigma)
}

/// Solve all shifts, failing if some shift is still open after the last
/// cycle.
pub fn solve_shifted(problem: &ShiftedProblem) -> Result<ShiftedState> {
    let state = solve_shifted_with(problem, &ShiftedOptions::default())?;
    if state.all_converged() {
        return Ok(state);
    }
    let stalled = state.stalled();
    if !stalled.is_empty() {
        return Err(Error::ReducedSystemSingular(stalled));
    }
    Err(Error::NotConverged {
        unconverged: state.unconverged(),
        cycles: state.restart_count,
    })
}

/// Run the cycles and return the state even when shifts remain open.
pub fn solve_shifted_with(problem: &ShiftedProblem, opts: &ShiftedOptions) -> Result<ShiftedState> {
    let a = problem.a;
    let n = a.n();
    let p = problem.c.ncols();
    let m = problem.m;
    if problem.c.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("{n} rows"),
            got: dims(problem.c.nrows(), p),
        });
    }
    if problem.shifts.is_empty() {
        return Err(Error::BadConfig("at least one shift is required".into()));
    }
    if !(problem.eps > 0.0) {
        return Err(Error::BadConfig(format!("eps must be positive, got {}", problem.eps)));
    }
    if problem.max_restarts == 0 {
        return Err(Error::BadConfig("max_restarts must be at least 1".into()));
    }

    let mut state = ShiftedState {
        shifts: problem
            .shifts
            .iter()
            .map(|&sigma| ShiftState {
                sigma,
                x: Dense::zeros(n, p),
                beta0: Dense::identity(p, p),
                converged: false,
                residual_history: Vec::new(),
                stalled: false,
            })
            .collect(),
        converged_set: Vec::new(),
        restart_count: 0,
        events: Vec::new(),
        c_norm: problem.c.norm(),
    };

    let d = 2 * m * p;
    let mut start = problem.c.clone();
    for cycle in 1..=problem.max_restarts {
        let basis = ebha_run(a, &start, m, &opts.ebha)?;
        let proj = build_t(&basis)?;
        let v2m = basis.basis_matrix(2 * m);
        let next = basis.block(2 * m + 1);
        // the new V₁Γ₁₁ equals the previous start block
        let gamma = basis.gamma11();
        state.restart_count = cycle;

        for (idx, s) in state.shifts.iter_mut().enumerate() {
            if s.converged {
                continue;
            }
            let beta = if cycle == 1 { gamma.clone() } else { gamma * &s.beta0 };
            let mut shifted = proj.t.clone();
            for i in 0..d {
                shifted[(i, i)] += s.sigma;
            }
            let mut rhs = Dense::zeros(d, p);
            rhs.rows_mut(0, p).copy_from(&beta);
            let Some(y) = lu_solve(shifted, &rhs) else {
                s.stalled = true;
                continue;
            };
            s.stalled = false;
            let z = proj.tau_times_tail(&y);
            let formula = (next * &z).norm();
            s.x += &v2m * &y;
            s.beta0 = -z;
            s.residual_history.push(formula);

            let mut event = ResidualEvent {
                cycle,
                shift: idx,
                formula,
                direct: None,
                galerkin: None,
                off_block: None,
            };
            if opts.audit.contains(&idx) {
                let r = shifted_residual(a, &problem.c, s.sigma, &s.x)?;
                event.direct = Some(r.norm());
                event.galerkin = Some(left_apply(&basis, &r, 2 * m)?.norm());
                let last = &basis.pivot_sets()[2 * m];
                let coeff = pivot_block_solve(next, last, &r)?;
                event.off_block = Some((&r - next * coeff).norm());
            }
            state.events.push(event);

            if formula < problem.eps {
                s.converged = true;
                state.converged_set.push(idx);
            }
        }

        if state.all_converged() {
            break;
        }
        start = next.clone();
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::SparseCsr;

    fn diag_op(d: &[f64]) -> FactorizedOperator {
        let t: Vec<_> = d.iter().enumerate().map(|(i, v)| (i, i, *v)).collect();
        FactorizedOperator::from_csr(SparseCsr::from_triplets(d.len(), &t).unwrap()).unwrap()
    }

    #[test]
    fn residual_direct_trivia() {
        let a = diag_op(&[1.0, 2.0, 3.0]);
        let c = Dense::from_column_slice(3, 1, &[1.0, 1.0, 1.0]);
        assert_eq!(residual_direct(&a, &c, 0.5, &Dense::zeros(3, 1)).unwrap(), c.norm());
        let x = Dense::from_column_slice(3, 1, &[1.0 / 1.5, 1.0 / 2.5, 1.0 / 3.5]);
        assert!(residual_direct(&a, &c, 0.5, &x).unwrap() <= 1e-15);
    }

    #[test]
    fn zero_shift_recovers_solve() {
        let d: Vec<f64> = (2..=61).map(|i| i as f64).collect();
        let a = diag_op(&d);
        let c = Dense::from_fn(60, 2, |i, j| 1.0 + ((i + 3 * j) % 5) as f64);
        let problem = ShiftedProblem {
            a: &a,
            c: c.clone(),
            shifts: vec![0.0],
            eps: 1e-10,
            m: 5,
            max_restarts: 20,
        };
        let opts = ShiftedOptions {
            audit: vec![0],
            ..Default::default()
        };
        let state = solve_shifted_with(&problem, &opts).unwrap();
        assert!(state.all_converged());
        let x = a.solve(&c).unwrap();
        assert!((&state.shifts[0].x - &x).norm() <= 1e-9 * x.norm());
        for e in &state.events {
            let direct = e.direct.unwrap();
            assert!((direct - e.formula).abs() <= 1e-9 * c.norm(), "{e:?}");
            assert!(e.galerkin.unwrap() <= 1e-10 * c.norm());
            assert!(e.off_block.unwrap() <= 1e-10 * c.norm());
        }
    }

    #[test]
    fn eigenvector_start_breaks_down() {
        let a = diag_op(&[1.0, 2.0, 5.0, 7.0]);
        let problem = ShiftedProblem {
            a: &a,
            c: Dense::from_column_slice(4, 1, &[1.0, 0.0, 0.0, 0.0]),
            shifts: vec![1.0],
            eps: 1e-12,
            m: 1,
            max_restarts: 5,
        };
        // A⁻¹e₁ is parallel to e₁
        assert!(matches!(solve_shifted(&problem), Err(Error::Breakdown { block: 2, .. })));
    }

    #[test]
    fn shifted_tridiagonal_against_dense_solve() {
        let n = 30;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0 + 0.1 * i as f64));
            if i + 1 < n {
                t.push((i, i + 1, -1.5));
                t.push((i + 1, i, -0.5));
            }
        }
        let csr = SparseCsr::from_triplets(n, &t).unwrap();
        let dense = csr.to_dense();
        let a = FactorizedOperator::from_csr(csr).unwrap();
        let c = Dense::from_fn(n, 2, |i, j| ((i + 2 * j) % 3) as f64 + 0.5);
        let problem = ShiftedProblem {
            a: &a,
            c: c.clone(),
            shifts: vec![1.0, 0.25],
            eps: 1e-11,
            m: 2,
            max_restarts: 60,
        };
        let state = solve_shifted(&problem).unwrap();
        for s in &state.shifts {
            let shifted = &dense + Dense::identity(n, n) * s.sigma;
            let x = shifted.lu().solve(&c).unwrap();
            assert!((&s.x - &x).norm() <= 1e-10 * x.norm());
        }
    }

    #[test]
    fn cap_reports_unconverged_shifts() {
        let d: Vec<f64> = (1..=80).map(|i| (i as f64).powf(1.5)).collect();
        let a = diag_op(&d);
        let c = Dense::from_fn(80, 1, |i, _| (i as f64 * 0.7).cos() + 1.5);
        let problem = ShiftedProblem {
            a: &a,
            c,
            shifts: vec![0.1, 3.0],
            eps: 1e-30,
            m: 2,
            max_restarts: 2,
        };
        match solve_shifted(&problem) {
            Err(Error::NotConverged { unconverged, cycles }) => {
                assert_eq!(unconverged.len(), 2);
                assert_eq!(cycles, 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_empty_shift_list() {
        let a = diag_op(&[1.0, 2.0, 3.0, 4.0]);
        let problem = ShiftedProblem {
            a: &a,
            c: Dense::from_element(4, 1, 1.0),
            shifts: vec![],
            eps: 1e-8,
            m: 1,
            max_restarts: 3,
        };
        assert!(matches!(solve_shifted(&problem), Err(Error::BadConfig(_))));
    }
}
