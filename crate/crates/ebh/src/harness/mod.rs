// SPDX-License-Identifier: Apache-2.0

//! Table and curve runs behind the command-line front end. Every output
//! starts with `#` comment lines echoing the configuration and seed; numbers
//! are printed with six significant digits.

mod config;

pub use config::{Command, RunConfig, ShiftRange};

use std::fmt::Write as _;
use std::time::Instant;

use crate::approx::{exact_reference, mf_eba, mf_ebh};
use crate::error::{Error, Result};
use crate::operators::{flop_estimate, FactorizedOperator, FlopCount};
use crate::random::{rng, uniform_block};
use crate::shifted::{residual_direct, solve_shifted_with, ShiftedOptions, ShiftedProblem};

/// Six significant digits in scientific notation.
pub fn sci(x: f64) -> String {
    format!("{x:.5e}")
}

/// Median and mean of a non-empty sample.
pub fn median_mean(samples: &[f64]) -> (f64, f64) {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len();
    let median = if k % 2 == 1 { s[k / 2] } else { 0.5 * (s[k / 2 - 1] + s[k / 2]) };
    (median, s.iter().sum::<f64>() / k as f64)
}

fn header(cfg: &RunConfig, a: Option<&FactorizedOperator>) -> String {
    let mut h = String::new();
    let _ = writeln!(h, "# ebh {}", cfg.command.name());
    let _ = writeln!(h, "# config: {}", cfg.echo());
    let _ = writeln!(h, "# seed: {}", cfg.seed);
    if let Some(a) = a {
        let _ = writeln!(h, "# operator: {} n={} nnz={}", a.label(), a.n(), a.nnz());
    }
    h
}

fn status_text(e: &Error) -> String {
    e.to_string().replace([',', '\n'], ";")
}

fn timed<T>(repeat: usize, mut run: impl FnMut() -> Result<T>) -> (Result<T>, Vec<f64>) {
    let mut times = Vec::with_capacity(repeat);
    let mut first = None;
    for _ in 0..repeat {
        let t = Instant::now();
        let r = run();
        times.push(t.elapsed().as_secs_f64());
        let failed = r.is_err();
        if first.is_none() {
            first = Some(r);
        }
        if failed {
            break;
        }
    }
    (first.expect("repeat >= 1"), times)
}

/// `f(A)V` for every (function, method, m), one CSV row each.
pub fn run_matfun_table(cfg: &RunConfig) -> Result<String> {
    cfg.validate()?;
    let a = cfg.operator()?;
    let v = uniform_block(a.n(), cfg.p, &mut rng(cfg.seed));
    let mut out = header(cfg, Some(&a));
    out.push_str("function,method,m,time_s,time_mean_s,rel_err,status\n");
    for spec in cfg.function_specs()? {
        let exact = cfg.errors.then(|| exact_reference(&a, &v, &spec));
        for method in &cfg.methods {
            for &m in &cfg.m {
                let (result, times) = timed(cfg.repeat, || match method.as_str() {
                    "EBA" => mf_eba(&a, &v, m, &spec),
                    _ => mf_ebh(&a, &v, m, &spec),
                });
                let (median, mean) = median_mean(&times);
                let (err, status) = match (&result, &exact) {
                    (Err(e), _) => ("NA".to_string(), status_text(e)),
                    (Ok(_), None) => ("NA".to_string(), "ok".to_string()),
                    (Ok(_), Some(Err(e))) => ("NA".to_string(), format!("reference: {}", status_text(e))),
                    (Ok(r), Some(Ok(x))) => (sci(crate::dense::rel_diff(&r.approximation, x)), "ok".to_string()),
                };
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    spec.name(),
                    method,
                    m,
                    sci(median),
                    sci(mean),
                    err,
                    status
                );
            }
        }
    }
    Ok(out)
}

/// Up to `k` indices spread evenly over `0..total`.
pub fn sample_indices(total: usize, k: usize) -> Vec<usize> {
    if total == 0 || k == 0 {
        return Vec::new();
    }
    if k >= total {
        return (0..total).collect();
    }
    let mut idx: Vec<usize> = (0..k).map(|i| i * (total - 1) / (k - 1).max(1)).collect();
    idx.dedup();
    idx
}

/// Shifted-system runs, one CSV row per `m`.
pub fn run_shifted_table(cfg: &RunConfig) -> Result<String> {
    cfg.validate()?;
    let shifts = cfg.shifts.values();
    if shifts.is_empty() {
        return Err(Error::BadConfig("no shifts requested".into()));
    }
    let a = cfg.operator()?;
    let c = uniform_block(a.n(), cfg.p, &mut rng(cfg.seed));
    let mut out = header(cfg, Some(&a));
    out.push_str(
        "operator,n,m,restarts,time_s,time_mean_s,max_final_residual,converged,audit_max_residual,audit_max_gap,status\n",
    );
    for &m in &cfg.m {
        let problem = ShiftedProblem {
            a: &a,
            c: c.clone(),
            shifts: shifts.clone(),
            eps: cfg.eps,
            m,
            max_restarts: cfg.max_restarts,
        };
        let (timing_run, times) = timed(cfg.repeat, || solve_shifted_with(&problem, &ShiftedOptions::default()));
        let (median, mean) = median_mean(&times);
        let row = timing_run.and_then(|state| {
            let audit = sample_indices(shifts.len(), cfg.audit);
            let audited = solve_shifted_with(
                &problem,
                &ShiftedOptions {
                    audit: audit.clone(),
                    ..Default::default()
                },
            )?;
            let mut audit_res: f64 = 0.0;
            for &i in &audit {
                let s = &audited.shifts[i];
                audit_res = audit_res.max(residual_direct(&a, &c, s.sigma, &s.x)?);
            }
            let gap = audited
                .events
                .iter()
                .filter_map(|e| e.direct.map(|d| (d - e.formula).abs()))
                .fold(0.0, f64::max);
            let converged = state.shifts.iter().filter(|s| s.converged).count();
            let status = if state.all_converged() {
                "ok".to_string()
            } else if !state.stalled().is_empty() {
                status_text(&Error::ReducedSystemSingular(state.stalled()))
            } else {
                "not converged".to_string()
            };
            Ok(format!(
                "{},{},{},{},{},{},{},{}/{},{},{},{}",
                a.label(),
                a.n(),
                m,
                state.restart_count,
                sci(median),
                sci(mean),
                sci(state.max_final_residual()),
                converged,
                shifts.len(),
                sci(audit_res),
                sci(gap),
                status
            ))
        });
        match row {
            Ok(line) => {
                out.push_str(&line);
                out.push('\n');
            }
            Err(e) => {
                let _ = writeln!(out, "{},{},{},NA,NA,NA,NA,NA,NA,NA,{}", a.label(), a.n(), m, status_text(&e));
            }
        }
    }
    Ok(out)
}

/// Absolute error `‖𝕀(f) − 𝕀₂ₘ(f)‖_F` against `m = 1, …, max(m)`, one
/// block of `m error` lines per (function, method).
pub fn run_curves(cfg: &RunConfig) -> Result<String> {
    cfg.validate()?;
    let a = cfg.operator()?;
    let v = uniform_block(a.n(), cfg.p, &mut rng(cfg.seed));
    let m_max = *cfg.m.iter().max().expect("validated");
    let mut out = header(cfg, Some(&a));
    for spec in cfg.function_specs()? {
        let exact = exact_reference(&a, &v, &spec)?;
        for method in &cfg.methods {
            let _ = writeln!(out, "# function={} method={}", spec.name(), method);
            out.push_str("m error\n");
            for m in 1..=m_max {
                if 2 * (m + 1) * cfg.p > a.n() {
                    break;
                }
                let r = match method.as_str() {
                    "EBA" => mf_eba(&a, &v, m, &spec),
                    _ => mf_ebh(&a, &v, m, &spec),
                };
                match r {
                    Ok(r) => {
                        let _ = writeln!(out, "{} {}", m, sci((&r.approximation - &exact).norm()));
                    }
                    Err(e) => {
                        let _ = writeln!(out, "# m={} {}", m, status_text(&e));
                    }
                }
            }
            out.push('\n');
        }
    }
    Ok(out)
}

fn ratio_f64(r: &FlopCount) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Operation counts for each `m`; `nnz` comes from the config or, failing
/// that, from the operator.
pub fn run_flops(cfg: &RunConfig) -> Result<String> {
    cfg.validate()?;
    let (n, nnz, op) = match cfg.nnz {
        Some(z) if cfg.input.is_none() => (cfg.n, z, None),
        _ => {
            let a = cfg.operator()?;
            (a.n(), cfg.nnz.unwrap_or(a.nnz()), Some(a))
        }
    };
    let mut out = header(cfg, op.as_ref());
    out.push_str("n,p,m,nnz,summed,closed_form,discrepancy,summed_exact,closed_form_exact\n");
    for &m in &cfg.m {
        let e = flop_estimate(n, cfg.p, m, nnz);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            n,
            cfg.p,
            m,
            nnz,
            sci(ratio_f64(&e.summed)),
            sci(ratio_f64(&e.closed_form)),
            sci(ratio_f64(&e.discrepancy())),
            e.summed,
            e.closed_form
        );
    }
    Ok(out)
}

/// Dispatch on the configured command.
pub fn run(cfg: &RunConfig) -> Result<String> {
    match cfg.command {
        Command::Matfun => run_matfun_table(cfg),
        Command::Shifted => run_shifted_table(cfg),
        Command::Curves => run_curves(cfg),
        Command::Flops => run_flops(cfg),
    }
}

/// Drop `#` lines and the named timing columns so two outputs can be
/// compared for determinism.
pub fn strip_timing(csv: &str, timing_columns: &[&str]) -> String {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let Some(head) = lines.next() else {
        return String::new();
    };
    let cols: Vec<&str> = head.split(',').collect();
    let keep: Vec<usize> = (0..cols.len()).filter(|i| !timing_columns.contains(&cols[*i])).collect();
    let pick = |l: &str| -> String {
        let f: Vec<&str> = l.split(',').collect();
        keep.iter().filter_map(|&i| f.get(i).copied()).collect::<Vec<_>>().join(",")
    };
    std::iter::once(pick(head)).chain(lines.map(pick)).collect::<Vec<_>>().join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_and_mean() {
        assert_eq!(median_mean(&[3.0, 1.0, 2.0]), (2.0, 2.0));
        assert_eq!(median_mean(&[4.0, 1.0, 2.0, 3.0]), (2.5, 2.5));
    }

    #[test]
    fn sci_has_six_significant_digits() {
        assert_eq!(sci(8.06e-11), "8.06000e-11");
        assert_eq!(sci(1234567.0), "1.23457e6");
    }

    #[test]
    fn audit_sample_spread() {
        assert_eq!(sample_indices(500, 10).len(), 10);
        assert_eq!(sample_indices(500, 10)[9], 499);
        assert_eq!(sample_indices(3, 10), vec![0, 1, 2]);
        assert!(sample_indices(5, 0).is_empty());
    }

    #[test]
    fn empty_function_list_gives_header_only() {
        let mut cfg = RunConfig::new(Command::Matfun);
        cfg.apply("n", "40").unwrap();
        cfg.apply("funcs", "").unwrap();
        cfg.apply("repeat", "1").unwrap();
        let csv = run_matfun_table(&cfg).unwrap();
        let body: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body, vec!["function,method,m,time_s,time_mean_s,rel_err,status"]);
        assert!(csv.contains("# seed: 7"));
    }

    #[test]
    fn zero_shifts_is_a_config_error() {
        let mut cfg = RunConfig::new(Command::Shifted);
        cfg.apply("grid", "10").unwrap();
        cfg.apply("shifts", "0:5:0").unwrap();
        assert!(matches!(run_shifted_table(&cfg), Err(Error::BadConfig(_))));
    }

    #[test]
    fn flops_rows() {
        let mut cfg = RunConfig::new(Command::Flops);
        for (k, v) in [("n", "5000"), ("p", "5"), ("m", "10"), ("nnz", "24995")] {
            cfg.apply(k, v).unwrap();
        }
        let csv = run_flops(&cfg).unwrap();
        let row = csv.lines().last().unwrap();
        assert!(row.starts_with("5000,5,10,24995,"));
    }
}
