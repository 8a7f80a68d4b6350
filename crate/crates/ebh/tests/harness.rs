// SPDX-License-Identifier: Apache-2.0

use ebh::harness::{run_curves, run_matfun_table, run_shifted_table, strip_timing, Command, RunConfig};

fn config(command: Command, pairs: &[(&str, &str)]) -> RunConfig {
    let mut cfg = RunConfig::new(command);
    for (k, v) in pairs {
        cfg.apply(k, v).unwrap();
    }
    cfg
}

fn body(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn curve(text: &str, function: &str, method: &str) -> Vec<(usize, f64)> {
    let tag = format!("# function={function} method={method}");
    let mut lines = text.lines().skip_while(|l| *l != tag).skip(2);
    let mut out = Vec::new();
    for l in lines.by_ref() {
        if l.is_empty() || l.starts_with('#') {
            break;
        }
        let (m, e) = l.split_once(' ').unwrap();
        out.push((m.parse().unwrap(), e.parse().unwrap()));
    }
    out
}

#[test]
fn small_five_function_table_has_errors_below_one() {
    let cfg = config(Command::Matfun, &[("n", "60"), ("p", "2"), ("m", "3,6"), ("repeat", "2")]);
    let csv = run_matfun_table(&cfg).unwrap();
    let rows = body(&csv);
    assert_eq!(rows.len(), 5 * 2 * 2);
    for r in &rows {
        assert_eq!(r[6], "ok", "{r:?}");
        let err: f64 = r[5].parse().unwrap();
        assert!(err < 1.0, "{r:?}");
    }
}

#[test]
fn tables_repeat_apart_from_timings() {
    let cfg = config(Command::Matfun, &[("n", "80"), ("p", "2"), ("m", "2,4"), ("repeat", "1"), ("seed", "13")]);
    let a = run_matfun_table(&cfg).unwrap();
    let b = run_matfun_table(&cfg).unwrap();
    let timing = ["time_s", "time_mean_s"];
    assert_eq!(strip_timing(&a, &timing), strip_timing(&b, &timing));
    let comments = |s: &str| s.lines().filter(|l| l.starts_with('#')).map(str::to_string).collect::<Vec<_>>();
    assert_eq!(comments(&a), comments(&b));
    assert!(a.contains("# seed: 13"));
}

#[test]
fn shifted_audit_tracks_formula() {
    let cfg = config(
        Command::Shifted,
        &[("gallery", "convdiff_l1"), ("grid", "20"), ("p", "2"), ("m", "6"), ("shifts", "0:5:40"), ("repeat", "1")],
    );
    let csv = run_shifted_table(&cfg).unwrap();
    let rows = body(&csv);
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    assert_eq!(r[0], "convdiff_l1");
    assert_eq!(r[1], "400");
    assert_eq!(r[7], "40/40");
    let gap: f64 = r[9].parse().unwrap();
    assert!(gap <= 1e-9, "{r:?}");
    let audit: f64 = r[8].parse().unwrap();
    assert!(audit <= 1e-7, "{r:?}");
}

#[test]
fn curves_trend_down_on_toeplitz() {
    let cfg = config(
        Command::Curves,
        &[("n", "200"), ("p", "2"), ("m", "8"), ("funcs", "sqrt,log"), ("methods", "EBH")],
    );
    let text = run_curves(&cfg).unwrap();
    for f in ["sqrt", "log"] {
        let c = curve(&text, f, "EBH");
        assert_eq!(c.len(), 8);
        assert!(c.last().unwrap().1 < 1e-3 * c[0].1, "{f}: {c:?}");
        // allow small wiggles, but every error is below the first
        assert!(c.iter().skip(1).all(|(_, e)| *e < c[0].1), "{f}: {c:?}");
    }
}

#[test]
fn single_point_curve() {
    let cfg = config(Command::Curves, &[("n", "40"), ("p", "1"), ("m", "1"), ("funcs", "exp"), ("methods", "EBH")]);
    let text = run_curves(&cfg).unwrap();
    let c = curve(&text, "exp", "EBH");
    assert_eq!(c.len(), 1);
    assert_eq!(c[0].0, 1);
}

#[test]
fn curves_agree_with_table() {
    let pairs = [("n", "120"), ("p", "2"), ("m", "5"), ("funcs", "exp,expinvx"), ("methods", "EBH,EBA"), ("repeat", "1")];
    let text = run_curves(&config(Command::Curves, &pairs)).unwrap();
    let csv = run_matfun_table(&config(Command::Matfun, &pairs)).unwrap();
    let a = ebh::operators::gallery(&ebh::operators::GallerySpec::ToeplitzInvDist { n: 120 }).unwrap();
    let v = ebh::random::uniform_block(120, 2, &mut ebh::random::rng(7));
    for row in body(&csv) {
        let spec = ebh::matfun::FunctionSpec::from_name(&row[0]).unwrap();
        let exact_norm = ebh::approx::exact_reference(&a, &v, &spec).unwrap().norm();
        let rel: f64 = row[5].parse().unwrap();
        let (_, abs) = *curve(&text, &row[0], &row[1]).iter().find(|(m, _)| *m == 5).unwrap();
        assert!((abs / exact_norm - rel).abs() <= 1e-4 * rel, "{row:?} {abs}");
    }
}
