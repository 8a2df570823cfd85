//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Every criterion runs its config from `configs/acceptance` through the
//! harness. The criteria run in sequence inside one test so that timing
//! budgets are not skewed by sibling tests. Set `FRACHEAT_SKIP_SLOW=1` to skip
//! the two slow items.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use fracheat::harness::{grid_roundtrip, run, BesovOutcome, ExperimentConfig, GridFile, Outcome, Report};

fn config_path(id: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/acceptance").join(format!("{id}.toml"))
}

fn run_config(id: &str, out: &Path) -> (Report, Duration) {
    let cfg = ExperimentConfig::load(&config_path(id)).unwrap_or_else(|e| panic!("{id}: {e}"));
    let start = Instant::now();
    let report = run(&cfg, out).unwrap_or_else(|e| panic!("{id}: {e}"));
    (report, start.elapsed())
}

fn fresh(id: &str) -> (Report, Duration) {
    let dir = tempfile::tempdir().unwrap();
    run_config(id, dir.path())
}

/// Written straight to the stderr handle so the line survives output capture.
fn line(text: &str) {
    let mut e = std::io::stderr();
    let _ = writeln!(e, "{text}");
}

struct Verdicts {
    failed: Vec<String>,
}

impl Verdicts {
    fn record(&mut self, id: &str, title: &str, pass: bool, detail: String) {
        line(&format!("{} {id} {title}: {detail}", if pass { "PASS" } else { "FAIL" }));
        if !pass {
            self.failed.push(id.to_string());
        }
    }
}

fn c01(v: &mut Verdicts) {
    let (r, t) = fresh("c01");
    let Outcome::Sample(rows) = r.outcome else { panic!("c01 outcome") };
    let mut worst_z = 0.0f64;
    let mut worst_rel = 0.0f64;
    for row in &rows {
        worst_z = worst_z.max((row.monte_carlo - row.exact).abs() / row.se);
        worst_rel = worst_rel.max((row.exact - row.continuum).abs() / row.continuum);
    }
    let pass = worst_z <= 3.0 && worst_rel <= 0.02 && t.as_secs_f64() <= 120.0;
    v.record("c01", "covariance law", pass, format!("max |MC - exact|/se = {worst_z:.2}, max exact vs min*min = {:.3}%, {:.0} s", 100.0 * worst_rel, t.as_secs_f64()));
}

fn c02(v: &mut Verdicts) {
    let Outcome::Moments(fits) = fresh("c02").0.outcome else { panic!("c02 outcome") };
    let mut pass = true;
    let mut detail = Vec::new();
    for f in &fits {
        let (dt, dx) = (f.time.slope - 2.0 * f.h1, f.space.slope - 2.0 * f.h2);
        pass &= dt.abs() <= 0.02 && dx.abs() <= 0.02;
        detail.push(format!("({}, {}): time {:.4}, space {:.4}", f.h1, f.h2, f.time.slope, f.space.slope));
    }
    v.record("c02", "increment scaling", pass, detail.join("; "));
}

fn besov(id: &str) -> BesovOutcome {
    let Outcome::Besov(b) = fresh(id).0.outcome else { panic!("{id} outcome") };
    b
}

fn c03(v: &mut Verdicts) {
    let b = besov("c03");
    let target = 2.0 * (3.0 - 2.0 * 0.5 - 0.8);
    let curve = b.curve_slope.expect("level curve");
    let fitted = -2.0 * b.noise_alpha[0];
    let pass = (curve - target).abs() <= 0.1 && (fitted - curve).abs() <= 0.15;
    v.record("c03", "noise Besov exponent", pass, format!("curve slope {curve:.4} (target {target:.1}), realization slope {fitted:.4}"));
}

fn c04(v: &mut Verdicts) {
    let b = besov("c04");
    let gain = b.smoothed_alpha[0] - b.noise_alpha[0];
    v.record("c04", "convolution gain", (gain - 2.0).abs() <= 0.15, format!("alpha(K*xi) - alpha(xi) = {gain:.4}"));
}

fn c05(v: &mut Verdicts) {
    let Outcome::Kernel(k) = fresh("c05").0.outcome else { panic!("c05 outcome") };
    let slope_gap = (k.gradient_fit.slope + 0.5).abs();
    let pass = k.partition <= 1e-12 && k.self_similarity <= 1e-13 && k.gradient_spread <= 1e-4 && slope_gap <= 1e-4;
    v.record(
        "c05",
        "kernel decomposition",
        pass,
        format!(
            "partition {:.1e}, self-similarity {:.1e}, gradient spread {:.1e}, gradient slope {:.6}",
            k.partition, k.self_similarity, k.gradient_spread, k.gradient_fit.slope
        ),
    );
}

fn c06(v: &mut Verdicts) {
    let Outcome::Renorm(r) = fresh("c06").0.outcome else { panic!("c06 outcome") };
    let slope = r.slopes.iter().find(|s| s.0 == 0.5 && s.1 == 0.8).expect("(0.5, 0.8) case").2;
    let ratio = |n: u32| {
        let c = r.constants.iter().find(|c| c.h1 == 0.6 && c.n == n).expect("(0.6, 0.8) level");
        c.value / n as f64
    };
    let var: Vec<f64> = [9u32, 10].iter().map(|&n| ((ratio(n + 1) - ratio(n)) / ratio(n)).abs()).collect();
    let pass = (slope - 0.4).abs() <= 0.05 && var.iter().all(|&x| x < 0.05);
    v.record("c06", "renormalisation asymptotics", pass, format!("log2 slope {slope:.4}; C^n/n variation n=9->10 {:.2}%, 10->11 {:.2}%", 100.0 * var[0], 100.0 * var[1]));
}

fn c07(v: &mut Verdicts) {
    let Outcome::Renorm(r) = fresh("c07").0.outcome else { panic!("c07 outcome") };
    let (scaled, limit) = r.limit.expect("limit");
    let gap = (scaled - limit).abs() / limit;
    v.record("c07", "explicit limit", gap <= 0.05, format!("rescaled {scaled:.8} vs limit {limit:.8} ({:.1e} relative)", gap));
}

fn c08(v: &mut Verdicts) {
    let Outcome::Chen(rows) = fresh("c08").0.outcome else { panic!("c08 outcome") };
    let worst = |name: &str| rows.iter().filter(|r| r.variant == name).map(|r| r.defect).fold(0.0, f64::max);
    let (a, b) = (worst("canonical"), worst("renormalized"));
    v.record("c08", "K-Chen identity", a <= 1e-12 && b <= 1e-12, format!("max defect canonical {a:.1e}, renormalised {b:.1e}"));
}

fn slow(v: &mut Verdicts, id: &str, title: &str) -> bool {
    if std::env::var("FRACHEAT_SKIP_SLOW").is_ok_and(|s| s == "1") {
        line(&format!("SKIP {id} {title}: FRACHEAT_SKIP_SLOW=1"));
        v.failed.push(format!("{id} (skipped)"));
        return false;
    }
    true
}

fn c09(v: &mut Verdicts) {
    if !slow(v, "c09", "area moment scan") {
        return;
    }
    let (r, t) = fresh("c09");
    let Outcome::Scan(s) = r.outcome else { panic!("c09 outcome") };
    let target = 2.0 * (4.0 - 4.0 * 0.5 - 2.0 * 0.8);
    let pass = (s.level_fit.slope - target).abs() <= 0.3 && s.n_decay > 0.0 && t.as_secs_f64() <= 1800.0;
    v.record("c09", "area moment scan", pass, format!("level slope {:.3} (target {target:.1}), n-decay {:.3}, {:.0} s", s.level_fit.slope, s.n_decay, t.as_secs_f64()));
}

fn c10(v: &mut Verdicts) {
    let Outcome::Converge(c) = fresh("c10").0.outcome else { panic!("c10 outcome") };
    let ratios: Vec<f64> = c.mean_diffs.windows(2).map(|w| w[1].1 / w[0].1).collect();
    let holder_down = c.mean_diffs.windows(2).all(|w| w[1].2 < w[0].2);
    let pass = ratios.iter().all(|&r| r <= 0.9) && holder_down;
    let h: Vec<String> = c.mean_diffs.iter().map(|d| format!("{:.2e}", d.2)).collect();
    v.record("c10", "Young convergence", pass, format!("sup ratios {:.3?}, holder diffs [{}]", ratios, h.join(", ")));
}

fn c11(v: &mut Verdicts) {
    let Outcome::Converge(c) = fresh("c11").0.outcome else { panic!("c11 outcome") };
    let sups: Vec<f64> = c.mean_diffs.iter().map(|d| d.1).collect();
    let down = sups.windows(2).all(|w| w[1] < w[0]);
    let corr = c.drift_correlation.expect("control run");
    let s: Vec<String> = sups.iter().map(|x| format!("{x:.3e}")).collect();
    v.record("c11", "renormalisation necessity", down && corr > 0.95, format!("mean sup diffs [{}], log drift vs log C^n correlation {corr:.4}", s.join(", ")));
}

fn c12(v: &mut Verdicts) {
    if !slow(v, "c12", "Ito identification") {
        return;
    }
    let (r, t) = fresh("c12");
    let Outcome::Solve(s) = r.outcome else { panic!("c12 outcome") };
    let ito = s.reference.expect("reference paths");
    let z1 = (s.main.mean - ito.mean).abs() / s.main.mean_se.hypot(ito.mean_se);
    let z2 = (s.main.second - ito.second).abs() / s.main.second_se.hypot(ito.second_se);
    let pass = z1 <= 3.0 && z2 <= 3.0 && t.as_secs_f64() <= 1800.0;
    v.record(
        "c12",
        "Ito identification",
        pass,
        format!("mean {:.4} vs {:.4} ({z1:.2} se), second moment {:.4} vs {:.4} ({z2:.2} se), {:.0} s", s.main.mean, ito.mean, s.main.second, ito.second, t.as_secs_f64()),
    );
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

fn c13(v: &mut Verdicts) {
    let mut same = true;
    for id in ["c13", "c02", "c05", "c08"] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        run_config(id, a.path());
        run_config(id, b.path());
        same &= files(a.path()) == files(b.path());
    }
    let dir = tempfile::tempdir().unwrap();
    run_config("c13", dir.path());
    let path = dir.path().join("path0.fhg");
    let bytes = std::fs::read(&path).unwrap();
    let field = GridFile::read(&path).unwrap().to_field().unwrap();
    // values, starts and counts are exact; ends are rebuilt from the step
    let stored = GridFile::read(&path).unwrap();
    let back = GridFile::from_field(&grid_roundtrip(&field).unwrap());
    let exact = back.values.iter().zip(&stored.values).all(|(a, b)| a.to_bits() == b.to_bits())
        && back.values.len() == stored.values.len()
        && back.axes.iter().zip(&stored.axes).all(|(a, b)| {
            a.start == b.start && a.count == b.count && (a.end - b.end).abs() <= 4.0 * f64::EPSILON * b.end.abs().max(1.0)
        });
    let truncated = GridFile::from_bytes(&bytes[..bytes.len() - 5]).is_err();
    let pass = same && exact && truncated;
    v.record("c13", "determinism and persistence", pass, format!("repeat runs identical: {same}, grid roundtrip exact: {exact}, truncation detected: {truncated}"));
}

#[test]
fn acceptance() {
    // libtest has already printed `test acceptance ... ` without a newline
    line("");
    let mut v = Verdicts { failed: Vec::new() };
    let all: [fn(&mut Verdicts); 13] = [c01, c02, c03, c04, c05, c06, c07, c08, c09, c10, c11, c12, c13];
    for f in all {
        f(&mut v);
    }
    assert!(v.failed.is_empty(), "failed: {:?}", v.failed);
}
