//! Acceptance criteria, one PASS/FAIL/SKIP line each. Run with
//! `cargo test -p sparse-t --test acceptance -- --nocapture`.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use sparse_t::oracle::verify::{self, Check};
use sparse_t::pipeline::{ingest_two_sample, io::read_matrix, ScorePanel};
use sparse_t::zeta::pit_transform;
use sparse_t::{
    bh_reject, build_report, fit_ml, lfdr_t, lfdr_z, loglik, simulate_panel, two_sided_pvalues, DMode,
    DegreesOfFreedom, FitOptions, FitResult, ModelParams, NullKind, PowerIndex,
};

#[derive(PartialEq)]
enum Verdict {
    Pass,
    Fail,
    Skip,
}

struct Line {
    id: &'static str,
    verdict: Verdict,
    detail: String,
}

fn judge(id: &'static str, ok: bool, elapsed: Duration, limit: Duration, detail: String) -> Line {
    let in_time = elapsed <= limit;
    let verdict = if ok && in_time { Verdict::Pass } else { Verdict::Fail };
    let timing = format!("{:.2}s of {}s", elapsed.as_secs_f64(), limit.as_secs());
    let detail = if in_time { format!("{detail}; {timing}") } else { format!("{detail}; TOO SLOW {timing}") };
    Line { id, verdict, detail }
}

fn failures(checks: &[Check]) -> Vec<String> {
    checks
        .iter()
        .filter(|c| !c.pass && !c.informational)
        .map(|c| format!("{} {} (value {:.6e}, reference {:.6e}, error {:.2e})", c.group, c.case, c.value, c.reference, c.error))
        .collect()
}

fn worst(checks: &[Check]) -> f64 {
    checks.iter().filter(|c| !c.informational).map(|c| c.error).fold(0.0, f64::max)
}

fn from_checks(id: &'static str, checks: Vec<Check>, start: Instant, limit: u64, what: &str) -> Line {
    let bad = failures(&checks);
    let detail = if bad.is_empty() {
        format!("{} {what} checks, worst error {:.2e}", checks.len(), worst(&checks))
    } else {
        format!("{} of {} {what} checks failed: {}", bad.len(), checks.len(), bad.join("; "))
    };
    judge(id, bad.is_empty(), start.elapsed(), Duration::from_secs(limit), detail)
}

fn criterion_1() -> Line {
    let start = Instant::now();
    from_checks("1 coefficient identity", verify::coefficient_checks(20), start, 10, "d x r")
}

fn criterion_2() -> Line {
    let start = Instant::now();
    from_checks("2 catalan case", verify::catalan_checks(15), start, 10, "r <= 15")
}

fn criterion_3() -> Line {
    let start = Instant::now();
    let mut checks = verify::normalization_checks(10, &[1.0, 2.0, 6.0, 9.0, 100.0]);
    let params = ModelParams::new(0.1, 1.0, 6.0).unwrap();
    checks.extend(verify::mixture_normalization_checks(&params).into_iter().filter(|c| c.case.starts_with("t-scale")));
    from_checks("3 density normalization", checks, start, 10, "normalization")
}

fn criterion_4() -> Line {
    let start = Instant::now();
    // monte_carlo_checks also runs (r, k) = (0, 6); all of them must pass.
    let checks = verify::monte_carlo_checks(1_000_000, verify::VerifyOptions::default().seed);
    let over: Vec<String> = checks
        .iter()
        .filter(|c| c.value >= 0.002)
        .map(|c| format!("{}: KS upper bound {:.5}", c.case, c.value))
        .collect();
    let bad = failures(&checks);
    let ok = bad.is_empty() && over.is_empty();
    let detail = if ok {
        let bounds: Vec<String> = checks.iter().map(|c| format!("{} -> {}", c.case, c.note.clone().unwrap_or_default())).collect();
        format!("all KS upper bounds < 0.002: {}", bounds.join("; "))
    } else {
        format!("failures: {}", bad.into_iter().chain(over).collect::<Vec<_>>().join("; "))
    };
    judge("4 constructive law (monte carlo)", ok, start.elapsed(), Duration::from_secs(60), detail)
}

fn criterion_5() -> Line {
    let start = Instant::now();
    from_checks("5 ratio table on 10 df", verify::ratio_table_checks(), start, 5, "table cell")
}

fn criterion_6() -> Line {
    let start = Instant::now();
    let (checks, winner) = verify::k100_checks();
    let bad = failures(&checks);
    let ok = bad.is_empty() && winner.is_some();
    let values: Vec<String> =
        verify::K100_RATIOS.iter().map(|&(z, r)| format!("z={z}: {:.3} (ref {r})", verify::k100_ratio(z, true))).collect();
    let detail = match &winner {
        Some(w) => format!("reading '{w}' reproduces all four: {}", values.join(", ")),
        None => format!("no reading reproduces the values: {}", bad.join("; ")),
    };
    judge("6 k=100 ratios", ok, start.elapsed(), Duration::from_secs(5), detail)
}

/// Top-6 reference rows: T, then 1e4·lfdr_z, 1e4·lfdr_t and the ratio.
const TOP_ROWS_ESTIMATED_D: [(f64, f64, f64, f64); 6] = [
    (-52.16, 1.54, 0.77, 2.00),
    (-43.89, 3.93, 1.95, 2.01),
    (-38.36, 8.12, 4.03, 2.02),
    (-35.86, 11.65, 5.78, 2.01),
    (-31.57, 22.94, 11.44, 2.01),
    (-24.74, 82.10, 41.86, 1.96),
];
const TOP_ROWS_D_ONE: [(f64, f64, f64, f64); 6] = [
    (-52.16, 1.52, 1.43, 1.06),
    (-43.89, 3.88, 3.38, 1.15),
    (-38.36, 8.02, 6.60, 1.22),
    (-35.86, 11.53, 9.22, 1.25),
    (-31.57, 22.78, 17.32, 1.32),
    (-24.74, 82.01, 57.30, 1.43),
];

fn hiv_path() -> Option<PathBuf> {
    if let Some(p) = std::env::var_os("HIV_DATA") {
        return Some(PathBuf::from(p));
    }
    let default = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/hiv.csv");
    default.exists().then_some(default)
}

/// Reads the HIV matrix: a labelled two-group header, or 8 unlabelled columns
/// with the 4 cases first.
fn load_hiv(path: &PathBuf) -> Result<ScorePanel, String> {
    let file = std::fs::File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let m = read_matrix(file).map_err(|e| e.to_string())?;
    let ingested = match m.groups().map_err(|e| e.to_string())? {
        Some(_) => m.ingest(false),
        None if m.rows.first().is_some_and(|r| r.len() == 8) => {
            let groups = [true, true, true, true, false, false, false, false];
            ingest_two_sample(&m.rows, &m.site_ids, &groups, false)
        }
        None => return Err("expected a two-group header or 8 columns (4 cases, 4 controls)".into()),
    };
    ingested.map(|i| i.panel).map_err(|e| e.to_string())
}

struct HivFits {
    panel: ScorePanel,
    est_t: FitResult,
    est_z: FitResult,
    one_t: FitResult,
    one_z: FitResult,
    elapsed: Duration,
}

fn hiv_fits(panel: ScorePanel) -> Result<HivFits, String> {
    let start = Instant::now();
    let opts = FitOptions::default();
    let one = DMode::Fixed(PowerIndex::new(1.0).unwrap());
    let fit = |null, mode| fit_ml(&panel, null, mode, &opts).map_err(|e| e.to_string());
    let est_z = fit(NullKind::Z, DMode::Estimate)?;
    let est_t = fit(NullKind::T, DMode::Estimate)?;
    let one_z = fit(NullKind::Z, one)?;
    let one_t = fit(NullKind::T, one)?;
    Ok(HivFits { elapsed: start.elapsed(), panel, est_t, est_z, one_t, one_z })
}

fn within(v: f64, target: f64, tol: f64) -> bool {
    (v - target).abs() <= tol
}

fn criterion_7(f: &HivFits) -> Line {
    let z = &f.est_z;
    let t = &f.est_t;
    let ok = within(z.rho_hat, 0.0059, 0.0005)
        && within(z.d_hat, 1.09, 0.02)
        && within(z.loglik_rel_null, 48.23, 0.05)
        && within(t.rho_hat, 0.0045, 0.0005)
        && within(t.d_hat, 0.60, 0.02)
        && within(t.loglik_rel_null, 56.13, 0.05)
        && within(f.one_z.rho_hat, 0.0053, 0.0005)
        && within(f.one_z.loglik_rel_null, 48.13, 0.05)
        && within(f.one_t.rho_hat, 0.0078, 0.0005)
        && within(f.one_t.loglik_rel_null, 52.99, 0.05);
    let detail = format!(
        "z: ({:.4}, {:.3}, {:.2}) t: ({:.4}, {:.3}, {:.2}) d=1 z: ({:.4}, {:.2}) d=1 t: ({:.4}, {:.2})",
        z.rho_hat,
        z.d_hat,
        z.loglik_rel_null,
        t.rho_hat,
        t.d_hat,
        t.loglik_rel_null,
        f.one_z.rho_hat,
        f.one_z.loglik_rel_null,
        f.one_t.rho_hat,
        f.one_t.loglik_rel_null
    );
    judge("7 HIV fits", ok, f.elapsed, Duration::from_secs(120), detail)
}

/// Rounds 1e4·value to two decimals, matching the reference rows.
fn rounded(v: f64) -> f64 {
    (v * 1e6).round() / 100.0
}

fn table_rows(report: &sparse_t::LfdrReport, table: &[(f64, f64, f64, f64); 6], bad: &mut Vec<String>) {
    for (row, &(t_ref, lz, lt, ratio)) in report.top(6).iter().zip(table) {
        let rel = |got: f64, want: f64| (rounded(got) / want - 1.0).abs();
        if (row.t - t_ref).abs() > 0.005 || rel(row.lfdr_z, lz) > 0.02 || rel(row.lfdr_t, lt) > 0.02 || (row.ratio - ratio).abs() > 0.02 {
            bad.push(format!(
                "T={:.2}: lfdr_z {:.2} lfdr_t {:.2} ratio {:.2} (ref {t_ref}, {lz}, {lt}, {ratio})",
                row.t,
                rounded(row.lfdr_z),
                rounded(row.lfdr_t),
                row.ratio
            ));
        }
    }
}

fn criteria_8_9(f: &HivFits) -> (Line, Line) {
    let start = Instant::now();
    let tol = FitOptions::default().series_tol;
    let est = build_report(&f.panel, &f.est_t, &f.est_z, 0.1, tol);
    let one = build_report(&f.panel, &f.one_t, &f.one_z, 0.1, tol);
    let (est, one) = match (est, one) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            let line = |id| Line { id, verdict: Verdict::Fail, detail: format!("report failed: {e}") };
            return (line("8 HIV tables"), line("9 HIV BH summaries"));
        }
    };
    let mut bad = Vec::new();
    table_rows(&est, &TOP_ROWS_ESTIMATED_D, &mut bad);
    table_rows(&one, &TOP_ROWS_D_ONE, &mut bad);
    let detail = if bad.is_empty() { "all 24 lfdr cells and 12 ratios match".to_string() } else { bad.join("; ") };
    let eight = judge("8 HIV tables", bad.is_empty(), start.elapsed(), Duration::from_secs(120), detail);

    let means = |r: &sparse_t::LfdrReport| (r.bh_lfdr_t.map_or(f64::NAN, |s| s.mean), r.bh_lfdr_z.map_or(f64::NAN, |s| s.mean));
    let (et, ez) = means(&est);
    let (ot, oz) = means(&one);
    let ok = est.n_rejected == 16
        && within(et, 0.108, 0.005)
        && within(ez, 0.144, 0.005)
        && within(ot, 0.104, 0.005)
        && within(oz, 0.147, 0.005);
    let detail = format!(
        "{} rejections; mean lfdr_t {et:.3}, lfdr_z {ez:.3} (estimated d); {ot:.3}, {oz:.3} (d = 1)",
        est.n_rejected
    );
    (eight, judge("9 HIV BH summaries", ok, start.elapsed(), Duration::from_secs(120), detail))
}

/// Reference top rows evaluated at the reference parameter values (not a criterion).
fn reference_parameter_rows() -> String {
    let k = DegreesOfFreedom::new(6.0).unwrap();
    let mut worst: f64 = 0.0;
    let mut cells = Vec::new();
    for (table, (rz, dz), (rt, dt)) in [(&TOP_ROWS_ESTIMATED_D, (0.0059, 1.09), (0.0045, 0.60)), (&TOP_ROWS_D_ONE, (0.0053, 1.0), (0.0078, 1.0))] {
        let pt = ModelParams::new(rt, dt, 6.0).unwrap();
        let dz = PowerIndex::new(dz).unwrap();
        for &(t, lz, lt, _) in table.iter() {
            let z = pit_transform(t, k);
            let (gz, gt) = (rounded(lfdr_z(z, rz, dz)), rounded(lfdr_t(t, &pt)));
            worst = worst.max((gz / lz - 1.0).abs()).max((gt / lt - 1.0).abs());
            cells.push(format!("{gz:.2}/{gt:.2}"));
        }
    }
    format!("worst relative deviation {:.1}% over 24 cells (lfdr_z/lfdr_t x1e4: {})", 100.0 * worst, cells.join(" "))
}

fn criterion_10() -> Line {
    let start = Instant::now();
    let mut checks = Vec::new();
    checks.extend(verify::change_of_variables_checks());
    checks.extend(verify::large_k_limit_checks());
    checks.extend(verify::moment_checks());
    checks.extend(verify::sparsity_rate_checks());
    checks.extend(verify::measure_normalization_checks());
    checks.extend(verify::sparse_approximation_checks());
    let mut bad = failures(&checks);

    // Concavity of the ρ-profile on a simulated panel.
    let panel = simulate_panel(&ModelParams::new(0.05, 1.0, 6.0).unwrap(), 20_000, 10).unwrap().panel;
    for null in [NullKind::T, NullKind::Z] {
        for d in [0.3, 1.0, 1.7] {
            let d = PowerIndex::new(d).unwrap();
            let ll: Vec<f64> = (0..=100).map(|i| loglik(&panel, f64::from(i) / 100.0, d, null).unwrap()).collect();
            for w in ll.windows(3) {
                if w[0] - 2.0 * w[1] + w[2] > 1e-9 * (1.0 + w[1].abs()) {
                    bad.push(format!("profile not concave ({null:?}, d={})", d.value()));
                    break;
                }
            }
        }
    }
    // BH down-set, and equality of the t- and z-based rejection sets.
    let p = two_sided_pvalues(&panel);
    let pz: Vec<f64> = panel
        .z_scores()
        .iter()
        .map(|z| (std::f64::consts::LN_2 + sparse_t::specfun::norm_ln_sf(z.abs())).exp().min(1.0))
        .collect();
    for alpha in [0.01, 0.05, 0.1, 0.2] {
        let rejected = bh_reject(&p, alpha).unwrap();
        let cut = rejected.iter().map(|&i| p[i]).fold(f64::NEG_INFINITY, f64::max);
        if (0..p.len()).any(|j| p[j] <= cut && rejected.binary_search(&j).is_err()) {
            bad.push(format!("BH set not a down-set at alpha={alpha}"));
        }
        if bh_reject(&pz, alpha).unwrap() != rejected {
            bad.push(format!("t- and z-based BH sets differ at alpha={alpha}"));
        }
    }
    let detail = if bad.is_empty() {
        format!("{} oracle checks plus concavity and BH properties", checks.len())
    } else {
        bad.join("; ")
    };
    judge("10 property suite", bad.is_empty(), start.elapsed(), Duration::from_secs(180), detail)
}

#[test]
fn acceptance() {
    let mut lines = vec![criterion_1(), criterion_2(), criterion_3(), criterion_4(), criterion_5(), criterion_6()];
    match hiv_path() {
        None => {
            for id in ["7 HIV fits", "8 HIV tables", "9 HIV BH summaries"] {
                lines.push(Line {
                    id,
                    verdict: Verdict::Skip,
                    detail: "HIV dataset not found (set HIV_DATA or add data/hiv.csv)".into(),
                });
            }
        }
        Some(path) => match load_hiv(&path).and_then(hiv_fits) {
            Ok(fits) => {
                lines.push(criterion_7(&fits));
                let (eight, nine) = criteria_8_9(&fits);
                lines.push(eight);
                lines.push(nine);
            }
            Err(e) => {
                for id in ["7 HIV fits", "8 HIV tables", "9 HIV BH summaries"] {
                    lines.push(Line { id, verdict: Verdict::Fail, detail: format!("could not load {}: {e}", path.display()) });
                }
            }
        },
    }
    lines.push(criterion_10());

    for l in &lines {
        let tag = match l.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Skip => "SKIP",
        };
        println!("{tag} [{}] {}", l.id, l.detail);
    }
    println!("INFO [top rows at reference parameters] {}", reference_parameter_rows());
    let failed: Vec<&str> = lines.iter().filter(|l| l.verdict == Verdict::Fail).map(|l| l.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
