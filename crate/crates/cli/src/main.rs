use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sparse_t::oracle::verify::{self, VerifyOptions, D_VALUES, K100_RATIOS, RATIO_TABLE, RATIO_TABLE_DF};
use sparse_t::pipeline::io::{read_matrix, read_scores, write_scores};
use sparse_t::zeta::{pit_transform, zeta_inf, zeta_k, DEFAULT_SERIES_TOL};
use sparse_t::{
    bh_reject, build_report, fit_ml, two_sided_pvalues, DMode, DegreesOfFreedom, Error, FitOptions, FitResult,
    NullKind, PowerIndex, ScorePanel,
};

const EXIT_FAILED_CHECKS: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NON_CONVERGENCE: u8 = 3;
const EXIT_REGIME: u8 = 4;

/// Local false discovery rates for Student-t ratios under sparse alternatives.
#[derive(Parser)]
#[command(name = "sparse-t", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Map t-scores to z-scores through the probability integral transform.
    Transform {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Maximum-likelihood fit of the sparsity rate and power index.
    Fit {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "t")]
        null: NullKind,
        #[arg(long)]
        json: bool,
    },
    /// Per-site local false discovery rates under one null.
    Lfdr {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "t")]
        null: NullKind,
        /// Use this sparsity rate instead of fitting it (requires a numeric --d).
        #[arg(long)]
        rho: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Benjamini–Hochberg step-up rejections from two-sided p-values.
    Bh {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Fits under both nulls, per-site lfdr, BH flags and summaries.
    Report {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        /// Rows shown in the text table, most extreme |t| first; 0 shows all.
        #[arg(long, default_value_t = 6)]
        top: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Cross-check the analytic formulas against quadrature and Monte Carlo.
    Verify {
        #[arg(long, default_value_t = VerifyOptions::default().seed)]
        seed: u64,
        /// Monte-Carlo sample size per law check; 0 skips them.
        #[arg(long, default_value_t = VerifyOptions::default().mc_samples)]
        mc_samples: usize,
        /// Print every check, not only failures and notes.
        #[arg(long)]
        all: bool,
        #[arg(long)]
        json: bool,
    },
    /// Ratio tables ζ∞/ζ_k on 10 df and on 100 df under both argument readings.
    Table1 {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Replicate matrix, or a score file when --df is given; `-` reads stdin.
    input: PathBuf,
    /// Degrees of freedom; marks the input as a `site_id,t[,z]` score file.
    #[arg(long)]
    df: Option<f64>,
    /// Drop zero-variance sites instead of aborting.
    #[arg(long)]
    drop_degenerate: bool,
}

#[derive(Args)]
struct ModelArgs {
    /// `estimate` or a fixed power index in (0, 2).
    #[arg(long, default_value = "estimate", value_parser = parse_d)]
    d: DChoice,
    /// Relative truncation tolerance of the zeta series.
    #[arg(long, default_value_t = DEFAULT_SERIES_TOL)]
    tol: f64,
    /// Exit with status 4 when a fitted sparsity rate lies on the boundary.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    #[arg(long)]
    csv: bool,
}

#[derive(Clone, Copy)]
enum DChoice {
    Estimate,
    Fixed(f64),
}

fn parse_d(s: &str) -> Result<DChoice, String> {
    if s == "estimate" {
        return Ok(DChoice::Estimate);
    }
    let v: f64 = s.parse().map_err(|_| format!("expected `estimate` or a number, got '{s}'"))?;
    PowerIndex::new(v).map_err(|e| e.to_string())?;
    Ok(DChoice::Fixed(v))
}

impl ModelArgs {
    fn mode(&self) -> sparse_t::Result<DMode> {
        Ok(match self.d {
            DChoice::Estimate => DMode::Estimate,
            DChoice::Fixed(v) => DMode::Fixed(PowerIndex::new(v)?),
        })
    }

    fn options(&self) -> sparse_t::Result<FitOptions> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::Input(format!("--tol must lie in (0, 1), got {}", self.tol)));
        }
        Ok(FitOptions { series_tol: self.tol, ..FitOptions::default() })
    }
}

/// Failure of a command, carrying its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonConvergence(_) | Error::Quadrature(_) => EXIT_NON_CONVERGENCE,
            Error::OutOfRegime(_) | Error::InfiniteOdds => EXIT_REGIME,
            _ => EXIT_INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::Io(e).into()
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e).into()
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure { code: EXIT_INPUT, message: e.to_string() }
    }
}

type CmdResult = Result<(), Failure>;

fn open_input(path: &PathBuf) -> io::Result<Box<dyn Read>> {
    if path.as_os_str() == "-" {
        Ok(Box::new(io::stdin().lock()))
    } else {
        Ok(Box::new(File::open(path)?))
    }
}

fn load_panel(args: &InputArgs) -> Result<ScorePanel, Failure> {
    let input = open_input(&args.input)?;
    if let Some(df) = args.df {
        return Ok(read_scores(input, DegreesOfFreedom::new(df)?)?);
    }
    let ingested = read_matrix(input)?.ingest(args.drop_degenerate)?;
    if !ingested.dropped.is_empty() {
        eprintln!("warning: dropped {} degenerate site(s)", ingested.dropped.len());
    }
    if ingested.panel.is_empty() {
        return Err(Error::Input("no sites left after dropping degenerate ones".into()).into());
    }
    Ok(ingested.panel)
}

/// Exit status for a finished fit: non-convergence first, then a boundary ρ̂ under --strict.
fn fit_status(fits: &[&FitResult], strict: bool) -> CmdResult {
    for f in fits {
        if !f.converged {
            return Err(Failure {
                code: EXIT_NON_CONVERGENCE,
                message: format!("{}-null fit did not converge", f.null_kind.name()),
            });
        }
    }
    if strict {
        if let Some(f) = fits.iter().find(|f| f.at_boundary()) {
            return Err(Failure {
                code: EXIT_REGIME,
                message: format!("{}-null fit has rho at the boundary ({})", f.null_kind.name(), f.rho_hat),
            });
        }
    }
    Ok(())
}

fn print_fit(out: &mut impl Write, f: &FitResult) -> io::Result<()> {
    writeln!(
        out,
        "{}-null  rho={:.6}  d={:.4}{}  loglik={:.4}  iterations={}  converged={}  n={}  df={}",
        f.null_kind.name(),
        f.rho_hat,
        f.d_hat,
        if f.d_fixed { " (fixed)" } else { "" },
        f.loglik_rel_null,
        f.iterations,
        f.converged,
        f.n_sites,
        f.df
    )
}

fn run(cli: Cli) -> CmdResult {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match cli.command {
        Command::Transform { input, output } => {
            let panel = load_panel(&input)?;
            if output.json {
                serde_json::to_writer_pretty(&mut out, &panel)?;
                writeln!(out)?;
            } else if output.csv {
                write_scores(&panel, &mut out)?;
            } else {
                writeln!(out, "{:<16} {:>14} {:>14}", "site_id", "t", "z")?;
                for i in 0..panel.len() {
                    writeln!(out, "{:<16} {:>14.6} {:>14.6}", panel.site_ids()[i], panel.scores()[i], panel.z_scores()[i])?;
                }
            }
        }
        Command::Fit { input, model, null, json } => {
            let panel = load_panel(&input)?;
            let fit = fit_ml(&panel, null, model.mode()?, &model.options()?)?;
            if json {
                serde_json::to_writer_pretty(&mut out, &fit)?;
                writeln!(out)?;
            } else {
                print_fit(&mut out, &fit)?;
            }
            out.flush()?;
            fit_status(&[&fit], model.strict)?;
        }
        Command::Lfdr { input, model, null, rho, output } => {
            let panel = load_panel(&input)?;
            let opts = model.options()?;
            let (rho, d, fit) = match (rho, model.d) {
                (Some(r), DChoice::Fixed(d)) => {
                    if !(0.0..=1.0).contains(&r) {
                        return Err(Error::Input(format!("--rho must lie in [0, 1], got {r}")).into());
                    }
                    (r, PowerIndex::new(d)?, None)
                }
                (Some(_), DChoice::Estimate) => {
                    return Err(Error::Input("--rho needs a numeric --d".into()).into());
                }
                (None, _) => {
                    let f = fit_ml(&panel, null, model.mode()?, &opts)?;
                    (f.rho_hat, PowerIndex::new(f.d_hat)?, Some(f))
                }
            };
            let lz = sparse_t::fit::ln_zetas(&panel, d, null, opts.series_tol);
            let lfdr: Vec<f64> = lz.iter().map(|&l| sparse_t::twogroups::lfdr_from_ln_zeta(rho, l)).collect();
            let scores = null.scores(&panel);
            if output.json {
                let sites: Vec<_> = (0..panel.len())
                    .map(|i| serde_json::json!({"site_id": panel.site_ids()[i], "score": scores[i], "lfdr": lfdr[i]}))
                    .collect();
                let doc = serde_json::json!({"null": null, "rho": rho, "d": d.value(), "fit": fit, "sites": sites});
                serde_json::to_writer_pretty(&mut out, &doc)?;
                writeln!(out)?;
            } else if output.csv {
                let mut w = csv::Writer::from_writer(&mut out);
                w.write_record(["site_id", "score", "lfdr"])?;
                for i in 0..panel.len() {
                    w.write_record([panel.site_ids()[i].clone(), format!("{:?}", scores[i]), format!("{:?}", lfdr[i])])?;
                }
            } else {
                if let Some(f) = &fit {
                    print_fit(&mut out, f)?;
                }
                writeln!(out, "{:<16} {:>14} {:>12}", "site_id", format!("{}-score", null.name()), "lfdr")?;
                for i in 0..panel.len() {
                    writeln!(out, "{:<16} {:>14.6} {:>12.4e}", panel.site_ids()[i], scores[i], lfdr[i])?;
                }
            }
            out.flush()?;
            if let Some(f) = &fit {
                fit_status(&[f], model.strict)?;
            }
        }
        Command::Bh { input, alpha, output } => {
            let panel = load_panel(&input)?;
            let p = two_sided_pvalues(&panel);
            let rejected = bh_reject(&p, alpha)?;
            let mut flag = vec![false; panel.len()];
            for &i in &rejected {
                flag[i] = true;
            }
            if output.json {
                let ids: Vec<&String> = rejected.iter().map(|&i| &panel.site_ids()[i]).collect();
                let doc = serde_json::json!({"alpha": alpha, "n_sites": panel.len(), "n_rejected": rejected.len(), "rejected": ids, "p_values": p});
                serde_json::to_writer_pretty(&mut out, &doc)?;
                writeln!(out)?;
            } else if output.csv {
                let mut w = csv::Writer::from_writer(&mut out);
                w.write_record(["site_id", "t", "p_value", "rejected"])?;
                for i in 0..panel.len() {
                    w.write_record([
                        panel.site_ids()[i].clone(),
                        format!("{:?}", panel.scores()[i]),
                        format!("{:?}", p[i]),
                        flag[i].to_string(),
                    ])?;
                }
            } else {
                writeln!(out, "{} of {} sites rejected at alpha = {alpha}", rejected.len(), panel.len())?;
                let mut order = rejected.clone();
                order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
                for i in order {
                    writeln!(out, "{:<16} {:>14.6} {:>12.4e}", panel.site_ids()[i], panel.scores()[i], p[i])?;
                }
            }
        }
        Command::Report { input, model, alpha, top, output } => {
            let panel = load_panel(&input)?;
            let opts = model.options()?;
            let mode = model.mode()?;
            let fit_t = fit_ml(&panel, NullKind::T, mode, &opts)?;
            let fit_z = fit_ml(&panel, NullKind::Z, mode, &opts)?;
            let report = build_report(&panel, &fit_t, &fit_z, alpha, opts.series_tol)?;
            if output.json {
                serde_json::to_writer_pretty(&mut out, &report)?;
                writeln!(out)?;
            } else if output.csv {
                let mut w = csv::Writer::from_writer(&mut out);
                w.write_record(["site_id", "t", "z", "lfdr_t", "lfdr_z", "ratio", "p_value", "bh_rejected"])?;
                for s in &report.sites {
                    w.write_record([
                        s.site_id.clone(),
                        format!("{:?}", s.t),
                        format!("{:?}", s.z),
                        format!("{:?}", s.lfdr_t),
                        format!("{:?}", s.lfdr_z),
                        format!("{:?}", s.ratio),
                        format!("{:?}", s.p_value),
                        s.bh_rejected.to_string(),
                    ])?;
                }
            } else {
                writeln!(out, "{} sites on {} df", report.n_sites, report.df)?;
                print_fit(&mut out, &report.fit_z)?;
                print_fit(&mut out, &report.fit_t)?;
                writeln!(out)?;
                writeln!(
                    out,
                    "{:<16} {:>9} {:>9} {:>12} {:>12} {:>8}",
                    "site_id", "Z", "T", "lfdr_z", "lfdr_t", "ratio"
                )?;
                let rows = if top == 0 { report.sites.len() } else { top };
                for s in report.top(rows) {
                    writeln!(
                        out,
                        "{:<16} {:>9.2} {:>9.2} {:>12.4e} {:>12.4e} {:>8.2}",
                        s.site_id, s.z, s.t, s.lfdr_z, s.lfdr_t, s.ratio
                    )?;
                }
                writeln!(out)?;
                writeln!(out, "BH at alpha = {}: {} rejections", report.alpha, report.n_rejected)?;
                for (name, summary) in [("lfdr_t", report.bh_lfdr_t), ("lfdr_z", report.bh_lfdr_z)] {
                    if let Some(s) = summary {
                        writeln!(out, "  {name} over BH set: min {:.4}  mean {:.4}  max {:.4}", s.min, s.mean, s.max)?;
                    }
                }
            }
            out.flush()?;
            fit_status(&[&fit_t, &fit_z], model.strict)?;
        }
        Command::Verify { seed, mc_samples, all, json } => {
            let report = verify::verify(&VerifyOptions { seed, mc_samples });
            if json {
                serde_json::to_writer_pretty(&mut out, &report)?;
                writeln!(out)?;
            } else {
                for c in &report.checks {
                    if all || !c.pass || c.informational || c.note.is_some() {
                        write!(
                            out,
                            "{} [{}] {}: value {:.10e}, reference {:.10e}, error {:.3e} (tol {:.1e})",
                            if c.informational {
                                "INFO"
                            } else if c.pass {
                                "PASS"
                            } else {
                                "FAIL"
                            },
                            c.group,
                            c.case,
                            c.value,
                            c.reference,
                            c.error,
                            c.tolerance
                        )?;
                        match &c.note {
                            Some(n) => writeln!(out, "  {n}")?,
                            None => writeln!(out)?,
                        }
                    }
                }
                match &report.k100_interpretation {
                    Some(w) => writeln!(out, "k=100 ratios reproduced by the '{w}' reading")?,
                    None => writeln!(out, "k=100 ratios: neither reading reproduces the reference values")?,
                }
                writeln!(out, "{} passed, {} failed", report.passed, report.failed)?;
            }
            out.flush()?;
            if !report.all_passed() {
                return Err(Failure { code: EXIT_FAILED_CHECKS, message: format!("{} check(s) failed", report.failed) });
            }
        }
        Command::Table1 { json } => {
            let k = DegreesOfFreedom::new(RATIO_TABLE_DF)?;
            let mut rows = Vec::new();
            for &(t, _, _) in &RATIO_TABLE {
                let z = pit_transform(t, k);
                let ratios: Vec<f64> = D_VALUES
                    .iter()
                    .map(|&d| {
                        let d = PowerIndex::new(d).expect("fixed index");
                        zeta_inf(z, d) / zeta_k(t, k, d)
                    })
                    .collect();
                rows.push((t, z, ratios));
            }
            let k100: Vec<(f64, f64, f64)> =
                K100_RATIOS.iter().map(|&(z, _)| (z, verify::k100_ratio(z, true), verify::k100_ratio(z, false))).collect();
            if json {
                let table: Vec<_> = rows
                    .iter()
                    .map(|(t, z, r)| serde_json::json!({"t": t, "z": z, "d": D_VALUES, "ratio": r}))
                    .collect();
                let k100: Vec<_> = k100
                    .iter()
                    .map(|(z, a, b)| serde_json::json!({"z": z, "same_argument": a, "t_argument": b}))
                    .collect();
                let doc = serde_json::json!({"df": RATIO_TABLE_DF, "table": table, "k100_d1": k100});
                serde_json::to_writer_pretty(&mut out, &doc)?;
                writeln!(out)?;
            } else {
                writeln!(out, "Ratios zeta_inf(z)/zeta_k(t), k = {RATIO_TABLE_DF}, z = g(t)")?;
                write!(out, "{:>6} {:>6}", "t", "z")?;
                for d in D_VALUES {
                    write!(out, " {:>8}", format!("d={d}"))?;
                }
                writeln!(out)?;
                for (t, z, r) in &rows {
                    write!(out, "{t:>6.1} {z:>6.2}")?;
                    for v in r {
                        write!(out, " {v:>8.2}")?;
                    }
                    writeln!(out)?;
                }
                writeln!(out)?;
                writeln!(out, "Ratios zeta_inf/zeta_100 at d = 1")?;
                writeln!(out, "{:>4} {:>16} {:>16}", "z", "same argument", "t = g^-1(z)")?;
                for (z, a, b) in &k100 {
                    writeln!(out, "{z:>4.0} {a:>16.3} {b:>16.3}")?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
