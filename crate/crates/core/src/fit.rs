//! Maximum-likelihood fitting of the sparsity rate ρ and power index d.
//!
//! The log-likelihood is taken relative to the null model,
//! ℓ(ρ, d) = Σ_i ln(1 − ρ + ρζ(x_i)), so ℓ(0, d) = 0 exactly. For fixed d it is
//! concave in ρ and the inner maximization is a one-dimensional root solve.
//! The outer search over d scans a grid and refines every local maximum by
//! golden-section search.

use rayon::prelude::*;
use serde::Serialize;

use crate::coeffs::PowerIndex;
use crate::error::{Error, Result};
use crate::pipeline::ScorePanel;
use crate::twogroups::NullKind;
use crate::zeta::DEFAULT_SERIES_TOL;

const D_GRID_LO: f64 = 0.05;
const D_GRID_HI: f64 = 1.95;
const D_GRID_STEP: f64 = 0.05;

/// How the power index is handled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DMode {
    Estimate,
    Fixed(PowerIndex),
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Relative truncation tolerance of the zeta series.
    pub series_tol: f64,
    /// Width at which golden-section refinement of d stops.
    pub d_tol: f64,
    /// Iteration cap for each golden-section refinement and for each ρ solve.
    pub max_iterations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { series_tol: DEFAULT_SERIES_TOL, d_tol: 1e-4, max_iterations: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    pub rho_hat: f64,
    pub d_hat: f64,
    /// True when d was held fixed rather than estimated.
    pub d_fixed: bool,
    /// Maximized log-likelihood relative to the null model, in nats.
    pub loglik_rel_null: f64,
    pub null_kind: NullKind,
    pub iterations: usize,
    pub converged: bool,
    pub n_sites: usize,
    pub df: f64,
}

impl FitResult {
    /// True when ρ̂ sits on the boundary of [0, 1].
    pub fn at_boundary(&self) -> bool {
        self.rho_hat <= 0.0 || self.rho_hat >= 1.0
    }
}

/// ln ζ at every site of the panel, on the null's scale.
pub fn ln_zetas(panel: &ScorePanel, d: PowerIndex, null_kind: NullKind, tol: f64) -> Vec<f64> {
    let k = panel.k();
    null_kind.scores(panel).par_iter().map(|&x| null_kind.ln_zeta(x, k, d, tol)).collect()
}

/// ln(1 − ρ + ρζ) from ln ζ.
fn ln_mix(rho: f64, ln_zeta: f64) -> f64 {
    let a = (-rho).ln_1p();
    if rho == 0.0 {
        return 0.0;
    }
    let b = rho.ln() + ln_zeta;
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

/// Σ ln(1 − ρ + ρζ_i) given cached ln ζ_i.
pub fn loglik_from_ln_zetas(ln_zetas: &[f64], rho: f64) -> f64 {
    if rho == 0.0 {
        return 0.0;
    }
    crate::oracle::quadrature::neumaier_sum(ln_zetas.iter().map(|&lz| ln_mix(rho, lz)))
}

/// Log-likelihood relative to the null, Σ ln(1 + ρ(ζ(x_i) − 1)).
pub fn loglik(panel: &ScorePanel, rho: f64, d: PowerIndex, null_kind: NullKind) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Domain(format!("rho must lie in [0, 1], got {rho}")));
    }
    if panel.is_empty() {
        return Err(Error::Input("empty panel".into()));
    }
    if rho == 0.0 {
        return Ok(0.0);
    }
    Ok(loglik_from_ln_zetas(&ln_zetas(panel, d, null_kind, DEFAULT_SERIES_TOL), rho))
}

/// Score S(ρ) = Σ (ζ_i − 1)/(1 − ρ + ρζ_i) and its derivative.
fn score_equation(ln_zetas: &[f64], rho: f64) -> (f64, f64) {
    let mut s = 0.0;
    let mut ds = 0.0;
    for &lz in ln_zetas {
        let term = if lz > 0.0 {
            // Divide through by ζ so huge ζ stay finite.
            let inv = (-lz).exp();
            (1.0 - inv) / (rho + (1.0 - rho) * inv)
        } else {
            let z = lz.exp();
            (z - 1.0) / (1.0 - rho + rho * z)
        };
        s += term;
        ds -= term * term;
    }
    (s, ds)
}

/// Profile maximizer ρ̂(d) from cached ln ζ_i: (ρ̂, ℓ(ρ̂), iterations, converged).
pub fn profile_rho_from_ln_zetas(ln_zetas: &[f64], max_iterations: usize) -> (f64, f64, usize, bool) {
    let n = ln_zetas.len() as f64;
    let target = 1e-10 * n.max(1.0);
    let (s0, _) = score_equation(ln_zetas, 0.0);
    if s0 <= 0.0 {
        return (0.0, 0.0, 0, true);
    }
    let (s1, _) = score_equation(ln_zetas, 1.0);
    if s1 >= 0.0 {
        return (1.0, loglik_from_ln_zetas(ln_zetas, 1.0), 0, true);
    }
    // S is strictly decreasing on [0, 1]; Newton steps are kept inside the bracket.
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut rho = 0.5 * (lo + hi);
    for it in 1..=max_iterations {
        let (s, ds) = score_equation(ln_zetas, rho);
        if s.abs() <= target {
            return (rho, loglik_from_ln_zetas(ln_zetas, rho), it, true);
        }
        if s > 0.0 {
            lo = rho;
        } else {
            hi = rho;
        }
        let newton = rho - s / ds;
        rho = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= f64::EPSILON * hi {
            return (rho, loglik_from_ln_zetas(ln_zetas, rho), it, true);
        }
    }
    (rho, loglik_from_ln_zetas(ln_zetas, rho), max_iterations, false)
}

/// Maximizes the log-likelihood over ρ ∈ [0, 1] for fixed d: (ρ̂, ℓ(ρ̂)).
pub fn profile_rho(panel: &ScorePanel, d: PowerIndex, null_kind: NullKind) -> Result<(f64, f64)> {
    if panel.is_empty() {
        return Err(Error::Input("empty panel".into()));
    }
    let lz = ln_zetas(panel, d, null_kind, DEFAULT_SERIES_TOL);
    let (rho, ll, _, converged) = profile_rho_from_ln_zetas(&lz, FitOptions::default().max_iterations);
    if !converged {
        return Err(Error::NonConvergence(format!("profile in rho at d = {}", d.value())));
    }
    Ok((rho, ll))
}

#[derive(Debug, Clone, Copy)]
struct ProfilePoint {
    d: f64,
    rho: f64,
    loglik: f64,
    iterations: usize,
    converged: bool,
}

fn profile_at(panel: &ScorePanel, d: f64, null_kind: NullKind, opts: &FitOptions) -> ProfilePoint {
    let pi = PowerIndex::new(d).expect("grid stays inside (0, 2)");
    let lz = ln_zetas(panel, pi, null_kind, opts.series_tol);
    let (rho, loglik, iterations, converged) = profile_rho_from_ln_zetas(&lz, opts.max_iterations);
    ProfilePoint { d, rho, loglik, iterations, converged }
}

/// Prefers the larger likelihood and, on ties, the smaller d.
fn better(a: &ProfilePoint, b: &ProfilePoint) -> bool {
    a.loglik > b.loglik || (a.loglik == b.loglik && a.d < b.d)
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximization of the profile likelihood over [a, b].
fn golden(
    panel: &ScorePanel,
    null_kind: NullKind,
    opts: &FitOptions,
    mut a: f64,
    mut b: f64,
) -> (ProfilePoint, usize, bool) {
    let mut c = b - INV_PHI * (b - a);
    let mut e = a + INV_PHI * (b - a);
    let mut pc = profile_at(panel, c, null_kind, opts);
    let mut pe = profile_at(panel, e, null_kind, opts);
    let mut inner_ok = pc.converged && pe.converged;
    let mut steps = 0;
    while b - a > opts.d_tol {
        if steps >= opts.max_iterations {
            let best = if better(&pe, &pc) { pe } else { pc };
            return (best, steps, false);
        }
        steps += 1;
        if pc.loglik >= pe.loglik {
            b = e;
            e = c;
            pe = pc;
            c = b - INV_PHI * (b - a);
            pc = profile_at(panel, c, null_kind, opts);
            inner_ok &= pc.converged;
        } else {
            a = c;
            c = e;
            pc = pe;
            e = a + INV_PHI * (b - a);
            pe = profile_at(panel, e, null_kind, opts);
            inner_ok &= pe.converged;
        }
    }
    let best = if better(&pe, &pc) { pe } else { pc };
    (best, steps, inner_ok)
}

/// Maximum-likelihood fit of (ρ, d) under the given null.
pub fn fit_ml(panel: &ScorePanel, null_kind: NullKind, d_mode: DMode, opts: &FitOptions) -> Result<FitResult> {
    if panel.is_empty() {
        return Err(Error::Input("empty panel".into()));
    }
    let n_sites = panel.len();
    let df = panel.k().value();
    if let DMode::Fixed(d) = d_mode {
        let p = profile_at(panel, d.value(), null_kind, opts);
        return Ok(FitResult {
            rho_hat: p.rho,
            d_hat: p.d,
            d_fixed: true,
            loglik_rel_null: p.loglik,
            null_kind,
            iterations: p.iterations,
            converged: p.converged,
            n_sites,
            df,
        });
    }
    let n_grid = ((D_GRID_HI - D_GRID_LO) / D_GRID_STEP).round() as usize + 1;
    let grid: Vec<ProfilePoint> = (0..n_grid)
        .into_par_iter()
        .map(|i| profile_at(panel, D_GRID_LO + D_GRID_STEP * i as f64, null_kind, opts))
        .collect();
    let mut best = grid[0];
    let mut iterations = 0;
    let mut converged = grid.iter().all(|p| p.converged);
    for i in 0..n_grid {
        let left = if i > 0 { grid[i - 1].loglik } else { f64::NEG_INFINITY };
        let right = if i + 1 < n_grid { grid[i + 1].loglik } else { f64::NEG_INFINITY };
        let here = grid[i].loglik;
        if here < left || here < right {
            continue;
        }
        let a = grid[i.saturating_sub(1)].d;
        let b = grid[(i + 1).min(n_grid - 1)].d;
        let (refined, steps, ok) = golden(panel, null_kind, opts, a, b);
        iterations += steps;
        converged &= ok;
        let candidate = if better(&refined, &grid[i]) { refined } else { grid[i] };
        if better(&candidate, &best) {
            best = candidate;
        }
    }
    Ok(FitResult {
        rho_hat: best.rho,
        d_hat: best.d,
        d_fixed: false,
        loglik_rel_null: best.loglik,
        null_kind,
        iterations,
        converged,
        n_sites,
        df,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_profile() {
        // ζ = {0, 3}: −1/(1 − ρ) + 2/(1 + 2ρ) = 0 at ρ = 1/4.
        let lz = [f64::NEG_INFINITY, 3f64.ln()];
        let (rho, ll, _, ok) = profile_rho_from_ln_zetas(&lz, 200);
        assert!(ok);
        assert!((rho - 0.25).abs() < 1e-10);
        let mut best = f64::NEG_INFINITY;
        for i in 0..=10_000 {
            best = best.max(loglik_from_ln_zetas(&lz, f64::from(i) / 10_000.0));
        }
        assert!(ll >= best - 1e-12);
        assert!((ll - (0.75f64.ln() + 1.5f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn decreasing_likelihood_gives_zero() {
        let lz = [(0.5f64).ln(), (0.2f64).ln(), (0.9f64).ln()];
        assert_eq!(profile_rho_from_ln_zetas(&lz, 200).0, 0.0);
        assert_eq!(loglik_from_ln_zetas(&lz, 0.0), 0.0);
    }

    #[test]
    fn unit_zeta_is_uninformative() {
        let lz = [0.0];
        for &rho in &[0.0, 0.3, 1.0] {
            assert!(loglik_from_ln_zetas(&lz, rho).abs() < 1e-15);
        }
    }

    #[test]
    fn huge_zetas_stay_finite() {
        let lz = [800.0, -3.0, -2.0, -1.0];
        let (rho, ll, _, ok) = profile_rho_from_ln_zetas(&lz, 200);
        assert!(ok && rho > 0.0 && rho < 1.0 && ll.is_finite());
    }
}
