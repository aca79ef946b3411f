//! Two-groups model: local false discovery rates, posterior odds and simulation.
//!
//! A site is null with probability 1 − ρ. Under the t-null the score density is
//! f_0 for null sites and f_0·ζ_k for non-null sites; under the z-null the
//! densities are φ and φ·ζ_∞.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffs::PowerIndex;
use crate::error::{Error, Result};
use crate::pipeline::ScorePanel;
use crate::zeta::{ln_zeta_inf_tol, ln_zeta_k_tol, DegreesOfFreedom, ModelParams, DEFAULT_SERIES_TOL};

/// Which null distribution the scores are compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NullKind {
    /// Student-t on the panel's degrees of freedom; scores are t-ratios.
    T,
    /// Standard Gaussian; scores are the transformed z-scores.
    Z,
}

impl NullKind {
    /// ln ζ at a score: ζ_k for the t-null, ζ_∞ for the z-null.
    pub fn ln_zeta(self, x: f64, k: DegreesOfFreedom, d: PowerIndex, tol: f64) -> f64 {
        match self {
            NullKind::T => ln_zeta_k_tol(x, k, d, tol),
            NullKind::Z => ln_zeta_inf_tol(x, d, tol),
        }
    }

    /// The scores of a panel on this null's scale.
    pub fn scores(self, panel: &ScorePanel) -> &[f64] {
        match self {
            NullKind::T => panel.scores(),
            NullKind::Z => panel.z_scores(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NullKind::T => "t",
            NullKind::Z => "z",
        }
    }
}

impl std::str::FromStr for NullKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t" | "T" => Ok(NullKind::T),
            "z" | "Z" => Ok(NullKind::Z),
            other => Err(Error::Input(format!("unknown null kind '{other}', expected t or z"))),
        }
    }
}

/// (1 − ρ)/(1 − ρ + ρζ) from ln ζ, without forming ζ itself.
pub fn lfdr_from_ln_zeta(rho: f64, ln_zeta: f64) -> f64 {
    if rho == 0.0 || ln_zeta == f64::NEG_INFINITY {
        return if rho < 1.0 { 1.0 } else { 0.0 };
    }
    if rho == 1.0 {
        return 0.0;
    }
    let ln_odds = rho.ln() - (-rho).ln_1p() + ln_zeta;
    if ln_odds > 0.0 {
        let e = (-ln_odds).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + ln_odds.exp())
    }
}

/// Local false discovery rate under the t-null, (1 − ρ)/(1 − ρ + ρζ_k(t)).
pub fn lfdr_t(t: f64, params: &ModelParams) -> f64 {
    lfdr_from_ln_zeta(params.rho, ln_zeta_k_tol(t, params.k, params.d, DEFAULT_SERIES_TOL))
}

/// Local false discovery rate under the z-null, (1 − ρ)/(1 − ρ + ρζ_∞(z)).
pub fn lfdr_z(z: f64, rho: f64, d: PowerIndex) -> f64 {
    lfdr_from_ln_zeta(rho, ln_zeta_inf_tol(z, d, DEFAULT_SERIES_TOL))
}

/// Posterior odds ρζ/(1 − ρ) that a site is non-null.
pub fn posterior_odds(score: f64, params: &ModelParams, null_kind: NullKind) -> Result<f64> {
    if params.rho == 1.0 {
        return Err(Error::InfiniteOdds);
    }
    if params.rho == 0.0 {
        return Ok(0.0);
    }
    let ln_zeta = null_kind.ln_zeta(score, params.k, params.d, DEFAULT_SERIES_TOL);
    Ok((params.rho.ln() - (-params.rho).ln_1p() + ln_zeta).exp())
}

/// A simulated panel together with the latent non-null indicators.
#[derive(Debug, Clone)]
pub struct SimulatedPanel {
    pub panel: ScorePanel,
    pub non_null: Vec<bool>,
    /// Mixture index r of each non-null site, 0 for null sites.
    pub components: Vec<u64>,
}

const CHUNK: usize = 8192;

/// Largest mixture index drawn; beyond this the signal is far outside any
/// score range that matters and χ² draws lose meaning in double precision.
const MAX_COMPONENT: f64 = 9.007_199_254_740_992e15;

/// Draws r with P(r) = ζ_{d,r}: W ~ Beta(α, 1 − α), then r ~ Geometric(W) on {1, 2, …}.
pub fn sample_component<R: Rng + ?Sized>(rng: &mut R, beta: &Beta<f64>) -> u64 {
    let w: f64 = beta.sample(rng);
    if w >= 1.0 {
        return 1;
    }
    let u: f64 = 1.0 - rng.random::<f64>();
    let extra = (u.ln() / (-w).ln_1p()).floor();
    if extra.is_nan() || extra >= MAX_COMPONENT {
        return MAX_COMPONENT as u64;
    }
    1 + extra as u64
}

/// Signal value with density ∝ y^{2r} e^{−y²/2}: ±√χ²_{2r+1}.
pub fn sample_signal<R: Rng + ?Sized>(rng: &mut R, r: u64) -> Result<f64> {
    let chi = ChiSquared::new(2.0 * r as f64 + 1.0).map_err(|e| Error::Domain(e.to_string()))?;
    let y: f64 = chi.sample(rng).sqrt();
    Ok(if rng.random::<bool>() { y } else { -y })
}

/// Simulates n t-scores from the two-groups t-model. Site i is non-null with
/// probability ρ; non-null sites draw r from the coefficient distribution and
/// Y = ±√χ²_{2r+1}, null sites draw Y ~ N(0, 1); then T = Y/s with s² ~ χ²_k/k.
///
/// Sites are generated in fixed-size chunks, each on its own ChaCha stream, so
/// the output depends only on the seed and not on the thread count.
pub fn simulate_panel(params: &ModelParams, n: usize, seed: u64) -> Result<SimulatedPanel> {
    if n == 0 {
        return Err(Error::Input("panel size must be at least 1".into()));
    }
    let alpha = params.d.alpha();
    let beta = Beta::new(alpha, 1.0 - alpha).map_err(|e| Error::Domain(e.to_string()))?;
    let kv = params.k.value();
    let chi_k = ChiSquared::new(kv).map_err(|e| Error::Domain(e.to_string()))?;
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Vec<(f64, u64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = CHUNK.min(n - c * CHUNK);
            let mut out = Vec::with_capacity(len);
            for _ in 0..len {
                let non_null = rng.random::<f64>() < params.rho;
                let (y, r) = if non_null {
                    let r = sample_component(&mut rng, &beta);
                    (sample_signal(&mut rng, r)?, r)
                } else {
                    (rng.sample::<f64, _>(StandardNormal), 0)
                };
                let s = (chi_k.sample(&mut rng) / kv).sqrt();
                out.push((y / s, r));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut scores = Vec::with_capacity(n);
    let mut components = Vec::with_capacity(n);
    for (t, r) in parts.into_iter().flatten() {
        scores.push(t);
        components.push(r);
    }
    let non_null = components.iter().map(|&r| r > 0).collect();
    Ok(SimulatedPanel { panel: ScorePanel::from_scores(scores, params.k)?, non_null, components })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zeta::{zeta_inf, zeta_k};
    use approx::assert_relative_eq;

    fn params(rho: f64, d: f64, k: f64) -> ModelParams {
        ModelParams::new(rho, d, k).unwrap()
    }

    #[test]
    fn lfdr_trivial_values() {
        let p = params(0.1, 1.0, 6.0);
        assert_eq!(lfdr_t(0.0, &p), 1.0);
        assert_eq!(lfdr_z(0.0, 0.1, p.d), 1.0);
        let p0 = params(0.0, 1.0, 6.0);
        for &t in &[0.0, 2.0, -40.0] {
            assert_eq!(lfdr_t(t, &p0), 1.0);
            assert_eq!(lfdr_z(t, 0.0, p0.d), 1.0);
        }
    }

    #[test]
    fn lfdr_matches_direct_formula() {
        let p = params(0.03, 0.7, 6.0);
        for &t in &[0.3, 2.0, 5.5] {
            let z = zeta_k(t, p.k, p.d);
            assert_relative_eq!(lfdr_t(t, &p), 0.97 / (0.97 + 0.03 * z), max_relative = 1e-13);
            let zi = zeta_inf(t, p.d);
            assert_relative_eq!(lfdr_z(t, 0.03, p.d), 0.97 / (0.97 + 0.03 * zi), max_relative = 1e-13);
        }
    }

    #[test]
    fn odds_and_lfdr_are_consistent() {
        let p = params(0.01, 1.0, 6.0);
        assert_eq!(posterior_odds(0.0, &p, NullKind::T).unwrap(), 0.0);
        let expected = 0.01 / 0.99 * zeta_inf(4.0, p.d);
        assert_relative_eq!(posterior_odds(4.0, &p, NullKind::Z).unwrap(), expected, max_relative = 1e-13);
        for &x in &[0.5, 3.0, 8.0] {
            let odds = posterior_odds(x, &p, NullKind::T).unwrap();
            let l = lfdr_t(x, &p);
            assert_relative_eq!(odds * l, 1.0 - l, max_relative = 1e-12);
        }
        assert!(matches!(posterior_odds(1.0, &params(1.0, 1.0, 6.0), NullKind::T), Err(Error::InfiniteOdds)));
    }

    #[test]
    fn simulation_is_reproducible() {
        let p = params(0.2, 1.0, 6.0);
        let a = simulate_panel(&p, 20_000, 7).unwrap();
        let b = simulate_panel(&p, 20_000, 7).unwrap();
        assert_eq!(a.panel.scores(), b.panel.scores());
        assert_eq!(a.non_null, b.non_null);
        let c = simulate_panel(&p, 20_000, 8).unwrap();
        assert_ne!(a.panel.scores(), c.panel.scores());
        // A prefix of a larger panel is the smaller panel.
        let big = simulate_panel(&p, 30_000, 7).unwrap();
        assert_eq!(&big.panel.scores()[..20_000], a.panel.scores());
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let p = params(0.3, 0.8, 9.0);
        let base = simulate_panel(&p, 40_000, 11).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let single = pool.install(|| simulate_panel(&p, 40_000, 11).unwrap());
        assert_eq!(base.panel.scores(), single.panel.scores());
    }

    #[test]
    fn component_sampler_matches_coefficients() {
        let d = PowerIndex::new(1.0).unwrap();
        let beta = Beta::new(0.5, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 200_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            let r = sample_component(&mut rng, &beta);
            if r <= 4 {
                counts[r as usize - 1] += 1;
            }
        }
        let table = crate::coeffs::mixture_coefficients(d, 4);
        for (r, &c) in counts.iter().enumerate() {
            let p = table.weights()[r];
            let sd = (p * (1.0 - p) / n as f64).sqrt();
            assert!((c as f64 / n as f64 - p).abs() < 4.0 * sd, "r={} freq={} p={p}", r + 1, c);
        }
    }
}
