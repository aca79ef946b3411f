//! Monte-Carlo checks of the constructive laws against quadrature CDFs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::quadrature::{integrate, integrate_power_tail, Tolerance};
use crate::twogroups::simulate_panel;
use crate::zeta::{ln_component_density, ln_zeta_k, DegreesOfFreedom, ModelParams};

/// CDF of an even density tabulated on a grid fine enough that no cell
/// carries more than a prescribed probability.
#[derive(Debug, Clone)]
pub struct CdfTable {
    /// Ascending grid over ℝ.
    pub x: Vec<f64>,
    /// F at each grid point.
    pub cdf: Vec<f64>,
    /// Largest probability between neighbouring grid points.
    pub max_increment: f64,
}

impl CdfTable {
    /// Tabulates F for an even density f with tails decaying like |t|^{−p−1}.
    /// Cells are chosen in u = asinh(t) and halved until each carries at most
    /// `max_cell` probability; the grid stops once the remaining upper tail is
    /// below `tail_cut`.
    pub fn for_even_density<F: Fn(f64) -> f64 + Sync>(
        f: F,
        tail_power: f64,
        max_cell: f64,
        tail_cut: f64,
    ) -> Result<Self> {
        let tol = Tolerance::new(1e-15, 1e-12);
        let mut pos = vec![0.0f64];
        let mut cum = vec![0.0f64];
        let mut u = 0.0f64;
        let mut h = 0.01f64;
        let mut max_increment = 0.0f64;
        loop {
            let a = u.sinh();
            let b = (u + h).sinh();
            let mass = integrate(&f, a, b, tol)?.value;
            if mass > max_cell && h > 1e-9 {
                h *= 0.5;
                continue;
            }
            u += h;
            pos.push(b);
            cum.push(cum.last().unwrap() + mass);
            max_increment = max_increment.max(mass);
            if mass < 0.25 * max_cell {
                h = (2.0 * h).min(0.25);
            }
            if 0.5 - cum.last().unwrap() < 4.0 * tail_cut || u > 690.0 {
                let tail = integrate_power_tail(b, tail_power, &f, tol)?.value;
                if tail < tail_cut || u > 690.0 {
                    break;
                }
            }
        }
        let n = pos.len();
        let mut x = Vec::with_capacity(2 * n - 1);
        let mut cdf = Vec::with_capacity(2 * n - 1);
        for i in (1..n).rev() {
            x.push(-pos[i]);
            cdf.push(0.5 - cum[i]);
        }
        for i in 0..n {
            x.push(pos[i]);
            cdf.push(0.5 + cum[i]);
        }
        // The outer cells (to ±∞) count as increments too.
        max_increment = max_increment.max(0.5 - cum[n - 1]);
        Ok(CdfTable { x, cdf, max_increment })
    }
}

/// Two-sided bounds on the Kolmogorov–Smirnov distance between a sample and
/// a tabulated CDF. The true distance lies in [lower, upper], and
/// upper − lower is at most the largest grid increment.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KsBound {
    pub lower: f64,
    pub upper: f64,
    pub n: usize,
}

/// KS bounds for a sorted sample against a CDF table.
pub fn ks_bound(sorted: &[f64], table: &CdfTable) -> KsBound {
    let n = sorted.len() as f64;
    let lt = |x: f64| sorted.partition_point(|&s| s < x) as f64 / n;
    let le = |x: f64| sorted.partition_point(|&s| s <= x) as f64 / n;
    let m = table.x.len();
    let mut lower = 0.0f64;
    let mut upper = lt(table.x[0]).max(table.cdf[0]);
    for j in 0..m {
        let (xj, fj) = (table.x[j], table.cdf[j]);
        let (a, b) = (lt(xj), le(xj));
        lower = lower.max((a - fj).abs()).max((b - fj).abs());
        if j + 1 < m {
            let (xn, fnext) = (table.x[j + 1], table.cdf[j + 1]);
            upper = upper.max(lt(xn) - fj).max(fnext - b);
        } else {
            upper = upper.max(1.0 - b).max(1.0 - fj);
        }
    }
    upper = upper.max(lower);
    KsBound { lower, upper, n: sorted.len() }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentMc {
    pub r: u32,
    pub k: f64,
    pub ks: KsBound,
    pub max_increment: f64,
}

const CHUNK: usize = 1 << 14;

/// Samples T = X₁√(k/X₂²) with X₁ = ±√χ²_{2r+1} and X₂² ~ χ²_k and compares
/// them with the quadrature CDF of f_r.
pub fn component_mc(r: u32, k: DegreesOfFreedom, n: usize, seed: u64) -> Result<ComponentMc> {
    if n < 1000 {
        return Err(Error::Input(format!("component Monte Carlo needs n ≥ 1000, got {n}")));
    }
    let kv = k.value();
    let chi_y = ChiSquared::new(2.0 * f64::from(r) + 1.0).map_err(|e| Error::Domain(e.to_string()))?;
    let chi_k = ChiSquared::new(kv).map_err(|e| Error::Domain(e.to_string()))?;
    let mut samples: Vec<f64> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = CHUNK.min(n - c * CHUNK);
            (0..len)
                .map(|_| {
                    let y = chi_y.sample(&mut rng).sqrt();
                    let y = if rng.random::<bool>() { y } else { -y };
                    y * (kv / chi_k.sample(&mut rng)).sqrt()
                })
                .collect::<Vec<_>>()
        })
        .collect();
    samples.par_sort_unstable_by(f64::total_cmp);
    let table = CdfTable::for_even_density(|t| ln_component_density(t, k, r).exp(), kv, 1e-4, 1e-6)?;
    Ok(ComponentMc { r, k: kv, ks: ks_bound(&samples, &table), max_increment: table.max_increment })
}

/// KS bounds for a simulated all-signal panel (ρ = 1) against the quadrature
/// CDF of the non-null t-density f_0ζ_k.
pub fn signal_panel_ks(params: &ModelParams, n: usize, seed: u64) -> Result<(KsBound, f64)> {
    let all_signal = ModelParams { rho: 1.0, ..*params };
    let sim = simulate_panel(&all_signal, n, seed)?;
    let mut samples = sim.panel.scores().to_vec();
    samples.par_sort_unstable_by(f64::total_cmp);
    let (k, d) = (params.k, params.d);
    let density = |t: f64| (ln_component_density(t, k, 0) + ln_zeta_k(t, k, d)).exp();
    let table = CdfTable::for_even_density(density, d.value(), 1e-4, 1e-6)?;
    Ok((ks_bound(&samples, &table), table.max_increment))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::norm_cdf;

    #[test]
    fn ks_bound_brackets_exact_distance() {
        // Gaussian table against a deterministic "sample" of Gaussian quantiles shifted by 0.01.
        let table = CdfTable::for_even_density(crate::specfun::norm_pdf, 40.0, 1e-3, 1e-9).unwrap();
        let n = 2000;
        let sample: Vec<f64> = (0..n)
            .map(|i| crate::specfun::norm_quantile((i as f64 + 0.5) / n as f64).unwrap() + 0.01)
            .collect();
        let exact = sample
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = norm_cdf(x);
                (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        let b = ks_bound(&sample, &table);
        assert!(b.lower <= exact + 1e-12 && exact <= b.upper + 1e-12, "{b:?} vs {exact}");
        assert!(b.upper - b.lower <= table.max_increment + 1e-12);
    }

    #[test]
    fn small_component_run() {
        let out = component_mc(1, DegreesOfFreedom::new(6.0).unwrap(), 100_000, 1).unwrap();
        assert!(out.ks.upper < 1.63 / (1e5f64).sqrt() + out.max_increment);
    }
}
