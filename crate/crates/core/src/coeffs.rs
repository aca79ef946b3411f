//! Inverse-power exceedance measures and the mixture coefficients ζ_{d,r}.
//!
//! For a power index `0 < d < 2` the unit exceedance measure is
//! `C_d |x|^{-d-1} dx`. Its zeta function expands in weights
//! `ζ_{d,r} = −(−d)(−d+2)···(−d+2(r−1)) / (2^r r!)`, which form a probability
//! distribution on r = 1, 2, … with generating function `1 − (1 − s)^{d/2}`.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::specfun::ln_gamma;

/// Default number of tabulated coefficients.
pub const DEFAULT_TERMS: usize = 256;

/// Inverse-power index d, restricted to the open interval (0, 2).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct PowerIndex(f64);

impl PowerIndex {
    pub fn new(d: f64) -> Result<Self> {
        if d > 0.0 && d < 2.0 {
            Ok(PowerIndex(d))
        } else {
            Err(domain(format!("power index must lie in (0, 2), got {d}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// α = d/2, the exponent of the generating function 1 − (1 − s)^α.
    pub fn alpha(self) -> f64 {
        0.5 * self.0
    }
}

impl TryFrom<f64> for PowerIndex {
    type Error = Error;

    fn try_from(d: f64) -> Result<Self> {
        PowerIndex::new(d)
    }
}

/// C_d = d·2^{d/2−1} / Γ(1 − d/2), the constant making the inverse-power
/// measure a unit exceedance measure.
pub fn inverse_power_constant(d: PowerIndex) -> f64 {
    let d = d.value();
    (d.ln() + (0.5 * d - 1.0) * std::f64::consts::LN_2 - ln_gamma(1.0 - 0.5 * d)).exp()
}

/// First-order sparsity rate of the Student-t scale family on d degrees of
/// freedom at scale σ:
/// ρ = d^{d/2} Γ((d+1)/2) σ^d / (C_d √π Γ(d/2)).
pub fn student_scale_rate(sigma: f64, d: PowerIndex) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(domain(format!("scale must be positive, got {sigma}")));
    }
    let dv = d.value();
    let ln_rate = 0.5 * dv * dv.ln() + ln_gamma(0.5 * (dv + 1.0))
        - inverse_power_constant(d).ln()
        - 0.5 * std::f64::consts::PI.ln()
        - ln_gamma(0.5 * dv)
        + dv * sigma.ln();
    Ok(ln_rate.exp())
}

/// Sparsity rate for the average of m replicates: ρ_m = ρ·m^{d/2}.
pub fn rescale_rate(rho: f64, m: f64, d: PowerIndex) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(domain(format!("rho must lie in [0, 1], got {rho}")));
    }
    if !(m >= 1.0 && m.is_finite()) {
        return Err(domain(format!("replicate count must be at least 1, got {m}")));
    }
    let rho_m = rho * m.powf(d.alpha());
    if rho_m > 1.0 {
        return Err(Error::OutOfRegime(format!(
            "rescaled sparsity rate {rho_m} exceeds 1 (rho = {rho}, m = {m}, d = {})",
            d.value()
        )));
    }
    Ok(rho_m)
}

/// ln ζ_{d,r} = ln α + ln Γ(r − α) − ln Γ(1 − α) − ln Γ(r + 1), r ≥ 1.
pub fn ln_coefficient(d: PowerIndex, r: u64) -> f64 {
    assert!(r >= 1, "mixture coefficients are indexed from r = 1");
    let a = d.alpha();
    let r = r as f64;
    a.ln() + ln_gamma(r - a) - ln_gamma(1.0 - a) - ln_gamma(r + 1.0)
}

/// Tabulated weights ζ_{d,1..R} together with the exact remaining mass.
#[derive(Debug, Clone, Serialize)]
pub struct CoefficientTable {
    d: PowerIndex,
    weights: Vec<f64>,
    tail_mass: f64,
}

impl CoefficientTable {
    pub fn d(&self) -> PowerIndex {
        self.d
    }

    /// Weights, where `weights()[r - 1]` is ζ_{d,r}.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Σ_{r > R} ζ_{d,r}.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// ζ_{d,r} for 1 ≤ r ≤ R.
    pub fn get(&self, r: usize) -> Option<f64> {
        r.checked_sub(1).and_then(|i| self.weights.get(i).copied())
    }
}

/// Builds ζ_{d,1..R} by the recurrence ζ_{r+1} = ζ_r (2r − d)/(2r + 2).
///
/// The tail mass uses the closed form of the partial sums,
/// Σ_{r ≤ R} ζ_r = 1 − Γ(R + 1 − α)/(Γ(1 − α) R!), which gives
/// Σ_{r > R} ζ_r = ζ_R (R − α)/α.
pub fn mixture_coefficients(d: PowerIndex, terms: usize) -> CoefficientTable {
    let terms = terms.max(1);
    let dv = d.value();
    let mut weights = Vec::with_capacity(terms);
    let mut w = d.alpha();
    weights.push(w);
    for r in 1..terms {
        let r = r as f64;
        w *= (2.0 * r - dv) / (2.0 * r + 2.0);
        weights.push(w);
    }
    let big_r = terms as f64;
    let tail_mass = w * (big_r - d.alpha()) / d.alpha();
    CoefficientTable { d, weights, tail_mass }
}

/// Unbounded iterator over (r, ζ_{d,r}) computed by the same recurrence.
#[derive(Debug, Clone)]
pub struct Coefficients {
    d: f64,
    r: u64,
    w: f64,
}

impl Coefficients {
    pub fn new(d: PowerIndex) -> Self {
        Coefficients { d: d.value(), r: 0, w: d.alpha() }
    }
}

impl Iterator for Coefficients {
    type Item = (u64, f64);

    fn next(&mut self) -> Option<(u64, f64)> {
        if self.r > 0 {
            let r = self.r as f64;
            self.w *= (2.0 * r - self.d) / (2.0 * r + 2.0);
        }
        self.r += 1;
        Some((self.r, self.w))
    }
}
