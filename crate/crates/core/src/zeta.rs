//! Zeta functions and the densities built from them.
//!
//! `ζ_∞` is the density ratio of the non-null to the null component when
//! the null is standard Gaussian; `ζ_k` is the same ratio when the null is
//! Student-t on k degrees of freedom:
//!
//! ```text
//! ζ_∞(y) = Σ_{r≥1} ζ_{d,r} y^{2r} / (1·3···(2r−1))
//! ζ_k(t) = Σ_{r≥1} ζ_{d,r} [t^{2r}/(1·3···(2r−1))] [(1+k)(3+k)···(2r−1+k)/(k+t²)^r]
//! ```
//!
//! Both series have positive terms and are summed with a running log scale.
//! The ζ_k series converges like q^r with q = t²/(k+t²); once that would take
//! more than a few tens of thousands of terms, the remainder is evaluated by
//! Euler–Maclaurin summation of the continuous term function.

use serde::Serialize;

use crate::coeffs::PowerIndex;
use crate::error::{domain, Result};
use crate::oracle::quadrature::{integrate_to_infinity, neumaier_sum, Tolerance};
use crate::specfun::{
    invert_centered, ln_beta, ln_gamma, ln_norm_pdf, ln_t_pdf, ln_t_tail_and_center,
    norm_cdf_centered, norm_isf_ln, norm_ln_sf, psi, t_center_inverse_ln, t_isf_ln, tetragamma,
    trigamma,
};

/// Default relative truncation tolerance for the zeta series.
pub const DEFAULT_SERIES_TOL: f64 = 1e-12;

/// Beyond this many estimated terms, the ζ_k tail switches to Euler–Maclaurin.
const DIRECT_TERM_LIMIT: f64 = 40_000.0;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct DegreesOfFreedom(f64);

impl DegreesOfFreedom {
    pub fn new(k: f64) -> Result<Self> {
        if k > 0.0 && k.is_finite() {
            Ok(DegreesOfFreedom(k))
        } else {
            Err(domain(format!("degrees of freedom must be positive and finite, got {k}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Sparsity rate, power index and degrees of freedom of the two-groups t-model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    pub rho: f64,
    pub d: PowerIndex,
    pub k: DegreesOfFreedom,
}

impl ModelParams {
    pub fn new(rho: f64, d: f64, k: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(domain(format!("rho must lie in [0, 1], got {rho}")));
        }
        Ok(ModelParams { rho, d: PowerIndex::new(d)?, k: DegreesOfFreedom::new(k)? })
    }
}

/// Positive-term series accumulated on a running log scale.
struct ScaledSum {
    ln_scale: f64,
    sum: f64,
    comp: f64,
}

const RESCALE_AT: f64 = 1e150;

impl ScaledSum {
    fn new(ln_scale: f64) -> Self {
        ScaledSum { ln_scale, sum: 0.0, comp: 0.0 }
    }

    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }

    /// Rescales the accumulator and returns the factor to apply to the running term.
    fn rescale(&mut self) -> f64 {
        let f = 1.0 / RESCALE_AT;
        self.sum *= f;
        self.comp *= f;
        self.ln_scale += RESCALE_AT.ln();
        f
    }

    fn ln_total(&self) -> f64 {
        self.ln_scale + self.total().ln()
    }
}

/// Sums term_1 + term_2 + … with term_{r+1} = term_r·ratio(r), starting from
/// ln term_1. `limit` is lim_{r→∞} ratio(r). Stops when the geometric bound on
/// the remainder falls below `tol` times the partial sum, or after `max_terms`.
/// Returns (ln partial sum, ln of the last term included, number of terms).
fn ln_positive_series<R: Fn(f64) -> f64>(
    ln_first: f64,
    ratio: R,
    limit: f64,
    tol: f64,
    max_terms: u64,
) -> (f64, f64, u64) {
    let mut acc = ScaledSum::new(ln_first);
    let mut term = 1.0;
    let mut r = 1u64;
    loop {
        acc.add(term);
        let rt = ratio(r as f64);
        let next = term * rt;
        if r >= max_terms {
            return (acc.ln_total(), acc.ln_scale + term.ln(), r);
        }
        let bound = rt.max(ratio(r as f64 + 1.0)).max(limit);
        if next == 0.0 || (bound < 1.0 && next / (1.0 - bound) <= tol * acc.total()) {
            return (acc.ln_total(), acc.ln_scale + term.ln(), r);
        }
        term = next;
        if term > RESCALE_AT {
            term *= acc.rescale();
        }
        r += 1;
    }
}

/// ln ζ_∞(y); −∞ at y = 0.
pub fn ln_zeta_inf(y: f64, d: PowerIndex) -> f64 {
    ln_zeta_inf_tol(y, d, DEFAULT_SERIES_TOL)
}

pub fn ln_zeta_inf_tol(y: f64, d: PowerIndex, tol: f64) -> f64 {
    if y == 0.0 {
        return f64::NEG_INFINITY;
    }
    let dv = d.value();
    let y2 = y * y;
    let ln_first = d.alpha().ln() + 2.0 * y.abs().ln();
    let ratio = |r: f64| (2.0 * r - dv) / (2.0 * r + 2.0) * y2 / (2.0 * r + 1.0);
    ln_positive_series(ln_first, ratio, 0.0, tol, u64::MAX).0
}

/// Gaussian zeta function ζ_∞(y) for the inverse-power measure with index d.
pub fn zeta_inf(y: f64, d: PowerIndex) -> f64 {
    ln_zeta_inf(y, d).exp()
}

/// ln of f_r(t)/f_0(t) = t^{2r} (1+k)(3+k)···(2r−1+k) / [(1·3···(2r−1)) (k+t²)^r].
pub fn ln_component_density_ratio(t: f64, k: DegreesOfFreedom, r: u32) -> f64 {
    if r == 0 {
        return 0.0;
    }
    if t == 0.0 {
        return f64::NEG_INFINITY;
    }
    let k = k.value();
    let mut acc = 0.0;
    for j in 0..r {
        let odd = 2.0 * f64::from(j) + 1.0;
        acc += (odd + k).ln() - odd.ln();
    }
    acc + f64::from(r) * ln_q(t, k)
}

pub fn component_density_ratio(t: f64, k: DegreesOfFreedom, r: u32) -> f64 {
    ln_component_density_ratio(t, k, r).exp()
}

/// ln(t²/(k + t²)), stable for large and small |t|.
fn ln_q(t: f64, k: f64) -> f64 {
    let at = t.abs();
    if at > 1e100 {
        -(k / at / at)
    } else {
        -(k / (at * at)).ln_1p()
    }
}

/// ln ζ_k(t); −∞ at t = 0.
pub fn ln_zeta_k(t: f64, k: DegreesOfFreedom, d: PowerIndex) -> f64 {
    ln_zeta_k_tol(t, k, d, DEFAULT_SERIES_TOL)
}

pub fn ln_zeta_k_tol(t: f64, k: DegreesOfFreedom, d: PowerIndex, tol: f64) -> f64 {
    if t == 0.0 {
        return f64::NEG_INFINITY;
    }
    let kv = k.value();
    let dv = d.value();
    let alpha = d.alpha();
    let ln_q = ln_q(t, kv);
    let q = ln_q.exp();
    // Decay rate λ = −ln q of the terms once past their peak near r ≈ γ/λ.
    let lambda = -ln_q;
    let gamma = 0.5 * kv - 1.0 - alpha;
    let ln_lambda = if t.abs() > 1e100 { kv.ln() - 2.0 * t.abs().ln() } else { lambda.ln() };
    if ln_lambda < -600.0 {
        return ln_zeta_k_limit(alpha, kv, ln_lambda);
    }
    let ratio = |r: f64| (2.0 * r - dv) / (2.0 * r + 2.0) * (2.0 * r + 1.0 + kv) / (2.0 * r + 1.0) * q;
    let ln_first = alpha.ln() + (1.0 + kv).ln() + ln_q;
    let estimated_terms = (gamma.max(0.0) + 40.0) / lambda;
    if estimated_terms <= DIRECT_TERM_LIMIT {
        return ln_positive_series(ln_first, ratio, q, tol, u64::MAX).0;
    }
    // Head by direct recurrence, remainder by Euler–Maclaurin.
    let head_terms = (20.0 * gamma.abs()).max(200.0).ceil() as u64;
    let (ln_head, _, _) = ln_positive_series(ln_first, ratio, q, 0.0, head_terms - 1);
    let tail = TermFunction { alpha, beta: 0.5 * (kv + 1.0), lambda };
    let ln_tail = tail.ln_sum_from(head_terms as f64, tol);
    ln_add(ln_head, ln_tail)
}

/// Leading behaviour as λ = ln(1 + k/t²) → 0. The terms behave like c·r^γ·e^{−λr}
/// with γ = k/2 − 1 − α, so the sum grows like c·Γ(γ + 1)·λ^{−γ−1} when γ > −1 and
/// tends to the Gauss value 1 − ₂F₁(−α, (k+1)/2; ½; 1) when γ < −1.
fn ln_zeta_k_limit(alpha: f64, k: f64, ln_lambda: f64) -> f64 {
    let beta = 0.5 * (k + 1.0);
    let ln_c = alpha.ln() - ln_gamma(1.0 - alpha) + ln_gamma(0.5) - ln_gamma(beta);
    let g1 = 0.5 * k - alpha;
    if g1 > 0.0 {
        ln_c + ln_gamma(g1) - g1 * ln_lambda
    } else if g1 < 0.0 {
        // Γ(−k/2) < 0 here, so the hypergeometric value exceeds 1 in magnitude.
        let ln_abs_gamma_neg = ln_gamma(1.0 - 0.5 * k) - (0.5 * k).ln();
        let ln_term = ln_gamma(0.5) + ln_gamma(-g1) - ln_gamma(0.5 + alpha) - ln_abs_gamma_neg;
        ln_term.exp().ln_1p()
    } else {
        ln_c + (-ln_lambda).ln()
    }
}

/// Student-t zeta function ζ_k(t).
pub fn zeta_k(t: f64, k: DegreesOfFreedom, d: PowerIndex) -> f64 {
    ln_zeta_k(t, k, d).exp()
}

fn ln_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// ln Γ(x + a) − ln Γ(x + b) for large x, written so that no two large
/// quantities are subtracted.
fn ln_gamma_ratio(x: f64, a: f64, b: f64) -> f64 {
    if x + a.min(b) < 12.0 {
        return ln_gamma(x + a) - ln_gamma(x + b);
    }
    let corr = |y: f64| {
        let y2 = 1.0 / (y * y);
        (1.0 / 12.0 - y2 * (1.0 / 360.0 - y2 * (1.0 / 1260.0 - y2 / 1680.0))) / y
    };
    (a - b) * x.ln() + (x + a - 0.5) * (a / x).ln_1p() - (x + b - 0.5) * (b / x).ln_1p() - (a - b)
        + corr(x + a)
        - corr(x + b)
}

/// Continuous extension r ↦ ln[ζ_{d,r} (β)_r/(½)_r q^r] of the ζ_k terms, with
/// β = (k + 1)/2 and q = e^{−λ}.
struct TermFunction {
    alpha: f64,
    beta: f64,
    lambda: f64,
}

impl TermFunction {
    fn ln_term(&self, r: f64) -> f64 {
        let a = self.alpha;
        a.ln() - ln_gamma(1.0 - a) - ln_gamma(self.beta) + 0.5 * std::f64::consts::PI.ln()
            + ln_gamma_ratio(r, -a, 1.0)
            + ln_gamma_ratio(r, self.beta, 0.5)
            - self.lambda * r
    }

    /// Derivatives of ln term: (L′, L″, L‴).
    fn ln_term_derivatives(&self, r: f64) -> (f64, f64, f64) {
        let (a, b) = (self.alpha, self.beta);
        let d1 = psi(r - a) - psi(r + 1.0) + psi(r + b) - psi(r + 0.5) - self.lambda;
        let d2 = trigamma(r - a) - trigamma(r + 1.0) + trigamma(r + b) - trigamma(r + 0.5);
        let d3 = tetragamma(r - a) - tetragamma(r + 1.0) + tetragamma(r + b) - tetragamma(r + 0.5);
        (d1, d2, d3)
    }

    /// ln Σ_{r ≥ n} term(r) by Euler–Maclaurin:
    /// ∫_n^∞ T + T(n)/2 − T′(n)/12 + T‴(n)/720.
    fn ln_sum_from(&self, n: f64, tol: f64) -> f64 {
        // Reference level: the maximum of ln T over [n, ∞).
        let mut peak = n;
        let (d1, _, _) = self.ln_term_derivatives(n);
        if d1 > 0.0 {
            let gamma = self.beta - self.alpha - 1.5;
            let mut r = (gamma / self.lambda).max(n);
            for _ in 0..50 {
                let (g1, g2, _) = self.ln_term_derivatives(r);
                let step = g1 / g2;
                let next = (r - step).max(n);
                if (next - r).abs() <= 1e-10 * r {
                    r = next;
                    break;
                }
                r = next;
            }
            peak = r;
        }
        let ln_ref = self.ln_term(peak);
        let lam = self.lambda;
        let integral = integrate_to_infinity(
            |x| (self.ln_term(n + x / lam) - ln_ref).exp() / lam,
            0.0,
            Tolerance::rel(tol.max(1e-14)),
        )
        .map(|r| r.value)
        .unwrap_or(f64::NAN);
        let t_n = (self.ln_term(n) - ln_ref).exp();
        let (l1, l2, l3) = self.ln_term_derivatives(n);
        let t1 = t_n * l1;
        let t3 = t_n * (l3 + 3.0 * l1 * l2 + l1 * l1 * l1);
        let total = neumaier_sum([integral, 0.5 * t_n, -t1 / 12.0, t3 / 720.0]);
        ln_ref + total.ln()
    }
}

/// ln f_r(t) for the r-th component density on k degrees of freedom.
pub fn ln_component_density(t: f64, k: DegreesOfFreedom, r: u32) -> f64 {
    let kv = k.value();
    let rv = f64::from(r);
    if r == 0 {
        return ln_t_pdf(t, kv);
    }
    if t == 0.0 {
        return f64::NEG_INFINITY;
    }
    let at = t.abs();
    let ln_kernel = if at > 1e100 {
        2.0 * rv * at.ln() - (rv + 0.5 + 0.5 * kv) * (2.0 * at.ln() - kv.ln())
    } else {
        2.0 * rv * at.ln() - (rv + 0.5 + 0.5 * kv) * (at * at / kv).ln_1p()
    };
    ln_kernel - (rv + 0.5) * kv.ln() - ln_beta(rv + 0.5, 0.5 * kv)
}

/// f_r(t) = t^{2r}/(1 + t²/k)^{r+½+k/2} · Γ(½)/(k^{r+½} √π B(r + ½, k/2)); f_0 is the
/// Student-t density.
pub fn component_density(t: f64, k: DegreesOfFreedom, r: u32) -> f64 {
    ln_component_density(t, k, r).exp()
}

/// Student-t mixture density (1 − ρ) f_0(t) + ρ f_0(t) ζ_k(t).
pub fn t_mixture_pdf(t: f64, params: &ModelParams) -> f64 {
    let ln_f0 = ln_t_pdf(t, params.k.value());
    mixture_factor(params.rho, ln_zeta_k(t, params.k, params.d), ln_f0)
}

/// (1 − ρ + ρ e^{ln ζ}) e^{ln base}, kept in log space until the end.
fn mixture_factor(rho: f64, ln_zeta: f64, ln_base: f64) -> f64 {
    if rho == 0.0 {
        return ln_base.exp();
    }
    let ln_signal = rho.ln() + ln_zeta;
    let ln_null = if rho < 1.0 { (-rho).ln_1p() } else { f64::NEG_INFINITY };
    (ln_add(ln_null, ln_signal) + ln_base).exp()
}

/// Probability integral transform g(t) = Φ⁻¹(F_0(t; k)), computed from the
/// nearer tail so that large |t| keep full relative accuracy.
pub fn pit_transform(t: f64, k: DegreesOfFreedom) -> f64 {
    if t == 0.0 || t.is_nan() {
        return t;
    }
    let kv = k.value();
    let (ln_tail, ln_center) = ln_t_tail_and_center(t, kv);
    let z = if ln_tail > 0.25f64.ln() {
        invert_centered(ln_center.exp())
    } else {
        norm_isf_ln(ln_tail).unwrap_or(f64::INFINITY)
    };
    z.copysign(t)
}

/// Inverse transform g⁻¹(z) = F_0⁻¹(Φ(z); k).
pub fn pit_inverse(z: f64, k: DegreesOfFreedom) -> f64 {
    if z == 0.0 || z.is_nan() {
        return z;
    }
    let kv = k.value();
    let az = z.abs();
    let ln_tail = norm_ln_sf(az);
    let t = if ln_tail > 0.25f64.ln() {
        t_center_inverse_ln(norm_cdf_centered(az).ln(), kv)
    } else {
        t_isf_ln(ln_tail, kv)
    };
    t.copysign(z)
}

/// g′(t) = f_0(t)/φ(g(t)).
pub fn pit_derivative(t: f64, k: DegreesOfFreedom) -> f64 {
    (ln_t_pdf(t, k.value()) - ln_norm_pdf(pit_transform(t, k))).exp()
}

/// Density of Z = g(T) under the t-mixture: φ(z)(1 − ρ + ρ ζ_k(g⁻¹(z))).
pub fn pit_mixture_pdf(z: f64, params: &ModelParams) -> f64 {
    let t = pit_inverse(z, params.k);
    mixture_factor(params.rho, ln_zeta_k(t, params.k, params.d), ln_norm_pdf(z))
}

/// Gaussian mixture density (1 − ρ)φ(y) + ρ φ(y) ζ_∞(y).
pub fn z_mixture_pdf(y: f64, rho: f64, d: PowerIndex) -> f64 {
    mixture_factor(rho, ln_zeta_inf(y, d), ln_norm_pdf(y))
}
