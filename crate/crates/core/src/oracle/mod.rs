//! Independent numerical verifiers: adaptive quadrature of the defining
//! integrals and Monte-Carlo checks of the constructive laws. None of these
//! routines use the series evaluations they are meant to check.

pub mod montecarlo;
pub mod quadrature;
pub mod verify;

use serde::Serialize;

use crate::coeffs::{inverse_power_constant, PowerIndex};
use crate::error::Result;
use crate::specfun::{ln_beta, ln_gamma, norm_pdf};
use quadrature::{
    integrate, integrate_power_origin, integrate_power_tail, integrate_to_infinity, QuadratureResult, Tolerance,
};

fn combine(parts: &[QuadratureResult], scale: f64) -> QuadratureResult {
    QuadratureResult {
        value: scale * quadrature::neumaier_sum(parts.iter().map(|p| p.value)),
        abs_error_estimate: scale.abs() * parts.iter().map(|p| p.abs_error_estimate).sum::<f64>(),
        subdivisions: parts.iter().map(|p| p.subdivisions).sum(),
    }
}

/// Signal families with a sparse limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SignalFamily {
    /// σ·T_d with T_d Student-t on d degrees of freedom.
    Student { d: f64 },
    /// σ·C with C standard Cauchy.
    Cauchy,
    /// (1 − w)δ_0 + w·σC.
    SpikeSlab { weight: f64 },
}

/// Student-t density on ν degrees of freedom (independent of the library's
/// incomplete-beta route, written out from the Beta function).
fn student_density(u: f64, nu: f64) -> f64 {
    (-(0.5 * (nu + 1.0)) * (u * u / nu).ln_1p() - 0.5 * nu.ln() - ln_beta(0.5, 0.5 * nu)).exp()
}

/// ∫(1 − e^{−x²/2}) P_σ(dx) for the given family at scale σ.
pub fn sparsity_rate_quadrature(family: SignalFamily, sigma: f64) -> Result<QuadratureResult> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(crate::error::domain(format!("scale must be positive, got {sigma}")));
    }
    let (nu, weight) = match family {
        SignalFamily::Student { d } => (d, 1.0),
        SignalFamily::Cauchy => (1.0, 1.0),
        SignalFamily::SpikeSlab { weight } => (1.0, weight),
    };
    // With x = σu: 2∫_0^∞ (1 − e^{−σ²u²/2}) t_ν(u) du. Most mass sits near u ~ 1/σ.
    let f = |u: f64| -(-0.5 * sigma * sigma * u * u).exp_m1() * student_density(u, nu);
    let split = 1.0 / sigma;
    let tol = Tolerance::new(1e-13, 1e-12);
    let head = integrate(f, 0.0, split, tol)?;
    let tail = integrate_power_tail(split, nu, f, tol)?;
    Ok(combine(&[head, tail], 2.0 * weight))
}

/// ζ_∞(y) = ∫(cosh(xy) − 1)e^{−x²/2} C_d|x|^{−d−1} dx by quadrature.
pub fn zeta_quadrature(y: f64, d: PowerIndex) -> Result<QuadratureResult> {
    if y == 0.0 {
        return Ok(QuadratureResult { value: 0.0, abs_error_estimate: 0.0, subdivisions: 0 });
    }
    let y = y.abs();
    let dv = d.value();
    // cosh(xy) − 1 = 2 sinh²(xy/2) ~ x²y²/2, so the integrand is x^{1−d} times a smooth factor.
    let smooth = |x: f64| {
        let h = 0.5 * x * y;
        if h > 20.0 {
            // sinh h ≈ e^h/2; combine exponents before exponentiating.
            return (2.0 * h - 0.5 * x * x).exp() / (2.0 * x * x);
        }
        let sh = if h < 1e-8 { 1.0 } else { h.sinh() / h };
        0.5 * y * y * sh * sh * (-0.5 * x * x).exp()
    };
    let tol = Tolerance::new(1e-14, 1e-12);
    let head = integrate_power_origin(1.0 - dv, smooth, 1.0, tol)?;
    let peak = y.max(1.0);
    let mid = integrate(|x| smooth(x) * x.powf(1.0 - dv), 1.0, peak, tol)?;
    let tail = integrate_to_infinity(|x| smooth(x) * x.powf(1.0 - dv), peak, tol)?;
    Ok(combine(&[head, mid, tail], 2.0 * inverse_power_constant(d)))
}

/// Non-null density ψ(y) = φ(y)ζ_∞(y) of the Gaussian convolution, written as
/// ∫[½(φ(y − x) + φ(y + x)) − φ(y)e^{−x²/2}] H_d(dx) so that large |y| stays finite.
pub fn signal_density_quadrature(y: f64, d: PowerIndex) -> Result<QuadratureResult> {
    let y = y.abs();
    let dv = d.value();
    let phi_y = norm_pdf(y);
    let bracket = |x: f64| {
        if x * y < 30.0 {
            let h = 0.5 * x * y;
            phi_y * (-0.5 * x * x).exp() * 2.0 * h.sinh() * h.sinh()
        } else {
            0.5 * (norm_pdf(y - x) + norm_pdf(y + x)) - phi_y * (-0.5 * x * x).exp()
        }
    };
    let integrand = |x: f64| bracket(x) * x.powf(-dv - 1.0);
    let tol = Tolerance::new(1e-300, 1e-11);
    let head = integrate_power_origin(
        1.0 - dv,
        |x| {
            if x == 0.0 {
                phi_y * 0.5 * y * y
            } else {
                bracket(x) / (x * x)
            }
        },
        1.0,
        tol,
    )?;
    let mut parts = vec![head];
    let lo = (y - 12.0).max(1.0);
    let hi = (y + 12.0).max(1.0);
    parts.push(integrate(integrand, 1.0, lo, tol)?);
    parts.push(integrate(integrand, lo, hi, tol)?);
    parts.push(integrate_power_tail(hi, dv, integrand, tol)?);
    Ok(combine(&parts, 2.0 * inverse_power_constant(d)))
}

/// (1·3···(2r−1)/(2r)!)·∫x^{2r}e^{−x²/2} H_d(dx), which should equal ζ_{d,r}.
pub fn coefficient_quadrature(d: PowerIndex, r: u32) -> Result<QuadratureResult> {
    assert!(r >= 1, "coefficients are indexed from r = 1");
    let dv = d.value();
    let p = 2.0 * f64::from(r) - dv - 1.0;
    let tol = Tolerance::new(0.0, 1e-13);
    let g = |x: f64| (p * x.ln() - 0.5 * x * x).exp();
    // x^p e^{−x²/2} peaks at √p; split there so each piece stays well shaped.
    let peak = p.max(1.0).sqrt();
    let head = integrate_power_origin(p, |x| (-0.5 * x * x).exp(), 1.0, tol)?;
    let mid = integrate(g, 1.0, peak.max(1.0) + 1.0, tol)?;
    let upper = integrate(g, peak + 1.0, peak + 40.0, tol)?;
    let tail = integrate_to_infinity(g, peak + 40.0, tol)?;
    let moment = combine(&[head, mid, upper, tail], 1.0);
    // 1·3···(2r−1)/(2r)! = 1/(2^r r!)
    let rf = f64::from(r);
    let scale = 2.0 * inverse_power_constant(d) * (-(rf * std::f64::consts::LN_2) - ln_gamma(rf + 1.0)).exp();
    Ok(combine(&[moment], scale))
}

/// ∫ f over ℝ for an even density with tail decay |t|^{−p−1}.
pub fn even_density_mass<F: Fn(f64) -> f64>(f: F, tail_power: f64, split: f64) -> Result<QuadratureResult> {
    let tol = Tolerance::new(1e-13, 1e-12);
    let head = integrate(&f, 0.0, split, tol)?;
    let tail = integrate_power_tail(split, tail_power, &f, tol)?;
    Ok(combine(&[head, tail], 2.0))
}

/// Non-null t-density Σζ_r f_r at t obtained from the constructive law T = Y/s
/// with Y ~ ψ and ks² ~ χ²_k: ∫_0^∞ ψ(ts) s p(s) ds.
pub fn signal_t_density_quadrature(t: f64, k: f64, d: PowerIndex) -> Result<QuadratureResult> {
    let t = t.abs();
    // Density of s = √(χ²_k/k).
    let ln_norm = (0.5 * k) * (0.5 * k).ln() + std::f64::consts::LN_2 - ln_gamma(0.5 * k);
    let scale_density = |s: f64| (ln_norm + (k - 1.0) * s.ln() - 0.5 * k * s * s).exp();
    let integrand = |s: f64| {
        if s == 0.0 {
            return 0.0;
        }
        let psi = signal_density_quadrature(t * s, d).map_or(f64::NAN, |q| q.value);
        psi * s * scale_density(s)
    };
    let tol = Tolerance::new(1e-300, 1e-10);
    let peak = 1.0;
    let head = integrate(integrand, 0.0, peak, tol)?;
    let tail = integrate_to_infinity(integrand, peak, tol)?;
    Ok(combine(&[head, tail], 1.0))
}
