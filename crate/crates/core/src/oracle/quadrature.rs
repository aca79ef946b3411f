//! Globally adaptive Gauss–Kronrod (7/15) quadrature with helpers for
//! semi-infinite ranges and power-law endpoint behaviour.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub subdivisions: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_subdivisions: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel, max_subdivisions: 4000 }
    }

    pub fn abs(abs: f64) -> Self {
        Tolerance::new(abs, 0.0)
    }

    pub fn rel(rel: f64) -> Self {
        Tolerance::new(0.0, rel)
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = kronrod * half;
    let abs_res = abs_sum * half.abs();
    let asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    if abs_res > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * abs_res);
    }
    (result, err)
}

/// ∫_a^b f(x) dx over a finite interval.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<QuadratureResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature(format!("non-finite limits [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadratureResult { value: 0.0, abs_error_estimate: 0.0, subdivisions: 1 });
    }
    let (value, error) = gauss_kronrod(&f, a, b);
    if !value.is_finite() {
        return Err(Error::Quadrature(format!("non-finite integrand on [{a}, {b}]")));
    }
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    let mut subdivisions = 1;
    // Segments too narrow to split further are retired here.
    let mut retired_err = 0.0;
    loop {
        // Nothing tighter than the per-segment roundoff floor is attainable.
        let target = tol.abs.max(tol.rel.max(100.0 * f64::EPSILON) * total.abs());
        if total_err <= target {
            break;
        }
        let Some(seg) = heap.pop() else {
            break;
        };
        let mid = 0.5 * (seg.a + seg.b);
        if !(mid > seg.a.min(seg.b) && mid < seg.a.max(seg.b))
            || (seg.b - seg.a).abs() <= 1e-14 * seg.a.abs().max(seg.b.abs())
        {
            retired_err += seg.error;
            if heap.is_empty() {
                break;
            }
            continue;
        }
        if subdivisions >= tol.max_subdivisions {
            heap.push(seg);
            let total_err: f64 = heap.iter().map(|s| s.error).sum::<f64>() + retired_err;
            return Err(Error::Quadrature(format!(
                "subdivision limit {} reached on [{a}, {b}] (estimate {total}, error {total_err:e})",
                tol.max_subdivisions
            )));
        }
        let (v1, e1) = gauss_kronrod(&f, seg.a, mid);
        let (v2, e2) = gauss_kronrod(&f, mid, seg.b);
        if !(v1.is_finite() && v2.is_finite()) {
            return Err(Error::Quadrature(format!("non-finite integrand on [{}, {}]", seg.a, seg.b)));
        }
        subdivisions += 1;
        heap.push(Segment { a: seg.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, error: e2 });
        // Re-sum rather than update incrementally to avoid drift.
        total = heap.iter().map(|s| s.value).sum::<f64>();
        total_err = heap.iter().map(|s| s.error).sum::<f64>() + retired_err;
    }
    let mut segs = heap.into_vec();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = neumaier_sum(segs.iter().map(|s| s.value));
    Ok(QuadratureResult { value, abs_error_estimate: total_err, subdivisions })
}

/// ∫_a^∞ f(x) dx via x = a + u/(1 − u).
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, tol: Tolerance) -> Result<QuadratureResult> {
    integrate(
        |u| {
            let v = 1.0 - u;
            let x = a + u / v;
            let fx = f(x);
            if fx == 0.0 {
                0.0
            } else {
                fx / (v * v)
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// ∫_0^upper x^p g(x) dx for p > −1 and smooth g, via x = w^{1/(p+1)}, which
/// removes the power behaviour at the origin. `upper` may be +∞.
pub fn integrate_power_origin<G: Fn(f64) -> f64>(
    p: f64,
    g: G,
    upper: f64,
    tol: Tolerance,
) -> Result<QuadratureResult> {
    if p.is_nan() || p <= -1.0 {
        return Err(Error::Quadrature(format!("power {p} is not integrable at the origin")));
    }
    let e = 1.0 / (p + 1.0);
    let inner = |w: f64| e * g(w.powf(e));
    if upper.is_infinite() {
        integrate_to_infinity(inner, 0.0, tol)
    } else {
        integrate(inner, 0.0, upper.powf(p + 1.0), tol)
    }
}

/// ∫_a^∞ f(s) ds for a > 0 and an integrand decaying like s^{−d−1}, via
/// s = a·w^{−1/d}, which maps the tail to a smooth integrand on (0, 1].
pub fn integrate_power_tail<F: Fn(f64) -> f64>(
    a: f64,
    d: f64,
    f: F,
    tol: Tolerance,
) -> Result<QuadratureResult> {
    if !(a > 0.0 && d > 0.0) {
        return Err(Error::Quadrature(format!("power tail needs a > 0 and d > 0, got a={a}, d={d}")));
    }
    let inner = |w: f64| {
        if w <= 0.0 {
            return 0.0;
        }
        let s = a * w.powf(-1.0 / d);
        if !s.is_finite() {
            return 0.0;
        }
        // ds = (a/d) w^{−1/d − 1} dw = (s / (d w)) dw
        f(s) * s / (d * w)
    };
    integrate(inner, 0.0, 1.0, tol)
}

/// Compensated (Neumaier) summation.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in iter {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
