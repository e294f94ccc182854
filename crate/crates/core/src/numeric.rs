//! Adaptive quadrature and bracketed root finding.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// 15-point Kronrod extension of the 7-point Gauss rule.
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
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SEGMENTS: usize = 2000;

/// Tolerances for [`integrate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadTolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for QuadTolerance {
    fn default() -> Self {
        QuadTolerance { abs: 1e-13, rel: 1e-12 }
    }
}

fn kronrod<F>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx)? + f(center + dx)?;
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Ok((kronrod * half, ((kronrod - gauss) * half).abs()))
}

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

/// Globally adaptive Gauss-Kronrod quadrature of `f` over `[a, b]`.
///
/// `b < a` is allowed and flips the sign. Integrand failures are passed
/// through unchanged.
pub fn integrate<F>(mut f: F, a: f64, b: f64, tol: QuadTolerance) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "quadrature limits must be finite, got [{a}, {b}]"
        )));
    }
    let (value, error) = kronrod(&mut f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    loop {
        if !(total.is_finite() && total_err.is_finite()) {
            return Err(Error::Quadrature { a, b });
        }
        if total_err <= tol.abs.max(tol.rel * total.abs()) {
            break;
        }
        if heap.len() >= MAX_SEGMENTS {
            return Err(Error::Quadrature { a, b });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid == worst.a || mid == worst.b {
            return Err(Error::Quadrature { a, b });
        }
        let (v1, e1) = kronrod(&mut f, worst.a, mid)?;
        let (v2, e2) = kronrod(&mut f, mid, worst.b)?;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // re-sum to shed the drift of the running total
    Ok(heap.iter().map(|s| s.value).sum())
}

/// Brent's method on a sign-changing bracket.
///
/// Stops when `|f(x)| <= ftol` or the bracket is narrower than `xtol`
/// (relative to the magnitude of the iterate).
pub fn brent<F>(mut f: F, a: f64, b: f64, xtol: f64, ftol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (a, b);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoBracket { a, b });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb.abs() <= ftol {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
    }
    Ok(b)
}

/// Plain bisection on a sign change, down to a bracket of width `xtol`.
/// Returns the endpoint on the far side of the sign change.
pub fn bisect<F>(mut f: F, a: f64, b: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = (a, b);
    let flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoBracket { a, b });
    }
    while (hi - lo).abs() > xtol {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| Ok(x * x * x - 2.0 * x), 1.0, 2.0, QuadTolerance::default()).unwrap();
        assert!((v - (15.0 / 4.0 - 3.0)).abs() < 1e-15);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let v = integrate(Ok, 2.0, 1.0, QuadTolerance::default()).unwrap();
        assert!((v + 1.5).abs() < 1e-15);
    }

    #[test]
    fn peaked_integrand() {
        // integral of 1/(1e-4 + x^2) over [-1, 1]
        let eps = 1e-4f64;
        let exact = 2.0 * (1.0 / eps.sqrt()).atan() / eps.sqrt();
        let v = integrate(|x| Ok(1.0 / (eps + x * x)), -1.0, 1.0, QuadTolerance::default()).unwrap();
        assert!(((v - exact) / exact).abs() < 1e-11);
    }

    #[test]
    fn integrand_errors_propagate() {
        let r = integrate(
            |_| Err(Error::InvalidInput("boom".into())),
            0.0,
            1.0,
            QuadTolerance::default(),
        );
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn non_integrable_singularity_fails() {
        let r = integrate(|x: f64| Ok(1.0 / x), 0.0, 1.0, QuadTolerance::default());
        assert!(r.is_err());
    }

    #[test]
    fn brent_finds_cosine_root() {
        let x = brent(|x: f64| Ok(x.cos() - x), 0.0, 1.0, 1e-15, 0.0).unwrap();
        assert!((x.cos() - x).abs() < 1e-15);
    }

    #[test]
    fn brent_requires_bracket() {
        assert!(matches!(
            brent(|x: f64| Ok(x * x + 1.0), -1.0, 1.0, 1e-12, 0.0),
            Err(Error::NoBracket { .. })
        ));
    }

    #[test]
    fn bisection_reaches_tolerance() {
        let x = bisect(|x: f64| Ok(x - 0.3), 0.0, 1.0, 1e-12).unwrap();
        assert!((x - 0.3).abs() <= 1e-12);
    }
}
