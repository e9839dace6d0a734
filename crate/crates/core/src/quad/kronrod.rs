//! Globally adaptive Gauss–Kronrod (7/15) integration.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{DeconvError, Result};
use crate::real::Real;

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

/// Tolerances for adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Tolerance<T> {
    pub abs: T,
    pub rel: T,
    pub max_intervals: usize,
}

impl<T: Real> Tolerance<T> {
    pub fn new(abs: T, rel: T) -> Self {
        Self { abs, rel, max_intervals: 4000 }
    }
}

impl<T: Real> Default for Tolerance<T> {
    fn default() -> Self {
        Self::new(T::lit(1e-12), T::lit(1e-10))
    }
}

struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

impl<T: Real> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Real> Eq for Segment<T> {}
impl<T: Real> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

fn kronrod15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let radius = half * (b - a);
    let fc = f(center);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = radius * T::lit(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += T::lit(WGK[j]) * (f1 + f2);
        if j % 2 == 1 {
            gauss += T::lit(WG[j / 2]) * (f1 + f2);
        }
    }
    let value = kronrod * radius;
    let err = ((kronrod - gauss) * radius).abs();
    (value, err)
}

/// Integral of `f` over [a, b] with interior breakpoints.
pub fn integrate_with_breaks<T: Real, F: Fn(T) -> T>(
    f: F,
    breaks: &[T],
    tol: Tolerance<T>,
) -> Result<T> {
    if breaks.len() < 2 {
        return Ok(T::zero());
    }
    let mut heap = BinaryHeap::new();
    let mut total = T::zero();
    let mut total_err = T::zero();
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (v, e) = kronrod15(&f, w[0], w[1]);
        total += v;
        total_err += e;
        heap.push(Segment { a: w[0], b: w[1], value: v, error: e });
    }
    let mut previous = total;
    let mut count = heap.len();
    loop {
        if !total.is_finite() {
            return Err(DeconvError::QuadratureFailure {
                previous: previous.as_f64(),
                current: total.as_f64(),
            });
        }
        if total_err <= tol.abs.max(tol.rel * total.abs()) {
            return Ok(total);
        }
        if count >= tol.max_intervals {
            // Accept when the remaining error is at roundoff level.
            if total_err <= T::lit(64.0) * T::epsilon() * total.abs().max(T::one()) {
                return Ok(total);
            }
            return Err(DeconvError::QuadratureFailure {
                previous: previous.as_f64(),
                current: total.as_f64(),
            });
        }
        let Some(worst) = heap.pop() else {
            return Ok(total);
        };
        let mid = T::lit(0.5) * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split further
            heap.push(Segment { error: T::zero(), ..worst });
            total_err = heap.iter().map(|s| s.error).sum();
            if total_err == T::zero() {
                return Ok(total);
            }
            continue;
        }
        let (v1, e1) = kronrod15(&f, worst.a, mid);
        let (v2, e2) = kronrod15(&f, mid, worst.b);
        previous = total;
        total = total - worst.value + v1 + v2;
        total_err = total_err - worst.error + e1 + e2;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
        count += 1;
        if count % 64 == 0 {
            // refresh the running sums against drift
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
}

/// Integral of `f` over [a, b].
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, tol: Tolerance<T>) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    if b < a {
        return integrate(f, b, a, tol).map(|v| -v);
    }
    integrate_with_breaks(f, &[a, b], tol)
}

/// Integral of `f` over [a, ∞) via t = a + s/(1-s).
pub fn integrate_to_infinity<T: Real, F: Fn(T) -> T>(f: F, a: T, tol: Tolerance<T>) -> Result<T> {
    let g = |s: T| {
        let one = T::one();
        let d = one - s;
        let t = a + s / d;
        let v = f(t) / (d * d);
        if v.is_finite() {
            v
        } else {
            T::zero()
        }
    };
    integrate_with_breaks(g, &[T::zero(), T::lit(0.5), T::lit(0.9), T::one()], tol)
}

/// Integral of `f` over (-∞, a] via reflection.
pub fn integrate_from_neg_infinity<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    tol: Tolerance<T>,
) -> Result<T> {
    integrate_to_infinity(|t: T| f(-t), -a, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_integrals() {
        let v = integrate(|x: f64| x.sin(), 0.0, std::f64::consts::PI, Tolerance::default()).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = integrate(|x: f64| x.sqrt(), 0.0, 1.0, Tolerance::default()).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn semi_infinite_gaussian() {
        let v = integrate_to_infinity(|x: f64| (-x * x).exp(), 0.0, Tolerance::default()).unwrap();
        assert!((v - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-10);
        let v = integrate_from_neg_infinity(|x: f64| (-x * x).exp(), 0.0, Tolerance::default())
            .unwrap();
        assert!((v - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-10);
    }

    #[test]
    fn endpoint_singularity() {
        let v = integrate(|x: f64| x.powf(-0.5), 0.0, 1.0, Tolerance::new(1e-10, 1e-10)).unwrap();
        assert!((v - 2.0).abs() < 1e-8);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let a = integrate(|x: f64| x * x, 0.0, 2.0, Tolerance::default()).unwrap();
        let b = integrate(|x: f64| x * x, 2.0, 0.0, Tolerance::default()).unwrap();
        assert!((a + b).abs() < 1e-14);
    }
}
