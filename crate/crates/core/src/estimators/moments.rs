//! Polynomial and absolute moments of W.

use crate::distributions::{smoothness_class, ErrorModel, Feasibility};
use crate::error::{DeconvError, Result};
use crate::quad::{dyadic_breaks, LegendreExpansion};
use crate::real::{compensated_sum, Real};
use crate::special::{binomial, ln_gamma};
use crate::transforms::WeightContext;

/// μ̃_r by the recursion
///
/// ```text
/// μ̃_k = n⁻¹ Σ X_j^k − Σ_{j=2}^{k} C(k, j) E(δ^j) μ̃_{k−j},   μ̃₀ = 1
/// ```
pub fn poly_moment<T: Real>(data: &[T], error: &ErrorModel<T>, r: usize) -> Result<T> {
    if data.is_empty() {
        return Err(DeconvError::Invalid("the sample is empty".into()));
    }
    let n = T::from_count(data.len());
    let mut mu = vec![T::one(); r + 1];
    for k in 1..=r {
        let raw = compensated_sum(data.iter().map(|&x| x.powi(k as i32))) / n;
        let mut correction = T::zero();
        for j in (2..=k).step_by(2) {
            correction += binomial::<T>(k, j) * error.moment(j)? * mu[k - j];
        }
        mu[k] = raw - correction;
    }
    Ok(mu[r])
}

/// Terms kept in the small-t series; the scaled coefficients shrink at
/// least like 4⁻ᵐ, so 40 extra terms leave nothing above roundoff.
const SERIES_EXTRA: usize = 40;

fn convolve<T: Real>(a: &[T], b: &[T], len: usize) -> Vec<T> {
    let mut out = vec![T::zero(); len];
    for (i, &x) in a.iter().enumerate().take(len) {
        for (j, &y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// ν̂_q through the characteristic function of f̂_W,
/// Re φ̂(t) = g(t)·n⁻¹ Σ cos(tX_j). For 2k < q < 2k + 2,
///
/// ```text
/// ν̂_q = ∫₀^∞ t^{-q-1} (Re φ̂(t) − P_k(t)) dt / (Γ(−q) cos(πq/2))
/// ```
///
/// with P_k the degree-2k Taylor polynomial of Re φ̂ at 0; even integer q
/// reads the Taylor coefficient directly. The integral is split at a small
/// ε: below it the Taylor series of Re φ̂ is integrated term by term, on
/// [ε, T] each cosine term is a Fourier transform of g(t)t^{-q-1}, and above
/// T only −P_k remains and is integrated in closed form.
pub(crate) fn abs_moment<T: Real>(data: &[T], ctx: &WeightContext<T>, q: T) -> Result<T> {
    if !(q > T::zero()) || !q.is_finite() {
        return Err(DeconvError::Domain(format!("moment order q = {q} must be positive")));
    }
    let kernel = ctx.kernel();
    let error = *ctx.error();
    let h = ctx.h();
    if h > T::zero() {
        let limit = T::from_count(kernel.s() as usize + 1).min(T::from_count(kernel.r() as usize - 1));
        if q >= limit {
            return Err(DeconvError::NonIntegrableTail { q: q.as_f64(), limit: limit.as_f64() });
        }
    } else if error != ErrorModel::NoError {
        let report = smoothness_class(&error, Some(q));
        if report.verdict != Feasibility::Feasible {
            return Err(DeconvError::DivergentIntegral(format!(
                "h = 0 absolute moment of order {q} with {error} ({})",
                report.verdict
            )));
        }
    }

    let n = T::from_count(data.len());
    let upper = ctx.upper();
    let max_abs = data.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let eps = T::lit(0.5).min((T::one() + max_abs).recip()).min(upper * T::lit(0.5));
    let half_q = q * T::lit(0.5);
    let k = half_q.floor().to_usize().unwrap_or(0);
    let even = half_q == half_q.floor();
    let terms = k + SERIES_EXTRA;

    // coefficients of t^{2m}, pre-multiplied by ε^{2m}
    let eps2 = eps * eps;
    let mut scaled_inverse = error.inverse_cf_series(terms);
    let mut p = T::one();
    for c in scaled_inverse.iter_mut() {
        *c *= p;
        p *= eps2;
    }
    let mut scaled_kernel = vec![T::zero(); terms];
    let r_half = kernel.r() as usize / 2;
    for (j, c) in kernel.kft_coefficients::<T>().into_iter().enumerate() {
        let idx = j * r_half;
        if idx < terms {
            let hr = (h * eps).powi((j * kernel.r() as usize) as i32);
            scaled_kernel[idx] = c * hr;
        }
    }
    let scaled_g = convolve(&scaled_kernel, &scaled_inverse, terms);
    // n⁻¹ Σ cos(tX_j) = Σ (−1)^m M_{2m} t^{2m}/(2m)!
    let mut scaled_cos = vec![T::zero(); terms];
    let mut fact = T::one();
    for (m, c) in scaled_cos.iter_mut().enumerate() {
        if m > 0 {
            fact = fact * T::from_count(2 * m - 1) * T::from_count(2 * m);
        }
        let moment = compensated_sum(data.iter().map(|&x| (x * eps).powi(2 * m as i32))) / n;
        let v = moment / fact;
        *c = if m % 2 == 1 { -v } else { v };
    }
    let scaled = convolve(&scaled_g, &scaled_cos, terms);

    if even {
        // ν_{2m} = (−1)^m (2m)! c_m
        let m = k;
        let mut fact = T::one();
        for i in 1..=2 * m {
            fact *= T::from_count(i);
        }
        let sign = if m % 2 == 1 { -T::one() } else { T::one() };
        return Ok(sign * fact * scaled[m] / eps.powi(2 * m as i32));
    }

    let eps_q = eps.powf(-q);
    let mut head = T::zero();
    for (m, &c) in scaled.iter().enumerate().skip(k + 1) {
        head += c / (T::from_count(2 * m) - q);
    }
    let mut polynomial_tail = T::zero();
    for (m, &c) in scaled.iter().enumerate().take(k + 1) {
        polynomial_tail += c / (q - T::from_count(2 * m));
    }
    let weight = move |t: T| kernel.kft(h * t) * error.inverse_cf(t) * t.powf(-q - T::one());
    let expansion = LegendreExpansion::fit(weight, &dyadic_breaks(eps, upper), ctx.spec().fit_control())?;
    let middle = compensated_sum(data.iter().map(|&x| expansion.cos_transform(x))) / n;
    let integral = eps_q * (head - polynomial_tail) + middle;
    // Γ(−q) cos(πq/2) = −π / (2 Γ(1+q) sin(πq/2))
    let denom = -T::PI() / (T::lit(2.0) * ln_gamma(T::one() + q).exp() * (T::PI() * half_q).sin());
    Ok(integral / denom)
}
