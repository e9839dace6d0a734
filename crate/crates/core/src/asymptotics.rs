//! Optimal rates, bandwidth orders and the asymptotic bias and variance
//! constants of F̂_W(x | h).

use crate::distributions::{ErrorModel, TargetModel};
use crate::error::{DeconvError, Result};
use crate::kernels::Kernel;
use crate::quad::{dyadic_breaks, integrate_with_breaks, FitControl, LegendreExpansion, Tolerance};
use crate::real::{compensated_sum, Real};
use crate::special::{binomial, gamma};

/// Leading tail behaviour of the error and target characteristic functions,
/// f_δ^Ft(t) ≈ z⁻¹ t^{−α} and f_W^Ft(t) ≈ (a + ib) t^{−β}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailProfile<T> {
    pub alpha: T,
    pub z: T,
    pub beta: T,
    pub a: T,
    pub b: T,
}

impl<T: Real> TailProfile<T> {
    pub fn new(alpha: T, z: T, beta: T, a: T, b: T) -> Result<Self> {
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return Err(DeconvError::Invalid(format!("alpha = {alpha} must be positive")));
        }
        if !(beta >= T::zero()) || !beta.is_finite() {
            return Err(DeconvError::Invalid(format!("beta = {beta} must be nonnegative")));
        }
        if !z.is_finite() || !a.is_finite() || !b.is_finite() {
            return Err(DeconvError::Invalid("z, a and b must be finite".into()));
        }
        Ok(Self { alpha, z, beta, a, b })
    }

    /// Profile whose error part comes from a built-in law: z = 1/tail_constant.
    pub fn from_error(error: &ErrorModel<T>, beta: T, a: T, b: T) -> Result<Self> {
        Self::new(error.tail_exponent(), error.tail_constant().recip(), beta, a, b)
    }
}

/// Minimax rates ρ₁..ρ₃ (and ρ₄ when an absolute-moment order is given),
/// with the matching bandwidth orders h₁..h₃.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateBundle<T> {
    pub rho1: T,
    pub rho2: T,
    pub rho3: T,
    pub rho4: Option<T>,
    pub h1: T,
    pub h2: T,
    pub h3: T,
    pub ell: T,
}

/// ρ_j = (ℓ/n)^{(2β+j−1)/(2α+2β+j−2)} and h_j = C(ℓ/n)^{1/(2α+2β+j−2)} for
/// α ≥ ½, with ℓ = log n at α = ½ and 1 otherwise; ρ_j = n⁻¹, h_j = 0 for
/// α < ½. ρ₄ = n^{−(2β+2q)/(2α+2β−1)}.
pub fn rates<T: Real>(alpha: T, beta: T, n: T, scale: T, q: Option<T>) -> Result<RateBundle<T>> {
    if !(alpha > T::zero()) || !(beta >= T::zero()) {
        return Err(DeconvError::Invalid("need alpha > 0 and beta >= 0".into()));
    }
    if !(n >= T::lit(2.0)) {
        return Err(DeconvError::Invalid(format!("n = {n} must be at least 2")));
    }
    if !(scale > T::zero()) {
        return Err(DeconvError::Invalid(format!("bandwidth scale {scale} must be positive")));
    }
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let rho4 = q.map(|q| n.powf(-(two * beta + two * q) / (two * alpha + two * beta - T::one())));
    if alpha < half {
        let r = n.recip();
        return Ok(RateBundle { rho1: r, rho2: r, rho3: r, rho4, h1: T::zero(), h2: T::zero(), h3: T::zero(), ell: T::one() });
    }
    let ell = if alpha == half { n.ln() } else { T::one() };
    let base = ell / n;
    let rho = |j: T| base.powf((two * beta + j - T::one()) / (two * alpha + two * beta + j - two));
    let h = |j: T| scale * base.powf((two * alpha + two * beta + j - two).recip());
    let (one, three) = (T::one(), T::lit(3.0));
    Ok(RateBundle { rho1: rho(one), rho2: rho(two), rho3: rho(three), rho4, h1: h(one), h2: h(two), h3: h(three), ell })
}

fn signed_binomial<T: Real>(s: usize, j: usize) -> T {
    let c = binomial::<T>(s, j);
    if j % 2 == 1 {
        -c
    } else {
        c
    }
}

/// B₁ = −(b/2π) Σ_{j=1}^{s} C(s, j)(−1)^j / (rj − β).
pub fn bias_b1<T: Real>(kernel: Kernel, profile: &TailProfile<T>) -> Result<T> {
    let s = kernel.s() as usize;
    let r = T::from_count(kernel.r() as usize);
    let mut terms = Vec::with_capacity(s);
    for j in 1..=s {
        let d = r * T::from_count(j) - profile.beta;
        if d == T::zero() {
            return Err(DeconvError::Pole { j });
        }
        terms.push(signed_binomial::<T>(s, j) / d);
    }
    Ok(-profile.b / (T::lit(2.0) * T::PI()) * compensated_sum(terms))
}

/// lim_{h→0} (E F̂_W(0 | h) − F_W(0)) / h^β for 0 < β < r, obtained by
/// substituting the target tail into the Fourier form of the bias:
///
/// ```text
/// −(b/π) Σ_{j=0}^{s} C(s, j)(−1)^j / (rj − β)
/// ```
pub fn origin_bias_constant<T: Real>(kernel: Kernel, profile: &TailProfile<T>) -> Result<T> {
    let s = kernel.s() as usize;
    let r = T::from_count(kernel.r() as usize);
    let mut terms = Vec::with_capacity(s + 1);
    for j in 0..=s {
        let d = r * T::from_count(j) - profile.beta;
        if d == T::zero() {
            return Err(DeconvError::Pole { j });
        }
        terms.push(signed_binomial::<T>(s, j) / d);
    }
    Ok(-profile.b / T::PI() * compensated_sum(terms))
}

/// B₂(h, x) = −(a cos(x/h) + b sin(x/h)) / (2πx).
pub fn bias_b2<T: Real>(h: T, x: T, profile: &TailProfile<T>) -> Result<T> {
    if x == T::zero() {
        return Err(DeconvError::Domain("B2 is undefined at x = 0; use B1 there".into()));
    }
    if !(h > T::zero()) {
        return Err(DeconvError::Domain(format!("h = {h} must be positive")));
    }
    let (s, c) = (x / h).sin_cos();
    Ok(-(profile.a * c + profile.b * s) / (T::lit(2.0) * T::PI() * x))
}

/// Left end of the Legendre fit of (1 − t^r)^s t^{α−1}; the piece below it
/// contributes at most u·ε^{α+1}/(α+1) to the inner integral.
const INNER_FLOOR: f64 = 1e-12;

/// J(u) = ∫₀¹ sin(tu)/t · (1 − t^r)^s t^α dt for any number of arguments.
pub struct InnerTransform<T> {
    expansion: LegendreExpansion<T>,
}

impl<T: Real> InnerTransform<T> {
    pub fn new(kernel: Kernel, alpha: T) -> Result<Self> {
        let breaks = dyadic_breaks(T::lit(INNER_FLOOR), T::one());
        let control = FitControl { abs_tol: T::lit(1e-13), rel_tol: T::lit(1e-11), ..FitControl::default() };
        let f = move |t: T| kernel.kft(t) * t.powf(alpha - T::one());
        Ok(Self { expansion: LegendreExpansion::fit(f, &breaks, control)? })
    }

    pub fn eval(&self, u: T) -> T {
        self.expansion.sin_transform(u)
    }
}

/// V(x) = π⁻² z² f_X(x) ∫₀^∞ J(u)² du.
///
/// The outer integral runs over doubling blocks [U, 2U] until a block adds
/// less than 10⁻³ of the running total (and U ≥ 64); the rest is the tail
/// of the leading term J(u) ≈ Γ(α) sin(πα/2) u^{−α}.
pub fn variance_v<T: Real>(x: T, profile: &TailProfile<T>, kernel: Kernel, fx: T) -> Result<T> {
    let _ = x;
    if !(fx >= T::zero()) {
        return Err(DeconvError::Domain(format!("f_X(x) = {fx} must be nonnegative")));
    }
    if !(profile.alpha > T::lit(0.5)) {
        return Err(DeconvError::NoAsymptote { alpha: profile.alpha.as_f64() });
    }
    if fx == T::zero() {
        return Ok(T::zero());
    }
    let total = squared_inner_integral(kernel, profile.alpha)?;
    Ok(profile.z * profile.z * fx * total / (T::PI() * T::PI()))
}

/// lim n h^{2α−1} var F̂(x | h) = π⁻² z² f_X(x) ∫_{−∞}^{∞} J(u)² du.
///
/// Substituting f_δ^Ft(t)⁻¹ ≈ z t^α into L₁ gives L₁(u) − ½ ≈ (z/π) h^{−α}
/// J(u/h), and E J((x − X)/h)² ≈ h f_X(x) ∫ J². J is odd, so this is twice
/// [`variance_v`].
pub fn variance_constant<T: Real>(x: T, profile: &TailProfile<T>, kernel: Kernel, fx: T) -> Result<T> {
    Ok(T::lit(2.0) * variance_v(x, profile, kernel, fx)?)
}

/// ∫₀^∞ J(u)² du, the kernel-and-α part of V(x).
pub fn squared_inner_integral<T: Real>(kernel: Kernel, alpha: T) -> Result<T> {
    let inner = InnerTransform::new(kernel, alpha)?;
    let f = |u: T| {
        let j = inner.eval(u);
        j * j
    };
    let tol = Tolerance::new(T::lit(1e-15), T::lit(1e-9));
    // J oscillates with period about 2π, so panels of width ≤ 1
    let panels = |a: T, b: T| -> Vec<T> {
        let m = (b - a).ceil().to_usize().unwrap_or(1).max(1);
        (0..=m).map(|i| a + (b - a) * T::from_count(i) / T::from_count(m)).collect()
    };
    let mut acc = integrate_with_breaks(f, &panels(T::zero(), T::one()), tol)?;
    let mut u = T::one();
    let max_u = T::lit(65536.0);
    loop {
        let block = integrate_with_breaks(f, &panels(u, u + u), tol)?;
        acc += block;
        u = u + u;
        if (block.abs() < T::lit(1e-3) * acc.abs() && u >= T::lit(64.0)) || u >= max_u {
            if u >= max_u && block.abs() >= T::lit(1e-3) * acc.abs() {
                return Err(DeconvError::QuadratureFailure {
                    previous: (acc - block).as_f64(),
                    current: acc.as_f64(),
                });
            }
            break;
        }
    }
    let c = gamma(alpha) * (T::PI() * alpha * T::lit(0.5)).sin();
    let two_alpha_m1 = T::lit(2.0) * alpha - T::one();
    Ok(acc + c * c * u.powf(-two_alpha_m1) / two_alpha_m1)
}

/// f_X(x) = ∫ f_W(w) f_δ(x − w) dw; f_W(x) itself for the point-mass error.
pub fn fx_density<T: Real>(target: &TargetModel<T>, error: &ErrorModel<T>, x: T) -> Result<T> {
    if *error == ErrorModel::NoError {
        return target.density(x);
    }
    let (lo, hi) = target.support();
    let mut breaks = target.breakpoints();
    // the error density peaks (and for α ≤ 1 is singular) at w = x; the
    // symmetric points x ± 1 keep its exponential shoulders resolved
    for p in [x - T::one(), x, x + T::one()] {
        if p > lo && p < hi {
            breaks.push(p);
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    breaks.dedup();
    target.density(x)?;
    let integrand = |w: T| {
        let fw = target.density(w).unwrap_or_else(|_| T::zero());
        if fw == T::zero() || w == x {
            return T::zero();
        }
        fw * error.density(x - w).unwrap_or_else(|_| T::zero())
    };
    integrate_with_breaks(integrand, &breaks, Tolerance::new(T::lit(1e-13), T::lit(1e-9)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inner_transform_against_trapezoid() {
        let k = Kernel::ESTIMATION;
        let inner = InnerTransform::new(k, 2.0f64).unwrap();
        for &u in &[0.3, 2.0, 17.0] {
            let n = 200_000;
            let step = 1.0 / n as f64;
            let mut acc = 0.0;
            for i in 0..=n {
                let t = step * i as f64;
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                acc += w * (t * u).sin() * t * k.kft(t);
            }
            assert!((inner.eval(u) - acc * step).abs() < 1e-9, "u={u}");
        }
    }
}
