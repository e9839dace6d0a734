use crate::distributions::TargetModel;
use crate::error::{DeconvError, Result};
use crate::kernels::Kernel;
use crate::quad::{integrate_with_breaks, Tolerance};
use crate::real::Real;

/// E F̂_W(x | h) for a target with known characteristic function φ_W:
///
/// ```text
/// ½ + (1/π) ∫₀^{1/h} K^Ft(ht) [Re φ_W(t) sin(tx) − Im φ_W(t) cos(tx)] / t dt
/// ```
///
/// The error law cancels because g(t)·f_δ^Ft(t) = K^Ft(ht).
pub fn expected_cdf<T: Real>(target: &TargetModel<T>, kernel: Kernel, h: T, x: T) -> Result<T> {
    if !(h > T::zero()) {
        return Err(DeconvError::UnsupportedBandwidth { h: h.as_f64(), reason: "expected F̂ needs h > 0".into() });
    }
    target.cf(T::zero())?;
    let upper = h.recip();
    let integrand = |t: T| {
        let phi = target.cf(t).expect("checked above");
        let (s, c) = (t * x).sin_cos();
        kernel.kft(h * t) * (phi.re * s - phi.im * c) / t
    };
    // breakpoints every half period of the x-oscillation, at least 16 panels
    let period = if x == T::zero() { upper } else { T::PI() / x.abs() };
    let panels = (upper / period).ceil().to_usize().unwrap_or(1).clamp(16, 100_000);
    let breaks: Vec<T> = (0..=panels).map(|i| upper * T::from_count(i) / T::from_count(panels)).collect();
    let v = integrate_with_breaks(integrand, &breaks, Tolerance::new(T::lit(1e-13), T::lit(1e-11)))?;
    Ok(T::lit(0.5) + v / T::PI())
}
