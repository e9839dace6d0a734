//! Plug-in bandwidth selection by minimizing
//!
//! ```text
//! M(h) = n⁻¹ I(h) + ¼ κ₂² R h⁴,    2π I(h) = ∫ t⁻² {1 − K^Ft(ht)/f_δ^Ft(t)}² dt
//! ```
//!
//! with R = ∫(f′_W)² exact, from a normal reference, or from a one-step pilot.

use rayon::prelude::*;

use crate::distributions::{smoothness_class, ErrorModel, Feasibility, TargetModel};
use crate::error::{DeconvError, Result};
use crate::kernels::Kernel;
use crate::quad::{dyadic_breaks, integrate_with_breaks, GaussLegendre, Tolerance};
use crate::real::{compensated_sum, Real};
use crate::special::binomial;

/// Upper limit of the t-integral of I(0) before the closed-form tail.
const ZERO_BANDWIDTH_CUTOFF: f64 = 1e6;

fn mise_tolerance<T: Real>() -> Tolerance<T> {
    Tolerance::new(T::lit(1e-14), T::lit(1e-11))
}

/// I(h), evaluated as (1/π)∫₀^∞ by evenness. For h > 0 the integrand is
/// exactly t⁻² beyond 1/h, contributing h. For h = 0 the part beyond 10⁶ is
/// integrated from the tail law f_δ^Ft(t) ≈ C t^{−α}.
pub fn mise_i<T: Real>(error: &ErrorModel<T>, kernel: Kernel, h: T) -> Result<T> {
    if !(h >= T::zero()) || !h.is_finite() {
        return Err(DeconvError::UnsupportedBandwidth { h: h.as_f64(), reason: "h must be finite and >= 0".into() });
    }
    let error = *error;
    let g = move |t: T| kernel.kft(h * t) * error.inverse_cf(t);
    let integrand = move |t: T| {
        let d = (T::one() - g(t)) / t;
        d * d
    };
    if h > T::zero() {
        let upper = h.recip();
        let body = integrate_with_breaks(integrand, &dyadic_breaks(T::zero(), upper), mise_tolerance())?;
        return Ok((body + h) / T::PI());
    }
    if error == ErrorModel::NoError {
        return Ok(T::zero());
    }
    let report = smoothness_class(&error, None);
    if report.verdict != Feasibility::Feasible {
        return Err(DeconvError::DivergentIntegral(format!("I(0) for {error} ({})", report.verdict)));
    }
    let upper = T::lit(ZERO_BANDWIDTH_CUTOFF);
    let body = integrate_with_breaks(integrand, &dyadic_breaks(T::zero(), upper), mise_tolerance())?;
    // ∫_T^∞ t⁻² (1 − t^α/C)² dt
    let alpha = error.tail_exponent();
    let c = error.tail_constant();
    let one = T::one();
    let two = T::lit(2.0);
    let tail = upper.recip() - two * upper.powf(alpha - one) / (c * (one - alpha))
        + upper.powf(two * alpha - one) / (c * c * (one - two * alpha));
    Ok((body + tail) / T::PI())
}

/// κ = ∫₀¹ t^{2α−2} K^Ft(t)² dt = Σ_j C(2s, j)(−1)^j / (2α − 1 + rj).
pub fn kernel_tail_kappa<T: Real>(kernel: Kernel, alpha: T) -> T {
    let s2 = 2 * kernel.s() as usize;
    let r = T::from_count(kernel.r() as usize);
    compensated_sum((0..=s2).map(|j| {
        let sign = if j % 2 == 1 { -T::one() } else { T::one() };
        sign * binomial::<T>(s2, j) / (T::lit(2.0) * alpha - T::one() + r * T::from_count(j))
    }))
}

/// A_δ in I(h) ≈ A_δ h^{1−2α} as h → 0: κ/(π C²) with f_δ^Ft(t) ≈ C t^{−α}.
pub fn a_delta<T: Real>(error: &ErrorModel<T>, kernel: Kernel) -> Result<T> {
    let alpha = error.tail_exponent();
    if !(alpha > T::lit(0.5)) {
        return Err(DeconvError::NoAsymptote { alpha: alpha.as_f64() });
    }
    let c = error.tail_constant();
    Ok(kernel_tail_kappa(kernel, alpha) / (T::PI() * c * c))
}

/// σ̂²_W = s²_X − E δ² with the unbiased sample variance.
pub fn estimate_sigma_w<T: Real>(data: &[T], error: &ErrorModel<T>) -> Result<T> {
    if data.len() < 2 {
        return Err(DeconvError::Invalid("need at least two observations".into()));
    }
    let n = T::from_count(data.len());
    let mean = compensated_sum(data.iter().copied()) / n;
    let var = compensated_sum(data.iter().map(|&x| (x - mean) * (x - mean))) / (n - T::one());
    let sigma2 = var - error.variance();
    if !(sigma2 > T::zero()) {
        return Err(DeconvError::NoiseDominates(sigma2.as_f64()));
    }
    Ok(sigma2)
}

/// ∫(f′)² of a normal law with standard deviation σ.
pub fn normal_reference_roughness<T: Real>(sigma: T) -> T {
    (T::lit(4.0) * T::PI().sqrt() * sigma.powi(3)).recip()
}

/// Where ∫(f′_W)² comes from.
#[derive(Clone, Debug)]
pub enum RoughnessSource<T: Real> {
    Exact(TargetModel<T>),
    NormalReference(Vec<T>),
    OneStep(Vec<T>),
    Value(T),
}

/// Search bracket and grid for the minimization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HSearch<T> {
    pub h_min: T,
    pub h_max: T,
    /// Number of log-spaced grid points.
    pub resolution: usize,
    /// Final bracket width of the golden-section refinement.
    pub tolerance: T,
}

impl<T: Real> Default for HSearch<T> {
    fn default() -> Self {
        Self { h_min: T::lit(0.01), h_max: T::lit(3.0), resolution: 60, tolerance: T::lit(1e-4) }
    }
}

#[derive(Clone, Debug)]
pub struct MisePlan<T: Real> {
    error: ErrorModel<T>,
    kernel: Kernel,
    n: usize,
    roughness: RoughnessSource<T>,
    search: HSearch<T>,
}

impl<T: Real> MisePlan<T> {
    pub fn new(error: ErrorModel<T>, kernel: Kernel, n: usize, roughness: RoughnessSource<T>) -> Result<Self> {
        Self::with_search(error, kernel, n, roughness, HSearch::default())
    }

    pub fn with_search(
        error: ErrorModel<T>,
        kernel: Kernel,
        n: usize,
        roughness: RoughnessSource<T>,
        search: HSearch<T>,
    ) -> Result<Self> {
        if kernel.kappa2::<T>() == T::zero() {
            return Err(DeconvError::Invalid(format!("{kernel} has kappa2 = 0, so the h^4 term vanishes")));
        }
        if n == 0 {
            return Err(DeconvError::Invalid("sample size must be positive".into()));
        }
        if !(search.h_min > T::zero()) || !(search.h_max > search.h_min) || search.resolution < 3 {
            return Err(DeconvError::Invalid("need 0 < h_min < h_max and at least 3 grid points".into()));
        }
        if !(search.tolerance > T::zero()) {
            return Err(DeconvError::Invalid("search tolerance must be positive".into()));
        }
        Ok(Self { error, kernel, n, roughness, search })
    }

    pub fn error(&self) -> &ErrorModel<T> {
        &self.error
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn search(&self) -> &HSearch<T> {
        &self.search
    }

    /// R̂ according to the roughness source.
    pub fn roughness(&self) -> Result<T> {
        match &self.roughness {
            RoughnessSource::Exact(target) => target.roughness(),
            RoughnessSource::NormalReference(data) => {
                Ok(normal_reference_roughness(estimate_sigma_w(data, &self.error)?.sqrt()))
            }
            RoughnessSource::OneStep(data) => one_step_roughness(data, &self.error, self.kernel),
            RoughnessSource::Value(r) => Ok(*r),
        }
    }
}

/// Result of [`select_bandwidth`].
#[derive(Clone, Debug)]
pub struct BandwidthChoice<T> {
    pub h_opt: T,
    pub mise_min: T,
    /// (h, M(h)) on the log-spaced search grid.
    pub curve: Vec<(T, T)>,
    /// The roughness R̂ that entered B̂ = ¼κ₂²R̂.
    pub roughness: T,
    /// Minimizer and minimum of n⁻¹A_δh^{1−2α} + B̂h⁴ when α > ½.
    pub asymptotic: Option<(T, T)>,
}

/// M(h) = n⁻¹ I(h) + B h⁴.
pub fn mise<T: Real>(error: &ErrorModel<T>, kernel: Kernel, n: usize, bias_constant: T, h: T) -> Result<T> {
    Ok(mise_i(error, kernel, h)? / T::from_count(n) + bias_constant * h.powi(4))
}

/// B̂ = ¼ κ₂² R̂.
pub fn bias_constant<T: Real>(kernel: Kernel, roughness: T) -> T {
    let k2 = kernel.kappa2::<T>();
    T::lit(0.25) * k2 * k2 * roughness
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

pub fn select_bandwidth<T: Real>(plan: &MisePlan<T>) -> Result<BandwidthChoice<T>> {
    let roughness = plan.roughness()?;
    if !(roughness >= T::zero()) {
        return Err(DeconvError::Invalid(format!("roughness {roughness} must be nonnegative")));
    }
    let b = bias_constant(plan.kernel, roughness);
    let m = |h: T| mise(&plan.error, plan.kernel, plan.n, b, h);
    let s = plan.search;
    let (lo, hi) = (s.h_min.ln(), s.h_max.ln());
    let last = s.resolution - 1;
    let grid: Vec<T> = (0..s.resolution)
        .map(|i| (lo + (hi - lo) * T::from_count(i) / T::from_count(last)).exp())
        .collect();
    let values: Vec<T> = grid.par_iter().map(|&h| m(h)).collect::<Result<_>>()?;
    let best = (0..values.len())
        .min_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap_or(std::cmp::Ordering::Equal))
        .expect("nonempty grid");
    let (mut a, mut c) = (grid[best.saturating_sub(1)], grid[(best + 1).min(last)]);
    let ratio = T::lit(INV_PHI);
    let mut x1 = c - ratio * (c - a);
    let mut x2 = a + ratio * (c - a);
    let (mut f1, mut f2) = (m(x1)?, m(x2)?);
    while c - a > s.tolerance {
        if f1 <= f2 {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - ratio * (c - a);
            f1 = m(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (c - a);
            f2 = m(x2)?;
        }
    }
    let mut h_opt = T::lit(0.5) * (a + c);
    let mut mise_min = m(h_opt)?;
    // never report worse than the grid itself
    if values[best] < mise_min {
        h_opt = grid[best];
        mise_min = values[best];
    }
    let asymptotic = asymptotic_minimum(&plan.error, plan.kernel, plan.n, b).ok();
    Ok(BandwidthChoice { h_opt, mise_min, curve: grid.into_iter().zip(values).collect(), roughness, asymptotic })
}

/// Closed-form minimizer of n⁻¹A h^{1−2α} + B h⁴:
/// h^{2α+3} = (2α − 1)A / (4Bn).
pub fn asymptotic_minimum<T: Real>(error: &ErrorModel<T>, kernel: Kernel, n: usize, b: T) -> Result<(T, T)> {
    let a = a_delta(error, kernel)?;
    if !(b > T::zero()) {
        return Err(DeconvError::Invalid("bias constant must be positive".into()));
    }
    let alpha = error.tail_exponent();
    let two = T::lit(2.0);
    let nn = T::from_count(n);
    let h = ((two * alpha - T::one()) * a / (T::lit(4.0) * b * nn)).powf((two * alpha + T::lit(3.0)).recip());
    let value = a * h.powf(T::one() - two * alpha) / nn + b * h.powi(4);
    Ok((h, value))
}

/// One-step plug-in for ∫(f′_W)².
///
/// Stage 1 picks h₀ by the normal reference. Stage 2 evaluates
/// ∫(f̂′_W(u | h₀))² du through Parseval,
///
/// ```text
/// (1/π) ∫₀^{1/h₀} t² |ψ(t)|² g(t)² dt,    g(t) = K^Ft(h₀t)/f_δ^Ft(t)
/// ```
///
/// with |ψ|² the squared modulus of the empirical characteristic function
/// after removing its diagonal, (n|ψ_n|² − 1)/(n − 1), which is unbiased for
/// |φ_X|². The result is floored at 0.
///
/// When the expansion has no interior minimum (no error, or α ≤ ½, where
/// n⁻¹I(h) does not blow up as h → 0) the pilot falls back to
/// h₀ = σ̂_W n^{−2/9}, which balances the h⁴ bias of the squared kernel
/// against the n⁻²h⁻⁵ variance of the diagonal-free estimate.
pub fn one_step_roughness<T: Real>(data: &[T], error: &ErrorModel<T>, kernel: Kernel) -> Result<T> {
    Ok(parseval_roughness(data, error, kernel, pilot_bandwidth(data, error, kernel)?).max(T::zero()))
}

/// Stage-1 bandwidth of [`one_step_roughness`].
pub fn pilot_bandwidth<T: Real>(data: &[T], error: &ErrorModel<T>, kernel: Kernel) -> Result<T> {
    let pilot = MisePlan::new(*error, kernel, data.len(), RoughnessSource::NormalReference(data.to_vec()))?;
    let h0 = select_bandwidth(&pilot)?.h_opt;
    let search = pilot.search;
    if h0 - search.h_min > T::lit(2.0) * search.tolerance {
        return Ok(h0);
    }
    let sigma = estimate_sigma_w(data, error)?.sqrt();
    Ok(sigma * T::from_count(data.len()).powf(T::lit(-2.0 / 9.0)))
}

/// The stage-2 integral of [`one_step_roughness`] at a given pilot h₀.
pub fn parseval_roughness<T: Real>(data: &[T], error: &ErrorModel<T>, kernel: Kernel, h0: T) -> T {
    let n = data.len();
    let nf = T::from_count(n);
    let upper = h0.recip();
    let mean = compensated_sum(data.iter().copied()) / nf;
    let centered: Vec<T> = data.iter().map(|&x| x - mean).collect();
    let spread = centered.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    // Gauss panels resolving cos(t·(X_j − X_k)) with |X_j − X_k| ≤ 2·spread
    let period = T::PI() / (spread + T::lit(1e-300));
    let panels = (upper / period * T::lit(2.0)).ceil().to_usize().unwrap_or(1).clamp(8, 1_000_000);
    let rule = GaussLegendre::get(16);
    let width = upper / T::from_count(panels);
    let half = T::lit(0.5) * width;
    let pieces: Vec<T> = (0..panels)
        .into_par_iter()
        .map(|p| {
            let mid = width * (T::from_count(p) + T::lit(0.5));
            let mut acc = T::zero();
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let t = mid + half * T::lit(*x);
                let (mut cs, mut sn) = (T::zero(), T::zero());
                for &d in &centered {
                    let (s, c) = (t * d).sin_cos();
                    cs += c;
                    sn += s;
                }
                let modulus = (cs * cs + sn * sn) / (nf * nf);
                let debiased = if n > 1 { (nf * modulus - T::one()) / (nf - T::one()) } else { modulus };
                let g = kernel.kft(h0 * t) * error.inverse_cf(t);
                acc += T::lit(*w) * t * t * g * g * debiased;
            }
            acc * half
        })
        .collect();
    compensated_sum(pieces) / T::PI()
}
