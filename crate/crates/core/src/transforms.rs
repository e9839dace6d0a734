//! Fourier-inversion weights of the deconvolution estimators.
//!
//! With g(t) = K^Ft(ht) / f_δ^Ft(t) on [0, T] (T = 1/h, or the truncation
//! point when h = 0) the distribution-function weight is
//!
//! ```text
//! L₁(u | h) = ½ + (1/π) ∫₀^T sin(tu)/t · g(t) dt
//! ```
//!
//! and its u-derivative, the density weight, is (1/π) ∫₀^T cos(tu) g(t) dt.
//! The sine integral is split as g(0)·Si(uT) + ∫₀^T φ(t) sin(tu) dt with
//! φ(t) = (g(t) − g(0))/t, which is smooth, so the singular part is exact
//! and the rest goes through the piecewise Legendre transform.

use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use crate::distributions::{smoothness_class, ErrorModel, Feasibility};
use crate::error::{DeconvError, Result};
use crate::kernels::Kernel;
use crate::quad::{dyadic_breaks, FitControl, LegendreExpansion};
use crate::real::Real;
use crate::special;

/// Numerical controls for every Fourier-inversion integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Panels narrower than 1/`panels_per_period` of the oscillation period
    /// are summed directly; wider ones use exact Legendre–Fourier moments.
    pub panels_per_period: usize,
    pub gauss_points_per_panel: usize,
    /// Truncation point of the t-integral when h = 0.
    pub t_max_zero_bandwidth: T,
}

impl<T: Real> Default for QuadratureSpec<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-8),
            abs_tol: T::lit(1e-10),
            panels_per_period: 4,
            gauss_points_per_panel: 16,
            t_max_zero_bandwidth: T::lit(1e6),
        }
    }
}

impl<T: Real> QuadratureSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > T::zero()) || !(self.abs_tol > T::zero()) {
            return Err(DeconvError::Invalid("quadrature tolerances must be positive".into()));
        }
        if self.panels_per_period < 2 {
            return Err(DeconvError::Invalid("panels_per_period must be at least 2".into()));
        }
        if self.gauss_points_per_panel < 4 {
            return Err(DeconvError::Invalid("gauss_points_per_panel must be at least 4".into()));
        }
        if !(self.t_max_zero_bandwidth > T::one()) || !self.t_max_zero_bandwidth.is_finite() {
            return Err(DeconvError::Invalid("t_max_zero_bandwidth must be finite and > 1".into()));
        }
        Ok(())
    }

    pub fn fit_control(&self) -> FitControl<T> {
        FitControl {
            order: self.gauss_points_per_panel,
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_depth: 48,
            panels_per_period: self.panels_per_period,
        }
    }
}

/// ∫₀^T sin(tu)/t · g(t) dt for g smooth and bounded on [0, T].
pub fn sine_integral<T: Real, F: Fn(T) -> T>(g: F, u: T, upper: T, spec: &QuadratureSpec<T>) -> Result<T> {
    spec.validate()?;
    if u == T::zero() || upper <= T::zero() {
        return Ok(T::zero());
    }
    let g0 = g(T::zero());
    let phi = LegendreExpansion::fit(|t: T| (g(t) - g0) / t, &dyadic_breaks(T::zero(), upper), spec.fit_control())?;
    Ok(g0 * special::sine_integral(u * upper) + phi.sin_transform(u))
}

/// L₁ value with the truncation diagnostics of the h = 0 case.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckedWeight<T> {
    pub value: T,
    /// Bound on the neglected ∫_T^∞ part (zero when h > 0).
    pub tail_bound: T,
    /// Set when the bound exceeds `abs_tol` or h = 0 lies outside the
    /// root-n regime.
    pub warning: bool,
}

struct Plan<T> {
    /// (g(t) − 1)/t on [0, T].
    phi: LegendreExpansion<T>,
    /// g(t) on [0, T], only when h > 0.
    amplitude: Option<LegendreExpansion<T>>,
    /// t·g(t) on [0, T], fitted on first use.
    slope: OnceLock<Result<LegendreExpansion<T>>>,
    phi_at_upper: T,
}

/// Kernel, error law, bandwidth and quadrature controls, together with the
/// fitted transforms every weight evaluation reuses.
#[derive(Clone)]
pub struct WeightContext<T> {
    kernel: Kernel,
    error: ErrorModel<T>,
    h: T,
    spec: QuadratureSpec<T>,
    upper: T,
    warning: Option<String>,
    plan: Arc<Plan<T>>,
}

impl<T: Real> std::fmt::Debug for WeightContext<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WeightContext")
            .field("kernel", &self.kernel)
            .field("error", &self.error)
            .field("h", &self.h)
            .field("upper", &self.upper)
            .field("warning", &self.warning)
            .finish()
    }
}

impl<T: Real> WeightContext<T> {
    /// Validates the bandwidth against the error law and fits the transforms.
    ///
    /// h = 0 is accepted for the point-mass error and for laws passing the
    /// smoothness test; laws failing it with α < 1 are accepted with a
    /// warning, since L₁(u | 0) still exists there as an improper integral.
    pub fn new(kernel: Kernel, error: ErrorModel<T>, h: T, spec: QuadratureSpec<T>) -> Result<Self> {
        spec.validate()?;
        if !(h >= T::zero()) || !h.is_finite() {
            return Err(DeconvError::UnsupportedBandwidth { h: h.as_f64(), reason: "h must be finite and >= 0".into() });
        }
        let mut warning = None;
        let upper = if h > T::zero() {
            h.recip()
        } else {
            if error != ErrorModel::NoError {
                let report = smoothness_class(&error, None);
                if report.verdict != Feasibility::Feasible {
                    if error.tail_exponent() < T::one() {
                        warning = Some(format!(
                            "h = 0 with {error}: the weight exists but the estimator is not root-n consistent"
                        ));
                    } else {
                        return Err(DeconvError::UnsupportedBandwidth {
                            h: 0.0,
                            reason: format!("{error} fails the smoothness test ({})", report.verdict),
                        });
                    }
                }
            }
            spec.t_max_zero_bandwidth
        };
        let g = move |t: T| kernel.kft(h * t) * error.inverse_cf(t);
        let breaks = dyadic_breaks(T::zero(), upper);
        let control = spec.fit_control();
        let phi = LegendreExpansion::fit(|t: T| (g(t) - T::one()) / t, &breaks, control)?;
        let amplitude = if h > T::zero() { Some(LegendreExpansion::fit(g, &breaks, control)?) } else { None };
        let phi_at_upper = (g(upper) - T::one()) / upper;
        Ok(Self {
            kernel,
            error,
            h,
            spec,
            upper,
            warning,
            plan: Arc::new(Plan { phi, amplitude, slope: OnceLock::new(), phi_at_upper }),
        })
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn error(&self) -> &ErrorModel<T> {
        &self.error
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn spec(&self) -> &QuadratureSpec<T> {
        &self.spec
    }

    /// Upper limit T of the t-integrals.
    pub fn upper(&self) -> T {
        self.upper
    }

    pub fn warning(&self) -> Option<&str> {
        self.warning.as_deref()
    }

    /// g(t) = K^Ft(ht) / f_δ^Ft(t) for 0 ≤ t ≤ T, zero beyond.
    pub fn amplitude(&self, t: T) -> T {
        let a = t.abs();
        if a > self.upper {
            return T::zero();
        }
        self.kernel.kft(self.h * a) * self.error.inverse_cf(a)
    }

    /// L₁(u | h).
    pub fn l1_weight(&self, u: T) -> T {
        if u == T::zero() {
            return T::lit(0.5);
        }
        let core = special::sine_integral(u * self.upper) + self.plan.phi.sin_transform(u);
        T::lit(0.5) + core / T::PI()
    }

    /// L₁(u | h) with a bound on the truncated tail when h = 0.
    pub fn l1_weight_checked(&self, u: T) -> CheckedWeight<T> {
        let value = self.l1_weight(u);
        if self.h > T::zero() || u == T::zero() {
            return CheckedWeight { value, tail_bound: T::zero(), warning: self.warning.is_some() };
        }
        // integration by parts on ∫_T^∞ (φ(t) + 1/t) sin(tu) dt
        let au = u.abs();
        let two = T::lit(2.0);
        let tail_bound = (two * self.plan.phi_at_upper.abs() / au + two / (self.upper * au)) / T::PI();
        let warning = self.warning.is_some() || tail_bound > self.spec.abs_tol;
        CheckedWeight { value, tail_bound, warning }
    }

    fn amplitude_expansion(&self) -> Result<&LegendreExpansion<T>> {
        self.plan.amplitude.as_ref().ok_or_else(|| DeconvError::UnsupportedBandwidth {
            h: 0.0,
            reason: "the density weight needs h > 0".into(),
        })
    }

    /// dL₁/du = (1/π) ∫₀^T cos(tu) g(t) dt = L(u/h)/h.
    pub fn l1_derivative(&self, u: T) -> Result<T> {
        Ok(self.amplitude_expansion()?.cos_transform(u) / T::PI())
    }

    /// d²L₁/du² = −(1/π) ∫₀^T t sin(tu) g(t) dt.
    pub fn l1_second_derivative(&self, u: T) -> Result<T> {
        self.amplitude_expansion()?;
        let slope = self.plan.slope.get_or_init(|| {
            let (kernel, error, h) = (self.kernel, self.error, self.h);
            LegendreExpansion::fit(
                move |t: T| t * kernel.kft(h * t) * error.inverse_cf(t),
                &dyadic_breaks(T::zero(), self.upper),
                self.spec.fit_control(),
            )
        });
        match slope {
            Ok(e) => Ok(-e.sin_transform(u) / T::PI()),
            Err(e) => Err(e.clone()),
        }
    }

    /// The density weight in unscaled form,
    ///
    /// ```text
    /// L(w) = (1/π) ∫₀¹ cos(vw) K^Ft(v) / f_δ^Ft(v/h) dv
    ///      = (h/π) ∫₀^{1/h} cos(t·hw) g(t) dt        (v = ht)
    /// ```
    pub fn l_weight(&self, w: T) -> Result<T> {
        if self.h <= T::zero() {
            return Err(DeconvError::UnsupportedBandwidth {
                h: 0.0,
                reason: "the density weight is undefined at h = 0".into(),
            });
        }
        Ok(self.h * self.l1_derivative(self.h * w)?)
    }
}

/// Cubic Hermite table of L₁(· | h) and its derivative on [−U, U] with
/// spacing h/64; arguments outside fall back to the exact weight.
#[derive(Clone)]
pub struct WeightTable<T> {
    ctx: WeightContext<T>,
    lower: T,
    step: T,
    values: Vec<T>,
    slopes: Vec<T>,
}

impl<T: Real> std::fmt::Debug for WeightTable<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WeightTable").field("range", &self.range()).finish()
    }
}

pub const TABLE_NODES_PER_BANDWIDTH: usize = 64;

impl<T: Real> WeightTable<T> {
    pub fn build(ctx: &WeightContext<T>, half_width: T) -> Result<Self> {
        let h = ctx.h();
        if h <= T::zero() {
            return Err(DeconvError::UnsupportedBandwidth { h: 0.0, reason: "tables need h > 0".into() });
        }
        let step = h / T::from_count(TABLE_NODES_PER_BANDWIDTH);
        let cells = (T::lit(2.0) * half_width / step).ceil().to_usize().unwrap_or(1).max(1);
        let lower = -step * T::from_count(cells) * T::lit(0.5);
        let nodes: Vec<T> = (0..=cells).map(|i| lower + step * T::from_count(i)).collect();
        let pairs: Vec<Result<(T, T)>> =
            nodes.par_iter().map(|&u| Ok((ctx.l1_weight(u), ctx.l1_derivative(u)?))).collect();
        let mut values = Vec::with_capacity(pairs.len());
        let mut slopes = Vec::with_capacity(pairs.len());
        for p in pairs {
            let (v, s) = p?;
            values.push(v);
            slopes.push(s);
        }
        Ok(Self { ctx: ctx.clone(), lower, step, values, slopes })
    }

    pub fn context(&self) -> &WeightContext<T> {
        &self.ctx
    }

    /// Covered interval.
    pub fn range(&self) -> (T, T) {
        (self.lower, self.lower + self.step * T::from_count(self.values.len() - 1))
    }

    /// L₁(u | h), interpolated inside the table.
    pub fn eval(&self, u: T) -> T {
        let pos = (u - self.lower) / self.step;
        let last = self.values.len() - 1;
        if !(pos >= T::zero()) || pos >= T::from_count(last) {
            return self.ctx.l1_weight(u);
        }
        let i = pos.floor().to_usize().unwrap_or(0).min(last - 1);
        let s = pos - T::from_count(i);
        let s2 = s * s;
        let s3 = s2 * s;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = three * s2 - two * s3;
        let h11 = s3 - s2;
        h00 * self.values[i]
            + h10 * self.step * self.slopes[i]
            + h01 * self.values[i + 1]
            + h11 * self.step * self.slopes[i + 1]
    }
}
