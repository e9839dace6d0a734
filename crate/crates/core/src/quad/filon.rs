//! Piecewise Legendre expansions with exact Fourier moments.
//!
//! A smooth amplitude φ on [a, b] is represented panel by panel by its
//! degree-(N-1) Legendre interpolant. The products φ(t)·sin(ωt) and
//! φ(t)·cos(ωt) are then integrated exactly against that interpolant using
//!
//! ```text
//! ∫₋₁¹ P_k(x) e^{iθx} dx = 2 i^k j_k(θ)
//! ```
//!
//! so the cost of a transform does not grow with ω. Panels whose width is a
//! small fraction of the sine period are summed with the plain Gauss rule.

use std::sync::Arc;

use crate::error::{DeconvError, Result};
use crate::quad::gauss::{legendre_all, GaussLegendre};
use crate::real::Real;
use crate::special::spherical_bessel_j;

/// Refinement controls for [`LegendreExpansion::fit`].
#[derive(Clone, Copy, Debug)]
pub struct FitControl<T> {
    pub order: usize,
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_depth: usize,
    /// Panels spanning less than `1/panels_per_period` of a sine period use
    /// the direct Gauss sum instead of the Bessel moments.
    pub panels_per_period: usize,
}

impl<T: Real> Default for FitControl<T> {
    fn default() -> Self {
        Self {
            order: 16,
            abs_tol: T::lit(1e-10),
            rel_tol: T::lit(1e-8),
            max_depth: 48,
            panels_per_period: 4,
        }
    }
}

#[derive(Clone, Debug)]
struct Panel<T> {
    center: T,
    half: T,
    /// Legendre coefficients of φ on the panel.
    coeffs: Vec<T>,
    /// Physical node positions.
    nodes: Vec<T>,
    /// half-width × Gauss weight × φ(node).
    weighted: Vec<T>,
}

/// Piecewise Legendre interpolant of an amplitude function.
#[derive(Clone, Debug)]
pub struct LegendreExpansion<T> {
    panels: Vec<Panel<T>>,
    order: usize,
    direct_theta: T,
    lower: T,
    upper: T,
}

struct Basis<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
    /// projection[k][i] = (2k+1)/2 · w_i · P_k(x_i)
    projection: Vec<Vec<T>>,
}

impl<T: Real> Basis<T> {
    fn new(order: usize) -> Self {
        let rule: Arc<GaussLegendre> = GaussLegendre::get(order);
        let mut projection = vec![vec![T::zero(); order]; order];
        let mut p = vec![0.0; order];
        for (i, (&x, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
            legendre_all(order, x, &mut p);
            for k in 0..order {
                projection[k][i] = T::lit((2 * k + 1) as f64 * 0.5 * w * p[k]);
            }
        }
        Self {
            nodes: rule.nodes.iter().map(|&x| T::lit(x)).collect(),
            weights: rule.weights.iter().map(|&w| T::lit(w)).collect(),
            projection,
        }
    }
}

impl<T: Real> LegendreExpansion<T> {
    /// Fit `f` on consecutive panels given by `breaks`, bisecting any panel
    /// whose trailing Legendre coefficients exceed the tolerance.
    pub fn fit<F: Fn(T) -> T>(f: F, breaks: &[T], control: FitControl<T>) -> Result<Self> {
        if breaks.len() < 2 {
            return Err(DeconvError::Invalid("expansion needs at least one panel".into()));
        }
        if control.order < 4 {
            return Err(DeconvError::Invalid("Legendre order must be at least 4".into()));
        }
        let basis = Basis::<T>::new(control.order);
        let mut panels = Vec::new();
        for w in breaks.windows(2) {
            if w[1] > w[0] {
                fit_panel(&f, &basis, w[0], w[1], &control, 0, &mut panels)?;
            }
        }
        let ppp = T::from_count(control.panels_per_period.max(2));
        Ok(Self {
            panels,
            order: control.order,
            direct_theta: T::PI() / ppp,
            lower: breaks[0],
            upper: breaks[breaks.len() - 1],
        })
    }

    pub fn panel_count(&self) -> usize {
        self.panels.len()
    }

    pub fn lower(&self) -> T {
        self.lower
    }

    pub fn upper(&self) -> T {
        self.upper
    }

    /// ∫ φ(t) dt over the fitted range.
    pub fn integral(&self) -> T {
        self.panels.iter().map(|p| p.weighted.iter().copied().sum::<T>()).sum()
    }

    /// ∫ φ(t) sin(ωt) dt over the fitted range.
    pub fn sin_transform(&self, omega: T) -> T {
        if omega == T::zero() {
            return T::zero();
        }
        let sign = if omega < T::zero() { -T::one() } else { T::one() };
        sign * self.transform(omega.abs()).1
    }

    /// ∫ φ(t) cos(ωt) dt over the fitted range.
    pub fn cos_transform(&self, omega: T) -> T {
        if omega == T::zero() {
            return self.integral();
        }
        self.transform(omega.abs()).0
    }

    /// (∫ φ cos(ωt), ∫ φ sin(ωt)) for ω > 0.
    fn transform(&self, omega: T) -> (T, T) {
        let mut cos_acc = T::zero();
        let mut sin_acc = T::zero();
        let mut bessel = vec![T::zero(); self.order];
        let two = T::lit(2.0);
        for p in &self.panels {
            let theta = omega * p.half;
            if theta <= self.direct_theta {
                for (&t, &w) in p.nodes.iter().zip(&p.weighted) {
                    let (s, c) = (omega * t).sin_cos();
                    sin_acc += w * s;
                    cos_acc += w * c;
                }
                continue;
            }
            spherical_bessel_j(theta, &mut bessel);
            // ∫₋₁¹ p(x) e^{iθx} dx = Σ c_k 2 i^k j_k(θ) = er + i·ei
            let mut er = T::zero();
            let mut ei = T::zero();
            for (k, (&c, &j)) in p.coeffs.iter().zip(&bessel).enumerate() {
                let term = two * c * j;
                match k % 4 {
                    0 => er += term,
                    1 => ei += term,
                    2 => er -= term,
                    _ => ei -= term,
                }
            }
            let (s, c) = (omega * p.center).sin_cos();
            cos_acc += p.half * (c * er - s * ei);
            sin_acc += p.half * (s * er + c * ei);
        }
        (cos_acc, sin_acc)
    }

    /// Evaluate the interpolant at `t` (used for diagnostics and tests).
    pub fn eval(&self, t: T) -> Option<T> {
        let p = self
            .panels
            .iter()
            .find(|p| t >= p.center - p.half && t <= p.center + p.half)?;
        let x = ((t - p.center) / p.half).as_f64();
        let mut leg = vec![0.0; self.order];
        legendre_all(self.order, x, &mut leg);
        Some(p.coeffs.iter().zip(&leg).map(|(&c, &l)| c * T::lit(l)).sum())
    }
}

fn fit_panel<T: Real, F: Fn(T) -> T>(
    f: &F,
    basis: &Basis<T>,
    a: T,
    b: T,
    control: &FitControl<T>,
    depth: usize,
    out: &mut Vec<Panel<T>>,
) -> Result<()> {
    let half = T::lit(0.5) * (b - a);
    let center = T::lit(0.5) * (a + b);
    let n = control.order;
    let nodes: Vec<T> = basis.nodes.iter().map(|&x| center + half * x).collect();
    let values: Vec<T> = nodes.iter().map(|&t| f(t)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(DeconvError::QuadratureFailure { previous: a.as_f64(), current: b.as_f64() });
    }
    let coeffs: Vec<T> = (0..n)
        .map(|k| {
            basis.projection[k]
                .iter()
                .zip(&values)
                .map(|(&p, &v)| p * v)
                .sum()
        })
        .collect();
    let scale = values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let tail = coeffs[n - 1].abs() + coeffs[n - 2].abs() + coeffs[n - 3].abs() * T::lit(0.5);
    let allowed = control.abs_tol + control.rel_tol * T::lit(0.1) * scale;
    if tail <= allowed {
        let weighted = values
            .iter()
            .zip(&basis.weights)
            .map(|(&v, &w)| v * w * half)
            .collect();
        out.push(Panel { center, half, coeffs, nodes, weighted });
        return Ok(());
    }
    if depth >= control.max_depth || half <= T::epsilon() * T::lit(64.0) * center.abs() {
        let whole: T = values.iter().zip(&basis.weights).map(|(&v, &w)| v * w * half).sum();
        return Err(DeconvError::QuadratureFailure {
            previous: whole.as_f64(),
            current: (whole + tail * half).as_f64(),
        });
    }
    fit_panel(f, basis, a, center, control, depth + 1, out)?;
    fit_panel(f, basis, center, b, control, depth + 1, out)
}

/// Breakpoints for an amplitude that varies on scale 1 near the origin and
/// on scale t far out: [0, ½, 1, 2, 4, …, upper].
pub fn dyadic_breaks<T: Real>(lower: T, upper: T) -> Vec<T> {
    let mut breaks = vec![lower];
    let mut t = if lower > T::zero() { lower } else { T::lit(0.5) };
    while t < upper {
        if t > lower {
            breaks.push(t);
        }
        t *= T::lit(2.0);
    }
    breaks.push(upper);
    breaks
}
