//! Known measurement-error laws and synthetic target laws.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex;
use rand::RngCore;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};

use crate::error::{DeconvError, Result};
use crate::quad::{integrate, integrate_to_infinity, integrate_with_breaks, Tolerance};
use crate::real::Real;
use crate::special::{
    binomial, binomial_real, gamma_cdf_integer_shape, ln_gamma, normal_cdf, normal_pdf,
};

/// Largest even-moment index served before factorial growth overflows.
const MAX_MOMENT_INDEX: usize = 80;

/// Error law of δ in X = W + δ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ErrorModel<T> {
    /// Difference of two independent Gamma(α/2, 1) variables.
    SymGamma { alpha: T },
    /// Laplace law with scale `b`, characteristic function (1 + b²t²)⁻¹.
    Laplace { scale: T },
    NoError,
}

impl<T: Real> ErrorModel<T> {
    pub fn sym_gamma(alpha: T) -> Result<Self> {
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return Err(DeconvError::Invalid(format!("symgamma alpha must be positive, got {alpha}")));
        }
        Ok(Self::SymGamma { alpha })
    }

    pub fn laplace(scale: T) -> Result<Self> {
        if !(scale > T::zero()) || !scale.is_finite() {
            return Err(DeconvError::Invalid(format!("laplace scale must be positive, got {scale}")));
        }
        Ok(Self::Laplace { scale })
    }

    /// Characteristic function f_δ^Ft(t); real, even and positive.
    pub fn cf(&self, t: T) -> T {
        match *self {
            Self::SymGamma { alpha } => (T::one() + t * t).powf(-alpha * T::lit(0.5)),
            Self::Laplace { scale } => {
                let bt = scale * t;
                T::one() / (T::one() + bt * bt)
            }
            Self::NoError => T::one(),
        }
    }

    /// 1 / f_δ^Ft(t), computed without forming the small reciprocal.
    pub fn inverse_cf(&self, t: T) -> T {
        match *self {
            Self::SymGamma { alpha } => (T::one() + t * t).powf(alpha * T::lit(0.5)),
            Self::Laplace { scale } => {
                let bt = scale * t;
                T::one() + bt * bt
            }
            Self::NoError => T::one(),
        }
    }

    /// ln f_δ^Ft(t).
    pub fn ln_cf(&self, t: T) -> T {
        match *self {
            Self::SymGamma { alpha } => -alpha * T::lit(0.5) * (t * t).ln_1p(),
            Self::Laplace { scale } => -((scale * t) * (scale * t)).ln_1p(),
            Self::NoError => T::zero(),
        }
    }

    /// Exponent α in f_δ^Ft(t) ≈ z⁻¹ t^{-α}.
    pub fn tail_exponent(&self) -> T {
        match *self {
            Self::SymGamma { alpha } => alpha,
            Self::Laplace { .. } => T::lit(2.0),
            Self::NoError => T::zero(),
        }
    }

    /// Constant z⁻¹ in f_δ^Ft(t) ≈ z⁻¹ t^{-α}.
    pub fn tail_constant(&self) -> T {
        match *self {
            Self::SymGamma { .. } | Self::NoError => T::one(),
            Self::Laplace { scale } => (scale * scale).recip(),
        }
    }

    /// E δ^{2j}.
    pub fn even_moment(&self, j: usize) -> Result<T> {
        if j == 0 {
            return Ok(T::one());
        }
        if j > MAX_MOMENT_INDEX {
            return Err(DeconvError::UnsupportedMoment { model: self.to_string(), order: 2 * j });
        }
        match *self {
            Self::NoError => Ok(T::zero()),
            Self::Laplace { scale } => {
                // (2j)! b^{2j}
                let mut acc = T::one();
                for i in 1..=2 * j {
                    acc = acc * T::from_count(i) * scale;
                }
                Ok(acc)
            }
            Self::SymGamma { alpha } => {
                // cumulants κ_{2m} = α (2m-1)!, odd cumulants vanish
                let n = 2 * j;
                let mut kappa = vec![T::zero(); n + 1];
                let mut fact = T::one();
                for m in 1..=n {
                    if m > 1 {
                        fact *= T::from_count(m - 1);
                    }
                    if m % 2 == 0 {
                        kappa[m] = alpha * fact;
                    }
                }
                let mut mu = vec![T::zero(); n + 1];
                mu[0] = T::one();
                for k in 1..=n {
                    let mut acc = T::zero();
                    for m in (2..=k).step_by(2) {
                        acc += binomial::<T>(k - 1, m - 1) * kappa[m] * mu[k - m];
                    }
                    mu[k] = acc;
                }
                let v = mu[n];
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(DeconvError::UnsupportedMoment { model: self.to_string(), order: n })
                }
            }
        }
    }

    /// E δ^j for any j; odd moments vanish by symmetry.
    pub fn moment(&self, j: usize) -> Result<T> {
        if j % 2 == 1 {
            Ok(T::zero())
        } else {
            self.even_moment(j / 2)
        }
    }

    pub fn variance(&self) -> T {
        self.even_moment(1).unwrap_or_else(|_| T::nan())
    }

    /// Coefficients a_k of 1/f_δ^Ft(t) = Σ a_k t^{2k}, k < `terms`.
    ///
    /// The series converges for |t| < 1 (SymGamma) and is a polynomial
    /// for the other laws.
    pub fn inverse_cf_series(&self, terms: usize) -> Vec<T> {
        let mut out = vec![T::zero(); terms];
        if terms == 0 {
            return out;
        }
        match *self {
            Self::SymGamma { alpha } => {
                for (k, c) in out.iter_mut().enumerate() {
                    *c = binomial_real(alpha * T::lit(0.5), k);
                }
            }
            Self::Laplace { scale } => {
                out[0] = T::one();
                if terms > 1 {
                    out[1] = scale * scale;
                }
            }
            Self::NoError => out[0] = T::one(),
        }
        out
    }

    /// Density of δ; unsupported for the point mass.
    pub fn density(&self, x: T) -> Result<T> {
        match *self {
            Self::NoError => Err(DeconvError::Unsupported("the no-error law has no density".into())),
            Self::Laplace { scale } => Ok((-x.abs() / scale).exp() / (scale + scale)),
            Self::SymGamma { alpha } => sym_gamma_density(alpha, x),
        }
    }

    /// `n` independent draws.
    pub fn sample<R: RngCore>(&self, n: usize, rng: &mut R) -> Vec<T> {
        match *self {
            Self::NoError => vec![T::zero(); n],
            Self::Laplace { scale } => {
                let b = scale.as_f64();
                (0..n)
                    .map(|_| {
                        let e1: f64 = Exp1.sample(rng);
                        let e2: f64 = Exp1.sample(rng);
                        T::lit(b * (e1 - e2))
                    })
                    .collect()
            }
            Self::SymGamma { alpha } => {
                let shape = 0.5 * alpha.as_f64();
                let g = Gamma::new(shape, 1.0).expect("positive gamma shape");
                (0..n)
                    .map(|_| {
                        let a: f64 = g.sample(rng);
                        let b: f64 = g.sample(rng);
                        T::lit(a - b)
                    })
                    .collect()
            }
        }
    }
}

/// Density of the symmetrized Gamma law at `x`:
///
/// ```text
/// f(x) = e^{-|x|} / Γ(k)² ∫₀^∞ (y + |x|)^{k-1} y^{k-1} e^{-2y} dy,   k = α/2
/// ```
///
/// evaluated after y = w^{1/k}, which absorbs the y^{k-1} endpoint factor.
fn sym_gamma_density<T: Real>(alpha: T, x: T) -> Result<T> {
    let k = alpha * T::lit(0.5);
    let ax = x.abs();
    if ax == T::zero() && k <= T::lit(0.5) {
        return Ok(T::infinity());
    }
    let inv_k = k.recip();
    let tol = Tolerance::new(T::lit(1e-14), T::lit(1e-11));
    let integrand = |w: T| {
        if w <= T::zero() {
            return if ax > T::zero() { ax.powf(k - T::one()) } else { T::zero() };
        }
        let y = w.powf(inv_k);
        (y + ax).powf(k - T::one()) * (-(y + y)).exp()
    };
    let head = integrate(integrand, T::zero(), T::one(), tol)?;
    let tail = integrate_to_infinity(integrand, T::one(), tol)?;
    let norm = (ln_gamma(k) + ln_gamma(k + T::one())).exp();
    Ok((-ax).exp() * (head + tail) / norm)
}

impl<T: Real> fmt::Display for ErrorModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SymGamma { alpha } => write!(f, "symgamma:{alpha}"),
            Self::Laplace { scale } => write!(f, "laplace:{scale}"),
            Self::NoError => write!(f, "noerror"),
        }
    }
}

fn parse_positive<T: Real>(spec: &str, value: &str) -> Result<T> {
    let v: f64 = value.trim().parse().map_err(|_| DeconvError::Parse {
        spec: spec.to_string(),
        reason: format!("{value:?} is not a number"),
    })?;
    if !(v > 0.0) || !v.is_finite() {
        return Err(DeconvError::Parse { spec: spec.to_string(), reason: "parameter must be positive".into() });
    }
    Ok(T::lit(v))
}

impl<T: Real> FromStr for ErrorModel<T> {
    type Err = DeconvError;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (name, arg) = match lower.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a)),
            None => (lower.as_str(), None),
        };
        match (name, arg) {
            ("noerror", None) => Ok(Self::NoError),
            ("symgamma", Some(a)) => Ok(Self::SymGamma { alpha: parse_positive(s, a)? }),
            ("laplace", Some(b)) => Ok(Self::Laplace { scale: parse_positive(s, b)? }),
            _ => Err(DeconvError::Parse {
                spec: s.to_string(),
                reason: "expected symgamma:ALPHA, laplace:SCALE or noerror".into(),
            }),
        }
    }
}

type RealFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;
type CfFn<T> = Arc<dyn Fn(T) -> Complex<T> + Send + Sync>;
type SamplerFn<T> = Arc<dyn Fn(&mut dyn RngCore) -> T + Send + Sync>;

/// User-supplied target law. Only the sampler is mandatory.
#[derive(Clone)]
pub struct CustomTarget<T> {
    pub name: String,
    pub density: Option<RealFn<T>>,
    pub cdf: Option<RealFn<T>>,
    pub cf: Option<CfFn<T>>,
    pub sampler: SamplerFn<T>,
    pub roughness: Option<T>,
    pub mean: Option<T>,
    pub variance: Option<T>,
    /// Interval carrying essentially all of the mass, used for quadrature.
    pub support: (T, T),
    /// Points where the density is not smooth.
    pub kinks: Vec<T>,
}

impl<T: Real> CustomTarget<T> {
    pub fn new<S>(name: impl Into<String>, support: (T, T), sampler: S) -> Self
    where
        S: Fn(&mut dyn RngCore) -> T + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            density: None,
            cdf: None,
            cf: None,
            sampler: Arc::new(sampler),
            roughness: None,
            mean: None,
            variance: None,
            support,
            kinks: Vec::new(),
        }
    }

    pub fn with_density(mut self, f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        self.density = Some(Arc::new(f));
        self
    }

    pub fn with_cdf(mut self, f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        self.cdf = Some(Arc::new(f));
        self
    }

    pub fn with_cf(mut self, f: impl Fn(T) -> Complex<T> + Send + Sync + 'static) -> Self {
        self.cf = Some(Arc::new(f));
        self
    }

    pub fn with_roughness(mut self, r: T) -> Self {
        self.roughness = Some(r);
        self
    }

    pub fn with_moments(mut self, mean: T, variance: T) -> Self {
        self.mean = Some(mean);
        self.variance = Some(variance);
        self
    }

    pub fn with_kinks(mut self, kinks: Vec<T>) -> Self {
        self.kinks = kinks;
        self
    }
}

/// Law of the unobserved W.
#[derive(Clone)]
pub enum TargetModel<T> {
    StdNormal,
    /// ½N(−3, 1) + ½N(2, 1).
    NormalMixture,
    /// Gamma with shape 2 and rate 1.
    Gamma2,
    Custom(Arc<CustomTarget<T>>),
}

impl<T: Real> fmt::Debug for TargetModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TargetModel({self})")
    }
}

impl<T: Real> fmt::Display for TargetModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::StdNormal => f.write_str("normal"),
            Self::NormalMixture => f.write_str("mixture"),
            Self::Gamma2 => f.write_str("gamma2"),
            Self::Custom(c) => f.write_str(&c.name),
        }
    }
}

impl<T: Real> FromStr for TargetModel<T> {
    type Err = DeconvError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" => Ok(Self::StdNormal),
            "mixture" => Ok(Self::NormalMixture),
            "gamma2" => Ok(Self::Gamma2),
            _ => Err(DeconvError::Parse {
                spec: s.to_string(),
                reason: "expected normal, mixture or gamma2".into(),
            }),
        }
    }
}

const MIX_LEFT: f64 = -3.0;
const MIX_RIGHT: f64 = 2.0;

impl<T: Real> TargetModel<T> {
    /// N(μ, σ²) as a custom target with closed-form pieces.
    pub fn normal(mu: T, sigma: T) -> Self {
        let (m, s) = (mu.as_f64(), sigma.as_f64());
        let custom = CustomTarget::new(format!("normal({m},{s})"), (mu - T::lit(12.0) * sigma, mu + T::lit(12.0) * sigma), move |rng| {
            let z: f64 = StandardNormal.sample(rng);
            T::lit(m + s * z)
        })
        .with_density(move |x| normal_pdf((x - mu) / sigma) / sigma)
        .with_cdf(move |x| normal_cdf((x - mu) / sigma))
        .with_cf(move |t| {
            let amp = (-(sigma * t).powi(2) * T::lit(0.5)).exp();
            Complex::from_polar(amp, mu * t)
        })
        .with_roughness((T::lit(4.0) * T::PI().sqrt() * sigma.powi(3)).recip())
        .with_moments(mu, sigma * sigma);
        Self::Custom(Arc::new(custom))
    }

    /// Exponential law with the given rate; its characteristic function
    /// decays like t⁻¹ with a purely imaginary leading coefficient.
    pub fn exponential(rate: T) -> Self {
        let lambda = rate.as_f64();
        let custom = CustomTarget::new(format!("exponential({lambda})"), (T::zero(), T::lit(45.0) / rate), move |rng| {
            let e: f64 = Exp1.sample(rng);
            T::lit(e / lambda)
        })
        .with_density(move |x| if x < T::zero() { T::zero() } else { rate * (-rate * x).exp() })
        .with_cdf(move |x| if x <= T::zero() { T::zero() } else { -(-rate * x).exp_m1() })
        .with_cf(move |t| Complex::new(T::one(), T::zero()) / Complex::new(T::one(), -t / rate))
        .with_moments(rate.recip(), (rate * rate).recip())
        .with_kinks(vec![T::zero()]);
        Self::Custom(Arc::new(custom))
    }

    pub fn density(&self, x: T) -> Result<T> {
        Ok(match self {
            Self::StdNormal => normal_pdf(x),
            Self::NormalMixture => {
                T::lit(0.5) * (normal_pdf(x - T::lit(MIX_LEFT)) + normal_pdf(x - T::lit(MIX_RIGHT)))
            }
            Self::Gamma2 => {
                if x < T::zero() {
                    T::zero()
                } else {
                    x * (-x).exp()
                }
            }
            Self::Custom(c) => match &c.density {
                Some(f) => f(x),
                None => return Err(DeconvError::Unsupported(format!("{} has no density", c.name))),
            },
        })
    }

    pub fn cdf(&self, x: T) -> Result<T> {
        Ok(match self {
            Self::StdNormal => normal_cdf(x),
            Self::NormalMixture => {
                T::lit(0.5) * (normal_cdf(x - T::lit(MIX_LEFT)) + normal_cdf(x - T::lit(MIX_RIGHT)))
            }
            Self::Gamma2 => gamma_cdf_integer_shape(2, x),
            Self::Custom(c) => match &c.cdf {
                Some(f) => f(x),
                None => return Err(DeconvError::Unsupported(format!("{} has no cdf", c.name))),
            },
        })
    }

    /// Characteristic function E e^{itW}.
    pub fn cf(&self, t: T) -> Result<Complex<T>> {
        let gauss = (-(t * t) * T::lit(0.5)).exp();
        Ok(match self {
            Self::StdNormal => Complex::new(gauss, T::zero()),
            Self::NormalMixture => {
                let a = Complex::from_polar(T::one(), T::lit(MIX_LEFT) * t);
                let b = Complex::from_polar(T::one(), T::lit(MIX_RIGHT) * t);
                (a + b) * (gauss * T::lit(0.5))
            }
            Self::Gamma2 => {
                let z = Complex::new(T::one(), -t);
                (z * z).inv()
            }
            Self::Custom(c) => match &c.cf {
                Some(f) => f(t),
                None => {
                    return Err(DeconvError::Unsupported(format!(
                        "{} has no characteristic function",
                        c.name
                    )))
                }
            },
        })
    }

    pub fn mean(&self) -> Option<T> {
        match self {
            Self::StdNormal => Some(T::zero()),
            Self::NormalMixture => Some(T::lit(0.5 * (MIX_LEFT + MIX_RIGHT))),
            Self::Gamma2 => Some(T::lit(2.0)),
            Self::Custom(c) => c.mean,
        }
    }

    pub fn variance(&self) -> Option<T> {
        match self {
            Self::StdNormal => Some(T::one()),
            Self::NormalMixture => {
                let m = 0.5 * (MIX_LEFT + MIX_RIGHT);
                Some(T::lit(1.0 + 0.5 * (MIX_LEFT * MIX_LEFT + MIX_RIGHT * MIX_RIGHT) - m * m))
            }
            Self::Gamma2 => Some(T::lit(2.0)),
            Self::Custom(c) => c.variance,
        }
    }

    /// Interval holding all but a negligible amount of mass.
    pub fn support(&self) -> (T, T) {
        match self {
            Self::StdNormal => (T::lit(-12.0), T::lit(12.0)),
            Self::NormalMixture => (T::lit(MIX_LEFT - 12.0), T::lit(MIX_RIGHT + 12.0)),
            Self::Gamma2 => (T::zero(), T::lit(60.0)),
            Self::Custom(c) => c.support,
        }
    }

    fn kinks(&self) -> Vec<T> {
        match self {
            Self::Gamma2 => vec![T::zero()],
            Self::Custom(c) => c.kinks.clone(),
            _ => Vec::new(),
        }
    }

    /// Quadrature breakpoints covering the support, split at kinks and at
    /// unit spacing near the bulk.
    pub fn breakpoints(&self) -> Vec<T> {
        let (lo, hi) = self.support();
        let mut pts = vec![lo, hi];
        pts.extend(self.kinks().into_iter().filter(|k| *k > lo && *k < hi));
        if let (Some(m), Some(v)) = (self.mean(), self.variance()) {
            let sd = v.sqrt();
            for i in -6i32..=6 {
                let p = m + T::lit(f64::from(i)) * sd;
                if p > lo && p < hi {
                    pts.push(p);
                }
            }
        }
        pts.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
        pts.dedup();
        pts
    }

    /// ∫ (f_W′)².
    pub fn roughness(&self) -> Result<T> {
        match self {
            Self::StdNormal => Ok((T::lit(4.0) * T::PI().sqrt()).recip()),
            Self::NormalMixture => {
                // ¼[2·R(φ) + 2∫φ′(x)φ′(x + d)dx], ∫φ′φ′(·+d) = e^{-d²/4}(1 - d²/2)/(4√π)
                let d = T::lit(MIX_RIGHT - MIX_LEFT);
                let base = (T::lit(4.0) * T::PI().sqrt()).recip();
                let cross = base * (-(d * d) / T::lit(4.0)).exp() * (T::one() - d * d * T::lit(0.5));
                Ok(T::lit(0.5) * (base + cross))
            }
            Self::Gamma2 => Ok(T::lit(0.25)),
            Self::Custom(c) => {
                if let Some(r) = c.roughness {
                    return Ok(r);
                }
                let f = c
                    .density
                    .clone()
                    .ok_or_else(|| DeconvError::Unsupported(format!("{} has no density", c.name)))?;
                let step = T::lit(1e-4) * (c.support.1 - c.support.0).max(T::one());
                let deriv = move |x: T| {
                    let d = (f(x + step) - f(x - step)) / (step + step);
                    d * d
                };
                integrate_with_breaks(deriv, &self.breakpoints(), Tolerance::new(T::lit(1e-12), T::lit(1e-9)))
            }
        }
    }

    /// Quantile F_W⁻¹(u) by bisection on the closed-form CDF.
    pub fn quantile(&self, u: T) -> Result<T> {
        if !(u > T::zero() && u < T::one()) {
            return Err(DeconvError::Domain(format!("quantile level {u} outside (0, 1)")));
        }
        let (mut lo, mut hi) = self.support();
        if self.cdf(lo)? > u || self.cdf(hi)? < u {
            return Err(DeconvError::SpanExhausted { level: u.as_f64() });
        }
        for _ in 0..200 {
            let mid = T::lit(0.5) * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid)? < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(T::lit(0.5) * (lo + hi))
    }

    pub fn sample<R: RngCore>(&self, n: usize, rng: &mut R) -> Vec<T> {
        match self {
            Self::StdNormal => (0..n)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    T::lit(z)
                })
                .collect(),
            Self::NormalMixture => (0..n)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    let left = rng.next_u32() & 1 == 0;
                    T::lit(z + if left { MIX_LEFT } else { MIX_RIGHT })
                })
                .collect(),
            Self::Gamma2 => {
                let g = Gamma::new(2.0, 1.0).expect("valid gamma");
                (0..n)
                    .map(|_| {
                        let v: f64 = g.sample(rng);
                        T::lit(v)
                    })
                    .collect()
            }
            Self::Custom(c) => {
                let r: &mut dyn RngCore = rng;
                (0..n).map(|_| (c.sampler)(&mut *r)).collect()
            }
        }
    }
}

/// Outcome of the numeric smoothness test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Feasible,
    Infeasible,
    Inconclusive,
}

impl fmt::Display for Feasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Feasible => "feasible",
            Self::Infeasible => "infeasible",
            Self::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SmoothnessReport<T> {
    pub verdict: Feasibility,
    /// ∫₁^{2^41} of the tested integrand (may be infinite when divergent).
    pub partial_integral: T,
    /// Ratios of consecutive dyadic block integrals.
    pub block_ratios: Vec<T>,
    /// The moment part of the criterion, checked analytically.
    pub moment_condition: bool,
}

pub const SMOOTHNESS_BLOCKS: usize = 41;
const FEASIBLE_RATIO: f64 = 0.95;
const INFEASIBLE_RATIO: f64 = 1.05;

/// Numeric test of ∫₁^∞ w(t) f_δ^Ft(t)^{-2} dt < ∞ with w(t) = t⁻² (or
/// t^{-2(q+1)} when `q` is given), by the ratios of integrals over the
/// dyadic blocks [2^k, 2^{k+1}], k = 0..40.
pub fn smoothness_class<T: Real>(model: &ErrorModel<T>, q: Option<T>) -> SmoothnessReport<T> {
    let power = match q {
        Some(q) => T::lit(2.0) * (q + T::one()),
        None => T::lit(2.0),
    };
    let tol = Tolerance::new(T::lit(1e-300), T::lit(1e-10));
    // log of each block integral, computed relative to the integrand at the
    // left end so that overflow cannot occur for any α
    let mut log_blocks = Vec::with_capacity(SMOOTHNESS_BLOCKS);
    for k in 0..SMOOTHNESS_BLOCKS {
        let a = T::lit(2.0).powi(k as i32);
        let log_w = |t: T| -power * t.ln() - T::lit(2.0) * model.ln_cf(t);
        let anchor = log_w(a);
        let rel = integrate(|s: T| (log_w(a * s) - anchor).exp(), T::one(), T::lit(2.0), tol)
            .unwrap_or_else(|_| T::nan());
        log_blocks.push(anchor + a.ln() + rel.ln());
    }
    let block_ratios: Vec<T> = log_blocks.windows(2).map(|w| (w[1] - w[0]).exp()).collect();
    let partial_integral: T = log_blocks.iter().map(|l| l.exp()).sum();
    let tail = &block_ratios[block_ratios.len() / 2..];
    let verdict = if tail.iter().all(|r| *r < T::lit(FEASIBLE_RATIO)) {
        Feasibility::Feasible
    } else if tail.iter().all(|r| *r >= T::lit(INFEASIBLE_RATIO)) {
        Feasibility::Infeasible
    } else {
        Feasibility::Inconclusive
    };
    // E δ^{4(k+1)} < ∞ holds for every built-in law
    let moment_condition = match q {
        Some(q) => {
            let k = (q * T::lit(0.5)).floor().to_usize().unwrap_or(0);
            model.even_moment(2 * (k + 1)).map(|m| m.is_finite()).unwrap_or(false)
        }
        None => true,
    };
    let verdict = if moment_condition { verdict } else { Feasibility::Infeasible };
    SmoothnessReport { verdict, partial_integral, block_ratios, moment_condition }
}
