//! Deconvolution estimators of the distribution function, density,
//! quantiles and moments of W.

mod expected;
mod moments;

use std::sync::Arc;

use rand::{Rng, RngCore};
use rayon::prelude::*;

use crate::error::{DeconvError, Result};
use crate::real::{compensated_sum, Real};
use crate::transforms::{WeightContext, WeightTable};

pub use expected::expected_cdf;
pub use moments::poly_moment;

/// Evaluation grid for curves, quantiles and resampling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec<T> {
    /// Defaults to [min X − 10(h+1), max X + 10(h+1)].
    pub span: Option<(T, T)>,
    pub points: usize,
}

pub const DEFAULT_GRID_POINTS: usize = 1025;

impl<T> Default for GridSpec<T> {
    fn default() -> Self {
        Self { span: None, points: DEFAULT_GRID_POINTS }
    }
}

/// F̂ tabulated on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CdfCurve<T> {
    pub grid: Vec<T>,
    pub values: Vec<T>,
    pub monotonized: bool,
}

impl<T: Real> CdfCurve<T> {
    /// Running maximum over the grid ordering; idempotent.
    pub fn monotonize(&self) -> CdfCurve<T> {
        let mut running = T::neg_infinity();
        let values = self
            .values
            .iter()
            .map(|&v| {
                running = running.max(v);
                running
            })
            .collect();
        CdfCurve { grid: self.grid.clone(), values, monotonized: true }
    }

    /// Values clamped to [0, 1].
    pub fn clamped(&self) -> CdfCurve<T> {
        let values = self.values.iter().map(|v| v.max(T::zero()).min(T::one())).collect();
        CdfCurve { grid: self.grid.clone(), values, monotonized: self.monotonized }
    }
}

/// A sample bound to a kernel, error law, bandwidth and quadrature controls.
#[derive(Clone)]
pub struct DeconvFit<T> {
    data: Arc<Vec<T>>,
    ctx: WeightContext<T>,
    table: Option<Arc<WeightTable<T>>>,
}

impl<T: Real> std::fmt::Debug for DeconvFit<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DeconvFit")
            .field("n", &self.data.len())
            .field("ctx", &self.ctx)
            .field("tabulated", &self.table.is_some())
            .finish()
    }
}

impl<T: Real> DeconvFit<T> {
    pub fn new(data: Vec<T>, ctx: WeightContext<T>) -> Result<Self> {
        if data.is_empty() {
            return Err(DeconvError::Invalid("the sample is empty".into()));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(DeconvError::Invalid("the sample contains non-finite values".into()));
        }
        Ok(Self { data: Arc::new(data), ctx, table: None })
    }

    /// Route weight evaluations through a precomputed table built for the
    /// same context.
    pub fn with_table(mut self, table: Arc<WeightTable<T>>) -> Result<Self> {
        let t = table.context();
        if t.h() != self.ctx.h() || t.kernel() != self.ctx.kernel() || t.error() != self.ctx.error() {
            return Err(DeconvError::Invalid("weight table was built for a different context".into()));
        }
        self.table = Some(table);
        Ok(self)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn context(&self) -> &WeightContext<T> {
        &self.ctx
    }

    pub fn h(&self) -> T {
        self.ctx.h()
    }

    fn weight(&self, u: T) -> T {
        match &self.table {
            Some(t) => t.eval(u),
            None => self.ctx.l1_weight(u),
        }
    }

    /// F̂_W(x) = n⁻¹ Σ L₁(x − X_j | h), not clamped to [0, 1].
    pub fn cdf_at(&self, x: T) -> T {
        let n = T::from_count(self.data.len());
        compensated_sum(self.data.iter().map(|&xj| self.weight(x - xj))) / n
    }

    /// f̂_W(x) = (nh)⁻¹ Σ L((x − X_j)/h).
    pub fn density_at(&self, x: T) -> Result<T> {
        let mut terms = Vec::with_capacity(self.data.len());
        for &xj in self.data.iter() {
            terms.push(self.ctx.l1_derivative(x - xj)?);
        }
        Ok(compensated_sum(terms) / T::from_count(self.data.len()))
    }

    /// f̂_W′(x).
    pub fn density_derivative_at(&self, x: T) -> Result<T> {
        let mut terms = Vec::with_capacity(self.data.len());
        for &xj in self.data.iter() {
            terms.push(self.ctx.l1_second_derivative(x - xj)?);
        }
        Ok(compensated_sum(terms) / T::from_count(self.data.len()))
    }

    /// [min X − 10(h+1), max X + 10(h+1)].
    pub fn standard_span(&self) -> (T, T) {
        let pad = T::lit(10.0) * (self.h() + T::one());
        let lo = self.data.iter().copied().fold(T::infinity(), T::min);
        let hi = self.data.iter().copied().fold(T::neg_infinity(), T::max);
        (lo - pad, hi + pad)
    }

    /// Equally spaced grid for `spec`.
    pub fn grid(&self, spec: &GridSpec<T>) -> Result<Vec<T>> {
        let (lo, hi) = spec.span.unwrap_or_else(|| self.standard_span());
        if spec.points < 2 || !(hi > lo) {
            return Err(DeconvError::Invalid("grid needs at least two points and a positive span".into()));
        }
        let step = (hi - lo) / T::from_count(spec.points - 1);
        Ok((0..spec.points).map(|i| if i + 1 == spec.points { hi } else { lo + step * T::from_count(i) }).collect())
    }

    /// Raw F̂ on a strictly increasing grid.
    pub fn evaluate_curve(&self, grid: &[T]) -> Result<CdfCurve<T>> {
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(DeconvError::Invalid("grid must be strictly increasing".into()));
        }
        let values = grid.par_iter().map(|&x| self.cdf_at(x)).collect();
        Ok(CdfCurve { grid: grid.to_vec(), values, monotonized: false })
    }

    /// sup{y : F̂^mon(y) ≤ u} on a monotone curve, refined by bisection
    /// between the last grid point at or below `u` and its successor.
    fn invert(&self, mono: &CdfCurve<T>, u: T, tol: T, clamp: bool) -> Result<T> {
        let vals = &mono.values;
        let last = vals.len() - 1;
        if vals[0] > u {
            return Err(DeconvError::SpanExhausted { level: u.as_f64() });
        }
        // monotone values: partition point of "≤ u"
        let count = vals.partition_point(|&v| v <= u);
        let i = count - 1;
        if i == last {
            return Err(DeconvError::SpanExhausted { level: u.as_f64() });
        }
        let (mut lo, mut hi) = (mono.grid[i], mono.grid[i + 1]);
        let mut base = vals[i];
        for _ in 0..200 {
            if hi - lo <= tol {
                break;
            }
            let mid = T::lit(0.5) * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let mut v = self.cdf_at(mid);
            if clamp {
                v = v.max(T::zero()).min(T::one());
            }
            let running = base.max(v);
            if running <= u {
                lo = mid;
                base = running;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    /// ξ̂_u = sup{y : F̂^mon(y) ≤ u}.
    pub fn quantile(&self, u: T, spec: &GridSpec<T>) -> Result<T> {
        Ok(self.quantiles(&[u], spec)?[0])
    }

    /// Several quantiles sharing one curve evaluation.
    pub fn quantiles(&self, us: &[T], spec: &GridSpec<T>) -> Result<Vec<T>> {
        for &u in us {
            if !(u > T::zero() && u < T::one()) {
                return Err(DeconvError::Domain(format!("quantile level {u} outside (0, 1)")));
            }
        }
        let grid = self.grid(spec)?;
        let tol = T::lit(1e-6) * (grid[grid.len() - 1] - grid[0]);
        let mono = self.evaluate_curve(&grid)?.monotonize();
        us.iter().map(|&u| self.invert(&mono, u, tol, false)).collect()
    }

    /// ν̂_q = ∫ |u|^q dF̂_W(u | h).
    pub fn abs_moment(&self, q: T) -> Result<T> {
        moments::abs_moment(&self.data, &self.ctx, q)
    }

    /// `m` draws by inverse transform from the clamped, monotonized F̂ on the
    /// standard span.
    pub fn resample<R: RngCore>(&self, m: usize, rng: &mut R) -> Result<Vec<T>> {
        if m == 0 {
            return Ok(Vec::new());
        }
        let grid = self.grid(&GridSpec::default())?;
        let mono = self.evaluate_curve(&grid)?.clamped().monotonize();
        let c0 = mono.values[0];
        let c1 = mono.values[mono.values.len() - 1];
        if !(c1 - c0 > T::lit(1e-12)) {
            return Err(DeconvError::DegenerateDistribution);
        }
        let tol = T::lit(1e-9) * (grid[grid.len() - 1] - grid[0]);
        (0..m)
            .map(|_| {
                let u: f64 = rng.gen();
                let v = c0 + T::lit(u) * (c1 - c0);
                self.invert(&mono, v, tol, true)
            })
            .collect()
    }
}
