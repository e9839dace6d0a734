//! Kernels with compactly supported polynomial Fourier transforms,
//! K^Ft(t) = (1 − |t|^r)^s on |t| ≤ 1.

use std::fmt;
use std::str::FromStr;

use crate::error::{DeconvError, Result};
use crate::quad::GaussLegendre;
use crate::real::Real;
use crate::special::binomial;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Kernel {
    r: u32,
    s: u32,
}

/// Below this |x| the real-space kernel uses one fixed high-order rule.
const FIXED_RULE_LIMIT: f64 = 50.0;
const FIXED_RULE_POINTS: usize = 2048;

impl Kernel {
    /// Kernel used by the estimators.
    pub const ESTIMATION: Kernel = Kernel { r: 4, s: 2 };
    /// Kernel used for plug-in bandwidth selection (needs κ₂ ≠ 0).
    pub const BANDWIDTH: Kernel = Kernel { r: 2, s: 2 };

    pub fn new(r: u32, s: u32) -> Result<Self> {
        if r < 2 || !r.is_multiple_of(2) {
            return Err(DeconvError::Invalid(format!("kernel r must be an even integer >= 2, got {r}")));
        }
        if s < 1 {
            return Err(DeconvError::Invalid("kernel s must be at least 1".into()));
        }
        Ok(Self { r, s })
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    /// K^Ft(t).
    pub fn kft<T: Real>(&self, t: T) -> T {
        let a = t.abs();
        if a >= T::one() {
            return T::zero();
        }
        (T::one() - a.powi(self.r as i32)).powi(self.s as i32)
    }

    /// Coefficients of K^Ft(t) = Σ_j c_j t^{rj}, j = 0..s.
    pub fn kft_coefficients<T: Real>(&self) -> Vec<T> {
        let s = self.s as usize;
        (0..=s)
            .map(|j| {
                let c: T = binomial(s, j);
                if j % 2 == 1 {
                    -c
                } else {
                    c
                }
            })
            .collect()
    }

    /// κ₂ = ∫ x² K(x) dx = −(K^Ft)″(0).
    pub fn kappa2<T: Real>(&self) -> T {
        if self.r == 2 {
            T::from_count(2 * self.s as usize)
        } else {
            T::zero()
        }
    }

    /// K(x) = (1/π) ∫₀¹ cos(tx) K^Ft(t) dt.
    pub fn kernel_real<T: Real>(&self, x: T) -> T {
        let ax = x.abs();
        let mut acc = T::zero();
        if ax <= T::lit(FIXED_RULE_LIMIT) {
            let rule = GaussLegendre::get(FIXED_RULE_POINTS);
            for (&node, &w) in rule.nodes.iter().zip(&rule.weights) {
                let t = T::lit(0.5 * (node + 1.0));
                acc += T::lit(0.5 * w) * (t * ax).cos() * self.kft(t);
            }
        } else {
            // panels of a quarter period, 16 Gauss points each
            let rule = GaussLegendre::get(16);
            let width = T::FRAC_PI_2() / ax * T::lit(0.5);
            let panels = (T::one() / width).ceil().to_usize().unwrap_or(1).max(1);
            let width = T::one() / T::from_count(panels);
            for p in 0..panels {
                let a = width * T::from_count(p);
                for (&node, &w) in rule.nodes.iter().zip(&rule.weights) {
                    let t = a + width * T::lit(0.5 * (node + 1.0));
                    acc += width * T::lit(0.5 * w) * (t * ax).cos() * self.kft(t);
                }
            }
        }
        acc / T::PI()
    }
}

impl Default for Kernel {
    fn default() -> Self {
        Self::ESTIMATION
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "kernel:{},{}", self.r, self.s)
    }
}

impl FromStr for Kernel {
    type Err = DeconvError;

    /// Accepts "kernel:R,S" or plain "R,S".
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let body = lower.strip_prefix("kernel:").unwrap_or(&lower);
        let parse_err = |reason: &str| DeconvError::Parse { spec: s.to_string(), reason: reason.into() };
        let (r, sv) = body.split_once(',').ok_or_else(|| parse_err("expected R,S"))?;
        let r: u32 = r.trim().parse().map_err(|_| parse_err("R is not an integer"))?;
        let sv: u32 = sv.trim().parse().map_err(|_| parse_err("S is not an integer"))?;
        Kernel::new(r, sv).map_err(|e| parse_err(&e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kft_values() {
        let k = Kernel::ESTIMATION;
        assert_eq!(k.kft(0.0f64), 1.0);
        assert_eq!(k.kft(1.2f64), 0.0);
        assert_eq!(k.kft(0.5f64), 0.878_906_25);
        assert_eq!(k.kft(-0.5f64), 0.878_906_25);
    }

    #[test]
    fn kappa2_by_expansion() {
        assert_eq!(Kernel::new(2, 2).unwrap().kappa2::<f64>(), 4.0);
        assert_eq!(Kernel::new(4, 2).unwrap().kappa2::<f64>(), 0.0);
        assert_eq!(Kernel::new(2, 1).unwrap().kappa2::<f64>(), 2.0);
    }

    #[test]
    fn kernel_at_origin() {
        let k = Kernel::ESTIMATION;
        let want = (1.0 - 2.0 / 5.0 + 1.0 / 9.0) / std::f64::consts::PI;
        assert!((k.kernel_real(0.0f64) - want).abs() < 1e-14);
    }

    #[test]
    fn parse_and_reject() {
        assert_eq!("kernel:4,2".parse::<Kernel>().unwrap(), Kernel::ESTIMATION);
        assert_eq!(" 2, 2 ".parse::<Kernel>().unwrap(), Kernel::BANDWIDTH);
        assert!("kernel:3,2".parse::<Kernel>().is_err());
        assert!("kernel:4".parse::<Kernel>().is_err());
    }
}
