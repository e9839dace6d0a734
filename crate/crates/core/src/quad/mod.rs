//! Quadrature building blocks: Gauss–Legendre rules, adaptive Gauss–Kronrod
//! and Filon-type piecewise Legendre transforms.

pub mod filon;
pub mod gauss;
pub mod kronrod;

pub use filon::{dyadic_breaks, FitControl, LegendreExpansion};
pub use gauss::GaussLegendre;
pub use kronrod::{
    integrate, integrate_from_neg_infinity, integrate_to_infinity, integrate_with_breaks,
    Tolerance,
};
