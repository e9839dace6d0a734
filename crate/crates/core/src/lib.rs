// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod bandwidth;
pub mod distributions;
pub mod error;
pub mod estimators;
pub mod kernels;
pub mod quad;
pub mod real;
pub mod simlab;
pub mod special;
pub mod transforms;

pub use error::{DeconvError, Result};
pub use real::Real;

pub type ErrorModel64 = distributions::ErrorModel<f64>;
pub type TargetModel64 = distributions::TargetModel<f64>;
pub type QuadratureSpec64 = transforms::QuadratureSpec<f64>;
pub type WeightContext64 = transforms::WeightContext<f64>;
pub type DeconvFit64 = estimators::DeconvFit<f64>;
pub type GridSpec64 = estimators::GridSpec<f64>;
pub type MisePlan64 = bandwidth::MisePlan<f64>;
pub type TailProfile64 = asymptotics::TailProfile<f64>;
