use thiserror::Error;

/// Everything that can go wrong inside the estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeconvError {
    #[error("quadrature failed to converge: last estimates {previous:e} and {current:e}")]
    QuadratureFailure { previous: f64, current: f64 },

    #[error("moment of order {order} is not available for {model}")]
    UnsupportedMoment { model: String, order: usize },

    #[error("bandwidth h = {h} is not supported here: {reason}")]
    UnsupportedBandwidth { h: f64, reason: String },

    #[error("integral diverges: {0}")]
    DivergentIntegral(String),

    #[error("no asymptote: tail exponent {alpha} must exceed 1/2")]
    NoAsymptote { alpha: f64 },

    #[error("noise dominates: estimated var(W) = {0} is not positive")]
    NoiseDominates(f64),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("monotone curve never crosses level {level} inside the evaluation span")]
    SpanExhausted { level: f64 },

    #[error("estimated distribution is degenerate (flat over the whole span)")]
    DegenerateDistribution,

    #[error("absolute moment of order {q} is not integrable against the kernel tail (need q < {limit})")]
    NonIntegrableTail { q: f64, limit: f64 },

    #[error("pole in bias constant: r*j = beta for j = {j}")]
    Pole { j: usize },

    #[error("unsupported model: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("cannot parse model spec {spec:?}: {reason}")]
    Parse { spec: String, reason: String },
}

pub type Result<T, E = DeconvError> = std::result::Result<T, E>;
