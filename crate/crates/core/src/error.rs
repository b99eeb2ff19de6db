use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("adaptive step collapsed to {step:e} at t = {time} (near-singular model?)")]
    StepUnderflow { time: f64, step: f64 },

    #[error("root solve did not converge: {0}")]
    NoConvergence(String),

    #[error("no critical point found for Q = {q}: {reason}")]
    NoCriticalPoint { q: f64, reason: String },

    #[error("search window [{lo}, {hi}] does not cover the localization ball of radius {radius} around {center}")]
    WindowTooSmall { lo: f64, hi: f64, center: f64, radius: f64 },

    #[error("minimum attained on the window boundary at x = {0}; widen the window")]
    MinimumOnBoundary(f64),

    #[error("landscape ends are not connected in any sublevel set (mislabeled ends?)")]
    EndsNotConnected,

    #[error("landscape is invalid: {0}")]
    BadLandscape(String),

    #[error("time step {step} exceeds the admissible bound {bound} ({what})")]
    StepTooLong { step: f64, bound: f64, what: &'static str },

    #[error("output domain is empty after shrinking by the propagation radius {radius}")]
    DomainExhausted { radius: f64 },

    #[error("measured Lipschitz constant {measured} exceeds the bound {bound} by more than the grid slack")]
    LipschitzViolation { measured: f64, bound: f64 },

    #[error("monotonicity condition violated: {0}")]
    CflViolation(String),

    #[error("domains do not overlap on the requested window [{0}, {1}]")]
    EmptyOverlap(f64, f64),

    #[error("model is incompatible with the request: {0}")]
    Incompatible(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("expression error: {0}")]
    Expr(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
