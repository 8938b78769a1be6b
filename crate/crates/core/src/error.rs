use thiserror::Error;

/// Invalid parameters for a chain, adaptive law or uncertainty model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("chain length r must be at least 1")]
    EmptyChain,
    #[error("base weight p must be positive (got {0})")]
    NonPositiveBaseWeight(f64),
    #[error("homogeneity degree kappa must be negative (got {0})")]
    NonNegativeKappa(f64),
    #[error("p + (r+1)*kappa = {0} violates 0 <= p + (r+1)*kappa < 1")]
    LastWeightOutOfRange(f64),
    #[error("expected {expected} values for {what}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("gain l_{index} = {value} must be positive")]
    NonPositiveGain { index: usize, value: f64 },
    #[error("exponent {name} = {value} must be positive")]
    NonPositiveExponent { name: String, value: f64 },
    #[error("state entry z_{index} = {value} is not finite")]
    NonFiniteState { index: usize, value: f64 },
    #[error("{name} must be positive (got {value})")]
    NonPositive { name: &'static str, value: f64 },
    #[error("invalid gain function: {0}")]
    InvalidGain(String),
    #[error(
        "gain function is bounded but the stabilizer u0 is unbounded; g must grow without bound"
    )]
    BoundedGainForUnboundedStabilizer,
    #[error(
        "declared bounds must satisfy 0 < gamma_min <= gamma_max (got {gamma_min}, {gamma_max})"
    )]
    InvalidGammaBounds { gamma_min: f64, gamma_max: f64 },
    #[error("state dimension {got} does not match chain length {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// A time signal produced a value outside its declared bounds.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{signal}({time}) = {value} lies outside the declared range [{lower}, {upper}]")]
pub struct BoundViolation {
    pub signal: &'static str,
    pub time: f64,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Signal(#[from] BoundViolation),
    #[error("state max-norm {norm:e} exceeded the blow-up guard {guard:e} at t = {time}; last state {state:?}")]
    BlowUp {
        time: f64,
        norm: f64,
        guard: f64,
        state: Vec<f64>,
    },
    #[error("non-finite state at t = {time}; last finite state {state:?}")]
    NonFinite { time: f64, state: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("h_m is unbounded below: gamma_min * g(x) stays at or below {sup} < 1, so (gamma_min g(x) - 1) x -> -inf")]
    UnboundedHm { sup: f64 },
    #[error("gamma_min * g(x) - 1 stays nonpositive up to x = {x_max:e}; the minimum of h_m may lie beyond the grid")]
    HmGridTooShort { x_max: f64 },
    #[error("h_m must be finite and nonpositive (got {0})")]
    InvalidHm(f64),
    #[error("sampled nominal derivative dV1/dt = {derivative:e} >= 0 at sample {index} (z = {state:?}); the decrease estimate dV1/dt <= -c V1^alpha does not hold")]
    NonDecreasing {
        index: usize,
        state: Vec<f64>,
        derivative: f64,
    },
    #[error("exponent {name} = {value} is outside [0, 1)")]
    ExponentOutOfRange { name: &'static str, value: f64 },
    #[error("V1 homogeneity degree measurements disagree (spread {spread:e})")]
    InconsistentDegree { spread: f64 },
    #[error("bound requires the constant {0}, which is unavailable")]
    MissingConstant(&'static str),
}
