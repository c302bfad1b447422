use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid device parameter `{0}`")]
    InvalidParameter(&'static str),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SizingError {
    #[error("cell ratio must be >= 1, got {0}")]
    CellRatio(f64),
    #[error("pull-up ratio must be >= 1, got {0}")]
    PullUpRatio(f64),
    #[error("minimum width must be positive, got {0} um")]
    MinWidth(f64),
    #[error("relative area model requires PR = 1, got {0}")]
    AreaNeedsUnitPullUp(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("node solve did not converge after {iterations} iterations (residual {residual:e} A)")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("no stable equilibrium near the requested state")]
    NoEquilibrium,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransientError {
    #[error("Newton iteration failed at t = {time:e} s")]
    NewtonFailure { time: f64 },
    #[error("bit-line did not reach the sense threshold within {stop:e} s")]
    ReadTimeout { stop: f64 },
    #[error("cell did not flip within {stop:e} s")]
    WriteFailure { stop: f64 },
    #[error("no flip at the {upper_fc} fC upper charge bracket")]
    ChargeBracket { upper_fc: f64 },
    #[error("invalid transient configuration: {0}")]
    Config(&'static str),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}
