use thiserror::Error;

/// Rejected model parameters.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid model parameter `{field}`: {reason}")]
pub struct SpecError {
    pub field: &'static str,
    pub reason: String,
}

impl SpecError {
    pub fn new(field: &'static str, reason: impl Into<String>) -> Self {
        SpecError { field, reason: reason.into() }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("quadrature did not converge: estimated error {achieved:.3e} exceeds tolerance {requested:.3e}")]
    NotConverged { achieved: f64, requested: f64 },
    #[error("integrand diverges: {0}")]
    Divergent(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("basis dimension {dim} exceeds the limit {limit}")]
    DimensionLimit { dim: usize, limit: usize },
    #[error("operator built for dimension {expected} applied to dimension {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("trace drifted by {drift:.3e} at t = {t_fs} fs")]
    TraceDrift { t_fs: f64, drift: f64 },
    #[error("density matrix lost positivity at t = {t_fs} fs: min eigenvalue {min_eigenvalue:.3e}")]
    Negativity { t_fs: f64, min_eigenvalue: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("gate {gate} cannot be routed: {reason}")]
    Unroutable { gate: String, reason: String },
    #[error("layout has {physical} physical qubits but the circuit needs {logical}")]
    LayoutTooSmall { physical: usize, logical: usize },
    #[error("no duration entry for gate kind {0}")]
    MissingDuration(String),
    #[error("gates in layer {layer} overlap on qubit {qubit}")]
    OverlappingGates { layer: usize, qubit: usize },
    #[error("malformed circuit text at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmulatorError {
    #[error("{backend} backend supports at most {limit} qubits, circuit has {qubits}")]
    TooManyQubits { backend: &'static str, qubits: usize, limit: usize },
    #[error("invalid noise model: {0}")]
    InvalidNoise(String),
    #[error("Kraus set for {channel} violates completeness by {defect:.3e}")]
    NotTracePreserving { channel: String, defect: f64 },
    #[error("gate {0} is not supported by the block-sparse backend")]
    UnsupportedGate(String),
    #[error("malformed calibration table at line {line}: {reason}")]
    Calibration { line: usize, reason: String },
    #[error("malformed shot table at line {line}: {reason}")]
    ShotTable { line: usize, reason: String },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("fit needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("non-positive value {value} at index {index} cannot be log-transformed")]
    NonPositive { index: usize, value: f64 },
    #[error("fit did not converge (best residual {best_residual:.3e}, tau {best_tau:.3})")]
    NotConverged { best_residual: f64, best_tau: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("requested time {requested} fs lies outside the series range [{start}, {end}] fs")]
    OutOfRange { requested: f64, start: f64, end: f64 },
    #[error("series have different site counts ({0} vs {1})")]
    SiteMismatch(usize, usize),
    #[error("series is empty")]
    Empty,
    #[error("malformed series text at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("gamma grid needs at least {needed} points spanning a decade")]
    GammaGrid { needed: usize },
}

/// Any failure raised while running an engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Emulator(#[from] EmulatorError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

impl EngineError {
    /// True for aborts caused by the numerical sanity checks.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            EngineError::Oracle(OracleError::TraceDrift { .. } | OracleError::Negativity { .. })
                | EngineError::Emulator(EmulatorError::NotTracePreserving { .. })
        )
    }
}
