use thiserror::Error;

/// Errors raised across the simulation, estimation and resource layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} qubits, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("two-qubit gate needs distinct targets, got {0} twice")]
    DuplicateTarget(usize),
    #[error("level mismatch: {0} vs {1}")]
    LevelMismatch(u32, u32),
    #[error("invalid probability {name} = {value}")]
    InvalidProbability { name: String, value: f64 },
    #[error("invalid noise model: {0}")]
    InvalidNoiseModel(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("above threshold: p_q0 = {0} is not below 1/21")]
    AboveThreshold(f64),
    #[error("unknown gadget `{0}`")]
    UnknownGadget(String),
    #[error("unsupported level {level} for gadget `{gadget}`: {reason}")]
    UnsupportedLevel {
        gadget: String,
        level: u32,
        reason: String,
    },
    #[error("blueprint parse error at line {line}: {message}")]
    BlueprintParse { line: usize, message: String },
    #[error("blueprint `{name}` violates invariant: {message}")]
    BlueprintLint { name: String, message: String },
    #[error("invalid trial plan: {0}")]
    InvalidPlan(String),
    #[error("no crossing in range [{lo}, {hi}]")]
    NoCrossing { lo: f64, hi: f64 },
    #[error("missing success probability for {alpha} at level {level}")]
    MissingSuccess { alpha: String, level: u32 },
    #[error("incomplete resource vector at level {0}")]
    IncompleteResources(u32),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
