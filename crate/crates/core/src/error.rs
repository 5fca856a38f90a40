use alloc::string::String;

/// Errors raised by the Fock-space, quadrature, symbol and propagator layers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid mode configuration: {0}")]
    InvalidConfig(String),

    #[error("basis dimension {dimension} exceeds the hard limit {limit}")]
    DimensionOverflow { dimension: usize, limit: usize },

    #[error("mode index {index} out of range for {modes} mode(s)")]
    InvalidMode { index: usize, modes: usize },

    #[error("Hermite order {order} exceeds the cutoff {cutoff}")]
    OrderExceedsCutoff { order: usize, cutoff: usize },

    #[error("coherent amplitude with |alpha|^2 = {norm_sq} lies outside the safe radius^2 {limit}")]
    OutsideSafeRadius { norm_sq: f64, limit: f64 },

    #[error("operands were built on different mode configurations")]
    ConfigMismatch,

    #[error("invalid quadrature spec: {0}")]
    InvalidQuadrature(String),

    #[error("non-finite integrand value at node {node}")]
    NonFinite { node: usize },

    #[error(
        "quadrature too coarse: identity defect {defect:e}; need radial order >= {required_radial} and angular order >= {required_angular}"
    )]
    QuadratureInsufficient {
        defect: f64,
        required_radial: usize,
        required_angular: usize,
    },

    #[error("symbol degree {degree} exceeds the padding capacity {pad}")]
    DegreeExceedsPad { degree: usize, pad: usize },

    #[error("operator is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("symbol is not real-valued")]
    NotReal,

    #[error("symbol has {found} mode(s), expected {expected}")]
    ModeCountMismatch { expected: usize, found: usize },

    #[error("derivative of order {order} is not available for this symbol")]
    MissingDerivative { order: usize },

    #[error("symbol is not elliptic on the sampled region")]
    NotElliptic,

    #[error("|A| = {value:e} below the parametrix floor {floor:e}")]
    BelowFloor { value: f64, floor: f64 },

    #[error("infeasible request: {0}")]
    Infeasible(String),

    #[error("invalid evolution job: {0}")]
    InvalidJob(String),

    #[error("rate fit needs at least 3 slice counts, got {0}")]
    TooFewPoints(usize),

    #[error("mixing matrix is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
}

impl Error {
    /// True for guards that signal a request too large to run at desk scale.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::DimensionOverflow { .. } | Error::Infeasible(_))
    }
}

pub type Result<T> = core::result::Result<T, Error>;
