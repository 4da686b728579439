use crate::signature::SignatureRecord;

/// Errors produced by every layer of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("input sequence is empty")]
    EmptyInput,

    #[error("exponent tuple needs at least 3 entries, got {got}")]
    TupleTooShort { got: usize },

    #[error("exponent {value} at position {index} is below the minimum of 2")]
    ExponentTooSmall { index: usize, value: u64 },

    #[error("tuple entries must be non-decreasing (position {index})")]
    NotSorted { index: usize },

    #[error("homotopy-sphere criterion requires m > 3, got m = {m}")]
    SphereArity { m: usize },

    #[error("bP order formula requires k >= 2, got k = {k}")]
    BpOrderDomain { k: u32 },

    #[error("search bounds require m >= 4, got m = {m}")]
    BoundsDomain { m: usize },

    #[error("invalid search range: {reason}")]
    InvalidRange { reason: String },

    #[error("signature formulas require odd m, got m = {m}")]
    EvenArity { m: usize },

    #[error("lattice enumeration needs {required} points, over the cap of {cap}")]
    NaiveCapExceeded { required: u128, cap: u128 },

    #[error(
        "histogram needs {required} bytes, over the cap of {cap}; try the zagier method"
    )]
    HistogramCapExceeded { required: u128, cap: u128 },

    #[error("common multiple {n} does not cover every exponent of the tuple")]
    NotCommonMultiple { n: u64 },

    #[error("common multiple of the tuple overflows the supported 2^62 term range")]
    MultipleTooLarge,

    #[error("precision insufficient: residual {residual} at the highest precision level")]
    PrecisionInsufficient { residual: f64 },

    #[error("signature {tau} is not divisible by 8; not a valid homotopy-sphere record")]
    TauNotDivisible { tau: i128 },

    #[error("class residue requires odd m >= 5, got m = {m}")]
    ClassArity { m: usize },

    #[error("bP order for k = {k} exceeds the supported class range")]
    OrderOverflow { k: u32 },

    #[error(
        "method disagreement on {tuple}: {a} gives tau = {tau_a}, {b} gives tau = {tau_b}"
    )]
    CrossCheckMismatch {
        tuple: String,
        a: &'static str,
        tau_a: i128,
        b: &'static str,
        tau_b: i128,
        records: Box<(SignatureRecord, SignatureRecord)>,
    },

    #[error("no exact evaluator is applicable under the configured caps")]
    NoExactMethod,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("checkpoint does not match the input file (digest mismatch)")]
    CheckpointMismatch,

    #[error("checkpoint is malformed: {msg}")]
    CheckpointFormat { msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors that signal an inconsistency between two computations
    /// rather than bad input, matching exit status 2 of the CLI.
    pub fn is_integrity(&self) -> bool {
        matches!(
            self,
            Error::TauNotDivisible { .. } | Error::CrossCheckMismatch { .. }
        )
    }
}
