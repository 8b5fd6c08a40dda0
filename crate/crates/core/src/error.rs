use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("particle label `{0}` appears on both sides of a tensor product")]
    LabelCollision(String),

    #[error("unknown particle label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate particle label `{0}`")]
    DuplicateLabel(String),

    #[error("amplitude vector has length {found}, expected {expected}")]
    AmplitudeLength { expected: usize, found: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("particle labels differ: {left:?} vs {right:?}")]
    LabelMismatch {
        left: Vec<String>,
        right: Vec<String>,
    },

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("observables `{0}` and `{1}` do not commute")]
    NonCommuting(String, String),

    #[error("cannot parse observable `{0}`")]
    ObservableParse(String),

    #[error("invalid pairing: {0}")]
    InvalidPairing(String),

    #[error("correlator {name} = {value} lies outside [-1, 1]")]
    CorrelatorOutOfRange { name: &'static str, value: f64 },

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("target state never exceeds the local realistic bound (<M> = {0} at full visibility)")]
    NoThreshold(f64),

    #[error("no trials survive post-selection")]
    EmptySelection,

    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("layout line {line}: {message}")]
    LayoutParse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
