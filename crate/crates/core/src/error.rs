use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("label {label} is not valid for the layout: {reason}")]
    InvalidLabel { label: String, reason: String },

    #[error("cannot build a state from an empty term list")]
    EmptyState,

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("register `{register}` is not a {expected} register")]
    WrongRegisterKind { register: String, expected: &'static str },

    #[error("gate is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("unknown register `{0}`")]
    UnknownRegister(String),

    #[error("shift moves register `{register}` to {value}, outside [-{bound}, {bound}]")]
    OutOfBounds { register: String, value: i64, bound: i32 },

    #[error("shift rule on `{register}` is not total: {reason}")]
    IncompleteRule { register: String, reason: String },

    #[error("payload shape mismatch: expected {expected} amplitudes, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("payload vector is not normalized (norm^2 = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("malformed projector `{name}`: {reason}")]
    MalformedProjector { name: String, reason: String },

    #[error("no correction for position outcome `{position}` and coin outcome `{coin}`")]
    MissingCorrection { position: String, coin: String },

    #[error("no Pauli string restores outcome ({position}, {coin}); best fidelity {best}")]
    NoPauliCorrection { position: String, coin: String, best: f64 },

    #[error("dense dimension {dimension} exceeds the cap {cap}")]
    DimensionOverflow { dimension: u128, cap: usize },

    #[error("basis mapping incomplete: {0}")]
    MappingIncomplete(String),

    #[error("unknown protocol `{0}`")]
    UnknownProtocol(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
