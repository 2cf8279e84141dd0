use thiserror::Error;

/// Errors produced by the analysis and construction routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected n = {expected}, found n = {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension n = {0} exceeds the supported maximum of {max}", max = crate::gf2::MAX_DIM)]
    DimensionTooLarge(usize),

    #[error("mask {mask:#x} has bits outside the {n}-dimensional space")]
    MaskOutOfRange { mask: u64, n: usize },

    #[error("invalid truth table: {0}")]
    InvalidTruthTable(String),

    #[error("spectrum is not Boolean-valued: scaled evaluation at x = {x:#x} is {value}, expected ±2^n")]
    NotBooleanValued { x: u32, value: i128 },

    #[error("alpha = {0:#x} is not in the Fourier support")]
    AlphaNotInSupport(u32),

    #[error("beta = {0:#x} is not in the Fourier support")]
    BetaNotInSupport(u32),

    #[error("alpha and beta must be distinct characters")]
    IdenticalCharacters,

    #[error("constraint system is inconsistent (some combination reads 0 = 1)")]
    InconsistentConstraints,

    #[error("sparsity k = {k} is too small (need k > 4)")]
    SparsityTooSmall { k: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "resample cap exceeded at sparsity {sparsity}: best batch {best_batch:?} \
         leaves {best_buckets} buckets"
    )]
    ResampleCapExceeded {
        sparsity: usize,
        best_batch: Vec<u32>,
        best_buckets: usize,
    },

    #[error("degenerate input: empty spectrum")]
    DegenerateInput,

    #[error("function is not ({delta}, {ell})-folding: maximal delta at this ell is {actual}")]
    NotFolding { delta: f64, ell: f64, actual: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(#[from] toml::de::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
