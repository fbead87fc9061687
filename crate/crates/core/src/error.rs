use thiserror::Error;

use crate::bd::GammaId;
use crate::weights::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(ValidationReport),

    #[error("no feasible weight tail for n={n}, r={r}, b1={b1}: {reason}")]
    Infeasible { n: usize, r: f64, b1: f64, reason: String },

    #[error("support of size {size} exceeds the oracle cap {cap}")]
    SupportTooLarge { size: usize, cap: usize },

    #[error("construction of size {size} exceeds cap {cap}")]
    SizeCap { size: usize, cap: usize },

    #[error("malformed functional: {0}")]
    MalformedFunctional(String),

    #[error("functional is not proper: {0}")]
    NotProper(String),

    #[error("stage {requested} not built (registry has {built} stages)")]
    StageNotBuilt { requested: usize, built: usize },

    #[error("stage mismatch: expected {expected}, got {got}")]
    StageMismatch { expected: usize, got: usize },

    #[error("stage {stage} would hold {size} nodes, above the cap {cap}")]
    StageTooLarge { stage: usize, size: usize, cap: usize },

    #[error("unknown gamma reference {0}")]
    UnknownGamma(GammaId),

    #[error("invalid gamma node: {0}")]
    InvalidGamma(String),

    #[error("bad interval ({p}, {q}] at stage {m}")]
    BadInterval { p: usize, q: usize, m: usize },

    #[error("no materialized node of rank in [{lo}, {hi}]")]
    EmptyWindow { lo: usize, hi: usize },

    #[error("rank window infeasible: {0}")]
    WindowInfeasible(String),

    #[error("block supply exhausted while building block {block}: needed norm > {target}, reached {reached}")]
    SupplyExhausted { block: usize, target: f64, reached: f64 },

    #[error("M estimate unavailable; run estimate_M first")]
    MissingMEstimate,

    #[error("expected {expected} coefficients, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
