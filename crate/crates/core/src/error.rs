use thiserror::Error;

use crate::accel::LimitEstimate;
use crate::exprlang::ParseDiagnostic;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("parse error: {0}")]
    Parse(ParseDiagnostic),
    #[error(
        "no convergence after {} terms (error estimate {})",
        .best.terms_used,
        .best.error_estimate.to_decimal(3)
    )]
    NonConvergence { best: Box<LimitEstimate> },
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("oracle range exceeded: {0}")]
    OracleRange(String),
    #[error("invalid spec: {0}")]
    Spec(String),
    #[error("routes disagree for {what}: only {digits} digits")]
    RouteMismatch { what: String, digits: i64 },
    #[error("range error: {0}")]
    Range(String),
    #[error("{inner} (at {start}..{end})")]
    AtSpan {
        start: usize,
        end: usize,
        inner: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
