//! Error type shared by the streaming pipeline.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("space budget exceeded in {module}: {current} + {delta} > budget {budget} bytes")]
    BudgetExceeded {
        module: &'static str,
        current: usize,
        delta: usize,
        budget: usize,
    },

    #[error("meter underflow in {module}: freeing {delta} with only {current} charged")]
    MeterUnderflow {
        module: &'static str,
        current: usize,
        delta: usize,
    },

    #[error("oracle {oracle} violated the width bound: load {load} > rho {rho}")]
    WidthViolation {
        oracle: &'static str,
        load: f64,
        rho: f64,
    },

    #[error("dual certificate infeasible at edge ({u}, {v}): {lhs} < required {required}")]
    CertificateInvalid { u: u32, v: u32, lhs: f64, required: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("odd-set enumeration aborted: candidate count exceeded cap {cap} ({found} violated sets found so far)")]
    OddSetCapExceeded { cap: usize, found: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { path: path.into(), line, msg: msg.into() }
    }
}
