// SPDX-License-Identifier: Apache-2.0

//! Crate-wide error type. Messages are module-qualified so CLI output points
//! at the stage that failed.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or input value is outside its documented domain.
    #[error("domain: {0}")]
    Domain(String),

    /// Cross-reference or bookkeeping violation (dangling pin, duplicate
    /// name, coverage gap, buffer cycle).
    #[error("integrity: {0}")]
    Integrity(String),

    /// Malformed input file.
    #[error("parse: {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// A cell or net has the wrong shape for the requested operation.
    #[error("shape: {0}")]
    Shape(String),

    /// No solution satisfies the balance constraint.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
