// Copyright 2026 The gateforge Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("operator is not Hermitian (max |A - A†| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (max |U†U - 1| = {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("invalid Pauli label {0:?}")]
    InvalidLabel(String),

    #[error("non-finite coefficient {0}")]
    NonFiniteCoefficient(f64),

    #[error("unknown basis family {0:?}")]
    UnknownFamily(String),

    #[error("unknown gate {0:?}")]
    UnknownGate(String),

    #[error("unknown builtin solution {0:?}")]
    UnknownSolution(String),

    #[error("basis is empty")]
    EmptyBasis,

    #[error("basis elements are linearly dependent (rank {rank} < {len})")]
    LinearlyDependent { rank: usize, len: usize },

    #[error("basis does not commute with the principal generator (max |[O, H_G]| = {deviation:e})")]
    NonCommuting { deviation: f64 },

    #[error("invalid ν assignment {nu:?}: {reason}")]
    InvalidAssignment { nu: [i64; 4], reason: String },

    #[error("scan box too large: {0} assignments")]
    ScanTooLarge(u128),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("chain is not mirror-symmetric (max |[H_W, Ξ]| = {deviation:e})")]
    NotMirrorSymmetric { deviation: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
