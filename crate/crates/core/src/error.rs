// Copyright 2026 The rydgate Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by model construction, propagation, sweeps and optimization.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("structural vector has no component above 1e-15 in magnitude")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("symmetric protocol requires A3 == A1 (got {a1} and {a3})")]
    AsymmetricAreas { a1: f64, a3: f64 },
    #[error("invalid pulse count {0}: at least 2 pulses are required")]
    InvalidM(usize),
    #[error("no closed form for M = {0} (supported: 2..=5)")]
    UnsupportedM(usize),
    #[error("coupling has no dark subspace (dimension {0} < 2)")]
    NoDarkSubspace(usize),
    #[error("coupling vector has zero norm")]
    ZeroCoupling,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("vector ({a}, {b}) is not normalized")]
    NotNormalized { a: f64, b: f64 },
    #[error("gate signature has {got} entries, register needs {expected}")]
    SignatureMismatch { expected: usize, got: usize },
    #[error("gate signature entries must be +1 or -1 (got {0})")]
    InvalidPhase(f64),
    #[error("b^2 = {0} outside [0, 1]")]
    InvalidB2(f64),
    #[error("grid is empty: {0}")]
    EmptyGrid(String),
    #[error("threshold {0} outside (0, 1)")]
    InvalidThreshold(f64),
    #[error("no maxima at or above the threshold")]
    NoMaximaFound,
    #[error("no feasible initial simplex: {0}")]
    InfeasibleStart(String),
    #[error("time step too large: unitarity drift {drift:.3e} exceeds 1e-6")]
    StepTooLarge { drift: f64 },
    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),
    #[error("unsupported register size {0}")]
    UnsupportedQubits(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
