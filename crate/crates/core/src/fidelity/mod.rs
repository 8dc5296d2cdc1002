// Copyright 2026 The rydgate Authors
// SPDX-License-Identifier: Apache-2.0

//! Gate fidelity and the landscapes built from it.

mod lattice;
mod map;
mod scan;

pub use lattice::{lattice_analysis, local_maxima, LatticeReport, Maximum};
pub use map::{fidelity_map, format_sig, FidelityMap, Grid, MapMeta};
pub use scan::{b_scan, quartic_slope, robustness_scan, BScan, RobustnessScan, SubsystemCurve};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{computational_basis, GateSignature, Protocol};
use crate::propagator::sequence_amplitude;

/// How the diagonal `U` is scored against the signature `T` (`d = 2^n`).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum FidelityDefinition {
    /// `|Tr(T^dagger U) / d|^2`
    #[default]
    #[serde(rename = "trace-sq")]
    TraceSquared,
    /// `|Tr(T^dagger U)| / d`
    #[serde(rename = "trace")]
    Trace,
    /// `(|Tr M|^2 + Tr M^dagger M) / (d^2 + d)` with `M = T^dagger U`
    #[serde(rename = "average")]
    Average,
}

impl FidelityDefinition {
    pub fn name(&self) -> &'static str {
        match self {
            Self::TraceSquared => "trace-sq",
            Self::Trace => "trace",
            Self::Average => "average",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "trace-sq" => Some(Self::TraceSquared),
            "trace" => Some(Self::Trace),
            "average" => Some(Self::Average),
            _ => None,
        }
    }

    pub fn score(&self, target: &[f64], diagonal: &[Complex64]) -> f64 {
        let d = target.len() as f64;
        let tr: Complex64 = target.iter().zip(diagonal).map(|(t, u)| u * *t).sum();
        match self {
            Self::TraceSquared => (tr / d).norm_sqr(),
            Self::Trace => tr.norm() / d,
            Self::Average => {
                let frob: f64 = diagonal.iter().map(|u| u.norm_sqr()).sum();
                (tr.norm_sqr() + frob) / (d * d + d)
            }
        }
    }
}

/// Reusable scorer for one register size and target; avoids rebuilding the
/// basis on every call in sweeps.
#[derive(Debug, Clone)]
pub struct FidelityEvaluator {
    basis: Vec<crate::model::BasisState>,
    target: Vec<f64>,
    definition: FidelityDefinition,
}

impl FidelityEvaluator {
    pub fn new(target: &GateSignature, definition: FidelityDefinition) -> Self {
        Self {
            basis: computational_basis(target.n_qubits()),
            target: target.phases().to_vec(),
            definition,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.target.len().trailing_zeros() as usize
    }

    pub fn diagonal(&self, protocol: &Protocol) -> Vec<Complex64> {
        self.basis
            .iter()
            .map(|&s| sequence_amplitude(protocol, s))
            .collect()
    }

    pub fn evaluate(&self, protocol: &Protocol) -> Result<f64> {
        if protocol.n_qubits() != self.n_qubits() {
            return Err(Error::SignatureMismatch {
                expected: 1 << protocol.n_qubits(),
                got: self.target.len(),
            });
        }
        Ok(self
            .definition
            .score(&self.target, &self.diagonal(protocol)))
    }
}

/// `|Tr(T^dagger U) / d|^2` over the computational diagonal.
pub fn gate_fidelity(protocol: &Protocol, target: &GateSignature) -> Result<f64> {
    gate_fidelity_with(protocol, target, FidelityDefinition::TraceSquared)
}

pub fn gate_fidelity_with(
    protocol: &Protocol,
    target: &GateSignature,
    definition: FidelityDefinition,
) -> Result<f64> {
    FidelityEvaluator::new(target, definition).evaluate(protocol)
}
