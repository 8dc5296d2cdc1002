// Copyright 2026 The rydgate Authors
// SPDX-License-Identifier: Apache-2.0

//! One-dimensional scans: area errors and overlap factor.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{FidelityDefinition, FidelityEvaluator};
use crate::error::Result;
use crate::model::{build_sop_protocol, computational_basis, BasisState, Protocol, ProtocolFamily};
use crate::propagator::sequence_amplitude;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsystemCurve {
    /// Basis label of the starting state, e.g. `"00"`.
    pub state: String,
    /// Real part of `<j|U|j>` per scan point.
    pub amplitude: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessScan {
    /// Area error `dA` applied to odd pulses (even pulses get `2 dA`).
    pub delta: Vec<f64>,
    pub curves: Vec<SubsystemCurve>,
}

impl RobustnessScan {
    pub fn curve(&self, label: &str) -> Option<&SubsystemCurve> {
        self.curves.iter().find(|c| c.state == label)
    }
}

/// Final amplitude of each non-trivial starting state when odd pulses are
/// off by `dA` and even pulses by `2 dA`.
pub fn robustness_scan(protocol: &Protocol, deltas: &[f64]) -> Result<RobustnessScan> {
    let states: Vec<BasisState> = computational_basis(protocol.n_qubits())
        .into_iter()
        .filter(|s| !s.zero_qubits().is_empty())
        .collect();
    let mut curves: Vec<SubsystemCurve> = states
        .iter()
        .map(|s| SubsystemCurve {
            state: s.label(),
            amplitude: Vec::with_capacity(deltas.len()),
        })
        .collect();
    for &d in deltas {
        let areas: Vec<f64> = protocol
            .pulses()
            .iter()
            .enumerate()
            .map(|(k, p)| p.area + if k % 2 == 0 { d } else { 2.0 * d })
            .collect();
        let shifted = protocol.with_areas(&areas)?;
        for (curve, &s) in curves.iter_mut().zip(&states) {
            curve.amplitude.push(sequence_amplitude(&shifted, s).re);
        }
    }
    Ok(RobustnessScan {
        delta: deltas.to_vec(),
        curves,
    })
}

/// Least-squares slope of `log|U_V + 1|` against `log delta` for the
/// symmetric orthogonal protocol at overlap `b`, with mixing-angle errors
/// `theta1 = pi/2 + delta`, `theta2 = pi + 2 delta`. The amplitude comes from
/// the exact block product.
pub fn quartic_slope(b: f64, deltas: &[f64]) -> Result<f64> {
    let zero = BasisState::from_label("00")?;
    let mut xs = Vec::with_capacity(deltas.len());
    let mut ys = Vec::with_capacity(deltas.len());
    for &d in deltas {
        let t1 = PI / 2.0 + d;
        let t2 = PI + 2.0 * d;
        let p = build_sop_protocol(b, [2.0 * t1, 2.0 * t2, 2.0 * t1])?;
        let u = sequence_amplitude(&p, zero).re;
        xs.push(d.ln());
        ys.push((u + 1.0).abs().ln());
    }
    Ok(fit_slope(&xs, &ys))
}

fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BScan {
    pub a_odd: f64,
    pub a_even: f64,
    pub orthogonal: bool,
    pub b2: Vec<f64>,
    pub fidelity: Vec<f64>,
}

/// Fidelity against `b^2` at fixed total areas (radians). `orthogonal`
/// selects `e2 = (-b, a)` over `e2 = (b, a)`.
pub fn b_scan(
    area_pair: (f64, f64),
    b2_grid: &[f64],
    orthogonal: bool,
    definition: FidelityDefinition,
) -> Result<BScan> {
    let (a_odd, a_even) = area_pair;
    let mut fidelity = Vec::with_capacity(b2_grid.len());
    for &b2 in b2_grid {
        let fam = ProtocolFamily {
            orthogonal,
            ..ProtocolFamily::sop(b2)
        };
        let eval = FidelityEvaluator::new(&fam.target()?, definition);
        fidelity.push(eval.evaluate(&fam.protocol(a_odd, a_even)?)?);
    }
    Ok(BScan {
        a_odd,
        a_even,
        orthogonal,
        b2: b2_grid.to_vec(),
        fidelity,
    })
}
