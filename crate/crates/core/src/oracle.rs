// Copyright 2026 The rydgate Authors
// SPDX-License-Identifier: Apache-2.0

//! Time-domain check of the analytic propagators.
//!
//! Each block is integrated from the identity under
//! `H(t) = -1/2 Omega(t) sum_i v_i (|g><r_i| + h.c.)` with explicit pulse
//! envelopes and a fixed-step fourth-order Runge-Kutta scheme. Nothing here
//! uses the closed forms.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::linalg::CMatrix;
use crate::model::{computational_basis, Protocol};
use crate::propagator::{block_for, BlockPropagator, SubsystemBlock};

/// Gaussian envelopes are cut at this many standard deviations.
const GAUSS_CUT: f64 = 4.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvelopeShape {
    /// `Omega0 sin^2(pi (t - t0) / T)`
    #[default]
    SquaredSine,
    /// Gaussian centred in the window with `sigma = T / 8`, cut at `+-4 sigma`.
    GaussianTruncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseEnvelope {
    pub shape: EnvelopeShape,
    pub start_time: f64,
    pub duration: f64,
    pub peak_rabi: f64,
}

impl PulseEnvelope {
    /// Envelope whose time integral is exactly `area`.
    pub fn for_area(shape: EnvelopeShape, start_time: f64, duration: f64, area: f64) -> Self {
        let peak_rabi = area / (duration * unit_integral(shape));
        Self {
            shape,
            start_time,
            duration,
            peak_rabi,
        }
    }

    pub fn end_time(&self) -> f64 {
        self.start_time + self.duration
    }

    pub fn rabi(&self, t: f64) -> f64 {
        if t < self.start_time || t > self.end_time() {
            return 0.0;
        }
        let x = ((t - self.start_time) / self.duration).min(1.0);
        self.peak_rabi * unit_shape(self.shape, x)
    }

    /// `int Omega dt`, analytic.
    pub fn area(&self) -> f64 {
        self.peak_rabi * self.duration * unit_integral(self.shape)
    }
}

fn unit_shape(shape: EnvelopeShape, x: f64) -> f64 {
    match shape {
        EnvelopeShape::SquaredSine => (PI * x).sin().powi(2),
        EnvelopeShape::GaussianTruncated => {
            let z = (x - 0.5) * 2.0 * GAUSS_CUT;
            (-0.5 * z * z).exp()
        }
    }
}

/// Integral of `unit_shape` over `[0, 1]`.
fn unit_integral(shape: EnvelopeShape) -> f64 {
    match shape {
        EnvelopeShape::SquaredSine => 0.5,
        EnvelopeShape::GaussianTruncated => {
            let sigma = 1.0 / (2.0 * GAUSS_CUT);
            sigma * (2.0 * PI).sqrt() * libm::erf(GAUSS_CUT / SQRT_2)
        }
    }
}

/// Back-to-back envelopes of unit duration, one per pulse.
pub fn sequence_envelopes(protocol: &Protocol, shape: EnvelopeShape) -> Vec<PulseEnvelope> {
    protocol
        .pulses()
        .iter()
        .enumerate()
        .map(|(k, p)| PulseEnvelope::for_area(shape, k as f64, 1.0, p.area))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSettings {
    pub shape: EnvelopeShape,
    /// Minimum steps per pulse.
    pub steps_per_pulse: usize,
    /// Minimum steps per `pi` of pulse area, counted at the peak Rabi
    /// frequency so sharper envelopes get finer steps.
    pub steps_per_pi: usize,
    /// Largest tolerated `max |U^dagger U - 1|`.
    pub max_drift: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            shape: EnvelopeShape::SquaredSine,
            steps_per_pulse: 400,
            steps_per_pi: 200,
            max_drift: 1e-6,
        }
    }
}

impl OracleSettings {
    /// Step that satisfies both resolution rules for every envelope.
    pub fn step_for(&self, envelopes: &[PulseEnvelope]) -> f64 {
        envelopes
            .iter()
            .map(|e| {
                // a sin^2 pulse peaks at twice its mean rate
                let peak_area = e.peak_rabi.abs() * e.duration / 2.0;
                let by_area = (self.steps_per_pi as f64 * peak_area / PI).ceil() as usize;
                e.duration / self.steps_per_pulse.max(by_area).max(1) as f64
            })
            .fold(f64::INFINITY, f64::min)
    }
}

fn check_envelopes(block: &SubsystemBlock, envelopes: &[PulseEnvelope]) -> Result<()> {
    if envelopes.len() != block.couplings.len() {
        return Err(Error::LengthMismatch {
            expected: block.couplings.len(),
            got: envelopes.len(),
        });
    }
    for w in envelopes.windows(2) {
        if w[1].start_time < w[0].end_time() {
            return Err(Error::InvalidProtocol(format!(
                "envelopes overlap: one ends at {}, the next starts at {}",
                w[0].end_time(),
                w[1].start_time
            )));
        }
    }
    if envelopes
        .iter()
        .any(|e| !(e.duration > 0.0 && e.duration.is_finite()))
    {
        return Err(Error::InvalidProtocol(
            "envelope duration must be positive".into(),
        ));
    }
    Ok(())
}

/// Coupling operator `K` with `H(t) = -1/2 Omega(t) K`.
fn coupling_matrix(v: &[f64]) -> CMatrix {
    let mut k = CMatrix::zeros(v.len() + 1);
    for (i, &vi) in v.iter().enumerate() {
        k[(0, i + 1)] = Complex64::new(vi, 0.0);
        k[(i + 1, 0)] = Complex64::new(vi, 0.0);
    }
    k
}

/// RK4 evolution of `U` through every envelope with `ceil(T / dt)` equal steps
/// per pulse. No unitarity check.
fn evolve(block: &SubsystemBlock, envelopes: &[PulseEnvelope], dt: f64) -> CMatrix {
    let mut u = CMatrix::identity(block.dim());
    for (v, env) in block.couplings.iter().zip(envelopes) {
        // dU/dt = (i/2) Omega(t) K U
        let k = coupling_matrix(v).scale(Complex64::new(0.0, 0.5));
        let steps = (env.duration / dt).ceil().max(1.0) as usize;
        let h = env.duration / steps as f64;
        let deriv = |t: f64, m: &CMatrix| (&k * m).scale(Complex64::new(env.rabi(t), 0.0));
        for s in 0..steps {
            let t = env.start_time + s as f64 * h;
            let k1 = deriv(t, &u);
            let k2 = deriv(t + h / 2.0, &u.add(&k1.scale((h / 2.0).into())));
            let k3 = deriv(t + h / 2.0, &u.add(&k2.scale((h / 2.0).into())));
            let k4 = deriv(t + h, &u.add(&k3.scale(h.into())));
            let incr = k1
                .add(&k2.scale(2.0.into()))
                .add(&k3.scale(2.0.into()))
                .add(&k4);
            u = u.add(&incr.scale((h / 6.0).into()));
        }
    }
    u
}

/// Numerically integrated block propagator.
pub fn integrate_block(
    block: &SubsystemBlock,
    envelopes: &[PulseEnvelope],
    dt: f64,
    max_drift: f64,
) -> Result<BlockPropagator> {
    check_envelopes(block, envelopes)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidProtocol(format!(
            "time step {dt} must be positive"
        )));
    }
    let matrix = evolve(block, envelopes, dt);
    let drift = matrix.unitarity_defect();
    if drift > max_drift {
        return Err(Error::StepTooLarge { drift });
    }
    Ok(BlockPropagator { matrix })
}

/// [`integrate_block`] with envelopes and step chosen by `settings`.
pub fn integrate_protocol_block(
    block: &SubsystemBlock,
    protocol: &Protocol,
    settings: &OracleSettings,
) -> Result<BlockPropagator> {
    let envelopes = sequence_envelopes(protocol, settings.shape);
    integrate_block(
        block,
        &envelopes,
        settings.step_for(&envelopes),
        settings.max_drift,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDeviation {
    pub state: String,
    pub analytic: [f64; 2],
    pub numeric: [f64; 2],
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub protocol: Protocol,
    pub settings: OracleSettings,
    pub tolerance: f64,
    pub states: Vec<StateDeviation>,
    pub max_deviation: f64,
    pub passed: bool,
}

impl ValidationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Integrates every computational state's block and compares the final
/// `U_jj` with the analytic composition. Deviations above `tolerance` are
/// flagged in the report, not returned as errors.
pub fn validate_protocol(
    protocol: &Protocol,
    tolerance: f64,
    settings: &OracleSettings,
    exec: Execution,
) -> Result<ValidationReport> {
    let basis = computational_basis(protocol.n_qubits());
    let rows = map_indexed(basis.len(), exec, |k| {
        let block = block_for(protocol, basis[k]);
        let analytic = block.propagator().ground_amplitude();
        let numeric = integrate_protocol_block(&block, protocol, settings)?.ground_amplitude();
        Ok(StateDeviation {
            state: basis[k].label(),
            analytic: [analytic.re, analytic.im],
            numeric: [numeric.re, numeric.im],
            deviation: (analytic - numeric).norm(),
        })
    });
    let states: Vec<StateDeviation> = rows.into_iter().collect::<Result<_>>()?;
    let max_deviation = states.iter().map(|s| s.deviation).fold(0.0, f64::max);
    Ok(ValidationReport {
        protocol: protocol.clone(),
        settings: *settings,
        tolerance,
        passed: max_deviation < tolerance,
        states,
        max_deviation,
    })
}
