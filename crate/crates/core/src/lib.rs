// Copyright 2026 The rydgate Authors
// SPDX-License-Identifier: Apache-2.0

//! Two- and three-qubit C-PHASE gates on blockaded Rydberg atoms driven by
//! spatially structured resonant pulses.
//!
//! * [`model`]: structural vectors, pulses, protocols and protocol families.
//! * [`propagator`]: exact block propagators and closed-form amplitudes.
//! * [`fidelity`]: gate fidelity, area maps, lattice geometry and scans.
//! * [`optimize`]: bounded Nelder-Mead with multistart, geometrical-factor
//!   studies.
//! * [`oracle`]: fixed-step time integration with explicit envelopes, used to
//!   check every analytic result.
//!
//! Grid sweeps and optimizer restarts run on rayon when the default
//! `parallel` feature is enabled; [`Execution::Sequential`] forces a single
//! thread and gives bit-identical results.

pub mod error;
pub mod exec;
pub mod fidelity;
pub mod linalg;
pub mod model;
pub mod optimize;
pub mod oracle;
pub mod propagator;

pub use error::{Error, Result};
pub use exec::Execution;
pub use fidelity::{gate_fidelity, FidelityDefinition, FidelityMap, Grid, LatticeReport};
pub use model::{GateSignature, Protocol, ProtocolFamily, Pulse, StructuralVector};
