// Copyright 2026 The rydgate Authors
// SPDX-License-Identifier: Apache-2.0

//! Registers, structural vectors, pulses and protocol families.
//!
//! A pulse couples `|0> <-> |r>` on every qubit at once; the per-qubit field
//! amplitude factors form the pulse's [`StructuralVector`]. Areas are signed
//! radians everywhere in the library; only the JSON and CSV layers speak in
//! units of pi.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO_COMPONENT: f64 = 1e-15;
/// Inputs whose norm is already this close to one are kept bit-for-bit.
const UNIT_NORM_SLACK: f64 = 4.0 * f64::EPSILON;

/// Unit-norm vector of geometrical factors, one component per qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralVector(Vec<f64>);

impl StructuralVector {
    /// Scales `components` to unit Euclidean norm, preserving signs.
    pub fn new(components: &[f64]) -> Result<Self> {
        if components.is_empty() || components.iter().all(|c| c.abs() < ZERO_COMPONENT) {
            return Err(Error::ZeroVector);
        }
        let norm = components.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() <= UNIT_NORM_SLACK {
            return Ok(Self(components.to_vec()));
        }
        Ok(Self(components.iter().map(|c| c / norm).collect()))
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// `(e1, e2) -> (-e2, e1)`: the in-plane vector whose dot with `self` is
    /// exactly zero.
    pub fn orthogonal_complement_2d(&self) -> Result<Self> {
        match self.0.as_slice() {
            &[a, b] => Ok(Self(vec![-b, a])),
            other => Err(Error::DimensionMismatch {
                expected: 2,
                got: other.len(),
            }),
        }
    }

    /// Components at the given qubit positions.
    pub fn restrict(&self, qubits: &[usize]) -> Vec<f64> {
        qubits.iter().map(|&q| self.0[q]).collect()
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for StructuralVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c:.5}")?;
        }
        write!(f, ")")
    }
}

/// `make_structural_vector` under its functional name.
pub fn make_structural_vector(components: &[f64]) -> Result<StructuralVector> {
    StructuralVector::new(components)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pulse {
    /// Signed pulse area in radians.
    pub area: f64,
    pub vector: StructuralVector,
}

impl Pulse {
    pub fn new(area: f64, vector: StructuralVector) -> Self {
        Self { area, vector }
    }

    /// Mixing angle, half the pulse area.
    pub fn theta(&self) -> f64 {
        0.5 * self.area
    }
}

/// An ordered sequence of non-overlapping resonant pulses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ProtocolJson", try_from = "ProtocolJson")]
pub struct Protocol {
    n_qubits: usize,
    pulses: Vec<Pulse>,
}

impl Protocol {
    pub fn new(n_qubits: usize, pulses: Vec<Pulse>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidProtocol(
                "register needs at least one qubit".into(),
            ));
        }
        if let Some(p) = pulses.iter().find(|p| p.vector.dim() != n_qubits) {
            return Err(Error::DimensionMismatch {
                expected: n_qubits,
                got: p.vector.dim(),
            });
        }
        if let Some(p) = pulses.iter().find(|p| !p.area.is_finite()) {
            return Err(Error::InvalidProtocol(format!(
                "non-finite area {}",
                p.area
            )));
        }
        Ok(Self { n_qubits, pulses })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn pulses(&self) -> &[Pulse] {
        &self.pulses
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    /// Sum of the areas of pulses 1, 3, 5, ...
    pub fn a_odd(&self) -> f64 {
        self.pulses.iter().step_by(2).map(|p| p.area).sum()
    }

    /// Sum of the areas of pulses 2, 4, ...
    pub fn a_even(&self) -> f64 {
        self.pulses.iter().skip(1).step_by(2).map(|p| p.area).sum()
    }

    pub fn total_area(&self) -> f64 {
        self.pulses.iter().map(|p| p.area.abs()).sum()
    }

    /// Same protocol with every structural vector sign-flipped.
    pub fn with_negated_vectors(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            pulses: self
                .pulses
                .iter()
                .map(|p| Pulse::new(p.area, p.vector.negated()))
                .collect(),
        }
    }

    pub fn with_areas(&self, areas: &[f64]) -> Result<Self> {
        if areas.len() != self.pulses.len() {
            return Err(Error::LengthMismatch {
                expected: self.pulses.len(),
                got: areas.len(),
            });
        }
        let pulses = self
            .pulses
            .iter()
            .zip(areas)
            .map(|(p, &a)| Pulse::new(a, p.vector.clone()))
            .collect();
        Self::new(self.n_qubits, pulses)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ProtocolJson::from(self)).expect("protocol serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: ProtocolJson =
            serde_json::from_str(text).map_err(|e| Error::InvalidProtocol(e.to_string()))?;
        wire.try_into()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PulseJson {
    area_over_pi: f64,
    vector: Vec<f64>,
}

/// Wire format: `{"n_qubits": 2, "pulses": [{"area_over_pi": 1.0, "vector": [1.0, 0.0]}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolJson {
    n_qubits: usize,
    pulses: Vec<PulseJson>,
}

impl From<&Protocol> for ProtocolJson {
    fn from(p: &Protocol) -> Self {
        Self {
            n_qubits: p.n_qubits,
            pulses: p
                .pulses
                .iter()
                .map(|pulse| PulseJson {
                    area_over_pi: pulse.area / PI,
                    vector: pulse.vector.components().to_vec(),
                })
                .collect(),
        }
    }
}

impl From<Protocol> for ProtocolJson {
    fn from(p: Protocol) -> Self {
        Self::from(&p)
    }
}

impl TryFrom<ProtocolJson> for Protocol {
    type Error = Error;

    fn try_from(wire: ProtocolJson) -> Result<Self> {
        let pulses = wire
            .pulses
            .iter()
            .map(|p| {
                Ok(Pulse::new(
                    p.area_over_pi * PI,
                    StructuralVector::new(&p.vector)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Protocol::new(wire.n_qubits, pulses)
    }
}

/// Computational basis state; character `i` of the label is qubit `i`
/// (qubit 0 is `a`, 1 is `b`, 2 is `c`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisState {
    n_qubits: usize,
    /// Bit `n-1-i` holds qubit `i`.
    bits: u32,
}

impl BasisState {
    pub fn from_label(label: &str) -> Result<Self> {
        let n_qubits = label.len();
        if n_qubits == 0 || n_qubits > 16 {
            return Err(Error::UnsupportedQubits(n_qubits));
        }
        let mut bits = 0u32;
        for ch in label.chars() {
            bits <<= 1;
            match ch {
                '0' => {}
                '1' => bits |= 1,
                _ => return Err(Error::InvalidProtocol(format!("bad basis label {label:?}"))),
            }
        }
        Ok(Self { n_qubits, bits })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn qubit(&self, i: usize) -> bool {
        (self.bits >> (self.n_qubits - 1 - i)) & 1 == 1
    }

    /// Qubits sitting in `|0>`, the only ones a resonant pulse can excite.
    pub fn zero_qubits(&self) -> Vec<usize> {
        (0..self.n_qubits).filter(|&i| !self.qubit(i)).collect()
    }

    pub fn label(&self) -> String {
        (0..self.n_qubits)
            .map(|i| if self.qubit(i) { '1' } else { '0' })
            .collect()
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}>", self.label())
    }
}

/// Basis ordering used for signatures and diagonal vectors.
///
/// Two qubits: `00, 01, 10, 11`. Three qubits:
/// `000, 010, 100, 001, 101, 011, 110, 111`. Larger registers fall back to
/// plain binary counting.
pub fn computational_basis(n_qubits: usize) -> Vec<BasisState> {
    let labels: Vec<String> = match n_qubits {
        3 => ["000", "010", "100", "001", "101", "011", "110", "111"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        n => (0..1u32 << n).map(|k| format!("{k:0n$b}")).collect(),
    };
    labels
        .iter()
        .map(|l| BasisState::from_label(l).expect("generated label is valid"))
        .collect()
}

/// Target diagonal phases of a C-PHASE-type gate.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSignature {
    phases: Vec<f64>,
}

impl GateSignature {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if !phases.len().is_power_of_two() || phases.len() < 2 {
            return Err(Error::SignatureMismatch {
                expected: phases.len().next_power_of_two().max(2),
                got: phases.len(),
            });
        }
        if let Some(&p) = phases.iter().find(|&&p| p != 1.0 && p != -1.0) {
            return Err(Error::InvalidPhase(p));
        }
        Ok(Self { phases })
    }

    /// `diag(-1, -1, -1, 1)` for two qubits; for three qubits the C-PHASE on
    /// `a, b` with `c` a spectator, `diag(-1, -1, -1, -1, -1, -1, 1, 1)`.
    pub fn c_phase(n_qubits: usize) -> Result<Self> {
        match n_qubits {
            2 => Self::new(vec![-1.0, -1.0, -1.0, 1.0]),
            3 => Self::new(vec![-1.0, -1.0, -1.0, -1.0, -1.0, -1.0, 1.0, 1.0]),
            n => Err(Error::UnsupportedQubits(n)),
        }
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn n_qubits(&self) -> usize {
        self.phases.len().trailing_zeros() as usize
    }
}

/// `e = (sqrt(1 - b^2), b)` and its orthogonal partner `(-b, sqrt(1 - b^2))`.
pub fn sop_pair(b: f64) -> Result<(StructuralVector, StructuralVector)> {
    let b2 = b * b;
    if !(0.0..=1.0).contains(&b2) {
        return Err(Error::InvalidB2(b2));
    }
    let odd = StructuralVector::new(&[(1.0 - b2).sqrt(), b])?;
    let even = odd.orthogonal_complement_2d()?;
    Ok((odd, even))
}

/// Three-qubit vectors: the `(a, b)` sub-vector follows [`sop_pair`] scaled by
/// `sqrt(1 - c^2)` so the full vector stays unit norm. `c_odd` and `c_even`
/// are the spectator factors of odd and even pulses.
pub fn sop_pair_with_spectator(
    b: f64,
    c_odd: f64,
    c_even: f64,
) -> Result<(StructuralVector, StructuralVector)> {
    let (odd, even) = sop_pair(b)?;
    Ok((
        attach_spectator(&odd, c_odd)?,
        attach_spectator(&even, c_even)?,
    ))
}

/// Appends a third component `c` to a 2-d unit vector, shrinking the first two
/// so the result has unit norm.
pub fn attach_spectator(e: &StructuralVector, c: f64) -> Result<StructuralVector> {
    if e.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: e.dim(),
        });
    }
    if c * c > 1.0 {
        return Err(Error::InvalidB2(c * c));
    }
    let r = (1.0 - c * c).sqrt();
    let [a, b] = [e.components()[0], e.components()[1]];
    StructuralVector::new(&[r * a, r * b, c])
}

/// Jaksch protocol on two independent qubits: pulses 1 and 3 on qubit `a`,
/// pulse 2 on qubit `b`. Default areas are `(pi, 2pi, pi)`.
pub fn build_jp_protocol(n_qubits: usize, areas: Option<[f64; 3]>) -> Result<Protocol> {
    if n_qubits != 2 {
        return Err(Error::UnsupportedQubits(n_qubits));
    }
    let [a1, a2, a3] = areas.unwrap_or([PI, 2.0 * PI, PI]);
    let ea = StructuralVector::new(&[1.0, 0.0])?;
    let eb = StructuralVector::new(&[0.0, 1.0])?;
    Protocol::new(
        2,
        vec![
            Pulse::new(a1, ea.clone()),
            Pulse::new(a2, eb),
            Pulse::new(a3, ea),
        ],
    )
}

/// Symmetric orthogonal protocol: `e1 = e3 = (sqrt(1-b^2), b)`,
/// `e2 = (-b, sqrt(1-b^2))`, `A3 = A1`.
pub fn build_sop_protocol(b: f64, areas: [f64; 3]) -> Result<Protocol> {
    let [a1, a2, a3] = areas;
    if (a1 - a3).abs() > 1e-12 * a1.abs().max(a3.abs()).max(1.0) {
        return Err(Error::AsymmetricAreas { a1, a3 });
    }
    let (odd, even) = sop_pair(b)?;
    Protocol::new(
        2,
        vec![
            Pulse::new(a1, odd.clone()),
            Pulse::new(a2, even),
            Pulse::new(a1, odd),
        ],
    )
}

/// Extended symmetric orthogonal protocol with `m` pulses alternating between
/// `e_odd` and its orthogonal complement. `areas` are the per-pulse areas of
/// odd and even pulses.
pub fn build_esop_protocol(
    m: usize,
    e_odd: &StructuralVector,
    areas: (f64, f64),
) -> Result<Protocol> {
    if m < 2 {
        return Err(Error::InvalidM(m));
    }
    let e_even = e_odd.orthogonal_complement_2d()?;
    alternating_protocol(m, e_odd, &e_even, areas)
}

/// `m` pulses alternating `(odd, even, odd, ...)` with per-pulse areas.
pub fn alternating_protocol(
    m: usize,
    e_odd: &StructuralVector,
    e_even: &StructuralVector,
    (area_odd, area_even): (f64, f64),
) -> Result<Protocol> {
    let pulses = (0..m)
        .map(|k| {
            if k % 2 == 0 {
                Pulse::new(area_odd, e_odd.clone())
            } else {
                Pulse::new(area_even, e_even.clone())
            }
        })
        .collect();
    Protocol::new(e_odd.dim(), pulses)
}

/// Number of odd- and even-indexed pulses in an `m`-pulse sequence.
pub fn pulse_counts(m: usize) -> (usize, usize) {
    (m.div_ceil(2), m / 2)
}

/// A one-parameter-per-axis family of protocols indexed by `(A_odd, A_even)`.
///
/// `A_odd` is split equally among the odd pulses and `A_even` among the even
/// ones, so the three-pulse case is `A1 = A3 = A_odd / 2`, `A2 = A_even`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolFamily {
    pub n_qubits: usize,
    /// Pulse count `M`.
    pub pulses: usize,
    /// Overlap factor `b^2` of the `(a, b)` sub-vector.
    pub b2: f64,
    /// Spectator factor `c^2` (three qubits only).
    pub c2: f64,
    /// `true`: even pulses use `(-b, a)`; `false`: `(b, a)`.
    pub orthogonal: bool,
}

impl ProtocolFamily {
    pub fn sop(b2: f64) -> Self {
        Self {
            n_qubits: 2,
            pulses: 3,
            b2,
            c2: 0.0,
            orthogonal: true,
        }
    }

    pub fn jp() -> Self {
        Self::sop(0.0)
    }

    pub fn esop(m: usize, b2: f64) -> Self {
        Self {
            pulses: m,
            ..Self::sop(b2)
        }
    }

    pub fn three_qubit(b2: f64, c2: f64) -> Self {
        Self {
            n_qubits: 3,
            pulses: 3,
            b2,
            c2,
            orthogonal: true,
        }
    }

    pub fn non_orthogonal(b2: f64) -> Self {
        Self {
            orthogonal: false,
            ..Self::sop(b2)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.b2) {
            return Err(Error::InvalidB2(self.b2));
        }
        if !(0.0..=1.0).contains(&self.c2) {
            return Err(Error::InvalidB2(self.c2));
        }
        if self.pulses < 2 {
            return Err(Error::InvalidM(self.pulses));
        }
        match self.n_qubits {
            2 if self.c2 != 0.0 => Err(Error::InvalidProtocol(
                "spectator factor c^2 needs a three-qubit register".into(),
            )),
            2 | 3 => Ok(()),
            n => Err(Error::UnsupportedQubits(n)),
        }
    }

    /// Odd and even structural vectors of the family.
    pub fn vectors(&self) -> Result<(StructuralVector, StructuralVector)> {
        self.validate()?;
        let b = self.b2.sqrt();
        let a = (1.0 - self.b2).sqrt();
        let odd = StructuralVector::new(&[a, b])?;
        let even = if self.orthogonal {
            odd.orthogonal_complement_2d()?
        } else {
            StructuralVector::new(&[b, a])?
        };
        if self.n_qubits == 3 {
            let c = self.c2.sqrt();
            Ok((attach_spectator(&odd, c)?, attach_spectator(&even, c)?))
        } else {
            Ok((odd, even))
        }
    }

    /// Protocol at total odd/even areas (radians).
    pub fn protocol(&self, a_odd: f64, a_even: f64) -> Result<Protocol> {
        let (odd, even) = self.vectors()?;
        self.protocol_with_vectors(&odd, &even, a_odd, a_even)
    }

    pub(crate) fn protocol_with_vectors(
        &self,
        odd: &StructuralVector,
        even: &StructuralVector,
        a_odd: f64,
        a_even: f64,
    ) -> Result<Protocol> {
        let (n_odd, n_even) = pulse_counts(self.pulses);
        alternating_protocol(
            self.pulses,
            odd,
            even,
            (a_odd / n_odd as f64, a_even / n_even as f64),
        )
    }

    pub fn target(&self) -> Result<GateSignature> {
        GateSignature::c_phase(self.n_qubits)
    }
}
