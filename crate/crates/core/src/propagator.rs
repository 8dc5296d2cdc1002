// Copyright 2026 The rydgate Authors
// SPDX-License-Identifier: Apache-2.0

//! Exact propagators of the blockade-restricted subsystems.
//!
//! Under perfect blockade a computational state `|j>` only couples to the
//! singly excited states obtained by promoting one of its `|0>` qubits to
//! `|r>`. Each block is therefore a star: one ground state `g` tied to
//! `r_1 .. r_n` with real couplings `v_i`. With `s = |v|` and the bright state
//! `|B> = sum_i (v_i / s) |r_i>`, a resonant pulse of mixing angle `theta`
//! rotates `(g, B)` by `s * theta` and leaves the dark complement untouched:
//!
//! ```text
//! U_gg      = cos(s theta)
//! U_g,ri    = U_ri,g = i (v_i / s) sin(s theta)
//! U_ri,rj   = delta_ij + (v_i v_j / s^2) (cos(s theta) - 1)
//! ```
//!
//! The three-level V block and the two-level blocks are special cases.

use num_complex::Complex64;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::model::{computational_basis, BasisState, Protocol, StructuralVector};

type StateVec = SmallVec<[Complex64; 8]>;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Unitary of one block, over the basis `{g, r_1, ..., r_n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPropagator {
    pub matrix: CMatrix,
}

impl BlockPropagator {
    pub fn ground_amplitude(&self) -> Complex64 {
        self.matrix[(0, 0)]
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.matrix.unitarity_defect()
    }

    /// `self` applied after `earlier`.
    pub fn then_after(&self, earlier: &BlockPropagator) -> BlockPropagator {
        BlockPropagator {
            matrix: &self.matrix * &earlier.matrix,
        }
    }
}

/// The subsystem reachable from one computational basis state.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsystemBlock {
    pub initial_state: BasisState,
    /// Qubits in `|0>`; block row `i + 1` is the state with qubit
    /// `zero_qubits[i]` promoted to `|r>`.
    pub zero_qubits: Vec<usize>,
    /// Per pulse: the structural vector restricted to `zero_qubits`.
    pub couplings: Vec<Vec<f64>>,
    /// Per pulse mixing angle.
    pub thetas: Vec<f64>,
}

impl SubsystemBlock {
    pub fn dim(&self) -> usize {
        self.zero_qubits.len() + 1
    }

    pub fn labels(&self) -> Vec<String> {
        let base = self.initial_state.label();
        let mut out = vec![base.clone()];
        for &q in &self.zero_qubits {
            let mut chars: Vec<char> = base.chars().collect();
            chars[q] = 'r';
            out.push(chars.into_iter().collect());
        }
        out
    }

    /// Composition of all pulses in order.
    pub fn propagator(&self) -> BlockPropagator {
        let mut acc = BlockPropagator {
            matrix: CMatrix::identity(self.dim()),
        };
        for (v, &th) in self.couplings.iter().zip(&self.thetas) {
            acc = star_propagator(v, th).then_after(&acc);
        }
        acc
    }
}

/// Propagator of a single resonant pulse on a star block with couplings `v`.
/// Zero coupling gives the identity.
pub fn star_propagator(v: &[f64], theta: f64) -> BlockPropagator {
    let n = v.len();
    let mut m = CMatrix::identity(n + 1);
    let s = norm(v);
    if s == 0.0 {
        return BlockPropagator { matrix: m };
    }
    let (sin, cos) = (s * theta).sin_cos();
    m[(0, 0)] = Complex64::new(cos, 0.0);
    for i in 0..n {
        let ui = v[i] / s;
        m[(0, i + 1)] = I * (ui * sin);
        m[(i + 1, 0)] = I * (ui * sin);
        for j in 0..n {
            let uj = v[j] / s;
            let delta = if i == j { 1.0 } else { 0.0 };
            m[(i + 1, j + 1)] = Complex64::new(delta + ui * uj * (cos - 1.0), 0.0);
        }
    }
    BlockPropagator { matrix: m }
}

/// Applies [`star_propagator`] to a block state in place without forming the
/// matrix.
fn apply_star(v: &[f64], theta: f64, psi: &mut [Complex64]) {
    let s = norm(v);
    if s == 0.0 {
        return;
    }
    let (sin, cos) = (s * theta).sin_cos();
    let bright: Complex64 = v.iter().zip(&psi[1..]).map(|(vi, x)| x * (vi / s)).sum();
    let g = psi[0];
    psi[0] = g * cos + I * bright * sin;
    let kick = I * g * sin + bright * (cos - 1.0);
    for (vi, x) in v.iter().zip(psi[1..].iter_mut()) {
        *x += kick * (vi / s);
    }
}

fn norm(v: &[f64]) -> f64 {
    match v {
        [x] => x.abs(),
        _ => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
    }
}

/// Orthonormal basis of the dark subspace of couplings `v`, in Rydberg
/// coordinates `(r_1, ..., r_n)`.
///
/// For two components this is the single vector `(-v_2, v_1) / |v|`.
pub fn dark_state(v: &[f64]) -> Result<Vec<Vec<Complex64>>> {
    let n = v.len();
    if n < 2 {
        return Err(Error::NoDarkSubspace(n));
    }
    let s = norm(v);
    if s == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    let u: Vec<f64> = v.iter().map(|x| x / s).collect();
    if n == 2 {
        return Ok(vec![vec![
            Complex64::new(-u[1], 0.0),
            Complex64::new(u[0], 0.0),
        ]]);
    }
    // Gram-Schmidt over the canonical axes, seeded with the bright direction.
    let mut basis: Vec<Vec<f64>> = vec![u];
    for k in 0..n {
        if basis.len() == n {
            break;
        }
        let mut w = vec![0.0; n];
        w[k] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let proj: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
            }
        }
        let len = norm(&w);
        if len > 1e-8 {
            basis.push(w.iter().map(|x| x / len).collect());
        }
    }
    Ok(basis
        .into_iter()
        .skip(1)
        .map(|d| d.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
        .collect())
}

/// Splits a protocol into one star block per computational basis state, in
/// [`computational_basis`] order.
pub fn block_decompose(protocol: &Protocol) -> Vec<SubsystemBlock> {
    computational_basis(protocol.n_qubits())
        .into_iter()
        .map(|state| block_for(protocol, state))
        .collect()
}

pub fn block_for(protocol: &Protocol, state: BasisState) -> SubsystemBlock {
    let zero_qubits = state.zero_qubits();
    let couplings = protocol
        .pulses()
        .iter()
        .map(|p| p.vector.restrict(&zero_qubits))
        .collect();
    let thetas = protocol.pulses().iter().map(|p| p.theta()).collect();
    SubsystemBlock {
        initial_state: state,
        zero_qubits,
        couplings,
        thetas,
    }
}

/// `<j| U_M ... U_1 |j>` for the block of `state`.
pub fn sequence_amplitude(protocol: &Protocol, state: BasisState) -> Complex64 {
    debug_assert_eq!(state.n_qubits(), protocol.n_qubits());
    let zeros = state.zero_qubits();
    if zeros.is_empty() {
        return Complex64::new(1.0, 0.0);
    }
    let mut psi: StateVec = SmallVec::from_elem(Complex64::new(0.0, 0.0), zeros.len() + 1);
    psi[0] = Complex64::new(1.0, 0.0);
    let mut v: SmallVec<[f64; 8]> = SmallVec::with_capacity(zeros.len());
    for pulse in protocol.pulses() {
        v.clear();
        v.extend(zeros.iter().map(|&q| pulse.vector.components()[q]));
        apply_star(&v, pulse.theta(), &mut psi);
    }
    psi[0]
}

/// Diagonal of the computational-space propagator, in basis order.
pub fn diagonal(protocol: &Protocol) -> Vec<Complex64> {
    computational_basis(protocol.n_qubits())
        .into_iter()
        .map(|s| sequence_amplitude(protocol, s))
        .collect()
}

/// Closed-form ground amplitude of a general three-pulse sequence:
///
/// ```text
/// c3 c2 c1 - (e2.e1) c3 s2 s1 - (e3.e2) s3 s2 c1
///   - (e3.e2)(e2.e1) s3 c2 s1 - [e3.e1 - (e3.e2)(e2.e1)] s3 s1
/// ```
pub fn u11v_threepulse(e: [&StructuralVector; 3], theta: [f64; 3]) -> Result<f64> {
    let dim = e[0].dim();
    if let Some(bad) = e.iter().find(|v| v.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: bad.dim(),
        });
    }
    let [(s1, c1), (s2, c2), (s3, c3)] = theta.map(f64::sin_cos);
    let e21 = e[1].dot(e[0]);
    let e32 = e[2].dot(e[1]);
    let e31 = e[2].dot(e[0]);
    Ok(c3 * c2 * c1
        - e21 * c3 * s2 * s1
        - e32 * s3 * s2 * c1
        - e32 * e21 * s3 * c2 * s1
        - (e31 - e32 * e21) * s3 * s1)
}

/// Symmetric orthogonal three-pulse form `cos^2(t1) cos(t2) - sin^2(t1)`.
pub fn u11v_sop(theta1: f64, theta2: f64) -> f64 {
    let (s1, c1) = theta1.sin_cos();
    c1 * c1 * theta2.cos() - s1 * s1
}

/// Two-level amplitude `cos(sum_k alpha_k theta_k)` for a block whose single
/// `|0>` qubit sees factor `alpha_k` in pulse `k`.
pub fn u11alpha(protocol: &Protocol, alpha_components: &[f64]) -> Result<f64> {
    if alpha_components.len() != protocol.len() {
        return Err(Error::LengthMismatch {
            expected: protocol.len(),
            got: alpha_components.len(),
        });
    }
    Ok(protocol
        .pulses()
        .iter()
        .zip(alpha_components)
        .map(|(p, a)| a * p.theta())
        .sum::<f64>()
        .cos())
}

/// Mixed areas `(a A_odd - b A_even, b A_odd + a A_even)`.
pub fn rotate_areas(a: f64, b: f64, a_odd: f64, a_even: f64) -> Result<(f64, f64)> {
    check_unit(a, b)?;
    Ok((a * a_odd - b * a_even, b * a_odd + a * a_even))
}

/// Inverse of [`rotate_areas`] (the transposed rotation).
pub fn unrotate_areas(a: f64, b: f64, mixed_odd: f64, mixed_even: f64) -> Result<(f64, f64)> {
    check_unit(a, b)?;
    Ok((
        a * mixed_odd + b * mixed_even,
        -b * mixed_odd + a * mixed_even,
    ))
}

/// Clockwise rotation of the optimum lattice relative to the independent-qubit
/// lattice, `atan(b / a)`.
pub fn lattice_rotation(a: f64, b: f64) -> f64 {
    (b / a).atan()
}

fn check_unit(a: f64, b: f64) -> Result<()> {
    if ((a * a + b * b) - 1.0).abs() > 1e-12 {
        return Err(Error::NotNormalized { a, b });
    }
    Ok(())
}

/// Printed closed forms of the V-block amplitude for `M` alternating pulses,
/// with per-pulse mixing angles `theta_odd`, `theta_even`.
///
/// Only `M = 2, 3` agree with the exact product; see
/// [`esop_closed_form_check`] and use [`sequence_amplitude`] as ground truth.
pub fn u11v_esop(m: usize, theta_odd: f64, theta_even: f64) -> Result<f64> {
    let (so, co) = theta_odd.sin_cos();
    let (se, ce) = theta_even.sin_cos();
    match m {
        2 => Ok(ce * co),
        3 => Ok(co * co * ce - so * so),
        4 => Ok(co * co * ce * ce - so * so - se * se),
        5 => Ok(co.powi(3) * ce * ce - 3.0 * so * so - se * se),
        m => Err(Error::UnsupportedM(m)),
    }
}

/// Exact V-block amplitude of an alternating orthogonal sequence of `m`
/// pulses, by state propagation.
pub fn u11v_esop_exact(
    m: usize,
    e_odd: &StructuralVector,
    theta_odd: f64,
    theta_even: f64,
) -> Result<f64> {
    let p = crate::model::build_esop_protocol(m, e_odd, (2.0 * theta_odd, 2.0 * theta_even))?;
    let zero = BasisState::from_label(&"0".repeat(p.n_qubits()))?;
    Ok(sequence_amplitude(&p, zero).re)
}

/// Printed closed form against the exact product for one ESOP point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsopComparison {
    pub m: usize,
    pub theta_odd: f64,
    pub theta_even: f64,
    pub closed_form: f64,
    pub matrix_product: f64,
}

impl EsopComparison {
    pub fn discrepancy(&self) -> f64 {
        (self.closed_form - self.matrix_product).abs()
    }
}

pub fn esop_closed_form_check(
    m: usize,
    e_odd: &StructuralVector,
    theta_odd: f64,
    theta_even: f64,
) -> Result<EsopComparison> {
    Ok(EsopComparison {
        m,
        theta_odd,
        theta_even,
        closed_form: u11v_esop(m, theta_odd, theta_even)?,
        matrix_product: u11v_esop_exact(m, e_odd, theta_odd, theta_even)?,
    })
}
