// Copyright 2026 The rydgate Authors
// SPDX-License-Identifier: Apache-2.0

//! Bounded multistart Nelder-Mead and the geometrical-factor searches built
//! on it.
//!
//! Exact constraints (symmetry, orthogonality, normalization) are built into
//! the parameterization, so every candidate the objective sees satisfies them.
//! Box bounds are enforced by projecting each proposal before evaluation.

use std::f64::consts::FRAC_PI_2;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::fidelity::{FidelityDefinition, FidelityEvaluator, FidelityMap, Grid, MapMeta};
use crate::model::{
    alternating_protocol, attach_spectator, sop_pair, ProtocolFamily, StructuralVector,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

impl Parameter {
    pub fn new(name: impl Into<String>, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            lo,
            hi,
        }
    }
}

type Objective<'a> = Box<dyn Fn(&[f64]) -> f64 + Send + Sync + 'a>;

/// Maximize `objective` over a box.
pub struct OptimizationProblem<'a> {
    pub parameters: Vec<Parameter>,
    objective: Objective<'a>,
}

impl<'a> OptimizationProblem<'a> {
    pub fn new(
        parameters: Vec<Parameter>,
        objective: impl Fn(&[f64]) -> f64 + Send + Sync + 'a,
    ) -> Self {
        Self {
            parameters,
            objective: Box::new(objective),
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        (self.objective)(x)
    }

    fn check(&self) -> Result<()> {
        if self.parameters.is_empty() {
            return Err(Error::InfeasibleStart("no free parameters".into()));
        }
        for p in &self.parameters {
            if !(p.lo.is_finite() && p.hi.is_finite()) || p.lo > p.hi {
                return Err(Error::InfeasibleStart(format!(
                    "parameter {} has empty range [{}, {}]",
                    p.name, p.lo, p.hi
                )));
            }
        }
        Ok(())
    }

    fn project(&self, x: &mut [f64]) {
        for (v, p) in x.iter_mut().zip(&self.parameters) {
            *v = v.clamp(p.lo, p.hi);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadSettings {
    pub restarts: usize,
    /// Evaluation budget per restart.
    pub max_evaluations: usize,
    /// Stop once every vertex is within this distance of the best one.
    pub tolerance: f64,
    /// Initial simplex edge as a fraction of each parameter range.
    pub initial_step: f64,
    pub execution: Execution,
}

impl Default for NelderMeadSettings {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_evaluations: 2000,
            tolerance: 1e-6,
            initial_step: 0.1,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub parameter_names: Vec<String>,
    pub best_parameters: Vec<f64>,
    /// Objective re-evaluated at `best_parameters`.
    pub best_fidelity: f64,
    /// Total objective calls over all restarts.
    pub evaluations: usize,
    pub restarts_used: usize,
}

impl OptimizationResult {
    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.parameter_names
            .iter()
            .position(|n| n == name)
            .map(|k| self.best_parameters[k])
    }
}

struct RunOutcome {
    x: Vec<f64>,
    f: f64,
    evaluations: usize,
}

/// One bounded Nelder-Mead run from `start`, maximizing.
fn run_single(
    problem: &OptimizationProblem,
    start: &[f64],
    settings: &NelderMeadSettings,
) -> RunOutcome {
    let n = start.len();
    let evaluations = std::cell::Cell::new(0usize);
    let eval = |x: &mut Vec<f64>| {
        problem.project(x);
        evaluations.set(evaluations.get() + 1);
        // minimize the negated objective; NaN ranks worst
        let f = problem.evaluate(x);
        if f.is_nan() {
            f64::INFINITY
        } else {
            -f
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let mut x0 = start.to_vec();
    let f0 = eval(&mut x0);
    simplex.push((x0.clone(), f0));
    for (i, p) in problem.parameters.iter().enumerate() {
        let h = settings.initial_step * (p.hi - p.lo);
        let mut x = x0.clone();
        x[i] = if x0[i] + h <= p.hi {
            x0[i] + h
        } else {
            x0[i] - h
        };
        let f = eval(&mut x);
        simplex.push((x, f));
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let point = |c: &[f64], w: &[f64], t: f64| -> Vec<f64> {
        c.iter().zip(w).map(|(c, w)| c + t * (w - c)).collect()
    };

    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = &simplex[0].0;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(best)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        if diameter < settings.tolerance || evaluations.get() >= settings.max_evaluations {
            break;
        }

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let (worst, f_worst) = simplex[n].clone();
        let f_best = simplex[0].1;
        let f_second = simplex[n - 1].1;

        let mut xr = point(&centroid, &worst, -alpha);
        let fr = eval(&mut xr);
        if fr < f_best {
            let mut xe = point(&centroid, &worst, -gamma);
            let fe = eval(&mut xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < f_second {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < f_worst {
            let mut x = point(&centroid, &xr, rho);
            let f = eval(&mut x);
            (x, f)
        } else {
            let mut x = point(&centroid, &worst, rho);
            let f = eval(&mut x);
            (x, f)
        };
        if fc < fr.min(f_worst) {
            simplex[n] = (xc, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let mut x = point(&anchor, &vertex.0, sigma);
            let f = eval(&mut x);
            *vertex = (x, f);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, f) = simplex.swap_remove(0);
    RunOutcome {
        x,
        f: -f,
        evaluations: evaluations.get(),
    }
}

/// `count` points stratified along every axis of the box.
pub fn latin_hypercube(parameters: &[Parameter], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = vec![Vec::with_capacity(parameters.len()); count];
    for p in parameters {
        let mut strata: Vec<usize> = (0..count).collect();
        strata.shuffle(&mut rng);
        for (point, s) in points.iter_mut().zip(strata) {
            let u = (s as f64 + rng.random::<f64>()) / count as f64;
            point.push(p.lo + u * (p.hi - p.lo));
        }
    }
    points
}

/// Multistart bounded Nelder-Mead from Latin-hypercube seeds. Deterministic
/// for a given seed regardless of `settings.execution`; ties between restarts
/// go to the lowest restart index.
pub fn nelder_mead_constrained(
    problem: &OptimizationProblem,
    seed: u64,
    settings: &NelderMeadSettings,
) -> Result<OptimizationResult> {
    problem.check()?;
    let starts = latin_hypercube(&problem.parameters, settings.restarts.max(1), seed);
    nelder_mead_from(problem, &starts, settings)
}

/// Nelder-Mead from explicit starting points (projected onto the box).
pub fn nelder_mead_from(
    problem: &OptimizationProblem,
    starts: &[Vec<f64>],
    settings: &NelderMeadSettings,
) -> Result<OptimizationResult> {
    problem.check()?;
    if starts.is_empty() {
        return Err(Error::InfeasibleStart("no starting points".into()));
    }
    let dim = problem.parameters.len();
    if let Some(s) = starts.iter().find(|s| s.len() != dim) {
        return Err(Error::LengthMismatch {
            expected: dim,
            got: s.len(),
        });
    }
    let runs = map_indexed(starts.len(), settings.execution, |k| {
        let mut x = starts[k].clone();
        problem.project(&mut x);
        run_single(problem, &x, settings)
    });
    let evaluations = runs.iter().map(|r| r.evaluations).sum();
    let best = runs
        .iter()
        .enumerate()
        .fold(0, |bk, (k, r)| if r.f > runs[bk].f { k } else { bk });
    let best_parameters = runs[best].x.clone();
    Ok(OptimizationResult {
        parameter_names: problem.parameters.iter().map(|p| p.name.clone()).collect(),
        best_fidelity: problem.evaluate(&best_parameters),
        best_parameters,
        evaluations,
        restarts_used: runs.len(),
    })
}

/// Maximizes the family's fidelity over `(A_odd, A_even)` in a box (radians).
pub fn optimize_areas(
    family: &ProtocolFamily,
    odd: (f64, f64),
    even: (f64, f64),
    definition: FidelityDefinition,
    seed: u64,
    settings: &NelderMeadSettings,
) -> Result<OptimizationResult> {
    let problem = area_problem(family, odd, even, definition)?;
    nelder_mead_constrained(&problem, seed, settings)
}

/// Local refinement of `(A_odd, A_even)` from `start`, confined to a square
/// of half-width `reach` around it.
pub fn refine_areas(
    family: &ProtocolFamily,
    start: (f64, f64),
    reach: f64,
    definition: FidelityDefinition,
) -> Result<OptimizationResult> {
    let problem = area_problem(
        family,
        (start.0 - reach, start.0 + reach),
        (start.1 - reach, start.1 + reach),
        definition,
    )?;
    let settings = NelderMeadSettings {
        restarts: 1,
        initial_step: 0.05,
        execution: Execution::Sequential,
        ..Default::default()
    };
    nelder_mead_from(&problem, &[vec![start.0, start.1]], &settings)
}

fn area_problem<'a>(
    family: &'a ProtocolFamily,
    odd: (f64, f64),
    even: (f64, f64),
    definition: FidelityDefinition,
) -> Result<OptimizationProblem<'a>> {
    let (e_odd, e_even) = family.vectors()?;
    let evaluator = FidelityEvaluator::new(&family.target()?, definition);
    Ok(OptimizationProblem::new(
        vec![
            Parameter::new("a_odd", odd.0, odd.1),
            Parameter::new("a_even", even.0, even.1),
        ],
        move |x| {
            let p = family
                .protocol_with_vectors(&e_odd, &e_even, x[0], x[1])
                .expect("family vectors validated");
            evaluator.evaluate(&p).expect("register matches target")
        },
    ))
}

/// Maps `u` in `[-1, 1]` onto `c` with `c^2 >= min_sq`, keeping the sign of
/// `u`: `sign(u) * (sqrt(min_sq) + |u| (1 - sqrt(min_sq)))`.
pub fn spectator_from_unit(u: f64, min_sq: f64) -> f64 {
    let m = min_sq.sqrt();
    let c = m + u.abs() * (1.0 - m);
    if u < 0.0 {
        -c
    } else {
        c
    }
}

fn check_min_sq(min_sq: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&min_sq) {
        return Err(Error::InfeasibleStart(format!(
            "min_sq {min_sq} outside [0, 1]"
        )));
    }
    Ok(())
}

/// Three-pulse, three-qubit protocol with `e3 = e1` and total odd/even areas.
fn three_pulse(
    e_odd: &StructuralVector,
    e_even: &StructuralVector,
    (a_odd, a_even): (f64, f64),
) -> crate::model::Protocol {
    alternating_protocol(3, e_odd, e_even, (a_odd / 2.0, a_even)).expect("three-qubit vectors")
}

/// Optimizes the spectator factors `c_odd` (shared by pulses 1 and 3) and
/// `c_even` at fixed areas, keeping the orthogonal symmetric `(a, b)`
/// sub-vectors for overlap `b`. Both satisfy `c^2 >= min_sq`.
///
/// Parameters are `u_odd`, `u_even` in `[-1, 1]`; see [`spectator_from_unit`].
pub fn optimize_third_qubit(
    areas: (f64, f64),
    b: f64,
    min_sq: f64,
    definition: FidelityDefinition,
    seed: u64,
    settings: &NelderMeadSettings,
) -> Result<OptimizationResult> {
    check_min_sq(min_sq)?;
    let (odd, even) = sop_pair(b)?;
    let evaluator =
        FidelityEvaluator::new(&ProtocolFamily::three_qubit(0.0, 0.0).target()?, definition);
    let problem = OptimizationProblem::new(
        vec![
            Parameter::new("u_odd", -1.0, 1.0),
            Parameter::new("u_even", -1.0, 1.0),
        ],
        |x| {
            let (c_odd, c_even) = (
                spectator_from_unit(x[0], min_sq),
                spectator_from_unit(x[1], min_sq),
            );
            let e_odd = attach_spectator(&odd, c_odd).expect("|c| <= 1");
            let e_even = attach_spectator(&even, c_even).expect("|c| <= 1");
            evaluator
                .evaluate(&three_pulse(&e_odd, &e_even, areas))
                .expect("three qubits")
        },
    );
    nelder_mead_constrained(&problem, seed, settings)
}

/// Angle of a `(a, b)` sub-vector of radius `r` with `a^2, b^2 >= min_sq`.
/// `t` in `[0, 4]` selects the quadrant (integer part) and the position
/// along the feasible arc inside it (fractional part).
pub fn arc_angle(t: f64, r: f64, min_sq: f64) -> f64 {
    let phi_min = (min_sq.sqrt() / r).min(1.0).asin();
    let t = t.clamp(0.0, 4.0);
    let q = (t.floor() as usize).min(3);
    let frac = t - q as f64;
    q as f64 * FRAC_PI_2 + phi_min + frac * (FRAC_PI_2 - 2.0 * phi_min)
}

/// Feasible-arc vector `(r cos phi, r sin phi, c)`.
fn arc_vector(t: f64, c: f64, min_sq: f64) -> StructuralVector {
    let r = (1.0 - c * c).sqrt();
    let phi = arc_angle(t, r, min_sq);
    StructuralVector::new(&[r * phi.cos(), r * phi.sin(), c]).expect("unit vector")
}

/// Optimizes both `(a, b)` sub-vectors with `c` frozen at `c_fixed` on every
/// pulse, `e3 = e1` and no orthogonality tie. Every `a_k^2, b_k^2 >= min_sq`.
///
/// Parameters are `t_odd`, `t_even` in `[0, 4]`; see [`arc_angle`].
pub fn optimize_all_factors(
    areas: (f64, f64),
    c_fixed: f64,
    min_sq: f64,
    definition: FidelityDefinition,
    seed: u64,
    settings: &NelderMeadSettings,
) -> Result<OptimizationResult> {
    check_min_sq(min_sq)?;
    if !(-1.0..=1.0).contains(&c_fixed) {
        return Err(Error::InvalidB2(c_fixed * c_fixed));
    }
    let r2 = 1.0 - c_fixed * c_fixed;
    if 2.0 * min_sq > r2 {
        return Err(Error::InfeasibleStart(format!(
            "a^2, b^2 >= {min_sq} impossible with a^2 + b^2 = {r2}"
        )));
    }
    let evaluator =
        FidelityEvaluator::new(&ProtocolFamily::three_qubit(0.0, 0.0).target()?, definition);
    let problem = OptimizationProblem::new(
        vec![
            Parameter::new("t_odd", 0.0, 4.0),
            Parameter::new("t_even", 0.0, 4.0),
        ],
        |x| {
            let e_odd = arc_vector(x[0], c_fixed, min_sq);
            let e_even = arc_vector(x[1], c_fixed, min_sq);
            evaluator
                .evaluate(&three_pulse(&e_odd, &e_even, areas))
                .expect("three qubits")
        },
    );
    nelder_mead_constrained(&problem, seed, settings)
}

/// Which geometrical factors an optimized map frees at each cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorSearch {
    /// [`optimize_third_qubit`] with overlap `b`.
    ThirdQubit { b: f64, min_sq: f64 },
    /// [`optimize_all_factors`] with frozen `c`.
    AllFactors { c: f64, min_sq: f64 },
}

/// Per-cell optimized three-qubit map. Cell `k` (row-major) uses seed
/// `seed + k`. Extra columns hold the optimized factors.
pub fn optimized_map(
    search: FactorSearch,
    odd: &Grid,
    even: &Grid,
    definition: FidelityDefinition,
    seed: u64,
    settings: &NelderMeadSettings,
) -> Result<FidelityMap> {
    let axis_odd = odd.points();
    let axis_even = even.points();
    let cols = axis_even.len();
    let inner = NelderMeadSettings {
        execution: Execution::Sequential,
        ..*settings
    };
    let cells = map_indexed(axis_odd.len() * cols, settings.execution, |k| {
        let areas = (axis_odd[k / cols], axis_even[k % cols]);
        let s = seed.wrapping_add(k as u64);
        match search {
            FactorSearch::ThirdQubit { b, min_sq } => {
                optimize_third_qubit(areas, b, min_sq, definition, s, &inner)
            }
            FactorSearch::AllFactors { c, min_sq } => {
                optimize_all_factors(areas, c, min_sq, definition, s, &inner)
            }
        }
    });
    let cells: Vec<OptimizationResult> = cells.into_iter().collect::<Result<_>>()?;

    let (names, family, note): (Vec<&str>, ProtocolFamily, String) = match search {
        FactorSearch::ThirdQubit { b, min_sq } => (
            vec!["c_odd", "c_even"],
            ProtocolFamily::three_qubit(b * b, min_sq),
            format!("third-qubit factors optimized, c^2 >= {min_sq}"),
        ),
        FactorSearch::AllFactors { c, min_sq } => (
            vec!["a_odd", "b_odd", "a_even", "b_even"],
            ProtocolFamily::three_qubit(0.0, c * c),
            format!("all (a, b) factors optimized at c = {c}, a^2, b^2 >= {min_sq}"),
        ),
    };
    let mut extra: Vec<(String, Vec<f64>)> = names
        .iter()
        .map(|n| (n.to_string(), Vec::with_capacity(cells.len())))
        .collect();
    for r in &cells {
        let x = &r.best_parameters;
        let values = match search {
            FactorSearch::ThirdQubit { min_sq, .. } => {
                vec![
                    spectator_from_unit(x[0], min_sq),
                    spectator_from_unit(x[1], min_sq),
                ]
            }
            FactorSearch::AllFactors { c, min_sq } => {
                let (o, e) = (arc_vector(x[0], c, min_sq), arc_vector(x[1], c, min_sq));
                vec![
                    o.components()[0],
                    o.components()[1],
                    e.components()[0],
                    e.components()[1],
                ]
            }
        };
        for (col, v) in extra.iter_mut().zip(values) {
            col.1.push(v);
        }
    }
    Ok(FidelityMap {
        axis_odd,
        axis_even,
        values: cells.iter().map(|r| r.best_fidelity).collect(),
        meta: MapMeta {
            family,
            definition,
            optimization: Some(note),
        },
        extra_columns: extra,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fidelity::gate_fidelity;
    use crate::model::sop_pair_with_spectator;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn quick() -> NelderMeadSettings {
        NelderMeadSettings {
            restarts: 8,
            ..Default::default()
        }
    }

    #[test]
    fn quadratic_optimum_at_bound_corner() {
        let problem = OptimizationProblem::new(
            vec![
                Parameter::new("x", 0.1, 1.0),
                Parameter::new("y", 0.1, 1.0),
                Parameter::new("z", 0.1, 1.0),
            ],
            |x| 1.0 - x.iter().map(|v| v * v).sum::<f64>(),
        );
        let r = nelder_mead_constrained(&problem, 3, &NelderMeadSettings::default()).unwrap();
        for v in &r.best_parameters {
            assert_abs_diff_eq!(*v, 0.1, epsilon = 1e-6);
        }
        assert_abs_diff_eq!(r.best_fidelity, 0.97, epsilon = 1e-6);
        assert_eq!(r.restarts_used, 16);
    }

    #[test]
    fn jp_point_recovered() {
        let fam = ProtocolFamily::jp();
        let r = optimize_areas(
            &fam,
            (1.5 * PI, 2.5 * PI),
            (1.5 * PI, 2.5 * PI),
            FidelityDefinition::TraceSquared,
            0,
            &quick(),
        )
        .unwrap();
        assert_abs_diff_eq!(r.best_fidelity, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.best_parameters[0], 2.0 * PI, epsilon = 1e-3);
        assert_abs_diff_eq!(r.best_parameters[1], 2.0 * PI, epsilon = 1e-3);
    }

    #[test]
    fn b2_02_peak_regression() {
        let fam = ProtocolFamily::sop(0.2);
        let r = refine_areas(
            &fam,
            (-6.1 * PI, 0.9 * PI),
            0.5 * PI,
            FidelityDefinition::TraceSquared,
        )
        .unwrap();
        assert!(r.best_fidelity >= 0.98, "{}", r.best_fidelity);
        assert!((r.best_parameters[0] / PI + 6.1).abs() < 0.2);
        assert!((r.best_parameters[1] / PI - 0.9).abs() < 0.2);
    }

    #[test]
    fn deterministic_and_execution_independent() {
        let areas = (2.0 * PI, 2.0 * PI);
        let mut s = quick();
        s.execution = Execution::Sequential;
        let a = optimize_third_qubit(
            areas,
            0.1f64.sqrt(),
            0.1,
            FidelityDefinition::TraceSquared,
            42,
            &s,
        )
        .unwrap();
        s.execution = Execution::Parallel;
        let b = optimize_third_qubit(
            areas,
            0.1f64.sqrt(),
            0.1,
            FidelityDefinition::TraceSquared,
            42,
            &s,
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ties_go_to_first_restart() {
        let problem = OptimizationProblem::new(vec![Parameter::new("x", -1.0, 1.0)], |_| 0.5);
        let starts = vec![vec![0.3], vec![-0.2]];
        let r = nelder_mead_from(&problem, &starts, &NelderMeadSettings::default()).unwrap();
        assert_eq!(r.best_parameters, vec![0.3]);
        assert_eq!(r.best_fidelity, 0.5);
    }

    #[test]
    fn best_fidelity_is_re_evaluated() {
        let fam = ProtocolFamily::sop(0.3);
        let r = optimize_areas(
            &fam,
            (0.0, 4.0 * PI),
            (0.0, 4.0 * PI),
            FidelityDefinition::TraceSquared,
            9,
            &quick(),
        )
        .unwrap();
        let p = fam
            .protocol(r.best_parameters[0], r.best_parameters[1])
            .unwrap();
        assert_eq!(
            r.best_fidelity,
            gate_fidelity(&p, &fam.target().unwrap()).unwrap()
        );
    }

    #[test]
    fn bounds_respected_at_every_evaluation() {
        let problem = OptimizationProblem::new(
            vec![
                Parameter::new("x", -0.5, 0.25),
                Parameter::new("y", 2.0, 3.0),
            ],
            |x| {
                assert!((-0.5..=0.25).contains(&x[0]) && (2.0..=3.0).contains(&x[1]));
                x[0] + x[1]
            },
        );
        let r = nelder_mead_constrained(&problem, 1, &quick()).unwrap();
        assert_eq!(r.best_parameters, vec![0.25, 3.0]);
    }

    #[test]
    fn infeasible_problems() {
        let problem = OptimizationProblem::new(vec![Parameter::new("x", 1.0, 0.0)], |_| 0.0);
        assert!(matches!(
            nelder_mead_constrained(&problem, 0, &quick()),
            Err(Error::InfeasibleStart(_))
        ));
        assert!(matches!(
            optimize_all_factors(
                (PI, PI),
                0.1f64.sqrt(),
                1.0,
                FidelityDefinition::TraceSquared,
                0,
                &quick()
            ),
            Err(Error::InfeasibleStart(_))
        ));
    }

    #[test]
    fn parameterizations_stay_feasible() {
        for k in 0..=400 {
            let t = k as f64 * 0.01;
            let v = arc_vector(t, 0.1f64.sqrt(), 0.1);
            let [a, b, c] = [v.components()[0], v.components()[1], v.components()[2]];
            assert!(a * a >= 0.1 - 1e-12 && b * b >= 0.1 - 1e-12, "t={t}");
            assert_abs_diff_eq!(v.norm(), 1.0, epsilon = 1e-12);
            assert_eq!(c, 0.1f64.sqrt());
            let u = -1.0 + k as f64 * 0.005;
            assert!(spectator_from_unit(u, 0.1).powi(2) >= 0.1 - 1e-12);
        }
        assert_eq!(spectator_from_unit(1.0, 0.1), 1.0);
        assert_eq!(spectator_from_unit(-1.0, 0.1), -1.0);
    }

    #[test]
    fn spectator_free_limit_is_two_qubit() {
        // c = 0 decouples the third qubit; b = 0 is the JP on the other two
        let (odd, even) = sop_pair_with_spectator(0.0, 0.0, 0.0).unwrap();
        let p = three_pulse(&odd, &even, (2.0 * PI, 2.0 * PI));
        let t = ProtocolFamily::three_qubit(0.0, 0.0).target().unwrap();
        assert_abs_diff_eq!(gate_fidelity(&p, &t).unwrap(), 1.0, epsilon = 1e-12);
        let r = optimize_third_qubit(
            (2.0 * PI, 2.0 * PI),
            0.0,
            0.0,
            FidelityDefinition::TraceSquared,
            1,
            &quick(),
        )
        .unwrap();
        assert_abs_diff_eq!(r.best_fidelity, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn larger_feasible_sets_do_at_least_as_well() {
        let t = ProtocolFamily::three_qubit(0.0, 0.0).target().unwrap();
        for areas in [
            (2.0 * PI, 2.0 * PI),
            (-3.0 * PI, 1.0 * PI),
            (2.5 * PI, 1.5 * PI),
        ] {
            let fixed = ProtocolFamily::three_qubit(0.1, 0.1);
            let f_fixed = gate_fidelity(&fixed.protocol(areas.0, areas.1).unwrap(), &t).unwrap();
            let third = optimize_third_qubit(
                areas,
                0.1f64.sqrt(),
                0.1,
                FidelityDefinition::TraceSquared,
                5,
                &quick(),
            )
            .unwrap();
            assert!(third.best_fidelity >= f_fixed - 1e-9);

            // (a, b) = sqrt(0.9) (sqrt 0.8, sqrt 0.2) and its orthogonal
            // partner lie inside the all-factors feasible set
            let (o, e) =
                sop_pair_with_spectator(0.2f64.sqrt(), 0.1f64.sqrt(), 0.1f64.sqrt()).unwrap();
            let f_sop = gate_fidelity(&three_pulse(&o, &e, areas), &t).unwrap();
            let all = optimize_all_factors(
                areas,
                0.1f64.sqrt(),
                0.1,
                FidelityDefinition::TraceSquared,
                5,
                &quick(),
            )
            .unwrap();
            assert!(
                all.best_fidelity >= f_sop - 1e-9,
                "{} < {}",
                all.best_fidelity,
                f_sop
            );
        }
    }

    #[test]
    fn optimized_map_columns() {
        let g = Grid::in_pi(1.0, 2.0, 1.0).unwrap();
        let s = NelderMeadSettings {
            restarts: 2,
            max_evaluations: 100,
            ..Default::default()
        };
        let m = optimized_map(
            FactorSearch::AllFactors {
                c: 0.1f64.sqrt(),
                min_sq: 0.1,
            },
            &g,
            &g,
            FidelityDefinition::TraceSquared,
            0,
            &s,
        )
        .unwrap();
        assert_eq!(m.values.len(), 4);
        let names: Vec<&str> = m.extra_columns.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, ["a_odd", "b_odd", "a_even", "b_even"]);
        for (_, col) in &m.extra_columns {
            assert!(col.iter().all(|v| v * v >= 0.1 - 1e-12));
        }
        let m2 = optimized_map(
            FactorSearch::ThirdQubit {
                b: 0.1f64.sqrt(),
                min_sq: 0.1,
            },
            &g,
            &g,
            FidelityDefinition::TraceSquared,
            0,
            &s,
        )
        .unwrap();
        assert_eq!(m2.extra_columns.len(), 2);
    }
}
