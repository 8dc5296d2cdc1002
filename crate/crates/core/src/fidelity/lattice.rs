// Copyright 2026 The rydgate Authors
// SPDX-License-Identifier: Apache-2.0

//! Geometry of the optimum lattice in a fidelity map.

use serde::{Deserialize, Serialize};

use super::FidelityMap;
use crate::error::{Error, Result};

/// Displacements up to this multiple of the median nearest-neighbour distance
/// count as lattice bonds when estimating the orientation.
const BOND_REACH: f64 = 1.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Maximum {
    pub a_odd: f64,
    pub a_even: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeReport {
    /// Sorted by fidelity, best first.
    pub maxima: Vec<Maximum>,
    /// Clockwise rotation of the lattice relative to the `(A_odd, A_even)`
    /// axes, radians, folded into `(-pi/4, pi/4]`.
    pub rotation_angle: f64,
    /// Median nearest-neighbour distance, radians of area.
    pub nn_spacing: f64,
}

impl LatticeReport {
    /// Maximum closest to `(a_odd, a_even)`.
    pub fn nearest(&self, a_odd: f64, a_even: f64) -> Option<&Maximum> {
        self.maxima.iter().min_by(|x, y| {
            let dx = (x.a_odd - a_odd).hypot(x.a_even - a_even);
            let dy = (y.a_odd - a_odd).hypot(y.a_even - a_even);
            dx.total_cmp(&dy)
        })
    }
}

/// Strict local maxima of the interior cells over their 8-neighbourhood,
/// keeping those with `F >= threshold`. Order: fidelity descending, then
/// row-major position.
pub fn local_maxima(map: &FidelityMap, threshold: f64) -> Vec<Maximum> {
    let (rows, cols) = (map.rows(), map.cols());
    let mut found: Vec<(usize, Maximum)> = Vec::new();
    for i in 1..rows.saturating_sub(1) {
        for j in 1..cols.saturating_sub(1) {
            let f = map.get(i, j);
            if f < threshold {
                continue;
            }
            let strict = (i - 1..=i + 1)
                .flat_map(|r| (j - 1..=j + 1).map(move |c| (r, c)))
                .filter(|&(r, c)| (r, c) != (i, j))
                .all(|(r, c)| map.get(r, c) < f);
            if strict {
                found.push((
                    i * cols + j,
                    Maximum {
                        a_odd: map.axis_odd[i],
                        a_even: map.axis_even[j],
                        fidelity: f,
                    },
                ));
            }
        }
    }
    found.sort_by(|(ka, a), (kb, b)| b.fidelity.total_cmp(&a.fidelity).then(ka.cmp(kb)));
    found.into_iter().map(|(_, m)| m).collect()
}

/// Locates the maxima and measures the lattice they form.
///
/// The spacing is the median nearest-neighbour distance. The orientation is
/// the circular median (period 90 degrees) of the clockwise angles of every
/// displacement no longer than `1.25` spacings, i.e. of the lattice bonds.
pub fn lattice_analysis(map: &FidelityMap, threshold: f64) -> Result<LatticeReport> {
    if map.values.is_empty() {
        return Err(Error::EmptyGrid("map has no cells".into()));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidThreshold(threshold));
    }
    let maxima = local_maxima(map, threshold);
    if maxima.len() < 2 {
        return Err(Error::NoMaximaFound);
    }
    let nn: Vec<f64> = maxima
        .iter()
        .enumerate()
        .map(|(k, p)| {
            maxima
                .iter()
                .enumerate()
                .filter(|&(q, _)| q != k)
                .map(|(_, m)| (m.a_odd - p.a_odd).hypot(m.a_even - p.a_even))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let nn_spacing = median(nn);

    let reach = BOND_REACH * nn_spacing;
    let mut angles = Vec::new();
    for (k, p) in maxima.iter().enumerate() {
        for (q, m) in maxima.iter().enumerate() {
            if q == k {
                continue;
            }
            let (dx, dy) = (m.a_odd - p.a_odd, m.a_even - p.a_even);
            if dx.hypot(dy) <= reach {
                angles.push(-dy.atan2(dx));
            }
        }
    }
    Ok(LatticeReport {
        maxima,
        rotation_angle: quarter_turn_median(&angles),
        nn_spacing,
    })
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Median of angles defined modulo `pi/2`, result in `(-pi/4, pi/4]`.
fn quarter_turn_median(angles: &[f64]) -> f64 {
    use std::f64::consts::FRAC_PI_2;
    let period = FRAC_PI_2;
    // circular mean of the quadrupled angles picks the reference branch
    let (s, c) = angles.iter().fold((0.0, 0.0), |(s, c), a| {
        (s + (4.0 * a).sin(), c + (4.0 * a).cos())
    });
    let reference = s.atan2(c) / 4.0;
    let deviations: Vec<f64> = angles.iter().map(|a| wrap(a - reference, period)).collect();
    wrap(reference + median(deviations), period)
}

/// Folds `x` into `(-period/2, period/2]`.
fn wrap(x: f64, period: f64) -> f64 {
    let mut y = x.rem_euclid(period);
    if y > period / 2.0 {
        y -= period;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Execution;
    use crate::fidelity::{fidelity_map, FidelityDefinition, Grid};
    use crate::model::ProtocolFamily;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn map(b2: f64) -> FidelityMap {
        let g = Grid::default_areas();
        fidelity_map(
            &ProtocolFamily::sop(b2),
            &g,
            &g,
            FidelityDefinition::TraceSquared,
            Execution::Parallel,
        )
        .unwrap()
    }

    #[test]
    fn jp_lattice() {
        let r = lattice_analysis(&map(0.0), 0.7).unwrap();
        assert_eq!(r.maxima.len(), 16);
        for m in &r.maxima {
            assert_abs_diff_eq!(m.fidelity, 1.0, epsilon = 1e-12);
            // odd multiples of 2 pi on both axes
            for a in [m.a_odd, m.a_even] {
                let k = a / (2.0 * PI);
                assert_abs_diff_eq!(k, k.round(), epsilon = 1e-9);
                assert_eq!((k.round() as i64).rem_euclid(2), 1);
            }
        }
        assert_abs_diff_eq!(r.rotation_angle, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.nn_spacing, 4.0 * PI, epsilon = 1e-9);
    }

    #[test]
    fn rotated_lattices() {
        for b2 in [0.1f64, 0.5] {
            let r = lattice_analysis(&map(b2), 0.7).unwrap();
            let beta = (b2 / (1.0 - b2)).sqrt().atan();
            let diff = wrap(r.rotation_angle - beta, PI / 2.0);
            assert!(
                diff.abs() < 3f64.to_radians(),
                "b2={b2}: {} vs {}",
                r.rotation_angle.to_degrees(),
                beta.to_degrees()
            );
        }
    }

    #[test]
    fn maxima_sorted_and_strict() {
        let r = lattice_analysis(&map(0.2), 0.5).unwrap();
        for w in r.maxima.windows(2) {
            assert!(w[0].fidelity >= w[1].fidelity);
        }
        assert!(r.nn_spacing > 0.0);
    }

    #[test]
    fn errors() {
        let m = map(0.0);
        assert_eq!(lattice_analysis(&m, 1.0), Err(Error::InvalidThreshold(1.0)));
        assert_eq!(lattice_analysis(&m, 0.0), Err(Error::InvalidThreshold(0.0)));
        let g = Grid::in_pi(0.0, 0.5, 0.05).unwrap();
        let flat = fidelity_map(
            &ProtocolFamily::jp(),
            &g,
            &g,
            FidelityDefinition::TraceSquared,
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(lattice_analysis(&flat, 0.9), Err(Error::NoMaximaFound));
    }

    #[test]
    fn angle_folding() {
        assert_abs_diff_eq!(wrap(PI / 2.0 + 0.1, PI / 2.0), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap(-PI / 4.0, PI / 2.0), PI / 4.0, epsilon = 1e-15);
        let angles = [0.1, 0.1 + PI / 2.0, 0.1 - PI, 0.12, 0.08];
        assert_abs_diff_eq!(quarter_turn_median(&angles), 0.1, epsilon = 1e-12);
        let near_edge = [PI / 4.0 - 0.01, -PI / 4.0 + 0.01, PI / 4.0];
        assert!(quarter_turn_median(&near_edge).abs() > PI / 4.0 - 0.02);
    }
}
