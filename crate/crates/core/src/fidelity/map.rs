// Copyright 2026 The rydgate Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::{FidelityDefinition, FidelityEvaluator};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::model::ProtocolFamily;

/// Inclusive uniform axis `lo, lo + step, ..., hi` in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        let g = Self { lo, hi, step };
        g.validate()?;
        Ok(g)
    }

    /// Same as [`Grid::new`] with every bound given in units of pi.
    pub fn in_pi(lo: f64, hi: f64, step: f64) -> Result<Self> {
        Self::new(lo * PI, hi * PI, step * PI)
    }

    /// `[-8 pi, 8 pi]` in steps of `0.05 pi`.
    pub fn default_areas() -> Self {
        Self::in_pi(-8.0, 8.0, 0.05).expect("default grid is valid")
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.step.is_finite()) {
            return Err(Error::EmptyGrid("non-finite bounds".into()));
        }
        if self.step <= 0.0 {
            return Err(Error::EmptyGrid(format!(
                "step {} must be positive",
                self.step
            )));
        }
        if self.hi < self.lo {
            return Err(Error::EmptyGrid(format!(
                "hi {} below lo {}",
                self.hi, self.lo
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Points are `lo + i * step`, never accumulated.
    pub fn points(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.lo + i as f64 * self.step)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapMeta {
    pub family: ProtocolFamily,
    pub definition: FidelityDefinition,
    /// Free-form note on how cells were produced (e.g. which factors were
    /// optimized).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimization: Option<String>,
}

/// Fidelity over `(A_odd, A_even)`; `values` is row-major with the odd axis
/// as rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityMap {
    pub axis_odd: Vec<f64>,
    pub axis_even: Vec<f64>,
    pub values: Vec<f64>,
    pub meta: MapMeta,
    /// Additional per-cell columns, same layout as `values`.
    pub extra_columns: Vec<(String, Vec<f64>)>,
}

impl FidelityMap {
    pub fn rows(&self) -> usize {
        self.axis_odd.len()
    }

    pub fn cols(&self) -> usize {
        self.axis_even.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols() + j]
    }

    /// Largest cell as `(A_odd, A_even, F)`; first in row-major order on ties.
    pub fn max_cell(&self) -> (f64, f64, f64) {
        let (k, f) =
            self.values
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |(bk, bf), (k, &f)| {
                    if f > bf {
                        (k, f)
                    } else {
                        (bk, bf)
                    }
                });
        (
            self.axis_odd[k / self.cols()],
            self.axis_even[k % self.cols()],
            f,
        )
    }

    /// `a_odd_over_pi,a_even_over_pi,fidelity[,extra...]`, row-major, nine
    /// significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "a_odd_over_pi,a_even_over_pi,fidelity")?;
        for (name, _) in &self.extra_columns {
            write!(w, ",{name}")?;
        }
        writeln!(w)?;
        for (i, ao) in self.axis_odd.iter().enumerate() {
            for (j, ae) in self.axis_even.iter().enumerate() {
                let k = i * self.cols() + j;
                write!(
                    w,
                    "{},{},{}",
                    format_sig(ao / PI, 9),
                    format_sig(ae / PI, 9),
                    format_sig(self.values[k], 9)
                )?;
                for (_, col) in &self.extra_columns {
                    write!(w, ",{}", format_sig(col[k], 9))?;
                }
                writeln!(w)?;
            }
        }
        Ok(())
    }
}

/// `printf("%.{digits}g")`-style formatting.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    let digits = digits.max(1) as i32;
    if exp < -5 || exp >= digits {
        let s = format!("{:.*e}", (digits - 1) as usize, x);
        let (mantissa, e) = s.split_once('e').expect("exponent present");
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{e}");
    }
    let decimals = (digits - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Evaluates the family at every grid point. Cells are independent, so
/// `exec` only changes wall time, never the result.
pub fn fidelity_map(
    family: &ProtocolFamily,
    odd: &Grid,
    even: &Grid,
    definition: FidelityDefinition,
    exec: Execution,
) -> Result<FidelityMap> {
    odd.validate()?;
    even.validate()?;
    let (e_odd, e_even) = family.vectors()?;
    let evaluator = FidelityEvaluator::new(&family.target()?, definition);
    let axis_odd = odd.points();
    let axis_even = even.points();
    let cols = axis_even.len();
    let values = map_indexed(axis_odd.len() * cols, exec, |k| {
        let p = family
            .protocol_with_vectors(&e_odd, &e_even, axis_odd[k / cols], axis_even[k % cols])
            .expect("family vectors validated");
        evaluator.evaluate(&p).expect("register matches target")
    });
    Ok(FidelityMap {
        axis_odd,
        axis_even,
        values,
        meta: MapMeta {
            family: family.clone(),
            definition,
            optimization: None,
        },
        extra_columns: Vec::new(),
    })
}
