// Copyright 2026 The rydgate Authors
// SPDX-License-Identifier: Apache-2.0

//! Atomic file output and the report schemas written next to each CSV.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use rydgate::fidelity::LatticeReport;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Writes `bytes` to `dir/name` through a temporary file and a rename, so
/// a crash never leaves a partial file under the final name. Returns the
/// SHA-256 of the content, hex encoded.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> anyhow::Result<String> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let target = dir.join(name);
    let tmp: PathBuf = dir.join(format!(".{name}.tmp"));
    {
        let mut f =
            fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, &target).with_context(|| format!("renaming into {}", target.display()))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> anyhow::Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(dir, name, text.as_bytes())
}

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct MaximumOut {
    pub a_odd_over_pi: f64,
    pub a_even_over_pi: f64,
    pub fidelity: f64,
}

/// Lattice report in output units: areas in pi, angles in degrees.
#[derive(Debug, Serialize)]
pub struct LatticeOut {
    pub threshold: f64,
    pub rotation_angle_deg: f64,
    pub nn_spacing_over_pi: f64,
    pub maxima: Vec<MaximumOut>,
}

impl LatticeOut {
    pub fn new(r: &LatticeReport, threshold: f64) -> Self {
        Self {
            threshold,
            rotation_angle_deg: r.rotation_angle.to_degrees(),
            nn_spacing_over_pi: r.nn_spacing / PI,
            maxima: r
                .maxima
                .iter()
                .map(|m| MaximumOut {
                    a_odd_over_pi: m.a_odd / PI,
                    a_even_over_pi: m.a_even / PI,
                    fidelity: m.fidelity,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_leaves_no_temp_file() {
        let dir = std::env::temp_dir().join(format!("rydgate-out-{}", std::process::id()));
        let digest = write_atomic(&dir, "a.csv", b"x,y\n").unwrap();
        assert_eq!(fs::read(dir.join("a.csv")).unwrap(), b"x,y\n");
        assert!(!dir.join(".a.csv.tmp").exists());
        // sha256("x,y\n")
        assert_eq!(digest.len(), 64);
        assert_eq!(digest, hex::encode(Sha256::digest(b"x,y\n")));
        fs::remove_dir_all(dir).unwrap();
    }
}
