//! Load externally produced line-packing coordinate files and benchmark
//! them against computed configurations.
//!
//! File format: whitespace/newline-separated decimal floats in vector-major
//! order (all d coordinates of vector 1, then vector 2, ...). Blank lines
//! and lines starting with '#' are ignored. Published packings are often
//! rounded, so column norms within 1e-6 of 1 are renormalized silently,
//! deviations up to 1e-3 renormalize with a warning, and anything worse is
//! rejected as corrupt.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::FrameConfig;
use crate::metrics::{coherence, projectively_equivalent, tightness_residual};

/// Norm deviations at or below this are silently renormalized.
pub const SILENT_NORM_TOL: f64 = 1e-6;
/// Norm deviations above this are rejected.
pub const HARD_NORM_TOL: f64 = 1e-3;

/// A parsed packing file: raw values plus the declared shape.
#[derive(Debug, Clone)]
pub struct PackingFile {
    pub path: PathBuf,
    pub d: usize,
    pub n: usize,
    pub values: Vec<f64>,
}

impl PackingFile {
    /// Parse the file, checking token syntax and the value count N*d.
    pub fn parse(path: &Path, d: usize, n: usize) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut values = Vec::with_capacity(n * d);
        for (line_idx, line) in text.lines().enumerate() {
            let trimmed = line.trim_start();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut col = 0;
            for token in line.split_whitespace() {
                col = line[col..]
                    .find(token)
                    .map(|p| p + col)
                    .unwrap_or(col);
                let value: f64 = token.parse().map_err(|_| Error::ParseToken {
                    path: path.display().to_string(),
                    line: line_idx + 1,
                    col: col + 1,
                    token: token.to_string(),
                })?;
                col += token.len();
                values.push(value);
            }
        }
        if values.len() != n * d {
            return Err(Error::ValueCount {
                path: path.display().to_string(),
                d,
                n,
                expected: n * d,
                found: values.len(),
            });
        }
        Ok(Self {
            path: path.to_path_buf(),
            d,
            n,
            values,
        })
    }

    /// Columns renormalized onto the sphere, plus one warning string per
    /// column whose norm deviated by more than [`SILENT_NORM_TOL`].
    pub fn into_config(self) -> Result<(FrameConfig, Vec<String>)> {
        let mut warnings = Vec::new();
        let mut columns = Vec::with_capacity(self.n);
        for (index, chunk) in self.values.chunks_exact(self.d).enumerate() {
            let norm: f64 = chunk.iter().map(|v| v * v).sum::<f64>().sqrt();
            let dev = (norm - 1.0).abs();
            if dev > HARD_NORM_TOL {
                return Err(Error::NormDeviation {
                    path: self.path.display().to_string(),
                    index,
                    norm,
                });
            }
            if dev > SILENT_NORM_TOL {
                warnings.push(format!(
                    "vector {index} has norm {norm:.9}; renormalized"
                ));
            }
            columns.push(chunk.to_vec());
        }
        let config = FrameConfig::from_columns(self.d, columns)?;
        Ok((config, warnings))
    }
}

/// A loaded packing: the configuration plus any renormalization warnings.
#[derive(Debug, Clone)]
pub struct LoadedPacking {
    pub config: FrameConfig,
    pub warnings: Vec<String>,
}

/// Parse and renormalize a packing file with the declared shape.
pub fn load_packing(path: &Path, d: usize, n: usize) -> Result<LoadedPacking> {
    let (config, warnings) = PackingFile::parse(path, d, n)?.into_config()?;
    Ok(LoadedPacking { config, warnings })
}

/// The packing file format: a shape comment, then one vector per line at
/// 17 significant digits so a reload is bit-exact at double precision.
pub fn packing_text(x: &FrameConfig) -> String {
    let mut out = String::new();
    out.push_str(&format!("# d={} n={}\n", x.d(), x.n()));
    for v in x.vectors() {
        let line: Vec<String> = v.coords().iter().map(|c| format!("{c:.16e}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Write a configuration in the packing file format.
pub fn save_packing(path: &Path, x: &FrameConfig) -> Result<()> {
    fs::write(path, packing_text(x))?;
    Ok(())
}

/// Side-by-side comparison of two configurations of the same shape.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRecord {
    pub coherence_a: f64,
    pub coherence_b: f64,
    /// coherence_a - coherence_b; positive means b is better separated.
    pub coherence_diff: f64,
    pub residual_a: f64,
    pub residual_b: f64,
    pub projectively_equivalent: bool,
}

/// Compare a computed configuration against a reference of the same shape.
/// The equivalence flag uses the |Gram|-multiset necessary condition at the
/// given tolerance.
pub fn compare_to_reference(
    a: &FrameConfig,
    b: &FrameConfig,
    equivalence_tol: f64,
) -> Result<ComparisonRecord> {
    if a.d() != b.d() || a.n() != b.n() {
        return Err(Error::ShapeMismatch {
            left_d: a.d(),
            left_n: a.n(),
            right_d: b.d(),
            right_n: b.n(),
        });
    }
    let coherence_a = coherence(a)?;
    let coherence_b = coherence(b)?;
    Ok(ComparisonRecord {
        coherence_a,
        coherence_b,
        coherence_diff: coherence_a - coherence_b,
        residual_a: tightness_residual(a),
        residual_b: tightness_residual(b),
        projectively_equivalent: projectively_equivalent(a, b, equivalence_tol)?,
    })
}
