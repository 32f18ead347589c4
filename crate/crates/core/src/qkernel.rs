//! Two-qubit feature-map kernel.
//!
//! A scaled point `x = (x₁, x₂)` defines the diagonal phase gate
//!
//! ```text
//! U(x) = exp(i [φ₁ Z₀ + φ₂ Z₁ + φ₁₂ Z₀Z₁]),
//! φ₁ = x₁,  φ₂ = x₂,  φ₁₂ = (π − x₁)(π − x₂)
//! ```
//!
//! and the feature map `M(x) = U(x) · H⊗H · U(x) · H⊗H`, applied right to
//! left to `|00⟩`. The kernel is `K(x, z) = |⟨00| M(x)† M(z) |00⟩|²`, the
//! probability of reading `00` after running `M(z)` then `M(x)†`.
//!
//! Basis index `b = 2·b₁ + b₀` puts qubit 0 in the low bit, matching
//! [`crate::statevec`].

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::distance::SampleMode;
use crate::error::{QkmError, Result};
use crate::seed::{derive_seed, domain};
use crate::statevec::sample_ancilla;

pub const FEATURE_QUBITS: usize = 2;

/// Feature-map coefficients `(φ₁, φ₂, φ₁₂)` of a scaled 2-feature point.
pub fn phase_coefficients(x: &[f64]) -> Result<[f64; 3]> {
    if x.len() != FEATURE_QUBITS {
        return Err(QkmError::Shape(format!(
            "feature map takes {FEATURE_QUBITS} features, got {}",
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(QkmError::DegenerateInput("non-finite feature".into()));
    }
    Ok([x[0], x[1], (PI - x[0]) * (PI - x[1])])
}

/// First two features of `x`; the map is only defined on two.
pub fn project(x: &[f64]) -> Result<[f64; 2]> {
    match x {
        [a, b, ..] => Ok([*a, *b]),
        _ => Err(QkmError::Shape(format!(
            "feature map needs at least {FEATURE_QUBITS} features, got {}",
            x.len()
        ))),
    }
}

pub fn phase_unitary(x: &[f64]) -> Result<Matrix4<Complex64>> {
    let [phi1, phi2, phi12] = phase_coefficients(x)?;
    let mut u = Matrix4::zeros();
    for b in 0..4 {
        let z0 = if b & 1 == 0 { 1.0 } else { -1.0 };
        let z1 = if b & 2 == 0 { 1.0 } else { -1.0 };
        let angle = phi1 * z0 + phi2 * z1 + phi12 * z0 * z1;
        u[(b, b)] = Complex64::from_polar(1.0, angle);
    }
    Ok(u)
}

/// `H ⊗ H`.
pub fn hadamard_pair() -> Matrix4<Complex64> {
    Matrix4::from_fn(|r, c| {
        let sign = if (r & c).count_ones() % 2 == 0 {
            0.5
        } else {
            -0.5
        };
        Complex64::new(sign, 0.0)
    })
}

pub fn feature_map_unitary(x: &[f64]) -> Result<Matrix4<Complex64>> {
    let u = phase_unitary(x)?;
    let h = hadamard_pair();
    Ok(u * h * u * h)
}

/// `M(x)|00⟩`.
pub fn feature_state(x: &[f64]) -> Result<Vector4<Complex64>> {
    Ok(feature_map_unitary(x)?.column(0).into_owned())
}

fn fidelity(a: &Vector4<Complex64>, b: &Vector4<Complex64>) -> f64 {
    a.dotc(b).norm_sqr().clamp(0.0, 1.0)
}

fn sampled(k: f64, mode: SampleMode, seed: u64) -> Result<f64> {
    match mode {
        SampleMode::Exact => Ok(k),
        SampleMode::Shots(shots) => Ok(sample_ancilla(k, shots, seed)? as f64 / shots as f64),
    }
}

pub fn kernel_entry(x: &[f64], z: &[f64], mode: SampleMode, seed: u64) -> Result<f64> {
    mode.validate()?;
    let k = fidelity(&feature_state(x)?, &feature_state(z)?);
    sampled(k, mode, seed)
}

/// Square kernel matrix over one point set.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelGram {
    pub matrix: Vec<Vec<f64>>,
    pub mode: SampleMode,
}

impl KernelGram {
    pub fn new(matrix: Vec<Vec<f64>>, mode: SampleMode) -> Result<Self> {
        let n = matrix.len();
        if let Some(i) = matrix.iter().position(|r| r.len() != n) {
            return Err(QkmError::Shape(format!(
                "gram row {i} has {} entries, expected {n}",
                matrix[i].len()
            )));
        }
        Ok(Self { matrix, mode })
    }

    pub fn len(&self) -> usize {
        self.matrix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.is_empty()
    }

    /// Rows and columns restricted to `indices`, in that order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Vec<Vec<f64>> {
        rows.iter()
            .map(|&r| cols.iter().map(|&c| self.matrix[r][c]).collect())
            .collect()
    }

    /// CSV text: a header line `n=<N>,mode=<exact|shots>,shots=<S>` followed
    /// by `N` rows of `N` values in shortest round-trip notation.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "n={},mode={},shots={}\n",
            self.len(),
            self.mode.name(),
            self.mode.shots()
        );
        for row in &self.matrix {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    pub fn from_csv(text: &str, origin: &str) -> Result<Self> {
        let parse_err = |line: u64, message: String| QkmError::Parse {
            path: origin.to_string(),
            line,
            message,
        };
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing header".into()))?;
        let mut n = None;
        let mut mode = None;
        let mut shots = None;
        for field in header.split(',') {
            let (key, value) = field
                .trim()
                .split_once('=')
                .ok_or_else(|| parse_err(1, format!("malformed header field {field:?}")))?;
            match key {
                "n" => n = value.parse::<usize>().ok(),
                "mode" => mode = Some(value.to_string()),
                "shots" => shots = value.parse::<u64>().ok(),
                _ => return Err(parse_err(1, format!("unknown header key {key:?}"))),
            }
        }
        let (n, shots) = match (n, shots) {
            (Some(n), Some(s)) => (n, s),
            _ => return Err(parse_err(1, "header needs numeric n and shots".into())),
        };
        let mode = match mode.as_deref() {
            Some("exact") => SampleMode::Exact,
            Some("shots") if shots > 0 => SampleMode::Shots(shots),
            other => return Err(parse_err(1, format!("bad mode {other:?}"))),
        };
        let mut matrix = Vec::with_capacity(n);
        for (i, line) in lines.enumerate() {
            let line_no = i as u64 + 2;
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| parse_err(line_no, e.to_string()))?;
            if row.len() != n {
                return Err(parse_err(
                    line_no,
                    format!("{} values, expected {n}", row.len()),
                ));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(parse_err(line_no, "non-finite kernel entry".into()));
            }
            matrix.push(row);
        }
        if matrix.len() != n {
            return Err(parse_err(
                matrix.len() as u64 + 1,
                format!("{} rows, expected {n}", matrix.len()),
            ));
        }
        Self::new(matrix, mode)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| QkmError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| QkmError::io(path, e))?;
        Self::from_csv(&text, &path.display().to_string())
    }
}

fn feature_states(points: &[Vec<f64>]) -> Result<Vec<Vector4<Complex64>>> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            feature_state(&project(p)?)
                .map_err(|e| QkmError::DegenerateInput(format!("point {i}: {e}")))
        })
        .collect()
}

/// Gram matrix over `points` (first two features of each). Only the upper
/// triangle is evaluated; entry `(i, j)` draws its shots from a seed derived
/// from `(seed, i, j)`.
pub fn kernel_gram(points: &[Vec<f64>], mode: SampleMode, seed: u64) -> Result<KernelGram> {
    mode.validate()?;
    let states = feature_states(points)?;
    let n = states.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| {
                    let s = derive_seed(seed, &[domain::KERNEL_GRAM, i as u64, j as u64]);
                    sampled(fidelity(&states[i], &states[j]), mode, s)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut matrix = vec![vec![0.0; n]; n];
    for (i, row) in upper.into_iter().enumerate() {
        for (offset, v) in row.into_iter().enumerate() {
            matrix[i][i + offset] = v;
            matrix[i + offset][i] = v;
        }
    }
    KernelGram::new(matrix, mode)
}

/// `K(rows[r], cols[c])` for every pair, e.g. test points against training
/// points.
pub fn kernel_cross(
    rows: &[Vec<f64>],
    cols: &[Vec<f64>],
    mode: SampleMode,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    mode.validate()?;
    let row_states = feature_states(rows)?;
    let col_states = feature_states(cols)?;
    row_states
        .par_iter()
        .enumerate()
        .map(|(r, a)| {
            col_states
                .iter()
                .enumerate()
                .map(|(c, b)| {
                    let s = derive_seed(seed, &[domain::KERNEL_CROSS, r as u64, c as u64]);
                    sampled(fidelity(a, b), mode, s)
                })
                .collect()
        })
        .collect()
}
