//! Amplitude encoding of feature vectors and the paired states used by the
//! swap-test distance.
//!
//! A vector `x` of dimension `P` lives on `n = max(1, ⌈log₂P⌉)` index qubits
//! with amplitude `x[p] / |x|` on basis state `p` and zeros above `P`.
//!
//! For a pair `(xi, xj)` the distance circuit needs
//!
//! ```text
//! ψ = (|0⟩⊗|xi⟩ + |1⟩⊗|xj⟩) / √2          (ancilla ⊗ index register)
//! φ = (|xi| |0⟩ − |xj| |1⟩) / √Z,   Z = |xi|² + |xj|²
//! ```
//!
//! Inside `ψ` the ancilla is local qubit 0 and the index register occupies
//! qubits `1..=n`.

use std::ops::Deref;

use crate::error::{QkmError, Result};
use crate::statevec::Statevector;

/// A finite, non-empty real feature row.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        check_features(&components)?;
        Ok(Self(components))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for FeatureVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for FeatureVector {
    type Error = QkmError;

    fn try_from(components: Vec<f64>) -> Result<Self> {
        Self::new(components)
    }
}

pub(crate) fn check_features(x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(QkmError::Shape("feature vector has no components".into()));
    }
    if let Some(p) = x.iter().position(|v| !v.is_finite()) {
        return Err(QkmError::DegenerateInput(format!(
            "component {p} is not finite ({})",
            x[p]
        )));
    }
    Ok(())
}

pub fn euclidean_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Index-register width for dimension `dim`; at least one qubit.
pub fn index_qubits(dim: usize) -> usize {
    dim.max(2).next_power_of_two().trailing_zeros() as usize
}

fn nonzero_norm(x: &[f64]) -> Result<f64> {
    check_features(x)?;
    let norm = euclidean_norm(x);
    if norm == 0.0 {
        return Err(QkmError::DegenerateInput(
            "zero vector cannot be amplitude encoded".into(),
        ));
    }
    Ok(norm)
}

pub fn amplitude_encode(x: &[f64]) -> Result<Statevector> {
    nonzero_norm(x)?;
    let n = index_qubits(x.len());
    let mut state = Statevector::zero(n)?;
    let targets: Vec<usize> = (0..n).collect();
    state.prepare_amplitudes(x, &targets)?;
    Ok(state)
}

/// The `ψ`, `φ` pair and normalisation for one distance query.
#[derive(Debug, Clone)]
pub struct EncodedPair {
    pub psi: Statevector,
    pub phi: Statevector,
    pub z_norm: f64,
    pub mag_i: f64,
    pub mag_j: f64,
}

impl EncodedPair {
    /// Width of the index register inside `psi`.
    pub fn index_qubits(&self) -> usize {
        self.psi.num_qubits() - 1
    }
}

pub fn build_encoded_pair(xi: &[f64], xj: &[f64]) -> Result<EncodedPair> {
    if xi.len() != xj.len() {
        return Err(QkmError::Shape(format!(
            "vectors of dimension {} and {}",
            xi.len(),
            xj.len()
        )));
    }
    let mag_i = nonzero_norm(xi)?;
    let mag_j = nonzero_norm(xj)?;
    let n = index_qubits(xi.len());

    // Ancilla is bit 0 of the coefficient index, the feature index sits above.
    let mut coefficients = vec![0.0; 2 << n];
    for (p, (a, b)) in xi.iter().zip(xj).enumerate() {
        coefficients[2 * p] = a / mag_i;
        coefficients[2 * p + 1] = b / mag_j;
    }
    let mut psi = Statevector::zero(n + 1)?;
    let targets: Vec<usize> = (0..=n).collect();
    psi.prepare_amplitudes(&coefficients, &targets)?;

    let mut phi = Statevector::zero(1)?;
    phi.prepare_amplitudes(&[mag_i, -mag_j], &[0])?;

    Ok(EncodedPair {
        psi,
        phi,
        z_norm: mag_i * mag_i + mag_j * mag_j,
        mag_i,
        mag_j,
    })
}
