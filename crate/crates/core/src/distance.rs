//! Squared Euclidean distance from a simulated swap test.
//!
//! Register layout of the distance circuit, for an index register of `n`
//! qubits:
//!
//! | qubit        | role                                   |
//! |--------------|----------------------------------------|
//! | 0            | swap-test ancilla                      |
//! | 1            | internal ancilla of `ψ`                |
//! | 2 ..= n+1    | index register of `ψ`                  |
//! | n+2          | the single-qubit `φ` register          |
//!
//! The circuit is `H(0)`, `CSWAP(0; 1 ↔ n+2)`, `H(0)`, then measure qubit 0.
//! Its zero probability is `P0 = ½ + d² / (4Z)`, so `d² = Z (4 P0 − 2)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::encoding::{build_encoded_pair, check_features, EncodedPair};
use crate::error::{QkmError, Result};
use crate::statevec::{sample_ancilla, Statevector};

/// Shot count used when none is given.
pub const DEFAULT_SHOTS: u64 = 100_000;

/// How a measurement probability is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    /// Read the probability straight off the statevector.
    Exact,
    /// Estimate it from this many binomially sampled shots.
    Shots(u64),
}

impl SampleMode {
    pub fn shots(self) -> u64 {
        match self {
            SampleMode::Exact => 0,
            SampleMode::Shots(n) => n,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SampleMode::Exact => "exact",
            SampleMode::Shots(_) => "shots",
        }
    }

    pub(crate) fn validate(self) -> Result<()> {
        if self == SampleMode::Shots(0) {
            return Err(QkmError::Argument("shot count must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwapTestResult {
    pub p0: f64,
    pub mode: SampleMode,
    pub shots_used: u64,
    pub rng_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceEstimate {
    pub squared_distance: f64,
    pub result: SwapTestResult,
    pub z_norm: f64,
}

/// Qubit assignment of the distance circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwapTestLayout {
    index_qubits: usize,
}

impl SwapTestLayout {
    pub fn new(index_qubits: usize) -> Self {
        Self { index_qubits }
    }

    pub fn ancilla(&self) -> usize {
        0
    }

    pub fn psi_ancilla(&self) -> usize {
        1
    }

    pub fn index_register(&self) -> Vec<usize> {
        (2..2 + self.index_qubits).collect()
    }

    pub fn phi(&self) -> usize {
        2 + self.index_qubits
    }

    pub fn num_qubits(&self) -> usize {
        3 + self.index_qubits
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    /// Load a prepared state onto a block of qubits.
    Prepare {
        label: &'static str,
        qubits: Vec<usize>,
    },
    Hadamard(usize),
    ControlledSwap {
        control: usize,
        a: Vec<usize>,
        b: Vec<usize>,
    },
    MeasureZero(usize),
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Prepare { label, qubits } => write!(f, "prepare {label} {qubits:?}"),
            Gate::Hadamard(q) => write!(f, "h {q}"),
            Gate::ControlledSwap { control, a, b } => write!(f, "cswap {control} {a:?} {b:?}"),
            Gate::MeasureZero(q) => write!(f, "measure {q}"),
        }
    }
}

/// Gate list of the distance circuit in application order.
pub fn swap_test_circuit(layout: SwapTestLayout) -> Vec<Gate> {
    let mut psi_qubits = vec![layout.psi_ancilla()];
    psi_qubits.extend(layout.index_register());
    vec![
        Gate::Prepare {
            label: "psi",
            qubits: psi_qubits,
        },
        Gate::Prepare {
            label: "phi",
            qubits: vec![layout.phi()],
        },
        Gate::Hadamard(layout.ancilla()),
        Gate::ControlledSwap {
            control: layout.ancilla(),
            a: vec![layout.psi_ancilla()],
            b: vec![layout.phi()],
        },
        Gate::Hadamard(layout.ancilla()),
        Gate::MeasureZero(layout.ancilla()),
    ]
}

/// Text dump of a gate list, one gate per line.
pub fn circuit_trace(gates: &[Gate]) -> String {
    gates.iter().map(|g| format!("{g}\n")).collect()
}

/// Runs the swap test between `ψ`'s ancilla and `φ` and returns the ancilla
/// zero probability, exactly or as a shot frequency.
pub fn swap_test(pair: &EncodedPair, mode: SampleMode, rng_seed: u64) -> Result<SwapTestResult> {
    mode.validate()?;
    let layout = SwapTestLayout::new(pair.index_qubits());
    let mut p_exact = None;
    let mut state = Statevector::zero(1)?;
    for gate in swap_test_circuit(layout) {
        match gate {
            Gate::Prepare { label: "psi", .. } => state = state.tensor(&pair.psi)?,
            Gate::Prepare { .. } => state = state.tensor(&pair.phi)?,
            Gate::Hadamard(q) => state.hadamard(q)?,
            Gate::ControlledSwap { control, a, b } => state.cswap(control, &a, &b)?,
            Gate::MeasureZero(q) => p_exact = Some(state.zero_probability(q)?),
        }
    }
    let p_exact = p_exact.expect("circuit ends in a measurement");
    let (p0, shots_used) = match mode {
        SampleMode::Exact => (p_exact, 0),
        SampleMode::Shots(shots) => {
            let zeros = sample_ancilla(p_exact, shots, rng_seed)?;
            (zeros as f64 / shots as f64, shots)
        }
    };
    Ok(SwapTestResult {
        p0,
        mode,
        shots_used,
        rng_seed,
    })
}

/// `d² = max(0, Z (4 P0 − 2))`.
///
/// Shot noise can push `P0` below ½; the estimate is then clamped to zero.
pub fn distance_from_p0(result: SwapTestResult, z_norm: f64) -> DistanceEstimate {
    DistanceEstimate {
        squared_distance: (z_norm * (4.0 * result.p0 - 2.0)).max(0.0),
        result,
        z_norm,
    }
}

pub fn quantum_distance(
    xi: &[f64],
    xj: &[f64],
    mode: SampleMode,
    rng_seed: u64,
) -> Result<DistanceEstimate> {
    let pair = build_encoded_pair(xi, xj)?;
    let result = swap_test(&pair, mode, rng_seed)?;
    Ok(distance_from_p0(result, pair.z_norm))
}

/// Plain `Σ (xi − xj)²`.
pub fn classical_distance_oracle(xi: &[f64], xj: &[f64]) -> Result<f64> {
    if xi.len() != xj.len() {
        return Err(QkmError::Shape(format!(
            "vectors of dimension {} and {}",
            xi.len(),
            xj.len()
        )));
    }
    check_features(xi)?;
    check_features(xj)?;
    Ok(xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum())
}
