//! Dense statevector simulation.
//!
//! Only the primitives the swap-test and feature-map circuits need are
//! provided: basis preparation, direct amplitude loading, Hadamard,
//! controlled swap of qubit groups, single-qubit zero probability and
//! binomial shot sampling of that probability.
//!
//! Qubit `q` corresponds to bit `q` of the basis-state index, so basis state
//! `0b101` on three qubits has qubits 0 and 2 in `|1⟩`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand_distr::{Binomial, Distribution};

use crate::error::{QkmError, Result};
use crate::seed::rng_from_seed;

/// Default cap on register width: 2^24 amplitudes is 256 MiB of `Complex64`.
pub const DEFAULT_MAX_QUBITS: usize = 24;

/// Mass tolerated on target basis states before amplitude loading.
const PREP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// `|0…0⟩` on `num_qubits` qubits, capped at [`DEFAULT_MAX_QUBITS`].
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::zero_with_cap(num_qubits, DEFAULT_MAX_QUBITS)
    }

    pub fn zero_with_cap(num_qubits: usize, max_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > max_qubits {
            return Err(QkmError::Capacity(format!(
                "{num_qubits} qubits requested, allowed range is 1..={max_qubits}"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        let mut state = Self::zero(num_qubits)?;
        if index >= state.amplitudes.len() {
            return Err(QkmError::Argument(format!(
                "basis index {index} does not fit in {num_qubits} qubits"
            )));
        }
        state.amplitudes[0] = Complex64::new(0.0, 0.0);
        state.amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    /// Wraps raw amplitudes. The length must be a power of two and the norm 1.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(QkmError::Shape(format!(
                "amplitude count {len} is not a power of two ≥ 2"
            )));
        }
        let num_qubits = len.trailing_zeros() as usize;
        if num_qubits > DEFAULT_MAX_QUBITS {
            return Err(QkmError::Capacity(format!("{num_qubits} qubits")));
        }
        let state = Self {
            num_qubits,
            amplitudes,
        };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(QkmError::DegenerateInput(format!(
                "amplitudes have squared norm {norm}, expected 1"
            )));
        }
        Ok(state)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Tensor product with `self` on the low qubits and `high` above them.
    pub fn tensor(&self, high: &Statevector) -> Result<Statevector> {
        let num_qubits = self.num_qubits + high.num_qubits;
        if num_qubits > DEFAULT_MAX_QUBITS {
            return Err(QkmError::Capacity(format!(
                "{num_qubits} qubits exceeds the cap of {DEFAULT_MAX_QUBITS}"
            )));
        }
        let amplitudes = high
            .amplitudes
            .iter()
            .flat_map(|h| self.amplitudes.iter().map(move |l| h * l))
            .collect();
        Ok(Statevector {
            num_qubits,
            amplitudes,
        })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Statevector) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return Err(QkmError::Shape(format!(
                "inner product of {}-qubit and {}-qubit states",
                self.num_qubits, other.num_qubits
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    fn check_qubit(&self, index: usize) -> Result<()> {
        if index >= self.num_qubits {
            return Err(QkmError::Bounds {
                index,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    /// Loads `coefficients / |coefficients|` onto `targets`, which must
    /// currently hold `|0…0⟩`.
    ///
    /// Coefficient `p` goes to the basis state whose bit `k` of `p` is placed
    /// on `targets[k]`; missing trailing coefficients are zero. The rest of
    /// the register is left as it was.
    pub fn prepare_amplitudes(&mut self, coefficients: &[f64], targets: &[usize]) -> Result<()> {
        if targets.is_empty() {
            return Err(QkmError::Argument("no target qubits".into()));
        }
        for &t in targets {
            self.check_qubit(t)?;
        }
        check_distinct(targets)?;
        if coefficients.len() > 1 << targets.len() {
            return Err(QkmError::Shape(format!(
                "{} coefficients do not fit in {} qubits",
                coefficients.len(),
                targets.len()
            )));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(QkmError::DegenerateInput("non-finite coefficient".into()));
        }
        let norm = coefficients.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(QkmError::DegenerateInput(
                "cannot encode an all-zero coefficient vector".into(),
            ));
        }

        let target_mask: usize = targets.iter().map(|&t| 1usize << t).sum();
        let occupied: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & target_mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        if occupied > PREP_TOLERANCE {
            return Err(QkmError::Precondition(format!(
                "target qubits {targets:?} are not in |0…0⟩ (mass {occupied:e} outside)"
            )));
        }

        let offsets: Vec<(usize, f64)> = coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(p, c)| (spread_bits(p, targets), c / norm))
            .collect();
        let mut next = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        for (base, amp) in self.amplitudes.iter().enumerate() {
            if base & target_mask != 0 || *amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            for &(offset, c) in &offsets {
                next[base | offset] = amp * c;
            }
        }
        self.amplitudes = next;
        Ok(())
    }

    pub fn hadamard(&mut self, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        let stride = 1usize << qubit;
        for block in (0..self.amplitudes.len()).step_by(stride << 1) {
            for i in block..block + stride {
                let a = self.amplitudes[i];
                let b = self.amplitudes[i + stride];
                self.amplitudes[i] = (a + b) * FRAC_1_SQRT_2;
                self.amplitudes[i + stride] = (a - b) * FRAC_1_SQRT_2;
            }
        }
        Ok(())
    }

    /// Controlled swap: where `control` is `|1⟩`, qubit `a[k]` is exchanged
    /// with qubit `b[k]` for every `k`.
    pub fn cswap(&mut self, control: usize, a: &[usize], b: &[usize]) -> Result<()> {
        if a.len() != b.len() {
            return Err(QkmError::Shape(format!(
                "swap groups have lengths {} and {}",
                a.len(),
                b.len()
            )));
        }
        self.check_qubit(control)?;
        for &q in a.iter().chain(b) {
            self.check_qubit(q)?;
        }
        let mut all = Vec::with_capacity(1 + a.len() + b.len());
        all.push(control);
        all.extend_from_slice(a);
        all.extend_from_slice(b);
        check_distinct(&all)?;

        let control_bit = 1usize << control;
        for i in 0..self.amplitudes.len() {
            if i & control_bit == 0 {
                continue;
            }
            let j = swap_bit_groups(i, a, b);
            if j > i {
                self.amplitudes.swap(i, j);
            }
        }
        Ok(())
    }

    /// Probability that measuring `qubit` yields 0.
    pub fn zero_probability(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let bit = 1usize << qubit;
        let p: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        Ok(p.clamp(0.0, 1.0))
    }
}

fn check_distinct(indices: &[usize]) -> Result<()> {
    for (n, q) in indices.iter().enumerate() {
        if indices[..n].contains(q) {
            return Err(QkmError::Alias(format!(
                "qubit {q} appears more than once in {indices:?}"
            )));
        }
    }
    Ok(())
}

/// Places bit `k` of `value` at position `targets[k]`.
fn spread_bits(value: usize, targets: &[usize]) -> usize {
    targets
        .iter()
        .enumerate()
        .filter(|(k, _)| value >> k & 1 == 1)
        .map(|(_, &t)| 1usize << t)
        .sum()
}

fn swap_bit_groups(index: usize, a: &[usize], b: &[usize]) -> usize {
    let mut out = index;
    for (&qa, &qb) in a.iter().zip(b) {
        let bit_a = index >> qa & 1;
        let bit_b = index >> qb & 1;
        if bit_a != bit_b {
            out ^= (1 << qa) | (1 << qb);
        }
    }
    out
}

/// Number of zero outcomes in `shots` measurements of a qubit whose zero
/// probability is `p0`.
///
/// Only the measured qubit's marginal matters, which is Bernoulli(`p0`) per
/// shot, so the count is drawn directly from Binomial(`shots`, `p0`) on a
/// ChaCha8 stream seeded with `seed`.
pub fn sample_ancilla(p0: f64, shots: u64, seed: u64) -> Result<u64> {
    if shots == 0 {
        return Err(QkmError::Argument("shot count must be at least 1".into()));
    }
    if !(-1e-9..=1.0 + 1e-9).contains(&p0) || p0.is_nan() {
        return Err(QkmError::Argument(format!(
            "probability {p0} outside [0, 1]"
        )));
    }
    let p0 = p0.clamp(0.0, 1.0);
    let binomial = Binomial::new(shots, p0)
        .map_err(|e| QkmError::Argument(format!("binomial({shots}, {p0}): {e}")))?;
    Ok(binomial.sample(&mut rng_from_seed(seed)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn assert_amps(state: &Statevector, expected: &[Complex64], tol: f64) {
        assert_eq!(state.amplitudes().len(), expected.len());
        for (i, (a, e)) in state.amplitudes().iter().zip(expected).enumerate() {
            assert!((a - e).norm() <= tol, "amp {i}: {a} vs {e}");
        }
    }

    fn random_state(num_qubits: usize, seed: u64) -> Statevector {
        let mut rng = rng_from_seed(seed);
        let mut amps: Vec<Complex64> = (0..1 << num_qubits)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        Statevector::from_amplitudes(amps).unwrap()
    }

    #[test]
    fn zero_state_examples() {
        assert_amps(&Statevector::zero(1).unwrap(), &[c(1.0), c(0.0)], 0.0);
        assert_amps(
            &Statevector::zero(2).unwrap(),
            &[c(1.0), c(0.0), c(0.0), c(0.0)],
            0.0,
        );
    }

    #[test]
    fn zero_state_at_cap() {
        let s = Statevector::zero(24).unwrap();
        assert_eq!(s.amplitudes().len(), 1 << 24);
        assert_eq!(s.norm_sqr(), 1.0);
    }

    #[test]
    fn qubit_cap_is_enforced() {
        assert!(matches!(Statevector::zero(0), Err(QkmError::Capacity(_))));
        assert!(matches!(Statevector::zero(25), Err(QkmError::Capacity(_))));
        assert!(Statevector::zero_with_cap(4, 3).is_err());
        assert!(Statevector::zero_with_cap(3, 3).is_ok());
    }

    #[test]
    fn amplitude_preparation_examples() {
        let mut s = Statevector::zero(1).unwrap();
        s.prepare_amplitudes(&[1.0, 0.0], &[0]).unwrap();
        assert_amps(&s, &[c(1.0), c(0.0)], 0.0);

        let mut s = Statevector::zero(1).unwrap();
        s.prepare_amplitudes(&[3.0, 4.0], &[0]).unwrap();
        assert_amps(&s, &[c(0.6), c(0.8)], 1e-15);

        let mut s = Statevector::zero(2).unwrap();
        s.prepare_amplitudes(&[1.0, 1.0, 1.0], &[0, 1]).unwrap();
        let third = 1.0 / 3f64.sqrt();
        assert_amps(&s, &[c(third), c(third), c(third), c(0.0)], 1e-15);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn amplitude_preparation_respects_target_order() {
        // coefficient index bit 0 -> qubit 2, bit 1 -> qubit 0
        let mut s = Statevector::zero(3).unwrap();
        s.prepare_amplitudes(&[0.0, 1.0, 0.0, 0.0], &[2, 0])
            .unwrap();
        assert_eq!(s.amplitudes()[0b100], c(1.0));
        let mut s = Statevector::zero(3).unwrap();
        s.prepare_amplitudes(&[0.0, 0.0, 1.0, 0.0], &[2, 0])
            .unwrap();
        assert_eq!(s.amplitudes()[0b001], c(1.0));
    }

    #[test]
    fn amplitude_preparation_keeps_other_qubits() {
        let mut s = Statevector::zero(2).unwrap();
        s.hadamard(0).unwrap();
        s.prepare_amplitudes(&[0.6, 0.8], &[1]).unwrap();
        let h = FRAC_1_SQRT_2;
        assert_amps(&s, &[c(0.6 * h), c(0.6 * h), c(0.8 * h), c(0.8 * h)], 1e-15);
    }

    #[test]
    fn amplitude_preparation_errors() {
        let mut s = Statevector::zero(1).unwrap();
        assert!(matches!(
            s.prepare_amplitudes(&[0.0, 0.0], &[0]),
            Err(QkmError::DegenerateInput(_))
        ));
        let mut s = Statevector::basis(1, 1).unwrap();
        assert!(matches!(
            s.prepare_amplitudes(&[1.0, 1.0], &[0]),
            Err(QkmError::Precondition(_))
        ));
        let mut s = Statevector::zero(2).unwrap();
        assert!(matches!(
            s.prepare_amplitudes(&[1.0, 1.0, 1.0], &[0]),
            Err(QkmError::Shape(_))
        ));
        assert!(matches!(
            s.prepare_amplitudes(&[1.0], &[0, 0]),
            Err(QkmError::Alias(_))
        ));
        assert!(matches!(
            s.prepare_amplitudes(&[1.0], &[2]),
            Err(QkmError::Bounds { index: 2, .. })
        ));
    }

    #[test]
    fn tensor_places_self_on_low_qubits() {
        let low = Statevector::basis(1, 1).unwrap();
        let high = Statevector::basis(2, 0b10).unwrap();
        let joint = low.tensor(&high).unwrap();
        assert_eq!(joint.num_qubits(), 3);
        assert_eq!(joint.amplitudes()[0b101], c(1.0));
        assert!(Statevector::zero(20)
            .unwrap()
            .tensor(&Statevector::zero(5).unwrap())
            .is_err());
    }

    #[test]
    fn hadamard_examples() {
        let h = FRAC_1_SQRT_2;
        let mut s = Statevector::zero(1).unwrap();
        s.hadamard(0).unwrap();
        assert_amps(&s, &[c(h), c(h)], 1e-15);

        let mut s = Statevector::basis(1, 1).unwrap();
        s.hadamard(0).unwrap();
        assert_amps(&s, &[c(h), c(-h)], 1e-15);

        assert!(matches!(
            s.hadamard(1),
            Err(QkmError::Bounds {
                index: 1,
                num_qubits: 1
            })
        ));
    }

    #[test]
    fn cswap_examples() {
        // qubit 0 control, qubit 1 = a, qubit 2 = b; |1⟩|0⟩|1⟩ has control
        // and b set: index 0b101.
        let mut s = Statevector::basis(3, 0b101).unwrap();
        s.cswap(0, &[1], &[2]).unwrap();
        assert_eq!(s.amplitudes()[0b011], c(1.0));

        let mut s = Statevector::basis(3, 0b100).unwrap();
        s.cswap(0, &[1], &[2]).unwrap();
        assert_eq!(s.amplitudes()[0b100], c(1.0));
    }

    #[test]
    fn cswap_with_control_off_is_identity() {
        let mut s = random_state(4, 3);
        // zero out control-on components, renormalize
        let mut amps = s.amplitudes().to_vec();
        for (i, a) in amps.iter_mut().enumerate() {
            if i & 1 == 1 {
                *a = c(0.0);
            }
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        s = Statevector::from_amplitudes(amps).unwrap();
        let before = s.clone();
        s.cswap(0, &[1], &[3]).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn cswap_errors() {
        let mut s = Statevector::zero(3).unwrap();
        assert!(matches!(s.cswap(0, &[1], &[1]), Err(QkmError::Alias(_))));
        assert!(matches!(s.cswap(1, &[1], &[2]), Err(QkmError::Alias(_))));
        assert!(matches!(s.cswap(0, &[1, 2], &[]), Err(QkmError::Shape(_))));
    }

    #[test]
    fn zero_probability_examples() {
        let mut s = Statevector::zero(1).unwrap();
        assert_eq!(s.zero_probability(0).unwrap(), 1.0);
        s.hadamard(0).unwrap();
        assert!((s.zero_probability(0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn swap_test_of_identical_states_gives_one() {
        // ancilla 0, register A = qubit 1, register B = qubit 2, both |+⟩-ish.
        let mut s = Statevector::zero(3).unwrap();
        s.prepare_amplitudes(&[0.3, -0.7], &[1]).unwrap();
        s.prepare_amplitudes(&[0.3, -0.7], &[2]).unwrap();
        s.hadamard(0).unwrap();
        s.cswap(0, &[1], &[2]).unwrap();
        s.hadamard(0).unwrap();
        assert!((s.zero_probability(0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_edge_cases() {
        assert_eq!(sample_ancilla(1.0, 100, 1).unwrap(), 100);
        assert_eq!(sample_ancilla(0.0, 100, 1).unwrap(), 0);
        assert!(matches!(
            sample_ancilla(0.5, 0, 1),
            Err(QkmError::Argument(_))
        ));
        assert!(sample_ancilla(1.5, 10, 1).is_err());
        assert!(sample_ancilla(f64::NAN, 10, 1).is_err());
    }

    #[test]
    fn sampling_concentrates_like_bernoulli_loop() {
        let (p0, shots) = (0.75, 100_000u64);
        let sigma = (shots as f64 * p0 * (1.0 - p0)).sqrt();
        let count = sample_ancilla(p0, shots, 99).unwrap();
        assert!((count as f64 - 75_000.0).abs() <= 6.0 * sigma);

        // Per-shot Bernoulli loop as the independent reference.
        let mut rng = rng_from_seed(12345);
        let looped = (0..shots).filter(|_| rng.random::<f64>() < p0).count() as f64;
        assert!((looped - 75_000.0).abs() <= 6.0 * sigma);

        // Over many seeds the binomial sampler and the loop share mean and spread.
        let draws: Vec<f64> = (0..400)
            .map(|s| sample_ancilla(p0, 1000, s).unwrap() as f64)
            .collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (draws.len() - 1) as f64;
        assert!((mean - 750.0).abs() < 4.0 * (187.5f64 / 400.0).sqrt());
        assert!((var / 187.5 - 1.0).abs() < 0.25);
    }

    #[test]
    fn sampling_is_reproducible() {
        let a = sample_ancilla(0.4321, 100_000, 77).unwrap();
        let b = sample_ancilla(0.4321, 100_000, 77).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn gates_preserve_norm_and_are_involutions(seed in any::<u64>(), q in 0usize..4) {
            let original = random_state(4, seed);
            let mut s = original.clone();
            s.hadamard(q).unwrap();
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
            let p = s.zero_probability(q).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
            s.hadamard(q).unwrap();
            for (a, b) in s.amplitudes().iter().zip(original.amplitudes()) {
                prop_assert!((a - b).norm() < 1e-12);
            }

            let others: Vec<usize> = (0..4).filter(|&x| x != q).collect();
            s.cswap(q, &others[..1], &others[1..2]).unwrap();
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
            s.cswap(q, &others[..1], &others[1..2]).unwrap();
            for (a, b) in s.amplitudes().iter().zip(original.amplitudes()) {
                prop_assert!((a - b).norm() < 1e-12);
            }
        }
    }
}
