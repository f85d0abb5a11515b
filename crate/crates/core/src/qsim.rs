//! Dense statevector simulation for small registers.
//!
//! Basis index `k` stores qubit 0 in its most significant bit, so on `n` qubits
//! qubit `q` corresponds to the bit `1 << (n - 1 - q)`. Gate kernels update
//! amplitude pairs in place; no unitary matrix is ever materialized.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RotationKind {
    Ry,
    Rz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TwoQubitKind {
    Cnot,
    Cz,
}

/// A concrete gate with a resolved angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Rotation { kind: RotationKind, qubit: usize, angle: f64 },
    Controlled { kind: TwoQubitKind, control: usize, target: usize },
}

impl Gate {
    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        match *self {
            Gate::Rotation { kind, qubit, angle } => state.apply_rotation(kind, qubit, angle),
            Gate::Controlled { kind, control, target } => {
                state.apply_two_qubit(kind, control, target)
            }
        }
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Rotation { kind, qubit, angle } => Gate::Rotation { kind, qubit, angle: -angle },
            g @ Gate::Controlled { .. } => g,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Returns `|0…0⟩` on `n_qubits` qubits.
    pub fn new(n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[0] = ONE;
        Ok(StateVector { n_qubits, amps })
    }

    /// Wraps raw amplitudes. The length must be a power of two; no normalization is applied.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::config(format!("amplitude count {len} is not a power of two ≥ 2")));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_register(n_qubits)?;
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::numeric("non-finite amplitude"));
        }
        Ok(StateVector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Resets to `|0…0⟩` without reallocating.
    pub fn reset(&mut self) {
        self.amps.fill(ZERO);
        self.amps[0] = ONE;
    }

    #[inline]
    fn bit(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::config(format!(
                "qubit {qubit} out of range for {}-qubit register",
                self.n_qubits
            )));
        }
        Ok(())
    }

    pub fn apply_rotation(&mut self, kind: RotationKind, qubit: usize, angle: f64) -> Result<()> {
        self.check_qubit(qubit)?;
        if !angle.is_finite() {
            return Err(Error::numeric(format!("non-finite {kind:?} angle on qubit {qubit}")));
        }
        self.rotate_unchecked(kind, qubit, angle);
        Ok(())
    }

    pub(crate) fn rotate_unchecked(&mut self, kind: RotationKind, qubit: usize, angle: f64) {
        let bit = self.bit(qubit);
        let (s, c) = (0.5 * angle).sin_cos();
        match kind {
            RotationKind::Ry => {
                for i in 0..self.amps.len() {
                    if i & bit == 0 {
                        let j = i | bit;
                        let a0 = self.amps[i];
                        let a1 = self.amps[j];
                        self.amps[i] = a0 * c - a1 * s;
                        self.amps[j] = a0 * s + a1 * c;
                    }
                }
            }
            RotationKind::Rz => {
                let lo = Complex64::new(c, -s);
                let hi = Complex64::new(c, s);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    *a *= if i & bit == 0 { lo } else { hi };
                }
            }
        }
    }

    pub fn apply_two_qubit(&mut self, kind: TwoQubitKind, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::config(format!("{kind:?} control and target are both {control}")));
        }
        self.controlled_unchecked(kind, control, target);
        Ok(())
    }

    pub(crate) fn controlled_unchecked(&mut self, kind: TwoQubitKind, control: usize, target: usize) {
        let cbit = self.bit(control);
        let tbit = self.bit(target);
        match kind {
            TwoQubitKind::Cnot => {
                for i in 0..self.amps.len() {
                    if i & cbit != 0 && i & tbit == 0 {
                        self.amps.swap(i, i | tbit);
                    }
                }
            }
            TwoQubitKind::Cz => {
                let both = cbit | tbit;
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & both == both {
                        *a = -*a;
                    }
                }
            }
        }
    }

    pub fn expectation(&self, obs: &ZProduct) -> Result<f64> {
        if let Some(&q) = obs.qubits.iter().find(|&&q| q >= self.n_qubits) {
            return Err(Error::config(format!(
                "observable qubit {q} out of range for {}-qubit register",
                self.n_qubits
            )));
        }
        Ok(self.expectation_mask(obs.mask(self.n_qubits)))
    }

    pub(crate) fn expectation_mask(&self, mask: usize) -> f64 {
        let e: f64 = self
            .amps
            .iter()
            .enumerate()
            .map(|(k, a)| parity_sign(k, mask) * a.norm_sqr())
            .sum();
        e.clamp(-1.0, 1.0)
    }

    /// Multiplies amplitude `k` by `diag[k]`.
    pub(crate) fn scale_diagonal(&mut self, diag: &[f64]) {
        debug_assert_eq!(diag.len(), self.amps.len());
        for (a, d) in self.amps.iter_mut().zip(diag) {
            *a *= *d;
        }
    }

    /// `Im ⟨bra| G |self⟩` with `G` the Pauli generator of a rotation on `qubit`
    /// (`Y` for RY, `Z` for RZ). For `R(θ) = exp(-iθG/2)` this is the derivative
    /// contribution `2 Re ⟨bra| (-i G/2) |self⟩`.
    pub(crate) fn generator_im_overlap(&self, bra: &StateVector, kind: RotationKind, qubit: usize) -> f64 {
        let bit = self.bit(qubit);
        let mut acc = ZERO;
        match kind {
            RotationKind::Ry => {
                // Y|0⟩ = i|1⟩, Y|1⟩ = -i|0⟩
                let i_unit = Complex64::new(0.0, 1.0);
                for i in 0..self.amps.len() {
                    if i & bit == 0 {
                        let j = i | bit;
                        acc += bra.amps[i].conj() * (-i_unit * self.amps[j])
                            + bra.amps[j].conj() * (i_unit * self.amps[i]);
                    }
                }
            }
            RotationKind::Rz => {
                for (i, (b, k)) in bra.amps.iter().zip(&self.amps).enumerate() {
                    let term = b.conj() * k;
                    if i & bit == 0 {
                        acc += term;
                    } else {
                        acc -= term;
                    }
                }
            }
        }
        acc.im
    }
}

fn check_register(n_qubits: usize) -> Result<()> {
    if !(1..=MAX_QUBITS).contains(&n_qubits) {
        return Err(Error::config(format!(
            "register size {n_qubits} outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

#[inline]
pub(crate) fn parity_sign(k: usize, mask: usize) -> f64 {
    if (k & mask).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Tensor product of Pauli-Z on a set of distinct qubits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ZProduct {
    qubits: Vec<usize>,
}

impl ZProduct {
    pub fn new(qubits: Vec<usize>) -> Result<Self> {
        if qubits.is_empty() {
            return Err(Error::config("observable needs at least one qubit"));
        }
        for (i, q) in qubits.iter().enumerate() {
            if qubits[..i].contains(q) {
                return Err(Error::config(format!("qubit {q} repeated in observable {qubits:?}")));
            }
        }
        Ok(ZProduct { qubits })
    }

    pub fn single(qubit: usize) -> Self {
        ZProduct { qubits: vec![qubit] }
    }

    /// `Z_0 Z_1 … Z_{n-1}`.
    pub fn all(n_qubits: usize) -> Self {
        ZProduct { qubits: (0..n_qubits).collect() }
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn mask(&self, n_qubits: usize) -> usize {
        self.qubits.iter().fold(0, |m, &q| m | (1 << (n_qubits - 1 - q)))
    }

    /// Diagonal of the observable in the computational basis.
    pub fn diagonal(&self, n_qubits: usize) -> Vec<f64> {
        let mask = self.mask(n_qubits);
        (0..1usize << n_qubits).map(|k| parity_sign(k, mask)).collect()
    }
}

impl std::fmt::Display for ZProduct {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for q in &self.qubits {
            write!(f, "Z{q}")?;
        }
        Ok(())
    }
}
