use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::PRUNE_TOL;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A 2×2 single-qubit operator, row major.
pub type Gate1 = [[Complex64; 2]; 2];

/// Dense polarization-qubit state. Qubit 1 is the leftmost tensor factor and
/// the most significant bit of the amplitude index; bit 0 is `|H⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitState {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl QubitState {
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::validation(format!(
                "amplitude vector of length {len} is not 2^n with n >= 1"
            )));
        }
        Ok(QubitState { n_qubits: len.trailing_zeros() as usize, amplitudes })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::from_amplitudes(amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        QubitState { n_qubits, amplitudes: amps }
    }

    /// `|+⟩^⊗n`.
    pub fn plus(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        QubitState { n_qubits, amplitudes: vec![a; dim] }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> QubitState {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return self.clone();
        }
        self.scaled(Complex64::new(1.0 / n, 0.0))
    }

    pub fn scaled(&self, factor: Complex64) -> QubitState {
        QubitState {
            n_qubits: self.n_qubits,
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
        }
    }

    fn check_len(&self, other: &QubitState) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::validation(format!(
                "qubit count mismatch: {} vs {}",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(())
    }

    pub fn inner(&self, other: &QubitState) -> Result<Complex64> {
        self.check_len(other)?;
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|⟨a|b⟩|² / (‖a‖²‖b‖²)`.
    pub fn fidelity(&self, other: &QubitState) -> Result<f64> {
        let denom = self.norm_sqr() * other.norm_sqr();
        if denom == 0.0 {
            return Err(Error::validation("fidelity with a zero state"));
        }
        Ok(self.inner(other)?.norm_sqr() / denom)
    }

    /// Bit of `qubit` (0-based, qubit 0 is the most significant) in `index`.
    pub fn bit(&self, index: usize, qubit: usize) -> usize {
        (index >> (self.n_qubits - 1 - qubit)) & 1
    }

    pub fn apply_single(&self, qubit: usize, gate: &Gate1) -> QubitState {
        assert!(qubit < self.n_qubits, "qubit {qubit} out of range");
        let mask = 1usize << (self.n_qubits - 1 - qubit);
        let mut out = self.amplitudes.clone();
        for i in 0..self.amplitudes.len() {
            if i & mask == 0 {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i | mask];
                out[i] = gate[0][0] * a0 + gate[0][1] * a1;
                out[i | mask] = gate[1][0] * a0 + gate[1][1] * a1;
            }
        }
        QubitState { n_qubits: self.n_qubits, amplitudes: out }
    }

    pub fn hadamard(&self, qubit: usize) -> QubitState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let g = [
            [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
            [Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
        ];
        self.apply_single(qubit, &g)
    }

    pub fn pauli_z(&self, qubit: usize) -> QubitState {
        let mut out = self.clone();
        for (i, a) in out.amplitudes.iter_mut().enumerate() {
            if self.bit(i, qubit) == 1 {
                *a = -*a;
            }
        }
        out
    }

    /// Controlled-phase between two qubits.
    pub fn cphase(&self, a: usize, b: usize) -> QubitState {
        let mut out = self.clone();
        for (i, amp) in out.amplitudes.iter_mut().enumerate() {
            if self.bit(i, a) == 1 && self.bit(i, b) == 1 {
                *amp = -*amp;
            }
        }
        out
    }

    /// `self ⊗ other`, with `self` on the leading qubits.
    pub fn tensor(&self, other: &QubitState) -> QubitState {
        let mut amps = Vec::with_capacity(self.amplitudes.len() * other.amplitudes.len());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        QubitState { n_qubits: self.n_qubits + other.n_qubits, amplitudes: amps }
    }

    /// Global phase fixed so the first nonzero amplitude is real positive.
    pub fn canonical_phase(&self) -> QubitState {
        match self.amplitudes.iter().find(|a| a.norm() >= PRUNE_TOL) {
            Some(a) => self.scaled(Complex64::from_polar(1.0, -a.arg())),
            None => self.clone(),
        }
    }

    /// Basis label such as `HHVV` for an index.
    pub fn basis_label(&self, index: usize) -> String {
        (0..self.n_qubits)
            .map(|q| if self.bit(index, q) == 0 { 'H' } else { 'V' })
            .collect()
    }

    /// Nonzero `(index, amplitude)` pairs in index order.
    pub fn support(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.amplitudes.iter().copied().enumerate().filter(|(_, a)| a.norm() >= PRUNE_TOL)
    }
}

impl fmt::Display for QubitState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, a) in self.support() {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "({:+.6}{:+.6}i)|{}⟩", a.re, a.im, self.basis_label(i))?;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}
