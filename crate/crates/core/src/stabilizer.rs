//! Linear cluster states and their stabilizer groups.
//!
//! Two reference constructions are provided. [`cluster_state`] grows the chain
//! one qubit at a time with `|C_n⟩ = (|C_{n−1}⟩|H⟩ + Z_{n−1}|C_{n−1}⟩|V⟩)/√2`,
//! starting from `|+⟩`. [`cluster_state_by_cphase`] starts from `|+⟩^⊗n` and
//! applies controlled-phase gates between neighbours; the two must agree.
//!
//! The four-qubit `MainText` convention is the standard chain with Hadamards on
//! its end qubits, `½(|HHHH⟩ + |HHVV⟩ + |VVHH⟩ − |VVVV⟩)`.

use std::collections::HashSet;
use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};
use crate::qubit::QubitState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// Controlled-phase chain on `|+⟩` qubits.
    Standard,
    /// Standard chain with Hadamards on the first and last qubit (n = 4 only).
    MainText,
}

pub fn cluster_state(n: usize, convention: Convention) -> Result<QubitState> {
    if n == 0 {
        return Err(Error::validation("cluster state needs at least one qubit"));
    }
    let mut state = QubitState::plus(1);
    for _ in 1..n {
        let flipped = state.pauli_z(state.n_qubits() - 1);
        let mut amps = Vec::with_capacity(state.amplitudes().len() * 2);
        for (a, b) in state.amplitudes().iter().zip(flipped.amplitudes()) {
            amps.push(a * FRAC_1_SQRT_2);
            amps.push(b * FRAC_1_SQRT_2);
        }
        state = QubitState::from_amplitudes(amps)?;
    }
    match convention {
        Convention::Standard => Ok(state),
        Convention::MainText if n == 4 => Ok(state.hadamard(0).hadamard(n - 1)),
        Convention::MainText => Err(Error::validation(format!(
            "main-text convention is defined for 4 qubits, not {n}"
        ))),
    }
}

pub fn cluster_state_by_cphase(n: usize) -> Result<QubitState> {
    if n == 0 {
        return Err(Error::validation("cluster state needs at least one qubit"));
    }
    let mut state = QubitState::plus(n);
    for k in 0..n.saturating_sub(1) {
        state = state.cphase(k, k + 1);
    }
    Ok(state)
}

/// Generators fixing [`cluster_state`]: `Z_{i−1} X_i Z_{i+1}` for the standard
/// chain; `ZZII, XXZI, IZXX, IIZZ` for the four-qubit main-text form.
pub fn cluster_generators(n: usize, convention: Convention) -> Result<Vec<PauliString>> {
    match convention {
        Convention::Standard => {
            if n == 0 {
                return Err(Error::validation("cluster state needs at least one qubit"));
            }
            Ok((0..n)
                .map(|i| {
                    let mut letters = vec![Pauli::I; n];
                    letters[i] = Pauli::X;
                    if i > 0 {
                        letters[i - 1] = Pauli::Z;
                    }
                    if i + 1 < n {
                        letters[i + 1] = Pauli::Z;
                    }
                    PauliString::new(1, letters)
                })
                .collect())
        }
        Convention::MainText if n == 4 => ["ZZII", "XXZI", "IZXX", "IIZZ"]
            .iter()
            .map(|s| s.parse())
            .collect(),
        Convention::MainText => Err(Error::validation(format!(
            "main-text convention is defined for 4 qubits, not {n}"
        ))),
    }
}

/// One group element with the generators (0-based) whose product it is.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilizerElement {
    pub operator: PauliString,
    pub generators: Vec<usize>,
}

impl StabilizerElement {
    /// `g1g2`-style label; `I` for the identity.
    pub fn label(&self) -> String {
        if self.generators.is_empty() {
            return "I".to_string();
        }
        self.generators.iter().map(|g| format!("g{}", g + 1)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilizerGroup {
    n_qubits: usize,
    generators: Vec<PauliString>,
    elements: Vec<StabilizerElement>,
}

impl StabilizerGroup {
    /// Closes a set of independent, commuting, Hermitian generators.
    ///
    /// Elements are ordered by number of generators, then lexicographically by
    /// generator index, with the identity last.
    pub fn new(generators: Vec<PauliString>) -> Result<Self> {
        let k = generators.len();
        if k == 0 {
            return Err(Error::validation("stabilizer group needs at least one generator"));
        }
        if k > 20 {
            return Err(Error::validation(format!("{k} generators is too many to enumerate")));
        }
        let n = generators[0].len();
        for (i, g) in generators.iter().enumerate() {
            if g.len() != n {
                return Err(Error::validation("generators have different lengths"));
            }
            if g.sign().is_none() {
                return Err(Error::validation(format!("generator {g} is not Hermitian")));
            }
            for h in &generators[i + 1..] {
                if !g.commutes_with(h) {
                    return Err(Error::validation(format!("generators {g} and {h} anticommute")));
                }
            }
        }

        let mut elements = Vec::with_capacity(1 << k);
        let mut seen = HashSet::new();
        for mask in 0u32..(1 << k) {
            let members: Vec<usize> = (0..k).filter(|&i| mask & (1 << i) != 0).collect();
            let op = members
                .iter()
                .fold(PauliString::identity(n), |acc, &i| &acc * &generators[i]);
            if op.sign().is_none() {
                return Err(Error::validation(format!("product {op} has a complex phase")));
            }
            if !seen.insert(op.letters().to_vec()) {
                return Err(Error::validation("generators are not independent"));
            }
            elements.push(StabilizerElement { operator: op, generators: members });
        }
        elements.sort_by(|a, b| {
            let key = |e: &StabilizerElement| (e.generators.is_empty(), e.generators.len());
            key(a).cmp(&key(b)).then_with(|| a.generators.cmp(&b.generators))
        });
        Ok(StabilizerGroup { n_qubits: n, generators, elements })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    pub fn elements(&self) -> &[StabilizerElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Element with the given letters, whatever its sign.
    pub fn find(&self, letters: &[Pauli]) -> Option<&StabilizerElement> {
        self.elements.iter().find(|e| e.operator.letters() == letters)
    }

    /// `(1/2^N) Σ σ`: the projector onto the stabilized state when the group
    /// is maximal.
    pub fn projector(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n_qubits;
        let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
        for e in &self.elements {
            acc += e.operator.to_matrix();
        }
        acc / Complex64::new(self.elements.len() as f64, 0.0)
    }

    /// Mean expectation of every element on `state`.
    pub fn fidelity(&self, state: &QubitState) -> Result<f64> {
        let values = self
            .elements
            .iter()
            .map(|e| expectation(state, &e.operator))
            .collect::<Result<Vec<_>>>()?;
        fidelity_from_expectations(&values)
    }
}

pub fn expectation(state: &QubitState, op: &PauliString) -> Result<f64> {
    op.expectation(state)
}

/// Arithmetic mean of a full group's `2^N` expectation values.
pub fn fidelity_from_expectations(values: &[f64]) -> Result<f64> {
    if values.len() < 2 || !values.len().is_power_of_two() {
        return Err(Error::validation(format!(
            "expected 2^N stabilizer expectations, got {}",
            values.len()
        )));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn base_case_is_plus() {
        let c1 = cluster_state(1, Convention::Standard).unwrap();
        assert_abs_diff_eq!(c1.fidelity(&QubitState::plus(1)).unwrap(), 1.0);
    }

    #[test]
    fn two_qubit_chain() {
        // (|+H⟩ + |−V⟩)/√2 : HH, HV, VH, VV = 1/2, 1/2, 1/2, -1/2
        let c2 = cluster_state(2, Convention::Standard).unwrap();
        let expect = QubitState::from_real(&[0.5, 0.5, 0.5, -0.5]).unwrap();
        for (a, b) in c2.amplitudes().iter().zip(expect.amplitudes()) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-15);
        }
        let by_cz = cluster_state_by_cphase(2).unwrap();
        assert_abs_diff_eq!(by_cz.fidelity(&c2).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn main_text_four_qubit_form() {
        let c4 = cluster_state(4, Convention::MainText).unwrap();
        let mut expect = vec![0.0; 16];
        expect[0b0000] = 0.5;
        expect[0b0011] = 0.5;
        expect[0b1100] = 0.5;
        expect[0b1111] = -0.5;
        for (a, b) in c4.amplitudes().iter().zip(&expect) {
            assert_abs_diff_eq!(a.re, *b, epsilon = 1e-15);
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-15);
        }
        assert!(cluster_state(5, Convention::MainText).is_err());
    }

    #[test]
    fn table_order_and_signs() {
        let g = StabilizerGroup::new(cluster_generators(4, Convention::MainText).unwrap()).unwrap();
        let ops: Vec<String> = g.elements().iter().map(|e| e.operator.to_string()).collect();
        assert_eq!(
            ops,
            [
                "ZZII", "XXZI", "IZXX", "IIZZ", "-YYZI", "ZIXX", "ZZZZ", "XYYX", "XXIZ", "-IZYY",
                "YXYX", "-YYIZ", "-ZIYY", "XYXY", "YXXY", "IIII"
            ]
        );
        assert_eq!(g.elements()[4].label(), "g1g2");
        assert_eq!(g.elements()[15].label(), "I");
    }

    #[test]
    fn single_generator_group() {
        let g = StabilizerGroup::new(vec!["Z".parse().unwrap()]).unwrap();
        assert_eq!(g.len(), 2);
        assert!(g.elements().iter().any(|e| e.operator.is_identity()));
    }

    #[test]
    fn rejects_bad_generators() {
        let anti = vec!["XI".parse().unwrap(), "ZI".parse().unwrap()];
        assert!(matches!(StabilizerGroup::new(anti), Err(Error::Validation(_))));
        let dependent =
            vec!["ZZ".parse().unwrap(), "XX".parse().unwrap(), "-YY".parse().unwrap()];
        assert!(matches!(StabilizerGroup::new(dependent), Err(Error::Validation(_))));
    }

    #[test]
    fn expectations_on_ideal_state() {
        let c4 = cluster_state(4, Convention::MainText).unwrap();
        let g = StabilizerGroup::new(cluster_generators(4, Convention::MainText).unwrap()).unwrap();
        for e in g.elements() {
            assert_abs_diff_eq!(expectation(&c4, &e.operator).unwrap(), 1.0, epsilon = 1e-12);
        }
        // X1 anticommutes with g1
        let x1: PauliString = "XIII".parse().unwrap();
        assert_abs_diff_eq!(expectation(&c4, &x1).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.fidelity(&c4).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn fidelity_from_values() {
        let mut mixed = vec![0.0; 16];
        mixed[15] = 1.0;
        assert_abs_diff_eq!(fidelity_from_expectations(&mixed).unwrap(), 1.0 / 16.0);
        assert!(fidelity_from_expectations(&[1.0; 15]).is_err());
    }
}
