use std::fmt;
use std::ops::{Mul, Neg};
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::qubit::QubitState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Pauli> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// `self · other = i^k · result`, returned as `(k, result)`.
    fn mul(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }

    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }
}

/// Tensor product of single-qubit Paulis with a phase `i^k`. Letter 0 acts on
/// qubit 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    phase: u8,
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(sign: i8, letters: Vec<Pauli>) -> Self {
        let phase = if sign < 0 { 2 } else { 0 };
        PauliString { phase, letters }
    }

    pub fn identity(n: usize) -> Self {
        PauliString::new(1, vec![Pauli::I; n])
    }

    /// `P` on qubit `q` (0-based), identity elsewhere.
    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut letters = vec![Pauli::I; n];
        letters[q] = p;
        PauliString::new(1, letters)
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    /// `±1` for Hermitian strings, `None` if the phase is `±i`.
    pub fn sign(&self) -> Option<i8> {
        match self.phase {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    pub fn unsigned(&self) -> PauliString {
        PauliString { phase: 0, letters: self.letters.clone() }
    }

    /// Positions (0-based) carrying a non-identity letter.
    pub fn support(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    /// Letters only, e.g. `XXZI`.
    pub fn letter_string(&self) -> String {
        self.letters.iter().map(|p| p.as_char()).collect()
    }

    /// Subscripted form such as `-Y1Y2Z3I4`.
    pub fn indexed(&self) -> String {
        let body: String = self
            .letters
            .iter()
            .enumerate()
            .map(|(i, p)| format!("{}{}", p.as_char(), i + 1))
            .collect();
        format!("{}{body}", self.sign_prefix())
    }

    fn sign_prefix(&self) -> &'static str {
        match self.phase {
            0 => "",
            1 => "i",
            2 => "-",
            _ => "-i",
        }
    }

    fn check_len(&self, state: &QubitState) -> Result<()> {
        if self.len() != state.n_qubits() {
            return Err(Error::validation(format!(
                "operator on {} qubits applied to a {}-qubit state",
                self.len(),
                state.n_qubits()
            )));
        }
        Ok(())
    }

    pub fn apply(&self, state: &QubitState) -> Result<QubitState> {
        self.check_len(state)?;
        let n = self.len();
        let mut flip = 0usize;
        for (q, &p) in self.letters.iter().enumerate() {
            if matches!(p, Pauli::X | Pauli::Y) {
                flip |= 1 << (n - 1 - q);
            }
        }
        let global = Complex64::i().powu(u32::from(self.phase));
        let amps = state.amplitudes();
        let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
        for (i, &a) in amps.iter().enumerate() {
            let mut f = global;
            for (q, &p) in self.letters.iter().enumerate() {
                let bit = state.bit(i, q);
                match (p, bit) {
                    (Pauli::Z, 1) => f = -f,
                    (Pauli::Y, 0) => f *= Complex64::i(),
                    (Pauli::Y, 1) => f *= -Complex64::i(),
                    _ => {}
                }
            }
            out[i ^ flip] += f * a;
        }
        QubitState::from_amplitudes(out)
    }

    /// `⟨ψ|P|ψ⟩` for a normalized state. Real for Hermitian strings.
    pub fn expectation(&self, state: &QubitState) -> Result<f64> {
        let image = self.apply(state)?;
        Ok(state.inner(&image)?.re)
    }

    /// Dense `2^n × 2^n` matrix.
    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(1, 1, Complex64::i().powu(u32::from(self.phase)));
        for p in &self.letters {
            let g = p.matrix();
            let g = DMatrix::from_fn(2, 2, |r, c| g[r][c]);
            m = m.kronecker(&g);
        }
        m
    }
}

impl Mul for &PauliString {
    type Output = PauliString;

    fn mul(self, rhs: &PauliString) -> PauliString {
        assert_eq!(self.len(), rhs.len(), "Pauli strings of different length");
        let mut phase = self.phase + rhs.phase;
        let letters = self
            .letters
            .iter()
            .zip(&rhs.letters)
            .map(|(&a, &b)| {
                let (k, p) = a.mul(b);
                phase += k;
                p
            })
            .collect();
        PauliString { phase: phase % 4, letters }
    }
}

impl Neg for &PauliString {
    type Output = PauliString;

    fn neg(self) -> PauliString {
        PauliString { phase: (self.phase + 2) % 4, letters: self.letters.clone() }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.sign_prefix(), self.letter_string())
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Accepts `XXZI`, `-YYZI`, `+X1X2Z3I4` and `−Y₁Y₂Z₃I₄`-style input
/// (qubit subscripts are ignored).
impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (sign, body) = if let Some(rest) = s.strip_prefix('-').or_else(|| s.strip_prefix('−')) {
            (-1, rest)
        } else {
            (1, s.strip_prefix('+').unwrap_or(s))
        };
        let mut letters = Vec::new();
        for c in body.chars() {
            if c.is_ascii_digit() || ('₀'..='₉').contains(&c) {
                continue;
            }
            letters.push(
                Pauli::from_char(c)
                    .ok_or_else(|| Error::validation(format!("bad Pauli letter '{c}' in '{s}'")))?,
            );
        }
        if letters.is_empty() {
            return Err(Error::validation(format!("empty Pauli string '{s}'")));
        }
        Ok(PauliString::new(sign, letters))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn single_qubit_products() {
        let x = p("X");
        let y = p("Y");
        let z = p("Z");
        assert_eq!((&x * &y).to_string(), "iZ");
        assert_eq!((&y * &x).to_string(), "-iZ");
        assert_eq!((&z * &x).to_string(), "iY");
        assert_eq!((&x * &x).to_string(), "I");
    }

    #[test]
    fn parse_forms() {
        assert_eq!(p("−Y₁Y₂Z₃I₄"), p("-YYZI"));
        assert_eq!(p("+X1X2Z3I4"), p("XXZI"));
        assert_eq!(p("-YYZI").indexed(), "-Y1Y2Z3I4");
        assert!("XQ".parse::<PauliString>().is_err());
    }

    #[test]
    fn commutation() {
        assert!(p("ZZII").commutes_with(&p("XXZI")));
        assert!(!p("XIII").commutes_with(&p("ZZII")));
    }

    #[test]
    fn apply_matches_dense_matrix() {
        let state = QubitState::from_amplitudes(
            (0..8).map(|k| Complex64::new(k as f64 * 0.1, 0.3 - k as f64 * 0.05)).collect(),
        )
        .unwrap();
        for s in ["XYZ", "-YIY", "ZZX", "IYI"] {
            let op = p(s);
            let fast = op.apply(&state).unwrap();
            let v = nalgebra::DVector::from_column_slice(state.amplitudes());
            let dense = op.to_matrix() * v;
            for (a, b) in fast.amplitudes().iter().zip(dense.iter()) {
                assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-14);
                assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn length_mismatch() {
        let state = QubitState::plus(2);
        assert!(matches!(p("XXX").expectation(&state), Err(Error::Validation(_))));
    }
}
