//! Sparse second-quantized states over polarization-resolved spatial modes.
//!
//! A [`FockState`] stores complex amplitudes keyed by [`Occupation`] vectors
//! over a fixed, canonically ordered mode register. Amplitudes follow the
//! usual bosonic normalization, so `(a†)^n |0⟩` carries amplitude `√(n!)` on
//! occupation `n`. Linear optical elements act as [`ModeTransform`]s on the
//! creation operators: each term is rewritten as a creation-operator monomial,
//! every operator is replaced by its image, and the resulting polynomial is
//! expanded back into occupation terms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::qubit::QubitState;

/// Amplitudes with magnitude below this are dropped.
pub const PRUNE_TOL: f64 = 1e-12;

/// Default tolerance for numerical comparisons (norms, fidelities).
pub const COMPARE_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::H, Polarization::V];

    /// Computational-basis bit: H is 0, V is 1.
    pub fn bit(self) -> usize {
        match self {
            Polarization::H => 0,
            Polarization::V => 1,
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'H' | 'h' => Some(Polarization::H),
            'V' | 'v' => Some(Polarization::V),
            _ => None,
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarization::H => "H",
            Polarization::V => "V",
        })
    }
}

/// One polarization mode of one spatial mode. Orders by spatial index, then H
/// before V.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeId {
    pub spatial: u32,
    pub polarization: Polarization,
}

impl ModeId {
    pub const fn new(spatial: u32, polarization: Polarization) -> Self {
        ModeId { spatial, polarization }
    }

    pub const fn h(spatial: u32) -> Self {
        ModeId::new(spatial, Polarization::H)
    }

    pub const fn v(spatial: u32) -> Self {
        ModeId::new(spatial, Polarization::V)
    }

    /// Both polarization modes of a spatial mode, H first.
    pub fn pair(spatial: u32) -> [ModeId; 2] {
        [ModeId::h(spatial), ModeId::v(spatial)]
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.spatial, self.polarization)
    }
}

impl FromStr for ModeId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        let last = s.chars().last().ok_or_else(|| "empty mode label".to_string())?;
        let polarization =
            Polarization::from_char(last).ok_or_else(|| format!("bad polarization in mode '{s}'"))?;
        let spatial = s[..s.len() - 1]
            .parse::<u32>()
            .map_err(|_| format!("bad spatial index in mode '{s}'"))?;
        Ok(ModeId::new(spatial, polarization))
    }
}

/// Photon counts, one per register mode.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Occupation(Vec<u8>);

impl Occupation {
    pub fn new(counts: Vec<u8>) -> Self {
        Occupation(counts)
    }

    pub fn counts(&self) -> &[u8] {
        &self.0
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|&n| u32::from(n)).sum()
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        Ok(())
    }
}

fn sqrt_factorial(n: u8) -> f64 {
    (1..=u32::from(n)).map(f64::from).product::<f64>().sqrt()
}

fn canonical_register(modes: &[ModeId]) -> Result<Vec<ModeId>> {
    let mut sorted = modes.to_vec();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::config(format!("duplicate mode {} in register", w[0])));
    }
    Ok(sorted)
}

/// Sparse multi-photon state.
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    register: Vec<ModeId>,
    terms: BTreeMap<Occupation, Complex64>,
}

/// Result of projecting onto one-photon-per-port coincidences.
#[derive(Clone, Debug)]
pub struct PostSelection {
    /// Renormalized accepted component; has no terms when nothing survived.
    pub state: FockState,
    /// Probability of the accepted component, `|α|²`.
    pub probability: f64,
    /// Renormalized rejected component (`|ψ_II⟩`), if any.
    pub complement: Option<FockState>,
}

impl PostSelection {
    pub fn is_empty(&self) -> bool {
        self.state.terms.is_empty()
    }
}

impl FockState {
    pub fn vacuum(register: &[ModeId]) -> Result<Self> {
        if register.is_empty() {
            return Err(Error::config("register must not be empty"));
        }
        let register = canonical_register(register)?;
        let mut terms = BTreeMap::new();
        terms.insert(Occupation(vec![0; register.len()]), Complex64::new(1.0, 0.0));
        Ok(FockState { register, terms })
    }

    /// Builds a state from raw `(occupation, amplitude)` pairs given in the
    /// canonical order of `register`. Repeated occupations are summed.
    pub fn from_terms<I>(register: &[ModeId], terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u8>, Complex64)>,
    {
        let canonical = canonical_register(register)?;
        if canonical != register {
            return Err(Error::config("register must be given in canonical order"));
        }
        let mut map = BTreeMap::new();
        for (occ, amp) in terms {
            if occ.len() != register.len() {
                return Err(Error::config(format!(
                    "occupation of length {} on register of {} modes",
                    occ.len(),
                    register.len()
                )));
            }
            *map.entry(Occupation(occ)).or_insert(ZERO) += amp;
        }
        map.retain(|_, a: &mut Complex64| a.norm() >= PRUNE_TOL);
        Ok(FockState { register: canonical, terms: map })
    }

    /// Two-photon source state: one photon in each of `modes`, with the given
    /// polarization amplitudes.
    pub fn pair_state(
        amplitudes: &[((Polarization, Polarization), Complex64)],
        modes: (u32, u32),
    ) -> Result<Self> {
        if modes.0 == modes.1 {
            return Err(Error::config(format!("pair source needs two distinct modes, got {}", modes.0)));
        }
        let norm: f64 = amplitudes.iter().map(|(_, a)| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > COMPARE_TOL {
            return Err(Error::validation(format!("pair amplitudes have norm² {norm}, expected 1")));
        }
        let mut register = ModeId::pair(modes.0).to_vec();
        register.extend(ModeId::pair(modes.1));
        let register = canonical_register(&register)?;
        let vac = FockState::vacuum(&register)?;
        let mut out = FockState { register, terms: BTreeMap::new() };
        for &((p, q), amp) in amplitudes {
            let created = vac
                .create(ModeId::new(modes.0, p))?
                .create(ModeId::new(modes.1, q))?;
            for (occ, a) in created.terms {
                *out.terms.entry(occ).or_insert(ZERO) += a * amp;
            }
        }
        out.prune();
        Ok(out)
    }

    pub fn register(&self) -> &[ModeId] {
        &self.register
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Terms in lexicographic occupation order.
    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, &Complex64)> {
        self.terms.iter()
    }

    pub fn amplitude(&self, counts: &[u8]) -> Complex64 {
        self.terms.get(&Occupation(counts.to_vec())).copied().unwrap_or(ZERO)
    }

    pub fn index_of(&self, mode: ModeId) -> Option<usize> {
        self.register.binary_search(&mode).ok()
    }

    fn require_index(&self, mode: ModeId) -> Result<usize> {
        self.index_of(mode)
            .ok_or_else(|| Error::config(format!("mode {mode} not in register")))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> FockState {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return self.clone();
        }
        self.scaled(Complex64::new(1.0 / n, 0.0))
    }

    pub fn scaled(&self, factor: Complex64) -> FockState {
        let mut out = self.clone();
        for a in out.terms.values_mut() {
            *a *= factor;
        }
        out.prune();
        out
    }

    /// Distinct total photon numbers carrying amplitude.
    pub fn photon_numbers(&self) -> BTreeSet<u32> {
        self.terms.keys().map(Occupation::total).collect()
    }

    fn prune(&mut self) {
        self.terms.retain(|_, a| a.norm() >= PRUNE_TOL);
    }

    /// Applies a creation operator `a†` for `mode`.
    pub fn create(&self, mode: ModeId) -> Result<FockState> {
        let idx = self.require_index(mode)?;
        let mut terms = BTreeMap::new();
        for (occ, &amp) in &self.terms {
            let mut counts = occ.0.clone();
            let n = counts[idx];
            counts[idx] = n
                .checked_add(1)
                .ok_or_else(|| Error::validation(format!("occupation overflow in mode {mode}")))?;
            terms.insert(Occupation(counts), amp * f64::from(n + 1).sqrt());
        }
        Ok(FockState { register: self.register.clone(), terms })
    }

    pub fn tensor(&self, other: &FockState) -> Result<FockState> {
        if let Some(m) = self.register.iter().find(|m| other.register.binary_search(m).is_ok()) {
            return Err(Error::config(format!("registers overlap in mode {m}")));
        }
        let mut register = self.register.clone();
        register.extend_from_slice(&other.register);
        register.sort();
        let left: Vec<usize> =
            self.register.iter().map(|m| register.binary_search(m).unwrap()).collect();
        let right: Vec<usize> =
            other.register.iter().map(|m| register.binary_search(m).unwrap()).collect();

        let mut terms = BTreeMap::new();
        for (oa, &aa) in &self.terms {
            for (ob, &ab) in &other.terms {
                let mut counts = vec![0u8; register.len()];
                for (&p, &n) in left.iter().zip(&oa.0) {
                    counts[p] = n;
                }
                for (&p, &n) in right.iter().zip(&ob.0) {
                    counts[p] = n;
                }
                terms.insert(Occupation(counts), aa * ab);
            }
        }
        let mut out = FockState { register, terms };
        out.prune();
        Ok(out)
    }

    /// Extends the register with unoccupied modes.
    pub fn with_vacuum_modes(&self, modes: &[ModeId]) -> Result<FockState> {
        if modes.is_empty() {
            return Ok(self.clone());
        }
        self.tensor(&FockState::vacuum(modes)?)
    }

    pub fn apply_transform(&self, t: &ModeTransform) -> Result<FockState> {
        self.apply_transform_with(t, Execution::default())
    }

    pub fn apply_transform_with(&self, t: &ModeTransform, exec: Execution) -> Result<FockState> {
        let positions = t
            .modes
            .iter()
            .map(|&m| self.require_index(m))
            .collect::<Result<Vec<_>>>()?;
        let dim = t.modes.len();
        // images[k]: nonzero (output, coefficient) pairs for input operator k
        let images: Vec<Vec<(usize, Complex64)>> = (0..dim)
            .map(|k| {
                (0..dim)
                    .filter_map(|j| {
                        let u = t.matrix[(j, k)];
                        (u != ZERO).then_some((j, u))
                    })
                    .collect()
            })
            .collect();

        let terms: Vec<(&Occupation, &Complex64)> = self.terms.iter().collect();
        let contributions =
            exec.map(&terms, |&(occ, &amp)| expand_term(occ, amp, &positions, &images));

        let mut acc: BTreeMap<Occupation, Complex64> = BTreeMap::new();
        for part in contributions {
            for (occ, amp) in part {
                *acc.entry(occ).or_insert(ZERO) += amp;
            }
        }
        let mut out = FockState { register: self.register.clone(), terms: acc };
        out.prune();
        Ok(out)
    }

    pub fn inner_product(&self, other: &FockState) -> Result<Complex64> {
        if self.register != other.register {
            return Err(Error::config("inner product of states on different registers"));
        }
        let (small, large, conj_small) = if self.terms.len() <= other.terms.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        let mut sum = ZERO;
        for (occ, &a) in &small.terms {
            if let Some(&b) = large.terms.get(occ) {
                sum += if conj_small { a.conj() * b } else { b.conj() * a };
            }
        }
        Ok(sum)
    }

    /// `|⟨a|b⟩|² / (‖a‖²‖b‖²)`; insensitive to global phase and scale.
    pub fn fidelity(&self, other: &FockState) -> Result<f64> {
        let overlap = self.inner_product(other)?.norm_sqr();
        let denom = self.norm_sqr() * other.norm_sqr();
        if denom == 0.0 {
            return Err(Error::validation("fidelity with a zero state"));
        }
        Ok(overlap / denom)
    }

    /// Keeps the terms with exactly one photon in each listed spatial mode
    /// and none anywhere else.
    pub fn postselect_coincidence(&self, spatial_modes: &[u32]) -> Result<PostSelection> {
        let listed: BTreeSet<u32> = spatial_modes.iter().copied().collect();
        if listed.len() != spatial_modes.len() {
            return Err(Error::config("duplicate spatial mode in coincidence list"));
        }
        for &s in &listed {
            for m in ModeId::pair(s) {
                self.require_index(m)?;
            }
        }
        let total = self.norm_sqr();
        let mut accepted = BTreeMap::new();
        let mut rejected = BTreeMap::new();
        for (occ, &amp) in &self.terms {
            if self.is_coincidence(occ, &listed) {
                accepted.insert(occ.clone(), amp);
            } else {
                rejected.insert(occ.clone(), amp);
            }
        }
        let accepted = FockState { register: self.register.clone(), terms: accepted };
        let rejected = FockState { register: self.register.clone(), terms: rejected };
        let probability = if total > 0.0 { accepted.norm_sqr() / total } else { 0.0 };
        let complement = (!rejected.terms.is_empty()).then(|| rejected.normalized());
        Ok(PostSelection { state: accepted.normalized(), probability, complement })
    }

    fn is_coincidence(&self, occ: &Occupation, listed: &BTreeSet<u32>) -> bool {
        let mut per_port: BTreeMap<u32, u32> = BTreeMap::new();
        for (mode, &n) in self.register.iter().zip(&occ.0) {
            if listed.contains(&mode.spatial) {
                *per_port.entry(mode.spatial).or_insert(0) += u32::from(n);
            } else if n != 0 {
                return false;
            }
        }
        listed.iter().all(|s| per_port.get(s) == Some(&1))
    }

    /// Reads the polarization qubits of a one-photon-per-port state. Qubit 1
    /// is the first listed mode and the most significant index bit; H is 0.
    pub fn extract_qubit_state(&self, spatial_modes: &[u32]) -> Result<QubitState> {
        let n = spatial_modes.len();
        if n == 0 || n > 30 {
            return Err(Error::config(format!("cannot extract {n} qubits")));
        }
        if spatial_modes.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(Error::config("duplicate spatial mode in qubit list"));
        }
        let slots = spatial_modes
            .iter()
            .map(|&s| Ok([self.require_index(ModeId::h(s))?, self.require_index(ModeId::v(s))?]))
            .collect::<Result<Vec<[usize; 2]>>>()?;
        let total_photons = n as u32;

        let mut amps = vec![ZERO; 1 << n];
        for (occ, &amp) in &self.terms {
            if occ.total() != total_photons {
                return Err(Error::contract(format!(
                    "term {occ} has {} photons, expected one per listed mode",
                    occ.total()
                )));
            }
            let mut index = 0usize;
            for [h, v] in &slots {
                let bit = match (occ.0[*h], occ.0[*v]) {
                    (1, 0) => 0,
                    (0, 1) => 1,
                    _ => {
                        return Err(Error::contract(format!(
                            "term {occ} is not one photon per listed mode"
                        )))
                    }
                };
                index = (index << 1) | bit;
            }
            amps[index] += amp;
        }
        QubitState::from_amplitudes(amps)
    }

    /// Copy with the global phase chosen so that the first nonzero term (in
    /// lexicographic occupation order) is real and positive. Display only.
    pub fn canonical_phase(&self) -> FockState {
        match self.terms.values().next() {
            Some(a) => self.scaled(Complex64::from_polar(1.0, -a.arg())),
            None => self.clone(),
        }
    }

    /// Line-oriented text form: a `# register` header, then one
    /// `occupation TAB re TAB im` line per term in lexicographic order.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# register");
        for m in &self.register {
            out.push(' ');
            out.push_str(&m.to_string());
        }
        out.push('\n');
        for (occ, a) in &self.terms {
            out.push_str(&format!("{occ}\t{}\t{}\n", fmt_fixed(a.re), fmt_fixed(a.im)));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<FockState> {
        let mut register: Option<Vec<ModeId>> = None;
        let mut terms = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("# register") {
                let modes = rest
                    .split_whitespace()
                    .map(|tok| tok.parse::<ModeId>().map_err(|e| Error::parse(line_no, e)))
                    .collect::<Result<Vec<_>>>()?;
                register = Some(modes);
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            let reg = register
                .as_ref()
                .ok_or_else(|| Error::parse(line_no, "term before '# register' header"))?;
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(Error::parse(line_no, "expected 'occupation<TAB>re<TAB>im'"));
            }
            let occ = fields[0]
                .split(',')
                .map(|t| t.trim().parse::<u8>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(line_no, format!("bad occupation: {e}")))?;
            if occ.len() != reg.len() {
                return Err(Error::parse(line_no, "occupation length does not match register"));
            }
            let re = fields[1].trim().parse::<f64>().map_err(|e| Error::parse(line_no, e.to_string()))?;
            let im = fields[2].trim().parse::<f64>().map_err(|e| Error::parse(line_no, e.to_string()))?;
            terms.push((occ, Complex64::new(re, im)));
        }
        let register = register.ok_or_else(|| Error::parse(1, "missing '# register' header"))?;
        FockState::from_terms(&register, terms)
    }
}

fn fmt_fixed(x: f64) -> String {
    let x = if x.abs() < 5e-13 { 0.0 } else { x };
    format!("{x:.12}")
}

/// Expands one occupation term through the transform. Untouched modes keep
/// their counts, so their `√(n!)` factors cancel and are never applied.
fn expand_term(
    occ: &Occupation,
    amp: Complex64,
    positions: &[usize],
    images: &[Vec<(usize, Complex64)>],
) -> Vec<(Occupation, Complex64)> {
    let input: Vec<u8> = positions.iter().map(|&p| occ.0[p]).collect();
    let mut coeff = amp;
    for &n in &input {
        coeff /= sqrt_factorial(n);
    }

    // monomial exponents over the transform's modes -> coefficient
    let mut poly: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
    poly.insert(vec![0; positions.len()], coeff);
    for (k, &n) in input.iter().enumerate() {
        for _ in 0..n {
            let mut next = BTreeMap::new();
            for (mono, &c) in &poly {
                for &(j, u) in &images[k] {
                    let mut m = mono.clone();
                    m[j] += 1;
                    *next.entry(m).or_insert(ZERO) += c * u;
                }
            }
            poly = next;
        }
    }

    poly.into_iter()
        .map(|(mono, c)| {
            let mut counts = occ.0.clone();
            let mut a = c;
            for (&p, &m) in positions.iter().zip(&mono) {
                counts[p] = m;
                a *= sqrt_factorial(m);
            }
            (Occupation(counts), a)
        })
        .collect()
}

/// Linear map on creation operators: `a†_k → Σ_j U[j,k] a†_j` over the listed
/// modes; every other mode maps to itself.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeTransform {
    modes: Vec<ModeId>,
    matrix: DMatrix<Complex64>,
}

impl ModeTransform {
    pub fn new(modes: Vec<ModeId>, matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::config(format!(
                "transform matrix is {}x{}, expected square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() != modes.len() {
            return Err(Error::config(format!(
                "transform matrix has dimension {} but {} modes were declared",
                matrix.nrows(),
                modes.len()
            )));
        }
        canonical_register(&modes)?;
        Ok(ModeTransform { modes, matrix })
    }

    pub fn identity(modes: Vec<ModeId>) -> Result<Self> {
        let n = modes.len();
        ModeTransform::new(modes, DMatrix::identity(n, n))
    }

    pub fn modes(&self) -> &[ModeId] {
        &self.modes
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Coefficient of output mode `out` in the image of input mode `input`.
    pub fn entry(&self, out: ModeId, input: ModeId) -> Complex64 {
        let j = self.modes.iter().position(|&m| m == out);
        let k = self.modes.iter().position(|&m| m == input);
        match (j, k) {
            (Some(j), Some(k)) => self.matrix[(j, k)],
            (None, None) if out == input => Complex64::new(1.0, 0.0),
            _ => ZERO,
        }
    }

    /// Largest entry of `|U†U − I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.modes.len();
        let prod = self.matrix.adjoint() * &self.matrix;
        let id = DMatrix::<Complex64>::identity(n, n);
        (prod - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// Same map expressed over a larger mode list (identity on the extra modes).
    pub fn embed(&self, modes: &[ModeId]) -> Result<ModeTransform> {
        let n = modes.len();
        let mut m = DMatrix::<Complex64>::identity(n, n);
        let pos = self
            .modes
            .iter()
            .map(|x| {
                modes
                    .iter()
                    .position(|y| y == x)
                    .ok_or_else(|| Error::config(format!("mode {x} missing from embedding")))
            })
            .collect::<Result<Vec<_>>>()?;
        for (a, &j) in pos.iter().enumerate() {
            for (b, &k) in pos.iter().enumerate() {
                m[(j, k)] = self.matrix[(a, b)];
            }
        }
        ModeTransform::new(modes.to_vec(), m)
    }

    /// `next ∘ self`: apply `self` first, then `next`.
    pub fn then(&self, next: &ModeTransform) -> Result<ModeTransform> {
        let modes = canonical_register(
            &self
                .modes
                .iter()
                .chain(&next.modes)
                .copied()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect::<Vec<_>>(),
        )?;
        let a = self.embed(&modes)?;
        let b = next.embed(&modes)?;
        ModeTransform::new(modes, &b.matrix * &a.matrix)
    }
}
