//! Complete optical circuits: sources, elements, coincidence ports.
//!
//! A [`SchemeDescription`] is run by tensoring its sources (plus vacuum on any
//! attenuator loss modes), applying the elements in order, keeping only
//! one-photon-per-port coincidences, and reading off the polarization qubits.

mod format;

use std::collections::BTreeSet;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::elements::{attenuator, pdbs, AttenuatorSpec, PdbsSpec};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fock::{FockState, ModeId, ModeTransform, Polarization, PostSelection};
use crate::qubit::QubitState;

pub use format::parse_scheme;

use Polarization::{H, V};

/// Ideal two-photon source emitting into two spatial modes.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceSpec {
    pub modes: (u32, u32),
    pub amplitudes: Vec<((Polarization, Polarization), Complex64)>,
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

impl SourceSpec {
    pub fn new(modes: (u32, u32), amplitudes: Vec<((Polarization, Polarization), Complex64)>) -> Self {
        SourceSpec { modes, amplitudes }
    }

    /// `(|HH⟩ + |VV⟩)/√2`.
    pub fn phi_plus(modes: (u32, u32)) -> Self {
        SourceSpec::new(modes, vec![((H, H), re(FRAC_1_SQRT_2)), ((V, V), re(FRAC_1_SQRT_2))])
    }

    /// `½|HH⟩ + (√3/2)|VV⟩`.
    pub fn weighted_pair(modes: (u32, u32)) -> Self {
        SourceSpec::new(modes, vec![((H, H), re(0.5)), ((V, V), re(3f64.sqrt() / 2.0))])
    }

    /// First source of a chain: `½|+H⟩ + (√3/2)|−V⟩`.
    pub fn chain_start(modes: (u32, u32)) -> Self {
        let a = 0.5 * FRAC_1_SQRT_2;
        let b = 3f64.sqrt() / 2.0 * FRAC_1_SQRT_2;
        SourceSpec::new(modes, vec![((H, H), re(a)), ((H, V), re(b)), ((V, H), re(a)), ((V, V), re(-b))])
    }

    /// Last source of a chain: `½|H+⟩ + (√3/2)|V−⟩`.
    pub fn chain_end(modes: (u32, u32)) -> Self {
        let a = 0.5 * FRAC_1_SQRT_2;
        let b = 3f64.sqrt() / 2.0 * FRAC_1_SQRT_2;
        SourceSpec::new(modes, vec![((H, H), re(a)), ((H, V), re(a)), ((V, H), re(b)), ((V, V), re(-b))])
    }

    /// Interior chain source: `¼|HH⟩ + (√3/4)(|HV⟩ + |VH⟩) − ¾|VV⟩`.
    pub fn chain_middle(modes: (u32, u32)) -> Self {
        let r3 = 3f64.sqrt() / 4.0;
        SourceSpec::new(
            modes,
            vec![((H, H), re(0.25)), ((H, V), re(r3)), ((V, H), re(r3)), ((V, V), re(-0.75))],
        )
    }

    /// 2×2 amplitude matrix, row = first photon, column = second (H = 0).
    pub fn amplitude_matrix(&self) -> nalgebra::Matrix2<Complex64> {
        let mut m = nalgebra::Matrix2::zeros();
        for &((p, q), a) in &self.amplitudes {
            m[(p.bit(), q.bit())] += a;
        }
        m
    }

    pub fn state(&self) -> Result<FockState> {
        FockState::pair_state(&self.amplitudes, self.modes)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ElementSpec {
    Pdbs(PdbsSpec),
    Attenuator(AttenuatorSpec),
}

impl ElementSpec {
    pub fn transform(&self) -> Result<ModeTransform> {
        match self {
            ElementSpec::Pdbs(s) => pdbs(s),
            ElementSpec::Attenuator(s) => attenuator(s),
        }
    }

    fn spatial_modes(&self) -> [u32; 2] {
        match self {
            ElementSpec::Pdbs(s) => [s.modes.0, s.modes.1],
            ElementSpec::Attenuator(s) => [s.mode, s.ancilla],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchemeDescription {
    pub sources: Vec<SourceSpec>,
    pub elements: Vec<ElementSpec>,
    pub coincidence_modes: Vec<u32>,
}

/// Everything a scheme run produces.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    /// Normalized post-selected polarization state, qubits in coincidence order.
    pub qubits: QubitState,
    /// Coincidence (success) probability.
    pub probability: f64,
    /// Full output state before post-selection.
    pub output: FockState,
    pub selection: PostSelection,
    /// Term count of the input state and after each element.
    pub term_counts: Vec<usize>,
}

impl SchemeDescription {
    fn source_modes(&self) -> Vec<u32> {
        self.sources.iter().flat_map(|s| [s.modes.0, s.modes.1]).collect()
    }

    fn ancillas(&self) -> Vec<u32> {
        self.elements
            .iter()
            .filter_map(|e| match e {
                ElementSpec::Attenuator(a) => Some(a.ancilla),
                ElementSpec::Pdbs(_) => None,
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.sources.is_empty() {
            return Err(Error::config("scheme declares no sources"));
        }
        let source_modes = self.source_modes();
        let sources: BTreeSet<u32> = source_modes.iter().copied().collect();
        if sources.len() != source_modes.len() {
            return Err(Error::config("two sources share a spatial mode"));
        }
        let ancillas = self.ancillas();
        let mut seen = BTreeSet::new();
        for &a in &ancillas {
            if sources.contains(&a) {
                return Err(Error::config(format!("ancilla {a} collides with a source mode")));
            }
            if !seen.insert(a) {
                return Err(Error::config(format!("ancilla {a} is used by two attenuators")));
            }
        }
        for e in &self.elements {
            for m in e.spatial_modes() {
                if !sources.contains(&m) && !seen.contains(&m) {
                    return Err(Error::config(format!("element references undeclared mode {m}")));
                }
            }
        }
        if self.coincidence_modes.is_empty() {
            return Err(Error::config("no coincidence modes declared"));
        }
        for m in &self.coincidence_modes {
            if seen.contains(m) {
                return Err(Error::config(format!("coincidence mode {m} is an ancilla")));
            }
            if !sources.contains(m) {
                return Err(Error::config(format!("coincidence mode {m} is not a source mode")));
            }
        }
        Ok(())
    }

    /// Drops every attenuator (the circuit without loss compensation).
    pub fn without_attenuators(&self) -> SchemeDescription {
        SchemeDescription {
            sources: self.sources.clone(),
            elements: self
                .elements
                .iter()
                .filter(|e| matches!(e, ElementSpec::Pdbs(_)))
                .copied()
                .collect(),
            coincidence_modes: self.coincidence_modes.clone(),
        }
    }

    /// Input state: all sources, plus vacuum in every loss mode.
    pub fn input_state(&self) -> Result<FockState> {
        self.validate()?;
        let mut state = self.sources[0].state()?;
        for s in &self.sources[1..] {
            state = state.tensor(&s.state()?)?;
        }
        let loss: Vec<ModeId> = self.ancillas().into_iter().flat_map(ModeId::pair).collect();
        state.with_vacuum_modes(&loss)
    }

    pub fn run(&self) -> Result<RunOutcome> {
        self.run_with(Execution::default())
    }

    pub fn run_with(&self, exec: Execution) -> Result<RunOutcome> {
        let mut state = self.input_state()?;
        let mut term_counts = vec![state.term_count()];
        for e in &self.elements {
            state = state.apply_transform_with(&e.transform()?, exec)?;
            term_counts.push(state.term_count());
        }
        let selection = state.postselect_coincidence(&self.coincidence_modes)?;
        let qubits = if selection.is_empty() {
            QubitState::from_amplitudes(vec![Complex64::new(0.0, 0.0); 1 << self.coincidence_modes.len()])?
        } else {
            selection.state.extract_qubit_state(&self.coincidence_modes)?
        };
        Ok(RunOutcome {
            qubits,
            probability: selection.probability,
            output: state,
            selection,
            term_counts,
        })
    }

    pub fn to_text(&self) -> String {
        format::to_text(self)
    }
}

/// Two Bell pairs, central element, compensating attenuators after it.
pub fn build_fig1a() -> SchemeDescription {
    SchemeDescription {
        sources: vec![SourceSpec::phi_plus((1, 2)), SourceSpec::phi_plus((3, 4))],
        elements: vec![
            ElementSpec::Pdbs(PdbsSpec::central((2, 3))),
            ElementSpec::Attenuator(AttenuatorSpec::compensating(2, 5)),
            ElementSpec::Attenuator(AttenuatorSpec::compensating(3, 6)),
        ],
        coincidence_modes: vec![1, 2, 3, 4],
    }
}

/// As [`build_fig1a`] with the attenuators moved in front of the central element.
pub fn build_fig1b() -> SchemeDescription {
    SchemeDescription {
        sources: vec![SourceSpec::phi_plus((1, 2)), SourceSpec::phi_plus((3, 4))],
        elements: vec![
            ElementSpec::Attenuator(AttenuatorSpec::compensating(2, 5)),
            ElementSpec::Attenuator(AttenuatorSpec::compensating(3, 6)),
            ElementSpec::Pdbs(PdbsSpec::central((2, 3))),
        ],
        coincidence_modes: vec![1, 2, 3, 4],
    }
}

/// Non-maximally entangled sources with the compensation folded in; no loss.
pub fn build_fig1c() -> SchemeDescription {
    SchemeDescription {
        sources: vec![SourceSpec::weighted_pair((1, 2)), SourceSpec::weighted_pair((3, 4))],
        elements: vec![ElementSpec::Pdbs(PdbsSpec::central((2, 3)))],
        coincidence_modes: vec![1, 2, 3, 4],
    }
}

/// `n_pairs` sources on modes `(2k−1, 2k)` joined by central elements on
/// `(2k, 2k+1)`; post-selects a `2·n_pairs`-qubit chain.
pub fn build_chain(n_pairs: usize) -> Result<SchemeDescription> {
    if n_pairs < 2 {
        return Err(Error::validation(format!("chain needs at least 2 pairs, got {n_pairs}")));
    }
    let n = n_pairs as u32;
    let sources = (1..=n)
        .map(|k| {
            let modes = (2 * k - 1, 2 * k);
            match k {
                1 => SourceSpec::chain_start(modes),
                k if k == n => SourceSpec::chain_end(modes),
                _ => SourceSpec::chain_middle(modes),
            }
        })
        .collect();
    Ok(SchemeDescription {
        sources,
        elements: (1..n).map(|k| ElementSpec::Pdbs(PdbsSpec::central((2 * k, 2 * k + 1)))).collect(),
        coincidence_modes: (1..=2 * n).collect(),
    })
}

/// First `k` sources of a chain (start source, then interior sources) with
/// their `k − 1` connections, post-selected on modes `1..=2k`.
pub fn build_chain_prefix(k: usize) -> Result<SchemeDescription> {
    if k == 0 {
        return Err(Error::validation("chain prefix needs at least one pair"));
    }
    let k = k as u32;
    Ok(SchemeDescription {
        sources: (1..=k)
            .map(|j| {
                let modes = (2 * j - 1, 2 * j);
                if j == 1 {
                    SourceSpec::chain_start(modes)
                } else {
                    SourceSpec::chain_middle(modes)
                }
            })
            .collect(),
        elements: (1..k).map(|j| ElementSpec::Pdbs(PdbsSpec::central((2 * j, 2 * j + 1)))).collect(),
        coincidence_modes: (1..=2 * k).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn source_states_are_normalized() {
        for s in [
            SourceSpec::phi_plus((1, 2)),
            SourceSpec::weighted_pair((1, 2)),
            SourceSpec::chain_start((1, 2)),
            SourceSpec::chain_end((1, 2)),
            SourceSpec::chain_middle((1, 2)),
        ] {
            assert_abs_diff_eq!(s.state().unwrap().norm_sqr(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn chain_too_short() {
        assert!(matches!(build_chain(1), Err(Error::Validation(_))));
    }

    #[test]
    fn empty_scheme_has_single_source_state() {
        let s = SchemeDescription {
            sources: vec![SourceSpec::weighted_pair((1, 2))],
            elements: vec![],
            coincidence_modes: vec![1, 2],
        };
        let out = s.run().unwrap();
        assert_abs_diff_eq!(out.probability, 1.0, epsilon = 1e-14);
        let a = out.qubits.amplitudes();
        assert_abs_diff_eq!(a[0].re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(a[3].re, 3f64.sqrt() / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn validation_catches_bad_wiring() {
        let mut s = build_fig1a();
        s.coincidence_modes.push(5);
        assert!(matches!(s.validate(), Err(Error::Config(_))));

        let mut s = build_fig1a();
        s.elements.push(ElementSpec::Attenuator(AttenuatorSpec::compensating(1, 3)));
        assert!(matches!(s.validate(), Err(Error::Config(_))));

        let mut s = build_fig1c();
        s.elements.push(ElementSpec::Pdbs(PdbsSpec::central((4, 9))));
        assert!(matches!(s.validate(), Err(Error::Config(_))));

        let mut s = build_fig1c();
        s.sources.push(SourceSpec::phi_plus((4, 5)));
        assert!(matches!(s.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn fig1c_term_counts() {
        let out = build_fig1c().run().unwrap();
        assert_eq!(out.term_counts[0], 4);
        assert!(out.term_counts[1] > 4);
    }
}
