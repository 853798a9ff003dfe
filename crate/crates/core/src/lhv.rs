//! Brute-force search for local deterministic value assignments.
//!
//! Every local observable `X_i`, `Y_i`, `Z_i` gets a predetermined value ±1.
//! A constraint `(P, s)` demands that the product of the values of `P`'s
//! non-identity letters equals `s` times `P`'s own sign. If no assignment
//! meets every constraint, the correlations admit no local realistic model.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::pauli::{Pauli, PauliString};

const MAX_VARIABLES: usize = 40;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Constraint {
    pub operator: PauliString,
    pub value: i8,
}

impl Constraint {
    pub fn new(operator: PauliString, value: i8) -> Self {
        Constraint { operator, value }
    }
}

/// Predetermined value of one local observable (qubit is 1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LocalValue {
    pub qubit: usize,
    pub observable: char,
    pub value: i8,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum LhvVerdict {
    Contradiction,
    Satisfiable { assignment: Vec<LocalValue> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LhvOutcome {
    pub verdict: LhvVerdict,
    /// Assignments over all `3N` local observables (`2^(3N)`).
    pub full_space: u128,
    /// Assignments actually enumerated after pruning untouched observables.
    pub enumerated: u64,
}

impl LhvOutcome {
    pub fn is_contradiction(&self) -> bool {
        self.verdict == LhvVerdict::Contradiction
    }
}

/// The four stabilizer correlations of the four-qubit cluster state whose
/// required signs multiply to −1 while their observables multiply to the
/// identity: `XXZI = +1`, `YYZI = −1`, `XYYX = +1`, `YXYX = +1`.
pub fn cluster_ghz_constraints() -> Vec<Constraint> {
    [("XXZI", 1), ("YYZI", -1), ("XYYX", 1), ("YXYX", 1)]
        .into_iter()
        .map(|(s, v)| Constraint::new(s.parse().expect("static operator"), v))
        .collect()
}

pub fn lhv_contradiction(constraints: &[Constraint], exec: Execution) -> Result<LhvOutcome> {
    let n = constraints.first().map_or(0, |c| c.operator.len());
    let mut variables: BTreeMap<(usize, Pauli), usize> = BTreeMap::new();
    for c in constraints {
        if c.operator.len() != n {
            return Err(Error::validation("constraints act on different qubit counts"));
        }
        if c.value != 1 && c.value != -1 {
            return Err(Error::validation(format!("required value {} is not ±1", c.value)));
        }
        if c.operator.sign().is_none() {
            return Err(Error::validation(format!("{} is not Hermitian", c.operator)));
        }
        for q in c.operator.support() {
            variables.entry((q, c.operator.letters()[q])).or_insert(0);
        }
    }
    for (i, slot) in variables.values_mut().enumerate() {
        *slot = i;
    }
    let v = variables.len();
    if v > MAX_VARIABLES {
        return Err(Error::validation(format!("{v} local observables is too many to enumerate")));
    }

    // (variable mask, parity bit required: 1 means product −1)
    let rules: Vec<(u64, u32)> = constraints
        .iter()
        .map(|c| {
            let mask = c
                .operator
                .support()
                .into_iter()
                .map(|q| 1u64 << variables[&(q, c.operator.letters()[q])])
                .fold(0, |a, b| a | b);
            let required = c.value * c.operator.sign().unwrap_or(1);
            (mask, u32::from(required < 0))
        })
        .collect();

    let space = 1u64 << v;
    let found = exec.find_first(space, |assign| {
        rules.iter().all(|&(mask, parity)| (assign & mask).count_ones() % 2 == parity)
    });

    let verdict = match found {
        None => LhvVerdict::Contradiction,
        Some(assign) => LhvVerdict::Satisfiable {
            assignment: variables
                .iter()
                .map(|(&(q, p), &bit)| LocalValue {
                    qubit: q + 1,
                    observable: p.as_char(),
                    value: if assign & (1 << bit) == 0 { 1 } else { -1 },
                })
                .collect(),
        },
    };
    Ok(LhvOutcome { verdict, full_space: 1u128 << (3 * n as u32).min(127), enumerated: space })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(constraints: &[Constraint], assignment: &[LocalValue]) -> bool {
        constraints.iter().all(|c| {
            let product: i8 = c
                .operator
                .support()
                .into_iter()
                .map(|q| {
                    let letter = c.operator.letters()[q].as_char();
                    assignment
                        .iter()
                        .find(|lv| lv.qubit == q + 1 && lv.observable == letter)
                        .unwrap()
                        .value
                })
                .product();
            product * c.operator.sign().unwrap() == c.value
        })
    }

    #[test]
    fn four_correlations_contradict() {
        let out = lhv_contradiction(&cluster_ghz_constraints(), Execution::Sequential).unwrap();
        assert!(out.is_contradiction());
        // X1 X2 Z3 Y1 Y2 Y3 X4
        assert_eq!(out.enumerated, 1 << 7);
        assert_eq!(out.full_space, 1 << 12);
    }

    #[test]
    fn single_z_is_satisfiable() {
        let cs = vec![Constraint::new("Z".parse().unwrap(), 1)];
        let out = lhv_contradiction(&cs, Execution::Parallel).unwrap();
        match out.verdict {
            LhvVerdict::Satisfiable { ref assignment } => assert!(check(&cs, assignment)),
            _ => panic!("expected satisfiable"),
        }
    }

    #[test]
    fn flipped_sign_is_satisfiable() {
        let mut cs = cluster_ghz_constraints();
        cs[1].value = 1;
        let out = lhv_contradiction(&cs, Execution::Sequential).unwrap();
        match out.verdict {
            LhvVerdict::Satisfiable { ref assignment } => assert!(check(&cs, assignment)),
            _ => panic!("expected satisfiable"),
        }
    }

    #[test]
    fn operator_sign_folds_into_requirement() {
        let a = vec![Constraint::new("-ZZ".parse().unwrap(), 1), Constraint::new("ZZ".parse().unwrap(), 1)];
        assert!(lhv_contradiction(&a, Execution::Sequential).unwrap().is_contradiction());
    }

    #[test]
    fn empty_constraint_set_is_satisfiable() {
        let out = lhv_contradiction(&[], Execution::Sequential).unwrap();
        assert!(!out.is_contradiction());
    }

    #[test]
    fn partitioning_does_not_change_result() {
        let mut cs = cluster_ghz_constraints();
        cs[3].value = -1;
        let a = lhv_contradiction(&cs, Execution::Sequential).unwrap();
        let b = lhv_contradiction(&cs, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
