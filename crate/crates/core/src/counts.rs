//! Raw fourfold-coincidence analysis for the four-qubit cluster state.
//!
//! Nine local measurement settings, each with 16 outcome counts, yield the 15
//! nontrivial stabilizer expectations, the projector fidelity, its witness
//! significance, per-setting error rates and a local-realism check.
//!
//! Outcome index `i` encodes bits `b1 b2 b3 b4` with `b1` most significant;
//! bit 0 is the H-port detector and eigenvalue +1. Counts are treated as
//! independent Poisson variables, so for `E = Σ sᵢnᵢ / N`
//!
//! ```text
//! σ² = Σ nᵢ (sᵢ − E)² / N²
//! ```
//!
//! and the fidelity error adds the 15 estimate errors in quadrature.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::lhv::{lhv_contradiction, Constraint, LhvVerdict};
use crate::pauli::{Pauli, PauliString};
use crate::qubit::{Gate1, QubitState};
use crate::stabilizer::{cluster_generators, cluster_state, Convention, StabilizerGroup};

/// The raw count table shipped with the crate.
pub const TABLE_A1: &str = include_str!("../fixtures/table_a1.csv");

/// Settings in reporting order, with the stabilizer letters each one serves.
const SETTINGS: [(&str, &[&str]); 9] = [
    ("ZZZZ", &["ZZII", "IIZZ", "ZZZZ"]),
    ("ZZXX", &["IZXX", "ZIXX"]),
    ("XXZZ", &["XXZI", "XXIZ"]),
    ("ZZYY", &["IZYY", "ZIYY"]),
    ("YYZZ", &["YYZI", "YYIZ"]),
    ("XYXY", &["XYXY"]),
    ("XYYX", &["XYYX"]),
    ("YXXY", &["YXXY"]),
    ("YXYX", &["YXYX"]),
];

/// Correlations entering the local-realism argument.
const LHV_OPERATORS: [&str; 4] = ["XXZI", "YYZI", "XYYX", "YXYX"];

pub const NONLOCALITY_THRESHOLD: f64 = 0.25;

/// Ideal outcome probabilities below this count as forbidden.
const FORBIDDEN_TOL: f64 = 1e-10;

/// The nine settings in reporting order.
pub fn standard_settings() -> Vec<MeasurementSetting> {
    SETTINGS.iter().map(|(s, _)| s.parse().expect("static setting")).collect()
}

/// A full local measurement: one of X, Y, Z on each of the four photons.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MeasurementSetting {
    letters: [Pauli; 4],
}

impl MeasurementSetting {
    pub fn letters(&self) -> &[Pauli; 4] {
        &self.letters
    }

    pub fn label(&self) -> String {
        self.letters.iter().map(|p| p.as_char()).collect()
    }
}

impl fmt::Display for MeasurementSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl Serialize for MeasurementSetting {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

impl FromStr for MeasurementSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters: Vec<Pauli> = s
            .trim()
            .chars()
            .map(|c| match Pauli::from_char(c) {
                Some(Pauli::I) | None => None,
                p => p,
            })
            .collect::<Option<_>>()
            .ok_or_else(|| Error::validation(format!("unknown setting '{s}'")))?;
        let letters: [Pauli; 4] = letters
            .try_into()
            .map_err(|_| Error::validation(format!("setting '{s}' must have exactly 4 letters")))?;
        Ok(MeasurementSetting { letters })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeCounts {
    pub setting: MeasurementSetting,
    /// Indexed by outcome bits `b1b2b3b4`, `b1` most significant.
    pub counts: [u64; 16],
    /// Collection time in seconds, if recorded.
    pub duration: Option<f64>,
}

impl OutcomeCounts {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Parses `label, 16 counts[, duration]` rows after a header row.
pub fn parse_counts(text: &str) -> Result<Vec<OutcomeCounts>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 17 && record.len() != 18 {
            return Err(Error::parse(
                line,
                format!("expected a label, 16 counts and an optional duration, found {} fields", record.len()),
            ));
        }
        let setting: MeasurementSetting = record[0]
            .parse()
            .map_err(|_| Error::parse(line, format!("unknown setting label '{}'", &record[0])))?;
        let mut counts = [0u64; 16];
        for (i, slot) in counts.iter_mut().enumerate() {
            let field = &record[i + 1];
            *slot = field.parse().map_err(|_| {
                Error::parse(line, format!("count '{field}' is not a non-negative integer"))
            })?;
        }
        let duration = match record.get(17) {
            Some(d) if !d.is_empty() => Some(
                d.parse::<f64>()
                    .ok()
                    .filter(|x| *x >= 0.0)
                    .ok_or_else(|| Error::parse(line, format!("bad duration '{d}'")))?,
            ),
            _ => None,
        };
        out.push(OutcomeCounts { setting, counts, duration });
    }
    Ok(out)
}

fn main_text_group() -> StabilizerGroup {
    StabilizerGroup::new(cluster_generators(4, Convention::MainText).expect("static generators"))
        .expect("cluster generators form a group")
}

/// Signed stabilizer operators estimated from one of the nine settings.
pub fn derivable_operators(setting: &MeasurementSetting) -> Result<Vec<PauliString>> {
    let label = setting.label();
    let (_, ops) = SETTINGS
        .iter()
        .find(|(s, _)| *s == label)
        .ok_or_else(|| Error::validation(format!("setting {label} is not one of the nine analysed settings")))?;
    let group = main_text_group();
    ops.iter()
        .map(|letters| {
            let unsigned: PauliString = letters.parse()?;
            group
                .find(unsigned.letters())
                .map(|e| e.operator.clone())
                .ok_or_else(|| Error::validation(format!("{letters} is not a stabilizer element")))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpectationEstimate {
    pub operator: PauliString,
    pub value: f64,
    pub sigma: f64,
    pub source_setting: String,
}

/// Parity estimate of `op` from counts taken in a compatible setting.
pub fn estimate_expectation(counts: &OutcomeCounts, op: &PauliString) -> Result<ExpectationEstimate> {
    if op.len() != 4 {
        return Err(Error::contract(format!("{op} does not act on four qubits")));
    }
    let sign = f64::from(
        op.sign().ok_or_else(|| Error::contract(format!("{op} is not Hermitian")))?,
    );
    let support = op.support();
    for &q in &support {
        if op.letters()[q] != counts.setting.letters()[q] {
            return Err(Error::contract(format!(
                "{op} cannot be estimated from setting {}",
                counts.setting
            )));
        }
    }
    let total = counts.total();
    if total == 0 {
        return Err(Error::validation(format!("setting {} has no counts", counts.setting)));
    }
    let n = total as f64;
    let parity = |i: usize| -> f64 {
        let ones = support.iter().filter(|&&q| (i >> (3 - q)) & 1 == 1).count();
        if ones % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    };
    let raw = counts.counts.iter().enumerate().map(|(i, &c)| parity(i) * c as f64).sum::<f64>() / n;
    let var = counts
        .counts
        .iter()
        .enumerate()
        .map(|(i, &c)| c as f64 * (parity(i) - raw).powi(2))
        .sum::<f64>()
        / (n * n);
    Ok(ExpectationEstimate {
        operator: op.clone(),
        value: sign * raw,
        sigma: var.sqrt(),
        source_setting: counts.setting.label(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorRate {
    pub setting: String,
    pub rate: f64,
    pub sigma: f64,
    pub incorrect: u64,
    pub total: u64,
}

fn eigenbasis_rows(p: Pauli) -> Gate1 {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let hi = Complex64::new(0.0, FRAC_1_SQRT_2);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    match p {
        Pauli::I | Pauli::Z => [[one, zero], [zero, one]],
        Pauli::X => [[h, h], [h, -h]],
        // rows are ⟨±y| = ((1, ∓i)/√2)
        Pauli::Y => [[h, -hi], [h, hi]],
    }
}

/// Outcome probabilities of `state` measured in `setting`'s product eigenbasis.
pub fn ideal_distribution(setting: &MeasurementSetting, state: &QubitState) -> Result<[f64; 16]> {
    if state.n_qubits() != 4 {
        return Err(Error::validation(format!(
            "ideal state has {} qubits, expected 4",
            state.n_qubits()
        )));
    }
    let mut rotated = state.clone();
    for (q, &p) in setting.letters().iter().enumerate() {
        rotated = rotated.apply_single(q, &eigenbasis_rows(p));
    }
    let mut probs = [0.0; 16];
    for (p, a) in probs.iter_mut().zip(rotated.amplitudes()) {
        *p = a.norm_sqr();
    }
    Ok(probs)
}

/// Fraction of counts on outcomes the ideal state forbids.
pub fn error_rate(counts: &OutcomeCounts, ideal: &QubitState) -> Result<ErrorRate> {
    let probs = ideal_distribution(&counts.setting, ideal)?;
    let total = counts.total();
    if total == 0 {
        return Err(Error::validation(format!("setting {} has no counts", counts.setting)));
    }
    let incorrect: u64 = counts
        .counts
        .iter()
        .zip(&probs)
        .filter(|(_, &p)| p < FORBIDDEN_TOL)
        .map(|(&c, _)| c)
        .sum();
    let rate = incorrect as f64 / total as f64;
    Ok(ErrorRate {
        setting: counts.setting.label(),
        rate,
        sigma: (rate * (1.0 - rate) / total as f64).sqrt(),
        incorrect,
        total,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilizerRow {
    /// Generator product label such as `g1g2`, or `I`.
    pub stabilizer: String,
    #[serde(flatten)]
    pub estimate: ExpectationEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaxError {
    pub setting: String,
    pub operator: PauliString,
    pub rate: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LhvSummary {
    pub operators: Vec<PauliString>,
    /// Signs of the measured correlations.
    pub signs: Vec<i8>,
    pub contradiction: bool,
    pub assignment: Option<Vec<crate::lhv::LocalValue>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisReport {
    /// All 16 group elements in generator-product order, identity last.
    pub stabilizers: Vec<StabilizerRow>,
    pub fidelity: f64,
    pub fidelity_sigma: f64,
    /// `(F − 1/2) / σ_F`.
    pub witness_sigmas: f64,
    /// The same ratio from `F` and `σ_F` rounded to four decimals.
    pub witness_sigmas_at_display_precision: f64,
    pub error_rates: Vec<ErrorRate>,
    pub max_error: MaxError,
    pub nonlocality_threshold: f64,
    pub all_rates_below_threshold: bool,
    pub lhv: LhvSummary,
}

fn round4(x: f64) -> f64 {
    format!("{x:.4}").parse().expect("formatted float")
}

pub fn analyze(all_counts: &[OutcomeCounts]) -> Result<AnalysisReport> {
    analyze_with(all_counts, Execution::default())
}

pub fn analyze_with(all_counts: &[OutcomeCounts], exec: Execution) -> Result<AnalysisReport> {
    if all_counts.is_empty() {
        return Err(Error::validation("no counts to analyse"));
    }
    let mut by_label: BTreeMap<String, &OutcomeCounts> = BTreeMap::new();
    for c in all_counts {
        if by_label.insert(c.setting.label(), c).is_some() {
            return Err(Error::validation(format!("setting {} appears twice", c.setting)));
        }
    }
    let settings = standard_settings();
    let missing: Vec<String> =
        settings.iter().map(|s| s.label()).filter(|l| !by_label.contains_key(l)).collect();
    if !missing.is_empty() {
        return Err(Error::validation(format!("missing settings: {}", missing.join(", "))));
    }
    let ordered: Vec<&OutcomeCounts> = settings.iter().map(|s| by_label[&s.label()]).collect();
    let ideal = cluster_state(4, Convention::MainText)?;

    let per_setting = exec.map(&ordered, |c| -> Result<(Vec<ExpectationEstimate>, ErrorRate)> {
        let estimates = derivable_operators(&c.setting)?
            .iter()
            .map(|op| estimate_expectation(c, op))
            .collect::<Result<Vec<_>>>()?;
        Ok((estimates, error_rate(c, &ideal)?))
    });
    let per_setting = per_setting.into_iter().collect::<Result<Vec<_>>>()?;

    let mut estimates: BTreeMap<Vec<Pauli>, ExpectationEstimate> = BTreeMap::new();
    for (ests, _) in &per_setting {
        for e in ests {
            estimates.insert(e.operator.letters().to_vec(), e.clone());
        }
    }
    let group = main_text_group();
    let stabilizers = group
        .elements()
        .iter()
        .map(|el| {
            let estimate = if el.operator.is_identity() {
                ExpectationEstimate {
                    operator: el.operator.clone(),
                    value: 1.0,
                    sigma: 0.0,
                    source_setting: String::new(),
                }
            } else {
                estimates
                    .get(el.operator.letters())
                    .cloned()
                    .ok_or_else(|| Error::validation(format!("no setting measures {}", el.operator)))?
            };
            Ok(StabilizerRow { stabilizer: el.label(), estimate })
        })
        .collect::<Result<Vec<_>>>()?;

    let values: Vec<f64> = stabilizers.iter().map(|r| r.estimate.value).collect();
    let fidelity = crate::stabilizer::fidelity_from_expectations(&values)?;
    let fidelity_sigma = stabilizers.iter().map(|r| r.estimate.sigma.powi(2)).sum::<f64>().sqrt()
        / stabilizers.len() as f64;
    let witness_sigmas = (fidelity - 0.5) / fidelity_sigma;
    let witness_sigmas_at_display_precision = (round4(fidelity) - 0.5) / round4(fidelity_sigma);

    let error_rates: Vec<ErrorRate> = per_setting.iter().map(|(_, r)| r.clone()).collect();
    let (worst_idx, worst) = error_rates
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.rate.total_cmp(&b.1.rate))
        .expect("nine settings");
    let attributed = per_setting[worst_idx]
        .0
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("every setting yields an operator");
    let max_error = MaxError {
        setting: worst.setting.clone(),
        operator: attributed.operator.clone(),
        rate: worst.rate,
        sigma: worst.sigma,
    };
    let all_rates_below_threshold = error_rates.iter().all(|r| r.rate < NONLOCALITY_THRESHOLD);

    let mut lhv_ops = Vec::new();
    let mut signs = Vec::new();
    for s in LHV_OPERATORS {
        let op: PauliString = s.parse()?;
        let est = &estimates[op.letters()];
        let measured = est.value * f64::from(est.operator.sign().unwrap_or(1));
        signs.push(if measured < 0.0 { -1 } else { 1 });
        lhv_ops.push(op);
    }
    let constraints: Vec<Constraint> =
        lhv_ops.iter().zip(&signs).map(|(op, &s)| Constraint::new(op.clone(), s)).collect();
    let outcome = lhv_contradiction(&constraints, exec)?;
    let assignment = match outcome.verdict {
        LhvVerdict::Contradiction => None,
        LhvVerdict::Satisfiable { assignment } => Some(assignment),
    };
    let lhv = LhvSummary { operators: lhv_ops, signs, contradiction: assignment.is_none(), assignment };

    Ok(AnalysisReport {
        stabilizers,
        fidelity,
        fidelity_sigma,
        witness_sigmas,
        witness_sigmas_at_display_precision,
        error_rates,
        max_error,
        nonlocality_threshold: NONLOCALITY_THRESHOLD,
        all_rates_below_threshold,
        lhv,
    })
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Human-readable report laid out like the stabilizer correlation table.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<6}{:<14}{:<14}Expectation value", "", "Stabilizer", "Operator");
        for (i, row) in self.stabilizers.iter().enumerate() {
            let value = if row.estimate.operator.is_identity() {
                "1.0".to_string()
            } else {
                format!("{:.4} ± {:.4}", row.estimate.value, row.estimate.sigma)
            };
            let _ = writeln!(
                out,
                "{:<6}{:<14}{:<14}{}",
                format!("({})", i + 1),
                row.stabilizer,
                row.estimate.operator.indexed(),
                value
            );
        }
        let _ = writeln!(out, "{:<34}F = {:.4} ± {:.4}", "", self.fidelity, self.fidelity_sigma);
        let _ = writeln!(
            out,
            "witness: {:.0} sigma ({:.0} from the displayed F and sigma)",
            self.witness_sigmas, self.witness_sigmas_at_display_precision
        );
        let _ = writeln!(out);
        let _ = writeln!(out, "{:<8}{:<20}Incorrect/Total", "Setting", "Error rate");
        for r in &self.error_rates {
            let _ = writeln!(
                out,
                "{:<8}{:<20}{}/{}",
                r.setting,
                format!("{:.4} ± {:.4}", r.rate, r.sigma),
                r.incorrect,
                r.total
            );
        }
        let _ = writeln!(
            out,
            "max error rate: {:.4} ± {:.4} ({} setting, {})",
            self.max_error.rate,
            self.max_error.sigma,
            self.max_error.setting,
            self.max_error.operator.unsigned().indexed()
        );
        let _ = writeln!(
            out,
            "all error rates below {}: {}",
            self.nonlocality_threshold,
            if self.all_rates_below_threshold { "yes" } else { "no" }
        );
        let signs: Vec<String> = self.lhv.signs.iter().map(|s| format!("{s:+}")).collect();
        let _ = writeln!(
            out,
            "LHV: {} (signs of {}: {})",
            if self.lhv.contradiction { "contradiction" } else { "satisfiable" },
            self.lhv.operators.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(", "),
            signs.join(", ")
        );
        out
    }
}
