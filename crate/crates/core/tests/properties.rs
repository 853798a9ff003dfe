use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use proptest::prelude::*;

use cluster_optics::counts::{analyze, derivable_operators, estimate_expectation, ideal_distribution, standard_settings, OutcomeCounts};
use cluster_optics::elements::{pdbs, PdbsSpec};
use cluster_optics::schemes::{build_chain, build_chain_prefix};
use cluster_optics::schmidt::schmidt_decompose;
use cluster_optics::stabilizer::{cluster_state, Convention};
use cluster_optics::{Execution, FockState, ModeId, ModeTransform, QubitState};

const TOL: f64 = 1e-10;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn unitary_from(raw: &[f64], dim: usize) -> DMatrix<Complex64> {
    let m = DMatrix::from_fn(dim, dim, |i, j| {
        let k = 2 * (i * dim + j);
        c(raw[k], raw[k + 1])
    });
    let qr = m.qr();
    let r = qr.r();
    let phases = DMatrix::from_fn(dim, dim, |i, j| {
        let d = r[(i, i)];
        if i == j && d.norm() > 0.0 {
            d / d.norm()
        } else {
            c(0.0, 0.0)
        }
    });
    qr.q() * phases
}

fn unitary(dim: usize) -> impl Strategy<Value = DMatrix<Complex64>> {
    prop::collection::vec(-1.0..1.0f64, 2 * dim * dim)
        .prop_filter("well conditioned", |v| v.iter().map(|x| x.abs()).sum::<f64>() > 0.5)
        .prop_map(move |v| unitary_from(&v, dim))
}

fn four_modes() -> Vec<ModeId> {
    vec![ModeId::h(1), ModeId::v(1), ModeId::h(2), ModeId::v(2)]
}

/// Normalized state with `photons` photons spread over four modes.
fn fock_state() -> impl Strategy<Value = FockState> {
    (1u8..=3)
        .prop_flat_map(|n| {
            prop::collection::vec(
                (prop::collection::vec(0usize..4, n as usize), -1.0..1.0f64, -1.0..1.0f64),
                1..5,
            )
        })
        .prop_filter_map("nonzero", |terms| {
            let register = four_modes();
            let terms = terms.into_iter().map(|(slots, re, im)| {
                let mut occ = vec![0u8; 4];
                for s in slots {
                    occ[s] += 1;
                }
                (occ, c(re, im))
            });
            let s = FockState::from_terms(&register, terms).ok()?;
            (s.norm_sqr() > 1e-3).then(|| s.normalized())
        })
}

/// Creation operator on `modes` modes, each truncated at `cutoff` photons.
fn creation(mode: usize, modes: usize, cutoff: usize) -> DMatrix<Complex64> {
    let d = cutoff + 1;
    let single = DMatrix::from_fn(d, d, |i, j| if i == j + 1 { c((i as f64).sqrt(), 0.0) } else { c(0.0, 0.0) });
    let id = DMatrix::<Complex64>::identity(d, d);
    (0..modes).fold(DMatrix::<Complex64>::identity(1, 1), |acc, k| {
        acc.kronecker(if k == mode { &single } else { &id })
    })
}

fn factorial(n: u8) -> f64 {
    (1..=u32::from(n)).map(f64::from).product()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn random_elements_preserve_norm_and_photon_number(u in unitary(4), state in fock_state()) {
        let t = ModeTransform::new(four_modes(), u).unwrap();
        prop_assert!(t.is_unitary(TOL));
        let before = state.photon_numbers();
        let out = state.apply_transform(&t).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < TOL);
        prop_assert_eq!(out.photon_numbers(), before);
    }

    #[test]
    fn composition_matches_sequential_application(a in unitary(4), b in unitary(4), state in fock_state()) {
        let ta = ModeTransform::new(four_modes(), a).unwrap();
        let tb = ModeTransform::new(four_modes(), b).unwrap();
        let stepwise = state.apply_transform(&ta).unwrap().apply_transform(&tb).unwrap();
        let combined = state.apply_transform(&ta.then(&tb).unwrap()).unwrap();
        let overlap = stepwise.inner_product(&combined).unwrap();
        prop_assert!((overlap - c(1.0, 0.0)).norm() < TOL);
    }

    #[test]
    fn sequential_and_parallel_agree(u in unitary(4), state in fock_state()) {
        let t = ModeTransform::new(four_modes(), u).unwrap();
        let a = state.apply_transform_with(&t, Execution::Sequential).unwrap();
        let b = state.apply_transform_with(&t, Execution::Parallel).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn bosonic_factors_match_operator_oracle(u in unitary(2), n1 in 0u8..=4, n2 in 0u8..=4) {
        prop_assume!(n1 + n2 <= 4 && n1 + n2 > 0);
        let modes = [ModeId::h(1), ModeId::h(2)];
        let t = ModeTransform::new(modes.to_vec(), u.clone()).unwrap();
        let input = FockState::from_terms(&modes, [(vec![n1, n2], c(1.0, 0.0))]).unwrap();
        let out = input.apply_transform(&t).unwrap();

        let cutoff = 4;
        let a = [creation(0, 2, cutoff), creation(1, 2, cutoff)];
        let images: Vec<DMatrix<Complex64>> =
            (0..2).map(|j| &a[0] * u[(0, j)] + &a[1] * u[(1, j)]).collect();
        let mut v = DMatrix::<Complex64>::zeros((cutoff + 1) * (cutoff + 1), 1);
        v[(0, 0)] = c(1.0, 0.0);
        for (j, &n) in [n1, n2].iter().enumerate() {
            for _ in 0..n {
                v = &images[j] * v;
            }
            v /= c(factorial(n).sqrt(), 0.0);
        }
        for o1 in 0..=cutoff as u8 {
            for o2 in 0..=cutoff as u8 {
                let want = v[(o1 as usize * (cutoff + 1) + o2 as usize, 0)];
                let got = out.amplitude(&[o1, o2]);
                prop_assert!((got - want).norm() < TOL, "|{},{}⟩: {} vs {}", o1, o2, got, want);
            }
        }
    }

    #[test]
    fn polarization_insensitive_splitter_commutes_with_waveplates(
        t in 0.0..=1.0f64,
        r in unitary(2),
        state in fock_state(),
    ) {
        let split = pdbs(&PdbsSpec::new(t, t, (1, 2))).unwrap();
        let z = c(0.0, 0.0);
        let block = DMatrix::from_fn(4, 4, |i, j| if i / 2 == j / 2 { r[(i % 2, j % 2)] } else { z });
        let plates = ModeTransform::new(four_modes(), block).unwrap();
        let a = state.apply_transform(&split).unwrap().apply_transform(&plates).unwrap();
        let b = state.apply_transform(&plates).unwrap().apply_transform(&split).unwrap();
        prop_assert!((a.inner_product(&b).unwrap() - c(1.0, 0.0)).norm() < TOL);
    }

    #[test]
    fn schmidt_coefficients_invariant_under_local_unitaries(
        raw in prop::collection::vec(-1.0..1.0f64, 8),
        u in unitary(2),
        v in unitary(2),
    ) {
        let m = Matrix2::new(c(raw[0], raw[1]), c(raw[2], raw[3]), c(raw[4], raw[5]), c(raw[6], raw[7]));
        let norm = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let m = m / c(norm, 0.0);
        let u = Matrix2::from_fn(|i, j| u[(i, j)]);
        let v = Matrix2::from_fn(|i, j| v[(i, j)]);
        let a = schmidt_decompose(&m).unwrap();
        let b = schmidt_decompose(&(u * m * v.transpose())).unwrap();
        prop_assert!((a.coefficients[0] - b.coefficients[0]).abs() < TOL);
        prop_assert!((a.coefficients[1] - b.coefficients[1]).abs() < TOL);
        prop_assert!((a.coefficients[0].powi(2) + a.coefficients[1].powi(2) - 1.0).abs() < TOL);
        prop_assert!((a.reconstruct() - m).norm() < TOL);
    }

    #[test]
    fn estimates_flip_with_operator_sign(counts in prop::array::uniform16(0u64..500), which in 0usize..9) {
        prop_assume!(counts.iter().sum::<u64>() > 0);
        let setting = standard_settings()[which];
        let oc = OutcomeCounts { setting, counts, duration: None };
        for op in derivable_operators(&setting).unwrap() {
            let a = estimate_expectation(&oc, &op).unwrap();
            let b = estimate_expectation(&oc, &-&op).unwrap();
            prop_assert_eq!(a.value, -b.value);
            prop_assert_eq!(a.sigma, b.sigma);
            prop_assert!(a.value.abs() <= 1.0);
        }
    }

    #[test]
    fn ideal_counts_give_unit_correlations(scale in 1u64..200) {
        let ideal = cluster_state(4, Convention::MainText).unwrap();
        let all: Vec<OutcomeCounts> = standard_settings()
            .into_iter()
            .map(|setting| {
                let p = ideal_distribution(&setting, &ideal).unwrap();
                let counts = p.map(|x| (x * 16.0 * scale as f64).round() as u64);
                OutcomeCounts { setting, counts, duration: None }
            })
            .collect();
        let report = analyze(&all).unwrap();
        for row in &report.stabilizers {
            prop_assert!((row.estimate.value - 1.0).abs() < 1e-12, "{}", row.estimate.operator);
            prop_assert!(row.estimate.sigma < 1e-12);
        }
        prop_assert!((report.fidelity - 1.0).abs() < 1e-12);
        for r in &report.error_rates {
            prop_assert_eq!(r.incorrect, 0);
        }
        prop_assert!(report.lhv.contradiction);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn connection_order_is_irrelevant(order in Just(vec![0usize, 1, 2]).prop_shuffle()) {
        let reference = build_chain(4).unwrap();
        let mut permuted = reference.clone();
        permuted.elements = order.iter().map(|&i| reference.elements[i]).collect();
        let a = reference.run().unwrap();
        let b = permuted.run().unwrap();
        prop_assert!((a.probability - b.probability).abs() < TOL);
        prop_assert!((a.qubits.inner(&b.qubits).unwrap() - c(1.0, 0.0)).norm() < TOL);
    }
}

#[test]
fn chain_prefix_follows_recursion() {
    let h = QubitState::basis(1, 0);
    let v = QubitState::basis(1, 1);
    for k in 1..=3usize {
        let out = build_chain_prefix(k).unwrap().run().unwrap();
        let cluster = cluster_state(2 * k - 1, Convention::Standard).unwrap();
        let flipped = cluster.pauli_z(2 * k - 2);
        let weight = 0.5f64.powi(k as i32 - 1);
        let expected = QubitState::from_amplitudes(
            cluster
                .tensor(&h)
                .scaled(c(0.5 * weight, 0.0))
                .amplitudes()
                .iter()
                .zip(flipped.tensor(&v).scaled(c(3f64.sqrt() / 2.0 * weight, 0.0)).amplitudes())
                .map(|(a, b)| a + b)
                .collect(),
        )
        .unwrap();
        // accepted amplitudes, up to a global phase, are √p times the normalized state
        let actual = out.qubits.scaled(c(out.probability.sqrt(), 0.0));
        let overlap = expected.inner(&actual).unwrap();
        assert!((overlap.norm() - expected.norm_sqr()).abs() < TOL, "k={k}");
        assert!((actual.norm_sqr() - weight * weight).abs() < TOL, "k={k}");
    }
}
