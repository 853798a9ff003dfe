use approx::assert_abs_diff_eq;
use num_complex::Complex64;

use cluster_optics::elements::{attenuator, pdbs, AttenuatorSpec, PdbsSpec};
use cluster_optics::schemes::{build_chain, build_fig1a, build_fig1b, build_fig1c, parse_scheme};
use cluster_optics::stabilizer::{cluster_state, cluster_state_by_cphase, Convention};
use cluster_optics::{Error, Execution, FockState, ModeId, QubitState};

const TOL: f64 = 1e-10;

/// `½(HHHH + HHVV + VVHH − VVVV)`.
fn c4() -> QubitState {
    let mut amps = [0.0; 16];
    amps[0b0000] = 0.5;
    amps[0b0011] = 0.5;
    amps[0b1100] = 0.5;
    amps[0b1111] = -0.5;
    QubitState::from_real(&amps).unwrap()
}

#[test]
fn main_text_target_is_rotated_chain() {
    let target = cluster_state(4, Convention::MainText).unwrap();
    assert_abs_diff_eq!(target.fidelity(&c4()).unwrap(), 1.0, epsilon = 1e-14);
}

#[test]
fn weighted_pairs_give_c4_with_quarter_probability() {
    let out = build_fig1c().run().unwrap();
    assert_abs_diff_eq!(out.probability, 0.25, epsilon = TOL);
    assert_abs_diff_eq!(out.qubits.fidelity(&c4()).unwrap(), 1.0, epsilon = TOL);
    let complement = out.selection.complement.as_ref().unwrap();
    assert_abs_diff_eq!(complement.norm_sqr(), 1.0, epsilon = TOL);
}

#[test]
fn bell_pairs_with_attenuators_give_c4_with_ninth_probability() {
    let a = build_fig1a().run().unwrap();
    let b = build_fig1b().run().unwrap();
    assert_abs_diff_eq!(a.probability, 1.0 / 9.0, epsilon = TOL);
    assert_abs_diff_eq!(b.probability, 1.0 / 9.0, epsilon = TOL);
    assert_abs_diff_eq!(a.qubits.fidelity(&c4()).unwrap(), 1.0, epsilon = TOL);
    assert_abs_diff_eq!(b.qubits.fidelity(&a.qubits).unwrap(), 1.0, epsilon = TOL);
}

#[test]
fn uncompensated_scheme_misses_target() {
    let out = build_fig1a().without_attenuators().run().unwrap();
    let f = out.qubits.fidelity(&c4()).unwrap();
    assert!(f < 1.0 - 1e-3, "fidelity {f}");
    // each vertical photon that must stay in its arm contributes √(1/3)
    let expected = {
        let mut amps = [0.0; 16];
        amps[0b0000] = 1.0;
        amps[0b0011] = 1.0 / 3f64.sqrt();
        amps[0b1100] = 1.0 / 3f64.sqrt();
        amps[0b1111] = -1.0 / 3.0;
        QubitState::from_real(&amps).unwrap().normalized()
    };
    assert_abs_diff_eq!(out.qubits.fidelity(&expected).unwrap(), 1.0, epsilon = TOL);
    assert_abs_diff_eq!(out.probability, 4.0 / 9.0, epsilon = TOL);
}

#[test]
fn vertical_photons_on_central_element() {
    let modes = [ModeId::h(2), ModeId::v(2), ModeId::h(3), ModeId::v(3)];
    let input = FockState::from_terms(&modes, [(vec![0, 1, 0, 1], Complex64::new(1.0, 0.0))]).unwrap();
    let out = input.apply_transform(&pdbs(&PdbsSpec::central((2, 3))).unwrap()).unwrap();
    let close = |a: Complex64, b: Complex64| (a - b).norm() < TOL;
    assert!(close(out.amplitude(&[0, 1, 0, 1]), Complex64::new(-1.0 / 3.0, 0.0)));
    assert!(close(out.amplitude(&[0, 2, 0, 0]), Complex64::new(0.0, 2.0 / 3.0)));
    assert!(close(out.amplitude(&[0, 0, 0, 2]), Complex64::new(0.0, 2.0 / 3.0)));
    assert_eq!(out.term_count(), 3);
}

#[test]
fn horizontal_photons_pass_untouched() {
    let modes = [ModeId::h(2), ModeId::v(2), ModeId::h(3), ModeId::v(3)];
    let input = FockState::from_terms(&modes, [(vec![1, 0, 1, 0], Complex64::new(1.0, 0.0))]).unwrap();
    let out = input.apply_transform(&pdbs(&PdbsSpec::central((2, 3))).unwrap()).unwrap();
    assert_eq!(out, input);
}

#[test]
fn attenuator_leaks_two_thirds_of_horizontal() {
    let t = attenuator(&AttenuatorSpec::compensating(2, 5)).unwrap();
    let modes = [ModeId::h(2), ModeId::v(2), ModeId::h(5), ModeId::v(5)];
    let input = FockState::from_terms(&modes, [(vec![1, 0, 0, 0], Complex64::new(1.0, 0.0))]).unwrap();
    let out = input.apply_transform(&t).unwrap();
    assert_abs_diff_eq!(out.amplitude(&[1, 0, 0, 0]).norm_sqr(), 1.0 / 3.0, epsilon = TOL);
    assert_abs_diff_eq!(out.amplitude(&[0, 0, 1, 0]).norm_sqr(), 2.0 / 3.0, epsilon = TOL);
}

#[test]
fn chains_scale_as_quarter_per_connection() {
    for n in 2..=4usize {
        let out = build_chain(n).unwrap().run().unwrap();
        assert_abs_diff_eq!(out.probability, 0.25f64.powi(n as i32 - 1), epsilon = TOL);
        let target = cluster_state_by_cphase(2 * n).unwrap();
        assert_abs_diff_eq!(out.qubits.fidelity(&target).unwrap(), 1.0, epsilon = TOL);
    }
}

#[test]
fn execution_strategy_does_not_change_output() {
    let scheme = build_chain(3).unwrap();
    let a = scheme.run_with(Execution::Sequential).unwrap();
    let b = scheme.run_with(Execution::Parallel).unwrap();
    assert_eq!(a.output, b.output);
    assert_eq!(a.qubits, b.qubits);
    assert_eq!(a.probability.to_bits(), b.probability.to_bits());
    assert_eq!(a.term_counts, b.term_counts);
}

#[test]
fn scheme_text_round_trip() {
    for s in [build_fig1a(), build_fig1b(), build_fig1c(), build_chain(4).unwrap()] {
        assert_eq!(parse_scheme(&s.to_text()).unwrap(), s);
    }
}

#[test]
fn scheme_file_errors() {
    let cases = [
        ("source 1 2 HH=1\nsource 2 3 HH=1\ncoincidence 1 2\n", "shared mode"),
        ("source 1 2 HH=1\npdbs 2 7 1 1\ncoincidence 1 2\n", "undeclared mode"),
        ("source 1 2 HH=1\nattenuator 2 1 1 1\ncoincidence 1 2\n", "ancilla on source"),
        ("source 1 2 HH=1\nattenuator 2 5 1 1\ncoincidence 1 5\n", "ancilla in coincidence"),
    ];
    for (text, what) in cases {
        assert!(matches!(parse_scheme(text), Err(Error::Config(_))), "{what}");
    }
    assert!(matches!(parse_scheme("pdbs 1 2\n"), Err(Error::Parse { line: 1, .. })));
}

#[test]
fn state_text_round_trip() {
    let out = build_fig1c().run().unwrap();
    let text = out.output.to_text();
    let back = FockState::from_text(&text).unwrap();
    let overlap = back.inner_product(&out.output).unwrap();
    assert_abs_diff_eq!(overlap.re, 1.0, epsilon = 1e-10);
}
