use std::f64::consts::FRAC_PI_4;

use catlocc::locc::{clone_member, locality_check, ProtocolStep, Registers, Role, Slot, COMPLETENESS_TOL};
use catlocc::qstate::{fidelity, mix, random_unitary};
use catlocc::witness::{party_cut, witness_set};
use catlocc::{
    cat_state, ghz_state, max_clonable_set, negativity, run, theorem4_protocol, theorem5_protocol, verify_cloning,
    CMatrix, CatLabel, PairKind, Protocol, PureState, Verdict, C64,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cat(n: usize, p: u8, tail: usize, alpha: f64) -> PureState {
    cat_state(&CatLabel::from_bits(n, p, tail, alpha).unwrap()).unwrap()
}

fn states(labels: &[CatLabel]) -> Vec<PureState> {
    labels.iter().map(|l| cat_state(l).unwrap()).collect()
}

/// Two-outcome measurement `{U P0, U P1}` for a random unitary `U`.
fn random_measurement(rng: &mut ChaCha8Rng) -> Vec<CMatrix> {
    let u = random_unitary(2, rng);
    vec![
        u.matmul(&CMatrix::from_real_diag(&[1.0, 0.0])).unwrap(),
        u.matmul(&CMatrix::from_real_diag(&[0.0, 1.0])).unwrap(),
    ]
}

/// Random protocol of local gates, broadcast measurements and conditionals.
fn random_protocol(n: usize, steps: usize, rng: &mut ChaCha8Rng) -> Protocol {
    let mut out = Vec::with_capacity(steps);
    let mut broadcasts = 0;
    for _ in 0..steps {
        let party = rng.random_range(1..=n);
        let role = if rng.random_bool(0.5) {
            Role::Original
        } else {
            Role::Blank
        };
        let step = match rng.random_range(0..4) {
            0 => ProtocolStep::local_gate(party, &[role], random_unitary(2, rng), "U"),
            1 => ProtocolStep::local_gate(party, &[Role::Original, Role::Blank], random_unitary(4, rng), "U2"),
            2 => {
                broadcasts += 1;
                ProtocolStep::Measure {
                    slot: Slot { party, role },
                    operators: random_measurement(rng),
                    broadcast: true,
                }
            }
            _ if broadcasts > 0 => ProtocolStep::Conditional {
                message: rng.random_range(0..broadcasts),
                outcome: rng.random_range(0..2),
                step: Box::new(ProtocolStep::local_gate(party, &[role], random_unitary(2, rng), "U")),
            },
            _ => ProtocolStep::Measure {
                slot: Slot { party, role },
                operators: random_measurement(rng),
                broadcast: false,
            },
        };
        out.push(step);
    }
    Protocol {
        name: "random".into(),
        registers: Registers::new(n).unwrap(),
        steps: out,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn branch_probabilities_sum_to_one(seed in any::<u64>(), n in 2usize..=3, steps in 0usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let protocol = random_protocol(n, steps, &mut rng);
        prop_assert!(locality_check(&protocol).is_ok());
        let input = PureState::random(2 * n, &mut rng);
        let branches = run(&protocol, &input).unwrap();
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-10, "total {}", total);
        for b in &branches {
            prop_assert!((b.state.amplitudes().norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn filter_channel_never_raises_negativity(seed in any::<u64>(), alpha in 0.05f64..FRAC_PI_4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 2;
        let input = PureState::random(2 * n, &mut rng);
        let branches = run(&theorem4_protocol(n, alpha).unwrap(), &input).unwrap();
        let states: Vec<PureState> = branches.iter().map(|b| b.state.clone()).collect();
        let weights: Vec<f64> = branches.iter().map(|b| b.probability).collect();
        let rho_out = mix(&states, &weights).unwrap();
        let rho_in = mix(&[input], &[1.0]).unwrap();
        for party in 1..=n {
            let cut = party_cut(n, party).unwrap();
            let before = negativity(&rho_in, &cut).unwrap();
            let after = negativity(&rho_out, &cut).unwrap();
            prop_assert!(after <= before + 1e-9, "party {}: {} -> {}", party, before, after);
        }
    }
}

#[test]
fn emitted_protocols_are_local() {
    for n in 2..=6 {
        for alpha in [0.1, 0.3, FRAC_PI_4] {
            assert!(locality_check(&theorem4_protocol(n, alpha).unwrap()).is_ok());
        }
        assert!(locality_check(&theorem5_protocol(n, PairKind::I).unwrap()).is_ok());
        assert!(locality_check(&theorem5_protocol(n, PairKind::II).unwrap()).is_ok());
    }
}

#[test]
fn filter_measurement_is_complete() {
    for alpha in [0.01, 0.3, FRAC_PI_4] {
        let [m0, m1] = catlocc::locc::cat_filter_operators(alpha);
        let sum = m0
            .adjoint()
            .matmul(&m0)
            .unwrap()
            .add(&m1.adjoint().matmul(&m1).unwrap())
            .unwrap();
        assert!(sum.max_abs_diff(&CMatrix::identity(2)) < COMPLETENESS_TOL);
    }
}

#[test]
fn cnot_layer_factorizes_into_original_and_ghz_like_copy() {
    let n = 3;
    let alpha = 0.3;
    let full = theorem4_protocol(n, alpha).unwrap();
    let cnots = Protocol {
        steps: full.steps[..n].to_vec(),
        ..full.clone()
    };
    for tail in 0..4 {
        let psi = cat(n, 0, tail, alpha);
        let out = run(&cnots, &psi.tensor(&ghz_state(n).unwrap())).unwrap();
        assert_eq!(out.len(), 1);
        let expected = psi.tensor(&cat(n, 0, tail, FRAC_PI_4));
        assert!((fidelity(&out[0].state, &expected).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn blank_flip_correction_restores_canonical_order() {
    let (alpha, n) = (0.3f64, 3);
    let (c, s) = (alpha.cos(), alpha.sin());
    for tail in 0..4usize {
        let top = 1 << (n - 1);
        let t_bar = !tail & (top - 1);
        let mut swapped = vec![0.0; 1 << n];
        swapped[tail] = s;
        swapped[top | t_bar] = c;
        let mut psi = PureState::from_real(n, &swapped).unwrap();
        for q in 1..=n {
            psi = psi.apply_gate(&CMatrix::pauli_x(), &[q]).unwrap();
        }
        // X on every qubit maps |0t> <-> |1t̄>
        let expected = cat(n, 0, tail, alpha);
        let diff = psi
            .amplitudes()
            .entries()
            .iter()
            .zip(expected.amplitudes().entries())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-15);
    }
}

#[test]
fn filter_cloner_branches_have_equal_weight() {
    for n in 2..=4 {
        let blank = ghz_state(n).unwrap();
        for label in max_clonable_set(n, 0.3).unwrap() {
            let (report, _) =
                clone_member(&theorem4_protocol(n, 0.3).unwrap(), &cat_state(&label).unwrap(), &blank).unwrap();
            assert_eq!(report.branches.len(), 2);
            for b in &report.branches {
                assert!((b.probability - 0.5).abs() < 1e-12, "{label}: {}", b.probability);
                assert!(b.fidelity > 1.0 - 1e-9);
            }
        }
    }
}

#[test]
fn filter_cloner_misses_the_sign_partner() {
    let n = 3;
    let psi = cat(n, 1, 0, 0.3);
    let (report, _) = clone_member(&theorem4_protocol(n, 0.3).unwrap(), &psi, &ghz_state(n).unwrap()).unwrap();
    assert!(report.min_fidelity < 1.0 - 1e-3, "{}", report.min_fidelity);
    assert!((report.total_probability - 1.0).abs() < 1e-10);
}

#[test]
fn forward_cnot_cloner_copies_every_p0_ghz() {
    for n in 2..=5 {
        let set: Vec<PureState> = (0..1 << (n - 1)).map(|t| cat(n, 0, t, FRAC_PI_4)).collect();
        let report = verify_cloning(
            &theorem5_protocol(n, PairKind::II).unwrap(),
            &set,
            &ghz_state(n).unwrap(),
        )
        .unwrap();
        assert!(report.success);
    }
}

#[test]
fn backward_cnot_cloner_rejects_product_input() {
    let n = 3;
    let prod = PureState::basis(n, 0).unwrap();
    let report = verify_cloning(
        &theorem5_protocol(n, PairKind::I).unwrap(),
        &[prod],
        &ghz_state(n).unwrap(),
    )
    .unwrap();
    assert!(!report.success);
}

#[test]
fn three_ghz_states_defeat_the_pair_protocols() {
    let set = states(&[
        CatLabel::from_bits(3, 0, 0b00, FRAC_PI_4).unwrap(),
        CatLabel::from_bits(3, 0, 0b10, FRAC_PI_4).unwrap(),
        CatLabel::from_bits(3, 1, 0b00, FRAC_PI_4).unwrap(),
    ]);
    let blank = ghz_state(3).unwrap();
    for kind in [PairKind::I, PairKind::II] {
        let report = verify_cloning(&theorem5_protocol(3, kind).unwrap(), &set, &blank).unwrap();
        assert!(!report.success, "{kind:?}");
    }
}

#[test]
fn witness_agrees_with_certified_cloners() {
    // every set certified clonable must not be flagged impossible with the same blank
    let mut certified: Vec<(Vec<PureState>, PureState)> = Vec::new();
    for n in 2..=4 {
        let blank = ghz_state(n).unwrap();
        for alpha in [0.05, 0.2, 0.3, 0.6, FRAC_PI_4] {
            let set = states(&max_clonable_set(n, alpha).unwrap());
            let report = verify_cloning(&theorem4_protocol(n, alpha).unwrap(), &set, &blank).unwrap();
            assert!(report.success);
            certified.push((set, blank.clone()));
        }
        let pair = vec![cat(n, 0, 0, FRAC_PI_4), cat(n, 1, 0, FRAC_PI_4)];
        assert!(
            verify_cloning(&theorem5_protocol(n, PairKind::I).unwrap(), &pair, &blank)
                .unwrap()
                .success
        );
        certified.push((pair, blank.clone()));
    }
    for (set, blank) in &certified {
        let r = witness_set(set, blank).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive, "{:?}", r.cuts);
    }
}

#[test]
fn phases_on_kraus_operators_keep_probabilities() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let phase = C64::from_polar(1.0, 0.7);
    let [m0, m1] = catlocc::locc::cat_filter_operators(0.4);
    let protocol = Protocol {
        name: "phased".into(),
        registers: Registers::new(2).unwrap(),
        steps: vec![ProtocolStep::Measure {
            slot: Slot {
                party: 2,
                role: Role::Original,
            },
            operators: vec![m0.scaled(phase), m1],
            broadcast: true,
        }],
    };
    let out = run(&protocol, &PureState::random(4, &mut rng)).unwrap();
    assert!((out.iter().map(|b| b.probability).sum::<f64>() - 1.0).abs() < 1e-12);
}
