use proptest::prelude::*;
use qarch_core::circuit::{two_qubit_gate_count, Circuit, Instruction};
use qarch_core::gate::{GateKind, NativeGateSet};
use qarch_core::sim::outcome_distribution;
use qarch_core::transpile::{transpile, Pass};

fn arb_circuit() -> impl Strategy<Value = Circuit> {
    (1usize..=4).prop_flat_map(|n| {
        let gate = (0usize..7, 0..n, 0..n.max(2) - 1);
        (
            Just(n),
            proptest::collection::vec(any::<bool>(), n),
            proptest::collection::vec(gate, 0..=20),
        )
            .prop_map(|(n, ones, gates)| {
                let mut c = Circuit::new(n);
                for (q, one) in ones.into_iter().enumerate() {
                    if one {
                        c.prepare_one(q);
                    }
                }
                for (g, a, b) in gates {
                    let kinds = [GateKind::H, GateKind::T, GateKind::X, GateKind::Y];
                    if g < 4 || n == 1 {
                        c.push(Instruction::single(kinds[g % 4], a));
                    } else {
                        let b = if b >= a { b + 1 } else { b };
                        let pair = [GateKind::CNOT, GateKind::CZ, GateKind::SWAP][g - 4];
                        c.push(Instruction::two(pair, a, b));
                    }
                }
                c.measure_all();
                c
            })
    })
}

fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

fn only_native(c: &Circuit, ns: &NativeGateSet) -> bool {
    c.instructions.iter().all(|i| ns.contains(i.kind))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn every_pass_list_preserves_the_distribution(c in arb_circuit(), mask in 0u8..16) {
        let passes: Vec<Pass> = Pass::DEFAULT
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, p)| *p)
            .collect();
        let want = outcome_distribution(&c).unwrap();
        for native in ["xx", "zx", "cz"] {
            let ns = NativeGateSet::by_name(native).unwrap();
            let t = transpile(&c, &ns, &passes).unwrap();
            prop_assert!(only_native(&t, &ns), "{native}: {}", t.to_text());
            prop_assert!(tv(&want, &outcome_distribution(&t).unwrap()) < 1e-9);
        }
    }

    #[test]
    fn merging_never_adds_gates(c in arb_circuit()) {
        for native in ["xx", "zx", "cz"] {
            let ns = NativeGateSet::by_name(native).unwrap();
            let plain = transpile(&c, &ns, &[Pass::Decompose]).unwrap();
            let merged = transpile(&c, &ns, &[Pass::Decompose, Pass::MergeRotations]).unwrap();
            prop_assert!(merged.instructions.len() <= plain.instructions.len());
            prop_assert_eq!(two_qubit_gate_count(&merged), two_qubit_gate_count(&plain));
        }
    }

    #[test]
    fn text_round_trip(c in arb_circuit()) {
        let back: Circuit = c.to_text().parse().unwrap();
        prop_assert_eq!(back, c);
    }
}

#[test]
fn classical_spam_prep_on_ion_trap_is_complemented() {
    let mut c = Circuit::new(1);
    c.prepare_one(0);
    c.measure_all();
    let ns = NativeGateSet::by_name("xx").unwrap();
    let t = transpile(&c, &ns, &Pass::DEFAULT).unwrap();
    assert!(t.instructions.is_empty());
    assert!(t.initial_ones.is_empty());
    assert!(t.complemented.contains(&0));
    assert_eq!(outcome_distribution(&t).unwrap(), vec![0.0, 1.0]);
}
