use proptest::prelude::*;
use trihyper::gates::{su2, su2_angles_for};
use trihyper::hilbert::{sample_index, unitarity_defect, C64};
use trihyper::qkd::{pack_bits, pack_trits};
use trihyper::teleport::{
    default_profile, outcome_probabilities, prepare_circuit, prepare_spdc, teleport_prepared,
    InputQubits, SobaOutcome,
};

fn amp() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| C64::new(re, im))
}

fn input() -> impl Strategy<Value = InputQubits> {
    (amp(), amp(), amp(), amp())
        .prop_filter("non-degenerate", |(a, b, c, d)| {
            a.norm_sqr() + b.norm_sqr() > 1e-3 && c.norm_sqr() + d.norm_sqr() > 1e-3
        })
        .prop_map(|(a, b, c, d)| InputQubits::normalized(a, b, c, d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn su2_synthesis_reaches_any_qubit((a, b) in (amp(), amp()).prop_filter("nonzero", |(a, b)| a.norm_sqr() + b.norm_sqr() > 1e-3)) {
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (a, b) = (a / n, b / n);
        let (x, y, z) = su2_angles_for(a, b);
        let u = su2(x, y, z);
        prop_assert!(unitarity_defect(u.matrix()) < 1e-12);
        prop_assert!((u.matrix().get(0, 0) - a).norm() < 1e-12);
        prop_assert!((u.matrix().get(1, 0) - b).norm() < 1e-12);
    }

    #[test]
    fn every_outcome_teleports_arbitrary_inputs(inp in input()) {
        for state in [prepare_circuit(&inp), prepare_spdc(&default_profile(), &inp).unwrap()] {
            for p in outcome_probabilities(&state).unwrap() {
                prop_assert!((p - 1.0 / 16.0).abs() < 1e-12);
            }
            for o in SobaOutcome::all() {
                let f = teleport_prepared(&state, &inp, o).unwrap().fidelity_to_target;
                prop_assert!((1.0 - f).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sampling_skips_impossible_outcomes(probs in prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..1.0], 1..12), u in 0.0f64..1.0) {
        match sample_index(&probs, u) {
            Some(i) => prop_assert!(probs[i] > 0.0),
            None => prop_assert!(probs.iter().all(|&p| p <= 0.0)),
        }
    }

    #[test]
    fn trit_packing_round_trips(trits in prop::collection::vec(0u8..3, 0..64)) {
        let packed = pack_trits(&trits);
        prop_assert_eq!(packed.len(), trits.len().div_ceil(5));
        for (chunk, &byte) in trits.chunks(5).zip(&packed) {
            let mut v = byte;
            let mut back = vec![0u8; chunk.len()];
            for slot in back.iter_mut().rev() {
                *slot = v % 3;
                v /= 3;
            }
            prop_assert_eq!(&back[..], chunk);
        }
    }

    #[test]
    fn bit_packing_is_msb_first(bits in prop::collection::vec(0u8..2, 0..64)) {
        let packed = pack_bits(&bits);
        prop_assert_eq!(packed.len(), bits.len().div_ceil(8));
        for (i, &b) in bits.iter().enumerate() {
            prop_assert_eq!((packed[i / 8] >> (7 - i % 8)) & 1, b);
        }
    }
}
