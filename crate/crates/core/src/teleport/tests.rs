use super::*;
use crate::hilbert::{tensor, ONE};
use BellLabel::*;
use Pauli::*;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `(aH+bV)₁ (E₁O₂+O₁E₂)/√2 (H₂V₃+V₂H₃)/√2 (αE+βO)₃` assembled term by term.
fn reference_state(input: &InputQubits) -> StateVector {
    let reg = register();
    let mut amps = vec![ZERO; 64];
    let pol1 = [input.a, input.b];
    let oam3 = [input.alpha, input.beta];
    for (p1, &c1) in pol1.iter().enumerate() {
        for (o3, &c3) in oam3.iter().enumerate() {
            for (o1, o2) in [(0, 1), (1, 0)] {
                for (p2, p3) in [(0, 1), (1, 0)] {
                    let idx = reg.strides()[P1_POL] * p1
                        + reg.strides()[P1_OAM] * o1
                        + reg.strides()[P2_POL] * p2
                        + reg.strides()[P2_OAM] * o2
                        + reg.strides()[P3_POL] * p3
                        + reg.strides()[P3_OAM] * o3;
                    amps[idx] += c1 * c3 * 0.5;
                }
            }
        }
    }
    StateVector::new(amps).unwrap()
}

#[test]
fn circuit_prepares_reference_state() {
    let mut r = rng(1);
    for _ in 0..50 {
        let input = InputQubits::random(&mut r);
        let s = prepare_circuit(&input);
        assert!(s.max_abs_diff(&reference_state(&input)) < 1e-12);
    }
}

#[test]
fn spdc_matches_circuit_up_to_phase() {
    let mut r = rng(2);
    for _ in 0..50 {
        let input = InputQubits::random(&mut r);
        let profile = SpdcProfile::random_symmetric(&mut r, 3);
        let s = prepare_spdc(&profile, &input).unwrap();
        let f = fidelity(&s, &prepare_circuit(&input)).unwrap();
        assert!((f - 1.0).abs() < 1e-12, "fidelity {f}");
    }
}

#[test]
fn parity_pair_and_heralding() {
    let p = SpdcProfile::uniform(&[0, 1]).unwrap();
    let pair = reduce_to_parity_pair(&p).unwrap();
    assert!((pair.heralding_probability - 1.0).abs() < 1e-12);
    let r = FRAC_1_SQRT_2;
    assert!(
        pair.state
            .max_abs_diff(&StateVector::from_real(&[0.0, r, r, 0.0]).unwrap())
            < 1e-15
    );

    let skew = SpdcProfile::new([(0, re(0.6)), (1, re(0.8))].into_iter().collect()).unwrap();
    let (we, wo) = parity_weights(&skew);
    assert!((we - 0.36).abs() < 1e-12 && (wo - 0.64).abs() < 1e-12);
    assert!((reduce_to_parity_pair(&skew).unwrap().heralding_probability - 0.72).abs() < 1e-12);

    let even = SpdcProfile::uniform(&[0, 2, -2]).unwrap();
    assert!(matches!(
        reduce_to_parity_pair(&even),
        Err(Error::DegenerateProfile(..))
    ));
}

#[test]
fn negative_modes_use_euclidean_parity() {
    let p = SpdcProfile::uniform(&[-1, -2]).unwrap();
    let (we, wo) = parity_weights(&p);
    assert!((we - 0.5).abs() < 1e-12 && (wo - 0.5).abs() < 1e-12);
}

#[test]
fn soba_circuits_realize_bell_projectors() {
    let reg = register();
    for photon in [1u8, 3] {
        let direct = bell_projectors(reg, photon).unwrap();
        for flavor in [SobaFlavor::PolControlled, SobaFlavor::OamControlled] {
            let circ = soba_projectors(reg, photon, flavor).unwrap();
            for k in 0..4 {
                assert!(circ.projector(k).max_abs_diff(direct.projector(k)) < 1e-12);
            }
        }
    }
}

#[test]
fn every_outcome_has_probability_one_sixteenth() {
    let mut r = rng(3);
    for _ in 0..20 {
        let input = InputQubits::random(&mut r);
        for mode in [PrepMode::Circuit, PrepMode::Spdc] {
            let probs = outcome_probabilities(&prepare(&input, mode)).unwrap();
            for p in probs {
                assert!((p - 1.0 / 16.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn derived_recipes() {
    let t = corrections().unwrap();
    let expect = [
        (PsiPlus, PsiPlus, X, X),
        (PsiPlus, PsiMinus, IY, X),
        (PsiPlus, PhiPlus, I, X),
        (PsiPlus, PhiMinus, Z, X),
        (PsiMinus, PsiPlus, X, IY),
        (PsiMinus, PsiMinus, IY, IY),
        (PsiMinus, PhiPlus, I, IY),
        (PsiMinus, PhiMinus, Z, IY),
        (PhiPlus, PsiPlus, X, I),
        (PhiPlus, PsiMinus, IY, I),
        (PhiPlus, PhiPlus, I, I),
        (PhiPlus, PhiMinus, Z, I),
        (PhiMinus, PsiPlus, X, Z),
        (PhiMinus, PsiMinus, IY, Z),
        (PhiMinus, PhiPlus, I, Z),
        (PhiMinus, PhiMinus, Z, Z),
    ];
    for (p1, p3, pre, post) in expect {
        let row = t.row(SobaOutcome::new(p1, p3));
        assert_eq!(
            row.recipe,
            CorrectionRecipe::new(pre, post),
            "{}",
            row.outcome
        );
        assert_eq!(row.alternatives.len(), 1);
    }
}

#[test]
fn derived_templates_render() {
    let t = corrections().unwrap();
    let r = |a, b| t.row(SobaOutcome::new(a, b)).template.render();
    assert_eq!(r(PhiPlus, PhiPlus), "(αH+βV)(aE+bO)");
    assert_eq!(r(PsiPlus, PsiPlus), "(αV+βH)(aO+bE)");
    assert_eq!(r(PsiMinus, PhiMinus), "(−αH+βV)(aO−bE)");
}

#[test]
fn template_matching_ignores_global_phase_only() {
    let t = corrections().unwrap();
    let a = t.row(SobaOutcome::new(PsiPlus, PsiPlus)).template;
    let mut b = a;
    for row in b.coeffs.iter_mut() {
        for c in row.iter_mut() {
            *c *= Complex64::from_polar(1.0, 0.7);
        }
    }
    assert!(a.matches(&b));
    let other = t.row(SobaOutcome::new(PsiPlus, PsiMinus)).template;
    assert!(!a.matches(&other));
}

#[test]
fn forced_runs_restore_target_in_both_modes() {
    let mut r = rng(4);
    for _ in 0..10 {
        let input = InputQubits::random(&mut r);
        for mode in [PrepMode::Circuit, PrepMode::Spdc] {
            for o in SobaOutcome::all() {
                let tr = run_teleport_forced(&input, mode, o).unwrap();
                assert!(tr.succeeded(), "{o} {mode:?} F={}", tr.fidelity_to_target);
                assert!((tr.outcome_probability - 1.0 / 16.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn sampled_runs_are_deterministic_per_seed() {
    let input = InputQubits::random(&mut rng(5));
    let run = |seed| {
        let mut r = rng(seed);
        (0..32)
            .map(|_| {
                run_teleport(&input, PrepMode::Circuit, &mut r)
                    .unwrap()
                    .outcome
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(run(9), run(9));
}

#[test]
fn uncorrected_state_is_recipe_preimage_of_target() {
    let t = corrections().unwrap();
    let mut r = rng(6);
    let input = InputQubits::random(&mut r);
    let state = prepare_circuit(&input);
    for o in SobaOutcome::all() {
        let bob = bob_conditional_state(&state, o).unwrap().unwrap();
        let back = t
            .recipe_for(o)
            .unitary()
            .adjoint()
            .act(&input.target())
            .unwrap();
        assert!((fidelity(&bob, &back).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn input_validation() {
    assert!(matches!(
        InputQubits::new(ONE, ONE, ONE, ZERO),
        Err(Error::NotNormalized(_))
    ));
    assert!(matches!(
        InputQubits::normalized(ZERO, ZERO, ONE, ZERO),
        Err(Error::ZeroNorm)
    ));
    let t = InputQubits::canonical()[1].target();
    assert!(
        t.max_abs_diff(&tensor(&[StateVector::basis(2, 0), StateVector::basis(2, 1)]).unwrap())
            < 1e-15
    );
}

#[test]
fn table_audit_reports_label_exchange() {
    let audit = verify_table1().unwrap();
    assert_eq!(audit.template_matches, 0);
    assert!(audit.sources_are_bijection);
    assert_eq!(audit.template_matches_via_source, 16);
    assert_eq!(audit.recipe_matches_via_source, 15);
    assert_eq!(audit.internally_consistent, 15);
    let swap: BTreeMap<String, String> = [
        ("phi+", "psi+"),
        ("phi-", "psi-"),
        ("psi+", "phi+"),
        ("psi-", "phi-"),
    ]
    .into_iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    assert_eq!(audit.photon1_label_map.as_ref(), Some(&swap));
    assert_eq!(audit.photon3_label_map.as_ref(), Some(&swap));
    let bad: Vec<_> = audit
        .rows
        .iter()
        .filter(|r| !r.internally_consistent)
        .collect();
    assert_eq!(bad.len(), 1);
    assert_eq!(bad[0].outcome, SobaOutcome::new(PsiMinus, PhiPlus));
    assert_eq!(bad[0].replacement_recipe, Some(CorrectionRecipe::new(X, Z)));
    assert!(!audit.fully_matches());
}
