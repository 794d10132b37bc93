use std::collections::BTreeMap;

use causep::born::{
    born_probability, measure_witness, sample_outcomes, Compilation, Instrument, SettingTerm, WitnessDecomposition,
};
use causep::catalog::{self, qubit_state, w_etas};
use causep::robustness::{unitary_restriction_constraints, Engine, Restriction, Witness};
use causep::spaces::{MembershipTolerance, ProcessMatrix, Scenario};
use causep::tensor::OperatorJson;
use causep::{Operator, Party, Pauli, PauliExpansion};

#[test]
fn white_noise_sits_deep_inside() {
    for s in [Scenario::bipartite(), Scenario::tripartite()] {
        let r = Engine::default().random_robustness(&catalog::white(&s), None).unwrap();
        assert!((r.r_star + 1.0).abs() < 1e-6, "{s}: {}", r.r_star);
        assert_eq!(r.random_robustness, 0.0);
        assert_eq!(r.visibility_threshold, 1.0);
    }
}

#[test]
fn separable_process_gets_nonnegative_witness() {
    let w = w_etas(0.3, -0.4);
    let rep = Engine::default().construct_witness(&w, None, &Restriction::none()).unwrap();
    assert!(rep.value >= -1e-7);
    assert!(rep.threshold.is_none());
}

#[test]
fn generalized_robustness_bounds() {
    let eng = Engine::default();
    assert!(eng.generalized_robustness(&w_etas(0.3, 0.4)).unwrap().value.abs() < 1e-6);
    let w = w_etas(0.8, 0.6);
    let g = eng.generalized_robustness(&w).unwrap().value;
    let r = eng.random_robustness(&w, None).unwrap().r_star;
    assert!(g > 1e-4 && g <= r + 1e-6, "g = {g}, r* = {r}");
}

#[test]
fn switch_generalized_robustness_is_certified() {
    let w = catalog::switch_default();
    let eng = Engine::default();
    let g = eng.generalized_robustness(&w).unwrap();
    assert!(g.value > 1e-3);
    assert!(g.value <= eng.random_robustness(&w, None).unwrap().r_star + 1e-6);
    let tol = MembershipTolerance::loose(1e-6);
    let target = w.op().try_add(&g.omega).unwrap();
    assert!(causep::robustness::check_decomposition(w.scenario(), &g.decomposition, &target, &tol).unwrap());
    assert!(g.omega.min_eigenvalue() > -1e-6);
}

#[test]
fn unitary_constraints_on_tabulated_witnesses() {
    let residual = |w: &Witness| {
        unitary_restriction_constraints(w.scenario())
            .iter()
            .map(|(_, m)| m.apply(w.op()).unwrap().matrix().iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    };
    assert!(residual(&catalog::s_tilde()) < 1e-3);
    assert!(residual(&catalog::s_switch()) > 1e-2);
    let id = catalog::white(&Scenario::tripartite()).into_op();
    let trivial = Witness::new(Scenario::tripartite(), id, None).unwrap();
    assert!(residual(&trivial) < 1e-15);
}

#[test]
fn psd_operator_is_a_witness() {
    let s = Scenario::tripartite();
    let m = catalog::switch_default().into_op();
    let w = Witness::new(s, m, None).unwrap();
    let check = Engine::default().verify_witness(&w, 1e-6).unwrap();
    assert!(check.valid);
    assert_eq!(check.method, "search");
}

#[test]
fn s_family_certificates() {
    for v in [0.2, 0.6, 1.0] {
        let check = Engine::default().verify_witness(&catalog::s_family(v), 1e-9).unwrap();
        assert!(check.valid && check.method == "certificate", "v = {v}: {check:?}");
    }
}

#[test]
fn catalog_json_round_trips() {
    for name in ["w-etas", "switch", "depol", "deph", "s-tilde", "s-family"] {
        let entry = catalog::lookup(name, &BTreeMap::new()).unwrap();
        let text = OperatorJson::from_operator(entry.object.operator()).to_string_pretty();
        let parsed = OperatorJson::parse(&text).unwrap();
        let e = parsed.expansion().unwrap().unwrap();
        assert_eq!(OperatorJson::from_expansion(&e).to_string_pretty(), text, "{name}");
        let back = parsed.to_operator().unwrap();
        let diff = back.try_sub(entry.object.operator()).unwrap();
        assert!(diff.matrix().iter().all(|z| z.norm() < 1e-15), "{name}");
    }
    let s = catalog::s_switch();
    let back = Witness::from_json_str(&s.to_json().to_string()).unwrap();
    assert!(back.certificate().is_some());
    assert!(Engine::default().verify_witness(&back, 5e-3).unwrap().valid);
}

#[test]
fn white_noise_born_probabilities() {
    let w = catalog::white(&Scenario::bipartite());
    let a = Instrument::recorded_preparation(Party::A, Pauli::Z).unwrap();
    let b = Instrument::measure_prepare(Party::B, Pauli::Z, Pauli::I, 1.0).unwrap();
    let p = born_probability(&[&a.elements[0], &b.elements[0]], &w).unwrap();
    assert!((p - 0.25).abs() < 1e-12);
}

#[test]
fn born_sums_to_one_on_the_switch() {
    let w = catalog::switch_default();
    for (pa, pb, pc) in [(Pauli::X, Pauli::Z, Pauli::X), (Pauli::Y, Pauli::X, Pauli::Z), (Pauli::Z, Pauli::Y, Pauli::Y)] {
        let term = SettingTerm {
            instruments: vec![
                Instrument::measure_prepare(Party::A, pa, pb, 1.0).unwrap(),
                Instrument::measure_prepare(Party::B, pb, pa, -1.0).unwrap(),
                Instrument::charlie(pc),
            ],
            weights: vec![],
        };
        let probs = term.probabilities(&w).unwrap();
        assert!((probs.iter().map(|(_, p)| p).sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(probs.iter().all(|(_, p)| (-1e-12..=1.0 + 1e-12).contains(p)));
    }
}

/// Measure along a Bloch direction, then prepare `(1 + output)/2`.
fn tilted(party: Party, n: [f64; 3], output: Pauli) -> Instrument {
    let layout = causep::born::party_layout(party).unwrap();
    let elements = [1.0, -1.0]
        .iter()
        .map(|&s| {
            let mut e = PauliExpansion::from_terms(layout.clone(), [("11", 0.25)]).unwrap();
            for (p, x) in ["X", "Y", "Z"].iter().zip(n) {
                e.add_term(format!("{p}1").parse().unwrap(), 0.25 * s * x).unwrap();
                if output != Pauli::I {
                    e.add_term(format!("{p}{}", output.symbol()).parse().unwrap(), 0.25 * s * x).unwrap();
                }
            }
            if output != Pauli::I {
                e.add_term(format!("1{}", output.symbol()).parse().unwrap(), 0.25).unwrap();
            }
            e.to_operator()
        })
        .collect();
    Instrument::new(party, "tilted", elements).unwrap()
}

#[test]
fn invalid_process_gives_negative_probability() {
    let w = w_etas(0.9, 0.9);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut lowest = f64::INFINITY;
    for nb in [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [h, 0.0, h], [h, 0.0, -h]] {
        for qa in Pauli::ALL {
            for qb in Pauli::ALL {
                for ta in [1.0, -1.0] {
                    let a = Instrument::measure_prepare(Party::A, Pauli::Z, qa, ta).unwrap();
                    let b = tilted(Party::B, nb, qb);
                    assert!(b.validate(1e-12).valid);
                    let term = SettingTerm { instruments: vec![a, b], weights: vec![] };
                    for (_, p) in term.probabilities(&w).unwrap() {
                        lowest = lowest.min(p);
                    }
                }
            }
        }
    }
    assert!(lowest < -1e-3, "{lowest}");
}

#[test]
fn unitary_only_measurement_of_restricted_witness() {
    let d = WitnessDecomposition::compile(&catalog::s_tilde(), Compilation::Unitary).unwrap();
    assert!(d.residual().unwrap() < 1e-10);
    for t in &d.terms {
        for i in &t.instruments {
            assert!(i.validate(1e-10).valid);
        }
    }
    let v = measure_witness(&d, &catalog::switch_default()).unwrap();
    assert!((v + 0.5058).abs() < 5e-3, "{v}");
}

#[test]
fn white_noise_outcomes_are_uniform() {
    let w = catalog::white(&Scenario::bipartite());
    let d = causep::born::s_etas_decomposition(0.5, 0.5).unwrap();
    let rep = sample_outcomes(&d, &w, 100_000, 42).unwrap();
    // the second setting has 2×2 equiprobable outcomes
    let counts = &rep.counts[1];
    let n: u64 = counts.iter().sum();
    let sigma = (n as f64 * 0.25 * 0.75).sqrt();
    for &c in counts {
        assert!((c as f64 - n as f64 / 4.0).abs() < 4.0 * sigma, "{counts:?}");
    }
    assert!((rep.estimate - 1.0).abs() < 4.0 * rep.stderr.max(1e-12) + 1e-12);
}

#[test]
fn switch_variants_share_robustness() {
    let eng = Engine::default();
    let a = eng.random_robustness(&catalog::switch(qubit_state(0.0, 0.0), false).unwrap(), None).unwrap();
    let b = eng.random_robustness(&catalog::switch(qubit_state(1.1, 0.4), true).unwrap(), None).unwrap();
    assert!((a.r_star - b.r_star).abs() < 1e-5);
}

#[test]
fn robustness_against_custom_noise() {
    let w = w_etas(0.8, 0.6);
    let noise = ProcessMatrix::from_operator(w_etas(0.2, -0.1).into_op()).unwrap();
    let r = Engine::default().random_robustness(&w, Some(&noise)).unwrap();
    assert!(r.r_star > 0.0);
    assert!((r.r_star + r.witness.value(&w).unwrap()).abs() < 1e-6);
    assert!((r.witness.value(&noise).unwrap() - 1.0).abs() < 1e-6);
    let _: &Operator = r.witness.op();
}
