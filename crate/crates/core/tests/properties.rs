use proptest::prelude::*;

use causep::born::{measure_witness, s_etas_decomposition};
use causep::catalog::{self, w_etas};
use causep::spaces::{swap_parties, ProcessMatrix, Scenario};
use causep::tensor::{CMat, C64};
use causep::{Layout, Operator, PauliExpansion, PauliString};

fn hermitian(d: usize) -> impl Strategy<Value = CMat> {
    prop::collection::vec(-1.0f64..1.0, 2 * d * d).prop_map(move |v| {
        let g = CMat::from_fn(d, d, |i, j| C64::new(v[2 * (i * d + j)], v[2 * (i * d + j) + 1]));
        (&g + g.adjoint()).scale(0.5)
    })
}

fn op(layout: &Layout, m: CMat) -> Operator {
    Operator::new(layout.clone(), m).unwrap()
}

fn max_entry(op: &Operator) -> f64 {
    op.matrix().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pauli_expansion_round_trips(m in hermitian(16)) {
        let x = op(&Layout::bipartite(), m);
        let back = x.to_pauli().unwrap().to_operator();
        prop_assert!(max_entry(&back.try_sub(&x).unwrap()) < 1e-12);
    }

    #[test]
    fn tripartite_projectors(m in hermitian(32), n in hermitian(32)) {
        let s = Scenario::tripartite();
        let (x, y) = (op(s.layout(), m), op(s.layout(), n));
        let (o1, o2) = s.orders();
        for p in [s.valid_projector(), s.order_projector(o1).unwrap(), s.order_projector(o2).unwrap()] {
            let px = p.apply(&x).unwrap();
            prop_assert!(p.apply(&px).unwrap().try_sub(&px).unwrap().frobenius_norm() < 1e-12 * (1.0 + x.frobenius_norm()));
            let lhs = px.hs_inner(&y).unwrap();
            let rhs = x.hs_inner(&p.apply(&y).unwrap()).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + x.frobenius_norm() * y.frobenius_norm()));
            // the order subspaces sit inside the valid one
            prop_assert!(s.valid_projector().apply(&px).unwrap().try_sub(&px).unwrap().frobenius_norm() < 1e-12 * (1.0 + x.frobenius_norm()));
        }
    }

    #[test]
    fn party_swap_is_an_involution(m in hermitian(32)) {
        let x = op(&Layout::tripartite(), m);
        let back = swap_parties(&swap_parties(&x).unwrap()).unwrap();
        prop_assert!(max_entry(&back.try_sub(&x).unwrap()) < 1e-12);
    }

    #[test]
    fn trace_and_replace_is_idempotent(m in hermitian(16)) {
        let x = op(&Layout::bipartite(), m);
        let once = x.trace_and_replace(&["B_O"]).unwrap();
        let twice = once.trace_and_replace(&["B_O"]).unwrap();
        prop_assert!(max_entry(&twice.try_sub(&once).unwrap()) < 1e-12);
        prop_assert!((once.trace() - x.trace()).abs() < 1e-12);
    }

    #[test]
    fn witness_value_ignores_invalid_directions(m in hermitian(16), e1 in -0.7f64..0.7, e2 in -0.7f64..0.7) {
        // adding S⊥ with L_V(S⊥) = 0 does not change tr[S·W] on valid W
        let s = Scenario::bipartite();
        let x = op(s.layout(), m);
        let perp = x.try_sub(&s.valid_projector().apply(&x).unwrap()).unwrap();
        let witness = catalog::s_etas(e1, e2);
        let w = w_etas(e1, e2);
        let shifted = witness.op().try_add(&perp).unwrap();
        prop_assert!((shifted.hs_inner(w.op()).unwrap() - witness.value(&w).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn measured_value_is_linear(e1 in -0.7f64..0.7, e2 in -0.7f64..0.7, f1 in -0.7f64..0.7, f2 in -0.7f64..0.7, a in 0.0f64..1.0) {
        let d = s_etas_decomposition(0.5, -0.5).unwrap();
        let (w1, w2) = (w_etas(e1, e2), w_etas(f1, f2));
        let mix = w1.mix(&w2, a).unwrap();
        let lhs = measure_witness(&d, &mix).unwrap();
        let rhs = a * measure_witness(&d, &w1).unwrap() + (1.0 - a) * measure_witness(&d, &w2).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
        prop_assert!((lhs - d.target.value(&mix).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn pauli_string_text_round_trips(idx in 0usize..1024) {
        let s = PauliString::all(5).nth(idx).unwrap();
        let parsed: PauliString = s.to_string().parse().unwrap();
        prop_assert_eq!(parsed.index(), idx);
    }
}

#[test]
fn expansion_terms_match_coefficients() {
    let e = PauliExpansion::from_terms(Layout::bipartite(), [("1111", 0.25), ("1ZZ1", 0.1)]).unwrap();
    let w = ProcessMatrix::from_operator(e.to_operator()).unwrap();
    let back = w.op().to_pauli().unwrap();
    assert_eq!(back.terms().len(), 2);
}
