//! Randomized invariants over two-element digraphs and small formulas.

use std::collections::BTreeSet;

use proptest::prelude::*;

use cylspace::fol::{free_vars, substitute_var, Formula};
use cylspace::structure::{automorphisms, evaluate};
use cylspace::topo::{build_topologization, Formation, DEFAULT_POINT_LIMIT};
use cylspace::{parse_formula, two_element_digraphs, PointSet};

const N: usize = 3;

fn formula() -> impl Strategy<Value = Formula> {
    let var = 0..N;
    let leaf = prop_oneof![
        (var.clone(), var.clone()).prop_map(|(i, j)| Formula::atomic("E", &[i, j])),
        (var.clone(), var.clone()).prop_map(|(i, j)| Formula::Equal(i, j)),
    ];
    leaf.prop_recursive(4, 24, 2, move |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (0..N, inner).prop_map(|(i, f)| Formula::exists(i, f)),
        ]
    })
}

fn point_set(len: usize) -> impl Strategy<Value = PointSet> {
    proptest::collection::vec(any::<bool>(), len)
        .prop_map(move |bits| PointSet::from_points(len, bits.iter().enumerate().filter(|(_, b)| **b).map(|(p, _)| p)))
}

fn digraph() -> impl Strategy<Value = usize> {
    0..16usize
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn formula_text_round_trips(f in formula()) {
        let sig = two_element_digraphs()[0].signature();
        let back = parse_formula(&f.to_string(), &sig).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn interpretation_matches_pointwise_evaluation(g in digraph(), f in formula()) {
        let a = &two_element_digraphs()[g];
        let t = build_topologization(a, N, DEFAULT_POINT_LIMIT).unwrap();
        let u = t.interpret(&f).unwrap();
        for p in 0..t.space().point_count() {
            prop_assert_eq!(u.contains(p), evaluate(a, &f, &t.tuple(p)).unwrap());
        }
    }

    #[test]
    fn substitution_is_variable_rewiring(g in digraph(), f in formula(), i in 0..N, j in 0..N) {
        // u(i/j) interprets the formula with free v_j replaced by v_i.
        let a = &two_element_digraphs()[g];
        let t = build_topologization(a, N, DEFAULT_POINT_LIMIT).unwrap();
        let rewired = substitute_var(&f, j, i, N);
        prop_assume!(rewired.is_ok());
        let u = t.interpret(&f).unwrap();
        prop_assert_eq!(t.space().subst(&u, i, j).unwrap(), t.interpret(&rewired.unwrap()).unwrap());
    }

    #[test]
    fn dimension_set_is_within_free_variables(g in digraph(), f in formula()) {
        let a = &two_element_digraphs()[g];
        let t = build_topologization(a, N, DEFAULT_POINT_LIMIT).unwrap();
        let u = t.interpret(&f).unwrap();
        let delta: BTreeSet<usize> = t.space().dimension_set(&u).into_iter().collect();
        prop_assert!(delta.is_subset(&free_vars(&f)));
    }

    #[test]
    fn saturation_is_a_commuting_closure(g in digraph(), u in point_set(8), i in 0..N, j in 0..N) {
        let t = build_topologization(&two_element_digraphs()[g], N, DEFAULT_POINT_LIMIT).unwrap();
        let s = t.space();
        let ui = s.saturate(&u, i).unwrap();
        prop_assert!(u.is_subset(&ui));
        prop_assert_eq!(s.saturate(&ui, i).unwrap(), ui.clone());
        let ij = s.saturate(&ui, j).unwrap();
        let ji = s.saturate(&s.saturate(&u, j).unwrap(), i).unwrap();
        prop_assert_eq!(ij, ji);
    }

    #[test]
    fn substitution_is_monotone(g in digraph(), u in point_set(8), v in point_set(8), i in 0..N, j in 0..N) {
        let t = build_topologization(&two_element_digraphs()[g], N, DEFAULT_POINT_LIMIT).unwrap();
        let s = t.space();
        let small = u.intersection(&v);
        prop_assert!(s.subst(&small, i, j).unwrap().is_subset(&s.subst(&u, i, j).unwrap()));
    }

    #[test]
    fn evaluation_is_automorphism_invariant(g in digraph(), f in formula(), p in 0..8usize) {
        let a = &two_element_digraphs()[g];
        let t = build_topologization(a, N, DEFAULT_POINT_LIMIT).unwrap();
        let tuple = t.tuple(p);
        let base = evaluate(a, &f, &tuple).unwrap();
        for sigma in automorphisms(a) {
            let moved: Vec<usize> = tuple.iter().map(|&x| sigma[x]).collect();
            prop_assert_eq!(evaluate(a, &f, &moved).unwrap(), base);
        }
    }
}

#[test]
fn automorphism_groups_are_closed() {
    for a in two_element_digraphs() {
        let group: BTreeSet<Vec<usize>> = automorphisms(&a).into_iter().collect();
        assert!(group.contains(&vec![0, 1]), "{}", a.name);
        for s in &group {
            for t in &group {
                let st: Vec<usize> = t.iter().map(|&x| s[x]).collect();
                assert!(group.contains(&st), "{}", a.name);
            }
        }
    }
}
