//! Topologization spaces against direct evaluation over assignments.

use cylspace::laws::{check_space_axioms, verify_substitution_laws, Status, SubstOptions};
use cylspace::topo::{build_topologization, Formation, DEFAULT_POINT_LIMIT};
use cylspace::{parse_formula, parse_structure, pure_set, two_element_digraphs, CylError, FiniteStructure, VarMap};

fn g1() -> FiniteStructure {
    parse_structure("domain 2\nrelation E 2\n0 1\n1 1\nend\n", "G1").unwrap()
}

#[test]
fn saturation_golden() {
    let t = build_topologization(&g1(), 3, DEFAULT_POINT_LIMIT).unwrap();
    let sig = t.structure().signature();
    let u = t.interpret(&parse_formula("E(v0,v1)", &sig).unwrap()).unwrap();
    let sat = t.space().saturate(&u, 0).unwrap();
    let oracle: Vec<usize> = (0..8).filter(|&p| t.tuple(p)[1] == 1).collect();
    assert_eq!(sat.to_vec(), oracle);
    assert_eq!(sat.count(), 4);
    assert_eq!(t.space().dimension_set(&u), vec![1]);
    assert_eq!(t.space().dimension_set(t.space().diag(0, 1)), vec![0, 1]);
}

#[test]
fn substitution_golden() {
    let t = build_topologization(&g1(), 3, DEFAULT_POINT_LIMIT).unwrap();
    let sig = t.structure().signature();
    let u = t.interpret(&parse_formula("E(v0,v1)", &sig).unwrap()).unwrap();
    let got = t.space().subst(&u, 1, 0).unwrap();
    let loop11 = t.interpret(&parse_formula("E(v1,v1)", &sig).unwrap()).unwrap();
    assert_eq!(got, loop11);
    // Pointwise reading: a ∈ u(i/j) iff a[j↦a(i)] ∈ u.
    for i in 0..3 {
        for j in 0..3 {
            let s = t.space().subst(&u, i, j).unwrap();
            for p in 0..8 {
                let mut a = t.tuple(p);
                a[j] = a[i];
                assert_eq!(s.contains(p), u.contains(t.point(&a).unwrap()));
            }
        }
    }
}

#[test]
fn permutation_golden_in_space_and_lifted() {
    let swap_formula = "E(v1,v0)";
    for n in [3, 4] {
        let t = build_topologization(&g1(), n, DEFAULT_POINT_LIMIT).unwrap();
        let sig = t.structure().signature();
        let u = t.interpret(&parse_formula("E(v0,v1)", &sig).unwrap()).unwrap();
        let mut targets: Vec<usize> = (0..n).collect();
        targets.swap(0, 1);
        let rho = VarMap::total(n, &targets).unwrap();
        let got = t.space().permute_set(&u, &rho).unwrap();
        let oracle = t.interpret(&parse_formula(swap_formula, &sig).unwrap()).unwrap();
        assert_eq!(got, oracle, "n={n}");
    }
}

#[test]
fn permutation_matches_composition_reading() {
    let t = build_topologization(&g1(), 3, DEFAULT_POINT_LIMIT).unwrap();
    let s = t.space();
    let sets = s.basis_sets(10).unwrap();
    for rho in VarMap::all_total(3) {
        for u in sets.iter().step_by(17) {
            let got = s.permute_set(u, &rho).unwrap();
            for p in 0..8 {
                let a = t.tuple(p);
                let pulled: Vec<usize> = (0..3).map(|i| a[rho.get(i).unwrap()]).collect();
                assert_eq!(got.contains(p), u.contains(t.point(&pulled).unwrap()), "ρ={rho}");
            }
        }
    }
}

#[test]
fn identity_and_empty_permutations() {
    let t = build_topologization(&g1(), 3, DEFAULT_POINT_LIMIT).unwrap();
    let s = t.space();
    let sig = t.structure().signature();
    let u = t.interpret(&parse_formula("E(v0,v1)", &sig).unwrap()).unwrap();
    let id = VarMap::from_pairs(3, &[(0, 0), (1, 1)]).unwrap();
    assert_eq!(s.permute_set(&u, &id).unwrap(), u);
    assert!(s.permute_set(&s.empty(), &VarMap::total(3, &[2, 2, 0]).unwrap()).unwrap().is_empty());
    let short = VarMap::from_pairs(3, &[(0, 1)]).unwrap();
    assert!(matches!(s.permute_set(&u, &short), Err(CylError::DomainCoverage { .. })));
}

#[test]
fn closed_permutation_agrees_with_literal_intersection() {
    let t = build_topologization(&pure_set(2), 3, DEFAULT_POINT_LIMIT).unwrap();
    let s = t.space();
    for rho in VarMap::all_partial(3).into_iter().step_by(5) {
        for p in 0..s.point_count() {
            let u = s.singleton(p);
            let fast = s.permute_closed(&u, &rho).unwrap();
            let literal = s.permute_closed_literal(&u, &rho, 10).unwrap().unwrap();
            assert_eq!(fast, literal, "ρ={rho}, p={p}");
        }
    }
}

#[test]
fn axioms_and_laws_on_digraphs() {
    for a in two_element_digraphs() {
        let t = build_topologization(&a, 3, DEFAULT_POINT_LIMIT).unwrap();
        let r = check_space_axioms(t.space());
        assert!(r.passed(), "{}: {}", a.name, r.to_text());
        let r = verify_substitution_laws(t.space(), &SubstOptions::default());
        assert!(r.passed(), "{}: {}", a.name, r.to_text());
        assert!(r.results.iter().all(|l| l.status == Status::Pass), "{}", r.to_text());
    }
}

#[test]
fn saturation_closedness_is_gated_on_t2() {
    let t = build_topologization(&pure_set(2), 2, DEFAULT_POINT_LIMIT).unwrap();
    let r = check_space_axioms(t.space());
    assert_eq!(r.get("saturation-closed").unwrap().status, Status::Skipped);
    let t = build_topologization(&g1(), 2, DEFAULT_POINT_LIMIT).unwrap();
    let r = check_space_axioms(t.space());
    assert_eq!(r.get("saturation-closed").unwrap().status, Status::Pass);
}
