//! Atoms and expansion spaces against equality-type and assignment oracles.

use std::collections::BTreeSet;

use cylspace::expansion::{base_injection, expansion_map, verify_expansion, verify_expansion_uniqueness};
use cylspace::laws::{check_space_axioms, verify_substitution_laws, Status, SubstOptions};
use cylspace::mapping::{classify_mapping, compose_maps};
use cylspace::topo::{build_topologization, Formation, DEFAULT_POINT_LIMIT};
use cylspace::{
    build_expansion, enumerate_atoms, extend_to_atom, is_atom, parse_space, parse_structure, pure_set, render_space,
    CylError, ExpansionContext, ExpansionOrder, FiniteStructure,
};

fn g1() -> FiniteStructure {
    parse_structure("domain 2\nrelation E 2\n0 1\n1 1\nend\n", "G1").unwrap()
}

fn context(a: &FiniteStructure, beta: usize, alpha: usize) -> ExpansionContext {
    let t = build_topologization(a, beta, DEFAULT_POINT_LIMIT).unwrap();
    ExpansionContext::new(t.space(), alpha).unwrap()
}

/// Complete equality types of `n` variables over an `m`-element pure set:
/// assignments up to renaming of elements.
fn equality_types(m: usize, n: usize) -> usize {
    let mut seen = BTreeSet::new();
    for p in 0..m.pow(n as u32) {
        let mut a = vec![0; n];
        let mut q = p;
        for k in (0..n).rev() {
            a[k] = q % m;
            q /= m;
        }
        let mut names: Vec<usize> = Vec::new();
        let canon: Vec<usize> = a
            .iter()
            .map(|x| match names.iter().position(|y| y == x) {
                Some(k) => k,
                None => {
                    names.push(*x);
                    names.len() - 1
                }
            })
            .collect();
        seen.insert(canon);
    }
    seen.len()
}

#[test]
fn atom_counts() {
    let ctx = context(&pure_set(2), 2, 3);
    assert!(ctx.has_joint_clause());
    assert_eq!(enumerate_atoms(&ctx).len(), equality_types(2, 3));
    assert_eq!(equality_types(2, 3), 4);
    let g = context(&g1(), 2, 2);
    assert_eq!(enumerate_atoms(&g).len(), g.base().point_count());
    let g3 = context(&g1(), 2, 3);
    assert_eq!(enumerate_atoms(&g3).len(), 8);
    for alpha in [2, 3] {
        assert_eq!(enumerate_atoms(&context(&pure_set(1), 2, alpha)).len(), 1);
    }
    assert_eq!(enumerate_atoms(&context(&pure_set(3), 2, 3)).len(), equality_types(3, 3));
}

#[test]
fn enumerated_atoms_pass_every_clause() {
    for (a, beta, alpha) in [(pure_set(2), 2, 3), (g1(), 2, 2), (g1(), 2, 3)] {
        let ctx = context(&a, beta, alpha);
        for x in enumerate_atoms(&ctx) {
            let r = is_atom(&ctx, &x);
            assert!(r.passed(), "{}", r.to_text());
        }
    }
}

#[test]
fn greedy_completion_from_the_diagonal() {
    let ctx = context(&pure_set(2), 2, 3);
    let incl = ctx.inclusion();
    let d = ctx.set_index(ctx.base().diag(0, 1)).unwrap();
    let x = extend_to_atom(&ctx, (incl, d)).unwrap();
    assert!(is_atom(&ctx, &x).passed());
    let fiber: BTreeSet<usize> = x.fibers[incl].iter().collect();
    let full = ctx.set_index(&ctx.base().full()).unwrap();
    assert_eq!(fiber, BTreeSet::from([d, full]));
    assert!(enumerate_atoms(&ctx).contains(&x));
}

#[test]
fn full_and_empty_seeds() {
    let ctx = context(&pure_set(2), 2, 3);
    let full = ctx.set_index(&ctx.base().full()).unwrap();
    let empty = ctx.set_index(&ctx.base().empty()).unwrap();
    for mu in 0..ctx.maps().len() {
        let x = extend_to_atom(&ctx, (mu, full)).unwrap();
        assert!(x.contains(mu, full));
        assert_eq!(extend_to_atom(&ctx, (mu, empty)), Err(CylError::SeedEmpty));
    }
}

#[test]
fn collapsing_seed_has_no_atom() {
    // ((0,0), −D): every atom contains ((0,0), D) by clause 4.
    let ctx = context(&pure_set(2), 2, 3);
    let notd = ctx.set_index(&ctx.base().diag(0, 1).complement()).unwrap();
    let mu = ctx.map_index(&[0, 0]).unwrap();
    assert!(matches!(extend_to_atom(&ctx, (mu, notd)), Err(CylError::ClauseConflict(_))));
    assert!(enumerate_atoms(&ctx).iter().all(|x| !x.contains(mu, notd)));
}

#[test]
fn mutated_atoms_fail_the_right_clause() {
    let ctx = context(&g1(), 2, 2);
    let x = enumerate_atoms(&ctx).remove(0);
    let incl = ctx.inclusion();
    let u = x.fibers[incl].first().unwrap();
    let comp = ctx.set_index(&ctx.sets()[u].complement()).unwrap();
    let mut both = x.clone();
    both.insert(incl, comp);
    assert_eq!(is_atom(&ctx, &both).get("atom clause 1 (exactly one of (ρ,u), (ρ,−u))").unwrap().status, Status::Fail);
    let full = ctx.set_index(&ctx.base().full()).unwrap();
    let mut missing = x.clone();
    missing.remove(incl, full);
    let r = is_atom(&ctx, &missing);
    let c2 = r.get("atom clause 2 (upward closed)").unwrap();
    assert_eq!(c2.status, Status::Fail);
    assert!(c2.witness.is_some());
}

#[test]
fn expansions_are_fol_spaces() {
    for (a, beta, alpha, points) in [(pure_set(2), 2, 3, 4), (g1(), 2, 2, 4), (g1(), 2, 3, 8), (pure_set(1), 2, 3, 1)] {
        let ctx = context(&a, beta, alpha);
        let e = build_expansion(&ctx, ExpansionOrder::Lexicographic).unwrap();
        assert_eq!(e.space.point_count(), points);
        assert_eq!(e.space.dim(), alpha);
        let r = check_space_axioms(&e.space);
        assert!(r.passed(), "{}", r.to_text());
        let r = verify_expansion(&ctx, &e);
        assert!(r.passed(), "{}", r.to_text());
        assert!(e.space.is_t2());
        let r = verify_substitution_laws(&e.space, &SubstOptions::default());
        assert!(r.passed(), "{}", r.to_text());
        if points > 1 {
            assert!(r.results.iter().all(|l| l.status == Status::Pass), "{}", r.to_text());
        }
    }
}

#[test]
fn pure_set_expansion_matches_the_assignment_reading() {
    // Atoms of the pure 2-set raised to 3 are the equality types of 3-tuples;
    // D_ij of the expansion holds exactly on types identifying i and j.
    let ctx = context(&pure_set(2), 2, 3);
    let e = build_expansion(&ctx, ExpansionOrder::Lexicographic).unwrap();
    let s = &e.space;
    let mut patterns = BTreeSet::new();
    for x in 0..4 {
        let p: Vec<bool> = [(0, 1), (0, 2), (1, 2)].iter().map(|&(i, j)| s.diag(i, j).contains(x)).collect();
        patterns.insert(p);
    }
    let expect: BTreeSet<Vec<bool>> = [
        vec![true, true, true],
        vec![true, false, false],
        vec![false, true, false],
        vec![false, false, true],
    ]
    .into_iter()
    .collect();
    assert_eq!(patterns, expect);
}

#[test]
fn rigid_base_expansion_map_and_injection() {
    let ctx = context(&g1(), 2, 2);
    let e = build_expansion(&ctx, ExpansionOrder::Lexicographic).unwrap();
    let f = expansion_map(&ctx, &e).unwrap();
    let inj = base_injection(&ctx, &e).unwrap();
    let m = classify_mapping(&e.space, ctx.base(), &f).unwrap();
    assert!(m.s_mapping && m.c_mapping && m.basis_preserving && m.surjective, "{m:?}");
    let h = classify_mapping(ctx.base(), &e.space, &inj).unwrap();
    assert!(h.homeomorphism, "{h:?}");
    let round = compose_maps(&inj, &f);
    assert_eq!(round, (0..ctx.base().point_count()).collect::<Vec<_>>());
}

#[test]
fn rigid_base_raised_to_three() {
    let t = build_topologization(&g1(), 2, DEFAULT_POINT_LIMIT).unwrap();
    let ctx = ExpansionContext::new(t.space(), 3).unwrap();
    let e = build_expansion(&ctx, ExpansionOrder::Lexicographic).unwrap();
    let f = expansion_map(&ctx, &e).unwrap();
    let m = classify_mapping(&e.space, ctx.base(), &f).unwrap();
    assert!(m.s_mapping && m.c_mapping && m.basis_preserving && m.surjective, "{m:?}");
    // The expansion is homeomorphic to the 3-dimensional topologization.
    let t3 = build_topologization(&g1(), 3, DEFAULT_POINT_LIMIT).unwrap();
    let sig = g1().signature();
    let e01 = t3.interpret(&cylspace::parse_formula("E(v0,v1)", &sig).unwrap()).unwrap();
    assert_eq!(e01.count(), 4);
    assert_eq!(e.space.point_count(), t3.space().point_count());
}

#[test]
fn non_t2_base_has_no_expansion_map() {
    let ctx = context(&pure_set(2), 2, 3);
    let e = build_expansion(&ctx, ExpansionOrder::Lexicographic).unwrap();
    assert!(matches!(expansion_map(&ctx, &e), Err(CylError::NotT2(_))));
}

#[test]
fn orderings_give_homeomorphic_expansions() {
    let ctx = context(&pure_set(2), 2, 3);
    let e1 = build_expansion(&ctx, ExpansionOrder::Lexicographic).unwrap();
    for order in [ExpansionOrder::Lexicographic, ExpansionOrder::Reversed, ExpansionOrder::Seeded(7)] {
        let e2 = build_expansion(&ctx, order).unwrap();
        let r = verify_expansion_uniqueness(&ctx, &e1, &e2);
        assert!(r.passed(), "{order:?}: {}", r.to_text());
    }
    let rigid = context(&g1(), 2, 2);
    let a = build_expansion(&rigid, ExpansionOrder::Lexicographic).unwrap();
    let b = build_expansion(&rigid, ExpansionOrder::Reversed).unwrap();
    let r = verify_expansion_uniqueness(&rigid, &a, &b);
    assert!(r.passed());
    assert!(r.results[0].witness.as_deref().unwrap().ends_with("; 1 such bijections"));
}

#[test]
fn explicit_base_without_ambient() {
    let t = build_topologization(&pure_set(2), 2, DEFAULT_POINT_LIMIT).unwrap();
    let text = render_space(t.space(), 10).unwrap();
    let base = parse_space(&text).unwrap();
    let ctx = ExpansionContext::new(&base, 3).unwrap();
    assert!(!ctx.has_joint_clause());
    let atoms = enumerate_atoms(&ctx);
    assert!(atoms.len() > 4, "{} atoms", atoms.len());
    let r = is_atom(&ctx, &atoms[0]);
    assert_eq!(r.get("atom joint consistency").unwrap().status, Status::Skipped);
}
