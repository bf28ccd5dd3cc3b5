//! Finite relational structures, Tarskian evaluation and the brute-force
//! oracles every topological verdict is checked against.
//!
//! Oracle reductions, valid for finite structures only:
//! - A partial map p: A ⇀ B is elementary iff it extends to an isomorphism.
//!   Elementary maps preserve the complete diagram, which for finite A is a
//!   single sentence pinning A up to isomorphism, so some isomorphism extends p.
//! - tp(ā/P) = tp(ā'/P) iff some automorphism fixing P pointwise maps ā to ā'.
//!   The complete diagram of (A, ā, P) is one formula, so equal types give an
//!   isomorphism of the expansions, i.e. such an automorphism.

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;

use crate::error::{CylError, Result};
use crate::fol::{Formula, Signature};

/// One relation table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub name: String,
    pub arity: usize,
    tuples: Vec<Vec<usize>>,
    table: FixedBitSet,
}

impl Relation {
    pub fn tuples(&self) -> &[Vec<usize>] {
        &self.tuples
    }
}

/// A finite relational structure with domain {0..m-1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteStructure {
    pub name: String,
    domain_size: usize,
    relations: Vec<Relation>,
}

fn tuple_index(t: &[usize], m: usize) -> usize {
    t.iter().fold(0, |acc, &x| acc * m + x)
}

impl FiniteStructure {
    /// Builds a structure from relation tables, validating every entry.
    pub fn new(
        name: &str,
        domain_size: usize,
        relations: Vec<(String, usize, Vec<Vec<usize>>)>,
    ) -> Result<Self> {
        if domain_size == 0 {
            return Err(CylError::Invalid("domain size must be positive".into()));
        }
        Signature::new(relations.iter().map(|(n, a, _)| (n.clone(), *a)).collect())?;
        let mut rels = Vec::new();
        for (rname, arity, mut tuples) in relations {
            let size = domain_size
                .checked_pow(arity as u32)
                .filter(|s| *s <= 1 << 24)
                .ok_or_else(|| CylError::Resource {
                    what: format!("table of `{rname}`"),
                    size: usize::MAX,
                    limit: 1 << 24,
                })?;
            let mut table = FixedBitSet::with_capacity(size);
            for t in &tuples {
                if t.len() != arity {
                    return Err(CylError::Arity { name: rname, expected: arity, found: t.len() });
                }
                if let Some(&e) = t.iter().find(|&&e| e >= domain_size) {
                    return Err(CylError::ElementOutOfRange { element: e, size: domain_size });
                }
                table.insert(tuple_index(t, domain_size));
            }
            tuples.sort();
            tuples.dedup();
            rels.push(Relation { name: rname, arity, tuples, table });
        }
        Ok(FiniteStructure { name: name.to_string(), domain_size, relations: rels })
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn signature(&self) -> Signature {
        Signature::new(self.relations.iter().map(|r| (r.name.clone(), r.arity)).collect())
            .expect("validated at construction")
    }

    pub fn holds(&self, rel: usize, t: &[usize]) -> bool {
        self.relations[rel].table.contains(tuple_index(t, self.domain_size))
    }

    fn relation_index(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }

    /// Renders in the structure file format.
    pub fn to_text(&self) -> String {
        let mut s = format!("# {}\ndomain {}\n", self.name, self.domain_size);
        for r in &self.relations {
            s.push_str(&format!("relation {} {}\n", r.name, r.arity));
            for t in &r.tuples {
                let row: Vec<String> = t.iter().map(|x| x.to_string()).collect();
                s.push_str(&row.join(" "));
                s.push('\n');
            }
        }
        s.push_str("end\n");
        s
    }
}

/// Parses the line-based structure format (`domain`, `relation`, tuples, `end`).
pub fn parse_structure(text: &str, name: &str) -> Result<FiniteStructure> {
    let mut domain: Option<usize> = None;
    let mut rels: Vec<(String, usize, Vec<Vec<usize>>)> = Vec::new();
    let mut ended = false;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let bad = |msg: &str| CylError::Malformed { line, msg: msg.to_string() };
        if ended {
            return Err(bad("content after `end`"));
        }
        let words: Vec<&str> = content.split_whitespace().collect();
        match words[0] {
            "domain" => {
                if domain.is_some() {
                    return Err(bad("duplicate `domain` line"));
                }
                if words.len() != 2 {
                    return Err(bad("expected `domain <m>`"));
                }
                let m = words[1].parse::<usize>().map_err(|_| bad("domain size is not a number"))?;
                if m == 0 {
                    return Err(bad("domain size must be positive"));
                }
                domain = Some(m);
            }
            _ if domain.is_none() => return Err(bad("first line must be `domain <m>`")),
            "relation" => {
                if words.len() != 3 {
                    return Err(bad("expected `relation <NAME> <arity>`"));
                }
                let arity = words[2].parse::<usize>().map_err(|_| bad("arity is not a number"))?;
                if arity == 0 {
                    return Err(bad("arity must be positive"));
                }
                rels.push((words[1].to_string(), arity, Vec::new()));
            }
            "end" => ended = true,
            _ => {
                let Some(last) = rels.last_mut() else {
                    return Err(bad("tuple outside a relation block"));
                };
                let mut t = Vec::new();
                for w in &words {
                    t.push(w.parse::<usize>().map_err(|_| bad("tuple entry is not a number"))?);
                }
                if t.len() != last.1 {
                    return Err(CylError::Arity { name: last.0.clone(), expected: last.1, found: t.len() });
                }
                let m = domain.unwrap();
                if let Some(&e) = t.iter().find(|&&e| e >= m) {
                    return Err(CylError::ElementOutOfRange { element: e, size: m });
                }
                last.2.push(t);
            }
        }
    }
    if !ended {
        return Err(CylError::Malformed { line: text.lines().count(), msg: "missing `end`".into() });
    }
    let m = domain.ok_or(CylError::Malformed { line: 1, msg: "missing `domain`".into() })?;
    FiniteStructure::new(name, m, rels)
}

/// Tarskian truth of `f` under assignment `a` (its length is the budget n).
pub fn evaluate(a_struct: &FiniteStructure, f: &Formula, a: &[usize]) -> Result<bool> {
    if let Some(m) = f.max_var() {
        if m >= a.len() {
            return Err(CylError::IndexOutOfRange { index: m, budget: a.len() });
        }
    }
    if let Some(&e) = a.iter().find(|&&e| e >= a_struct.domain_size) {
        return Err(CylError::ElementOutOfRange { element: e, size: a_struct.domain_size });
    }
    let mut buf = a.to_vec();
    eval_rec(a_struct, f, &mut buf)
}

fn eval_rec(s: &FiniteStructure, f: &Formula, a: &mut Vec<usize>) -> Result<bool> {
    Ok(match f {
        Formula::Atomic(name, args) => {
            let r = s.relation_index(name).ok_or_else(|| CylError::UnknownRelation(name.clone()))?;
            if s.relations[r].arity != args.len() {
                return Err(CylError::Arity {
                    name: name.clone(),
                    expected: s.relations[r].arity,
                    found: args.len(),
                });
            }
            let t: Vec<usize> = args.iter().map(|&i| a[i]).collect();
            s.holds(r, &t)
        }
        Formula::Equal(i, j) => a[*i] == a[*j],
        Formula::Not(g) => !eval_rec(s, g, a)?,
        Formula::And(x, y) => eval_rec(s, x, a)? && eval_rec(s, y, a)?,
        Formula::Exists(i, g) => {
            let saved = a[*i];
            let mut found = false;
            for x in 0..s.domain_size {
                a[*i] = x;
                if eval_rec(s, g, a)? {
                    found = true;
                    break;
                }
            }
            a[*i] = saved;
            found
        }
    })
}

fn same_signature(a: &FiniteStructure, b: &FiniteStructure) -> bool {
    a.relations.len() == b.relations.len()
        && a.relations.iter().zip(&b.relations).all(|(x, y)| x.name == y.name && x.arity == y.arity)
}

/// Checks every relation tuple whose entries are all mapped and involve `last`.
fn consistent(a: &FiniteStructure, b: &FiniteStructure, map: &[Option<usize>], last: usize) -> bool {
    let m = a.domain_size;
    for (ra, rb) in a.relations.iter().zip(&b.relations) {
        let k = ra.arity;
        let total = m.pow(k as u32);
        let mut t = vec![0usize; k];
        let mut img = vec![0usize; k];
        'tuples: for idx in 0..total {
            let mut rest = idx;
            for pos in (0..k).rev() {
                t[pos] = rest % m;
                rest /= m;
            }
            if !t.contains(&last) {
                continue;
            }
            for pos in 0..k {
                match map[t[pos]] {
                    Some(y) => img[pos] = y,
                    None => continue 'tuples,
                }
            }
            if ra.table.contains(idx) != rb.table.contains(tuple_index(&img, m)) {
                return false;
            }
        }
    }
    true
}

/// Enumerates isomorphisms A → B extending `pins`, lexicographically.
/// Stops after `limit` results.
fn isomorphisms(
    a: &FiniteStructure,
    b: &FiniteStructure,
    pins: &BTreeMap<usize, usize>,
    limit: usize,
) -> Vec<Vec<usize>> {
    let m = a.domain_size;
    let mut out = Vec::new();
    if m != b.domain_size || !same_signature(a, b) {
        return out;
    }
    let mut map: Vec<Option<usize>> = vec![None; m];
    let mut used = vec![false; m];
    fn go(
        x: usize,
        a: &FiniteStructure,
        b: &FiniteStructure,
        pins: &BTreeMap<usize, usize>,
        map: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
        limit: usize,
    ) {
        let m = a.domain_size;
        if out.len() >= limit {
            return;
        }
        if x == m {
            out.push(map.iter().map(|y| y.unwrap()).collect());
            return;
        }
        let candidates: Vec<usize> = match pins.get(&x) {
            Some(&y) => vec![y],
            None => (0..m).collect(),
        };
        for y in candidates {
            if y >= m || used[y] {
                continue;
            }
            map[x] = Some(y);
            used[y] = true;
            if consistent(a, b, map, x) {
                go(x + 1, a, b, pins, map, used, out, limit);
            }
            map[x] = None;
            used[y] = false;
        }
    }
    go(0, a, b, pins, &mut map, &mut used, &mut out, limit);
    out
}

/// All automorphisms of `a`, identity first.
pub fn automorphisms(a: &FiniteStructure) -> Vec<Vec<usize>> {
    isomorphisms(a, a, &BTreeMap::new(), usize::MAX)
}

/// The lexicographically least isomorphism A → B extending `pins`, if any.
pub fn pinned_isomorphism(
    a: &FiniteStructure,
    b: &FiniteStructure,
    pins: &BTreeMap<usize, usize>,
) -> Result<Option<Vec<usize>>> {
    let mut targets: Vec<usize> = pins.values().copied().collect();
    targets.sort();
    targets.dedup();
    if targets.len() != pins.len() {
        return Err(CylError::PinsNotInjective);
    }
    if let Some((&x, &y)) = pins.iter().find(|(&x, &y)| x >= a.domain_size || y >= b.domain_size) {
        return Err(CylError::ElementOutOfRange { element: x.max(y), size: a.domain_size.min(b.domain_size) });
    }
    Ok(isomorphisms(a, b, pins, 1).into_iter().next())
}

/// Whether some automorphism fixing `params` pointwise maps `t1` to `t2`.
pub fn same_type_oracle(a: &FiniteStructure, t1: &[usize], t2: &[usize], params: &[usize]) -> bool {
    if t1.len() != t2.len() {
        return false;
    }
    automorphisms(a).iter().any(|s| {
        params.iter().all(|&p| s[p] == p) && t1.iter().zip(t2).all(|(&x, &y)| s[x] == y)
    })
}

/// Whether `a` and `b` share relation names and arities in order.
pub fn signatures_match(a: &FiniteStructure, b: &FiniteStructure) -> bool {
    same_signature(a, b)
}

/// Every edge set on a two-element domain: 16 digraphs named `d<mask>`,
/// where bit k of the mask encodes edge k of (0,0),(0,1),(1,0),(1,1).
pub fn two_element_digraphs() -> Vec<FiniteStructure> {
    let pairs = [[0, 0], [0, 1], [1, 0], [1, 1]];
    (0..16u32)
        .map(|mask| {
            let edges = (0..4)
                .filter(|k| mask & (1 << k) != 0)
                .map(|k| pairs[k].to_vec())
                .collect();
            FiniteStructure::new(&format!("d{mask}"), 2, vec![("E".into(), 2, edges)]).unwrap()
        })
        .collect()
}

/// Pure set of size `m` with an empty signature.
pub fn pure_set(m: usize) -> FiniteStructure {
    FiniteStructure::new(&format!("pure{m}"), m, vec![]).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fol::parse_formula;

    fn g1() -> FiniteStructure {
        parse_structure("domain 2\nrelation E 2\n0 1\n1 1\nend\n", "G1").unwrap()
    }

    fn g2() -> FiniteStructure {
        parse_structure("domain 2\nrelation E 2\n1 0\n0 0\nend\n", "G2").unwrap()
    }

    #[test]
    fn parse_examples() {
        let g = g1();
        assert_eq!(g.domain_size(), 2);
        assert_eq!(g.relations()[0].tuples(), &[vec![0, 1], vec![1, 1]]);
        assert_eq!(parse_structure("domain 1\nend", "one").unwrap().domain_size(), 1);
        assert_eq!(
            parse_structure("domain 2\nrelation E 2\n0 3\nend", "bad"),
            Err(CylError::ElementOutOfRange { element: 3, size: 2 })
        );
        assert!(parse_structure("domain 2\nrelation E 2\n0\nend", "bad").is_err());
        assert!(parse_structure("domain 2\n", "bad").is_err());
        let commented = "# graph\ndomain 2 # two\nrelation E 2\n0 1 # edge\nend\n";
        assert_eq!(parse_structure(commented, "c").unwrap().relations()[0].tuples().len(), 1);
    }

    #[test]
    fn evaluate_examples() {
        let g = g1();
        let sig = g.signature();
        let e = parse_formula("E(v0,v1)", &sig).unwrap();
        assert!(evaluate(&g, &e, &[0, 1, 0]).unwrap());
        let loop_ = parse_formula("exists v2 E(v2,v2)", &sig).unwrap();
        for a in [[0, 0, 0], [1, 0, 1]] {
            assert!(evaluate(&g, &loop_, &a).unwrap());
        }
        let eq = parse_formula("v0 = v1", &sig).unwrap();
        assert!(!evaluate(&g, &eq, &[0, 1, 1]).unwrap());
        assert!(matches!(evaluate(&g, &e, &[0]), Err(CylError::IndexOutOfRange { .. })));
    }

    #[test]
    fn automorphism_examples() {
        assert_eq!(automorphisms(&g1()), vec![vec![0, 1]]);
        assert_eq!(automorphisms(&pure_set(2)), vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(automorphisms(&pure_set(1)), vec![vec![0]]);
        assert_eq!(automorphisms(&pure_set(3)).len(), 6);
    }

    #[test]
    fn pinned_isomorphism_examples() {
        let none = BTreeMap::new();
        assert_eq!(pinned_isomorphism(&g1(), &g2(), &none).unwrap(), Some(vec![1, 0]));
        let pin: BTreeMap<usize, usize> = [(0, 1)].into();
        assert_eq!(pinned_isomorphism(&g1(), &g1(), &pin).unwrap(), None);
        let id: BTreeMap<usize, usize> = [(0, 0), (1, 1)].into();
        assert_eq!(pinned_isomorphism(&g2(), &g2(), &id).unwrap(), Some(vec![0, 1]));
        let bad: BTreeMap<usize, usize> = [(0, 1), (1, 1)].into();
        assert_eq!(pinned_isomorphism(&g1(), &g1(), &bad), Err(CylError::PinsNotInjective));
    }

    #[test]
    fn same_type_examples() {
        let p = pure_set(2);
        assert!(same_type_oracle(&p, &[0], &[1], &[]));
        assert!(!same_type_oracle(&p, &[0], &[1], &[0]));
        assert!(same_type_oracle(&g1(), &[1, 0], &[1, 0], &[0, 1]));
    }

    #[test]
    fn digraph_catalog_has_ten_iso_classes() {
        let all = two_element_digraphs();
        let mut reps: Vec<&FiniteStructure> = Vec::new();
        for g in &all {
            if !reps.iter().any(|r| pinned_isomorphism(r, g, &BTreeMap::new()).unwrap().is_some()) {
                reps.push(g);
            }
        }
        assert_eq!(reps.len(), 10);
    }
}
