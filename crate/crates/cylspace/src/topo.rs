//! Topologization spaces of finite structures and formula interpretation.
//!
//! Points are the m^n assignments, indexed lexicographically with
//! coordinate 0 most significant. The basis is the family of sets
//! invariant under Aut(A) acting coordinatewise; in a finite structure each
//! orbit is defined by its complete diagram, so these are the definable sets.

use std::sync::Arc;

use crate::bitset::{Partition, PointSet};
use crate::error::{CylError, Result};
use crate::fol::Formula;
use crate::space::{Ambient, Basis, BasisKind, CylSpace, LIFT_POINT_LIMIT};
use crate::structure::{automorphisms, evaluate, FiniteStructure};

/// Default point limit for topologizations.
pub const DEFAULT_POINT_LIMIT: usize = 4096;

/// A map from formulas to clopen sets commuting with ¬, ∧, ∃ and sending
/// equalities to diagonals.
pub trait Formation {
    fn space(&self) -> &CylSpace;
    fn interpret(&self, f: &Formula) -> Result<PointSet>;
}

/// Index arithmetic for the assignment space A^n.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TupleCoder {
    pub m: usize,
    pub n: usize,
}

impl TupleCoder {
    pub fn count(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    pub fn decode(&self, mut p: usize) -> Vec<usize> {
        let mut a = vec![0; self.n];
        for k in (0..self.n).rev() {
            a[k] = p % self.m;
            p /= self.m;
        }
        a
    }

    pub fn encode(&self, a: &[usize]) -> usize {
        a.iter().fold(0, |acc, &x| acc * self.m + x)
    }
}

fn checked_count(m: usize, n: usize, limit: usize) -> Result<usize> {
    match m.checked_pow(n as u32) {
        Some(c) if c <= limit => Ok(c),
        other => Err(CylError::Resource {
            what: format!("assignment space {m}^{n}"),
            size: other.unwrap_or(usize::MAX),
            limit,
        }),
    }
}

/// The topologization C^A_n with its formation l_A.
#[derive(Debug, Clone)]
pub struct Topologization {
    structure: Arc<FiniteStructure>,
    coder: TupleCoder,
    space: CylSpace,
}

/// Raw space of A^n: partitions, diagonals and orbit blocks.
fn assignment_space(a: &FiniteStructure, n: usize, limit: usize) -> Result<(CylSpace, TupleCoder)> {
    if n == 0 {
        return Err(CylError::Invalid("budget n must be at least 1".into()));
    }
    let m = a.domain_size();
    let count = checked_count(m, n, limit)?;
    let coder = TupleCoder { m, n };
    let tuples: Vec<Vec<usize>> = (0..count).map(|p| coder.decode(p)).collect();
    let eq = (0..n)
        .map(|i| {
            let w = m.pow((n - 1 - i) as u32);
            Partition::from_keys(tuples.iter().enumerate().map(|(p, t)| p - t[i] * w))
        })
        .collect();
    let auts = automorphisms(a);
    let orbits = Partition::from_keys(tuples.iter().map(|t| {
        auts.iter()
            .map(|s| coder.encode(&t.iter().map(|&x| s[x]).collect::<Vec<_>>()))
            .min()
            .unwrap()
    }));
    let diag = |i: usize, j: usize| {
        PointSet::from_points(count, (0..count).filter(|&p| tuples[p][i] == tuples[p][j]))
    };
    let space = CylSpace::new(count, n, eq, diag, Basis::orbit_rule(&a.name, auts.len(), orbits))?;
    let labels = tuples
        .iter()
        .map(|t| format!("({})", t.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
        .collect();
    Ok((space.with_labels(labels), coder))
}

struct TopoAmbient {
    structure: Arc<FiniteStructure>,
    n: usize,
}

impl Ambient for TopoAmbient {
    fn extend(&self, dim: usize) -> Result<(CylSpace, Vec<usize>)> {
        let (space, coder) = assignment_space(&self.structure, dim, LIFT_POINT_LIMIT)?;
        let shift = self.structure.domain_size().pow((dim - self.n) as u32);
        let proj = (0..coder.count()).map(|p| p / shift).collect();
        Ok((space, proj))
    }

    fn describe(&self) -> String {
        format!("topologization of {}", self.structure.name)
    }
}

/// Builds C^A_n. Fails with a resource error when m^n exceeds `limit`.
pub fn build_topologization(a: &FiniteStructure, n: usize, limit: usize) -> Result<Topologization> {
    let (space, coder) = assignment_space(a, n, limit)?;
    let structure = Arc::new(a.clone());
    let ambient = TopoAmbient { structure: structure.clone(), n };
    Ok(Topologization { structure, coder, space: space.with_ambient(Arc::new(ambient)) })
}

impl Topologization {
    pub fn structure(&self) -> &FiniteStructure {
        &self.structure
    }

    pub fn coder(&self) -> TupleCoder {
        self.coder
    }

    pub fn budget(&self) -> usize {
        self.coder.n
    }

    pub fn tuple(&self, p: usize) -> Vec<usize> {
        self.coder.decode(p)
    }

    pub fn point(&self, a: &[usize]) -> Result<usize> {
        if a.len() != self.coder.n {
            return Err(CylError::DimensionMismatch(format!(
                "assignment of length {} for budget {}",
                a.len(),
                self.coder.n
            )));
        }
        if let Some(&e) = a.iter().find(|&&e| e >= self.coder.m) {
            return Err(CylError::ElementOutOfRange { element: e, size: self.coder.m });
        }
        Ok(self.coder.encode(a))
    }

    /// Assignments listing every element of the domain.
    pub fn domain_points(&self) -> PointSet {
        let m = self.coder.m;
        PointSet::from_points(
            self.coder.count(),
            (0..self.coder.count()).filter(|&p| {
                let t = self.coder.decode(p);
                (0..m).all(|x| t.contains(&x))
            }),
        )
    }

    /// The space reports T2 exactly when the structure is rigid.
    pub fn is_fol(&self) -> bool {
        self.space.is_t2()
    }
}

impl Formation for Topologization {
    fn space(&self) -> &CylSpace {
        &self.space
    }

    fn interpret(&self, f: &Formula) -> Result<PointSet> {
        if let Some(v) = f.max_var() {
            if v >= self.coder.n {
                return Err(CylError::IndexOutOfRange { index: v, budget: self.coder.n });
            }
        }
        f.check(&self.structure.signature())?;
        let mut out = self.space.empty();
        for p in 0..self.coder.count() {
            if evaluate(&self.structure, f, &self.coder.decode(p))? {
                out.insert(p);
            }
        }
        Ok(out)
    }
}

/// Whether `u` is a basis set of a space with an orbit-rule basis.
pub fn is_definable(s: &CylSpace, u: &PointSet) -> Result<bool> {
    orbits(s).map(|o| o.is_union_of_blocks(u))
}

/// The automorphism orbits on assignments.
pub fn orbits(s: &CylSpace) -> Result<&Partition> {
    match s.basis().kind() {
        BasisKind::OrbitRule { .. } => Ok(s.blocks()),
        _ => Err(CylError::NotOrbitRule),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fol::parse_formula;
    use crate::structure::{parse_structure, pure_set};

    fn g1() -> FiniteStructure {
        parse_structure("domain 2\nrelation E 2\n0 1\n1 1\nend\n", "G1").unwrap()
    }

    #[test]
    fn g1_sizes() {
        let t = build_topologization(&g1(), 3, DEFAULT_POINT_LIMIT).unwrap();
        assert_eq!(t.space().point_count(), 8);
        assert_eq!(t.space().diag(0, 1).count(), 4);
        assert_eq!(t.domain_points().count(), 6);
        assert!(t.is_fol());
        let small = build_topologization(&g1(), 1, DEFAULT_POINT_LIMIT).unwrap();
        assert!(small.domain_points().is_empty());
    }

    #[test]
    fn interpretation_examples() {
        let t = build_topologization(&g1(), 3, DEFAULT_POINT_LIMIT).unwrap();
        let sig = t.structure().signature();
        let e01 = t.interpret(&parse_formula("E(v0,v1)", &sig).unwrap()).unwrap();
        let expect: Vec<usize> = (0..8)
            .filter(|&p| {
                let a = t.tuple(p);
                (a[0], a[1]) == (0, 1) || (a[0], a[1]) == (1, 1)
            })
            .collect();
        assert_eq!(e01.to_vec(), expect);
        let all = t.interpret(&parse_formula("exists v0 exists v1 E(v0,v1)", &sig).unwrap()).unwrap();
        assert!(all.is_full());
        assert!(t.interpret(&parse_formula("v0 = v0", &sig).unwrap()).unwrap().is_full());
        assert!(t.interpret(&parse_formula("E(v0,v3)", &sig).unwrap()).is_err());
    }

    #[test]
    fn pure_two_set_orbits() {
        let t = build_topologization(&pure_set(2), 2, DEFAULT_POINT_LIMIT).unwrap();
        let s = t.space();
        assert_eq!(orbits(s).unwrap().block_count(), 2);
        assert_eq!(s.basis_sets(10).unwrap().len(), 4);
        let p01 = t.point(&[0, 1]).unwrap();
        assert!(!is_definable(s, &s.singleton(p01)).unwrap());
        assert!(is_definable(s, s.diag(0, 1)).unwrap());
        assert_eq!(s.closure(&s.singleton(p01)).to_vec(), vec![p01, t.point(&[1, 0]).unwrap()]);
    }

    #[test]
    fn one_element_structure() {
        let t = build_topologization(&pure_set(1), 2, DEFAULT_POINT_LIMIT).unwrap();
        assert_eq!(t.space().point_count(), 1);
        assert!(t.space().diag(0, 1).is_full());
        assert_eq!(t.domain_points().count(), 1);
    }

    #[test]
    fn point_limit_is_enforced() {
        assert!(matches!(
            build_topologization(&pure_set(3), 9, DEFAULT_POINT_LIMIT),
            Err(CylError::Resource { .. })
        ));
    }
}
