//! Classification of point maps between cylindric spaces.
//!
//! Every basis set is a union of basis blocks, and preimage and saturation
//! both commute with unions, so each clause quantified over basis sets is
//! decided on blocks.

use serde::Serialize;

use crate::bitset::{Partition, PointSet};
use crate::error::{CylError, Result};
use crate::space::CylSpace;

/// Flags of a point map `f : C → C'`, with the first failing clause of each.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MappingClass {
    pub continuous: bool,
    pub preserves_diagonals: bool,
    pub preserves_equivalences: bool,
    pub s_mapping: bool,
    pub c_mapping: bool,
    pub basis_preserving: bool,
    pub injective: bool,
    pub surjective: bool,
    pub homeomorphism: bool,
    pub witnesses: Vec<String>,
}

fn preimage(f: &[usize], target: &PointSet) -> PointSet {
    PointSet::from_points(f.len(), (0..f.len()).filter(|&a| target.contains(f[a])))
}

/// Classifies `f` (given as the image of each point of `c`).
pub fn classify_mapping(c: &CylSpace, c2: &CylSpace, f: &[usize]) -> Result<MappingClass> {
    if c.dim() < c2.dim() {
        return Err(CylError::DimensionMismatch(format!(
            "source dimension {} is below target dimension {}",
            c.dim(),
            c2.dim()
        )));
    }
    if f.len() != c.point_count() {
        return Err(CylError::Invalid(format!("map has {} entries for {} points", f.len(), c.point_count())));
    }
    if let Some(&bad) = f.iter().find(|&&y| y >= c2.point_count()) {
        return Err(CylError::ElementOutOfRange { element: bad, size: c2.point_count() });
    }
    let n2 = c2.dim();
    let mut witnesses = Vec::new();
    let target_blocks: Vec<PointSet> = (0..c2.blocks().block_count()).map(|b| c2.blocks().block_set(b)).collect();
    let pre_blocks: Vec<PointSet> = target_blocks.iter().map(|b| preimage(f, b)).collect();

    let continuous = match pre_blocks.iter().position(|p| !c.is_open(p)) {
        None => true,
        Some(b) => {
            witnesses.push(format!("continuity: preimage of {} is not open", c2.show_set(&target_blocks[b])));
            false
        }
    };

    let mut preserves_diagonals = true;
    'diag: for i in 0..n2 {
        for j in i + 1..n2 {
            if preimage(f, c2.diag(i, j)) != *c.diag(i, j) {
                witnesses.push(format!("diagonals: f⁻¹[D'_{i}{j}] ≠ D_{i}{j}"));
                preserves_diagonals = false;
                break 'diag;
            }
        }
    }

    let mut preserves_equivalences = true;
    'eq: for i in 0..n2 {
        for block in c.eq(i).blocks() {
            let first = c2.eq(i).block_of(f[block[0]]);
            if let Some(&b) = block.iter().find(|&&b| c2.eq(i).block_of(f[b]) != first) {
                witnesses.push(format!(
                    "equivalences: {} ~{i} {} but images are not",
                    c.label(block[0]),
                    c.label(b)
                ));
                preserves_equivalences = false;
                break 'eq;
            }
        }
    }
    let s_mapping = continuous && preserves_diagonals && preserves_equivalences;

    let mut commutes = true;
    'sat: for (b, pre) in pre_blocks.iter().enumerate() {
        for i in 0..n2 {
            let lhs = c.saturate(pre, i)?;
            let rhs = preimage(f, &c2.saturate(&target_blocks[b], i)?);
            if lhs != rhs {
                witnesses.push(format!(
                    "C-mapping: [f⁻¹[u']]_{i} ≠ f⁻¹[[u']_{i}] for u'={}",
                    c2.show_set(&target_blocks[b])
                ));
                commutes = false;
                break 'sat;
            }
        }
    }
    let c_mapping = s_mapping && commutes;

    // Basis sets of C with Δ ⊆ {0..n2-1} form a Boolean algebra whose atoms
    // are the least such supersets of single points; each must be a union of
    // preimage blocks.
    let fibers = Partition::from_keys(f.iter().map(|&y| c2.blocks().block_of(y)));
    let low: Vec<usize> = (0..n2).collect();
    let mut basis_preserving = true;
    let mut covered = c.empty();
    for a in 0..c.point_count() {
        if covered.contains(a) {
            continue;
        }
        let atom = c.smallest_basis_superset(&c.singleton(a), &low);
        covered.union_with(&atom);
        if !fibers.is_union_of_blocks(&atom) {
            witnesses.push(format!(
                "basis-preserving: {} is no preimage of a basis set",
                c.show_set(&atom)
            ));
            basis_preserving = false;
            break;
        }
    }

    let mut image = PointSet::empty(c2.point_count());
    for &y in f {
        image.insert(y);
    }
    let injective = image.count() == f.len();
    let surjective = image.is_full();
    let homeomorphism = injective && surjective && basis_preserving && s_mapping;
    Ok(MappingClass {
        continuous,
        preserves_diagonals,
        preserves_equivalences,
        s_mapping,
        c_mapping,
        basis_preserving,
        injective,
        surjective,
        homeomorphism,
        witnesses,
    })
}

/// `g ∘ f` for point maps given as image vectors.
pub fn compose_maps(f: &[usize], g: &[usize]) -> Vec<usize> {
    f.iter().map(|&y| g[y]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Basis;

    fn two_points() -> CylSpace {
        let eq = vec![Partition::discrete(2)];
        CylSpace::new(2, 1, eq, |_, _| PointSet::full(2), Basis::discrete(2)).unwrap()
    }

    #[test]
    fn identity_has_every_flag() {
        let s = two_points();
        let m = classify_mapping(&s, &s, &[0, 1]).unwrap();
        assert!(m.s_mapping && m.c_mapping && m.basis_preserving && m.homeomorphism);
    }

    #[test]
    fn constant_map_is_s_mapping_only() {
        let s = two_points();
        let m = classify_mapping(&s, &s, &[0, 0]).unwrap();
        assert!(m.s_mapping);
        assert!(!m.injective && !m.homeomorphism);
        assert!(!m.basis_preserving);
    }

    #[test]
    fn rejects_bad_shapes() {
        let s = two_points();
        assert!(classify_mapping(&s, &s, &[0]).is_err());
        assert!(classify_mapping(&s, &s, &[0, 2]).is_err());
    }
}
