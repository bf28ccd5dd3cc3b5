//! Finite cylindric spaces and the substitution/permutation calculus.
//!
//! For assignment spaces (points are tuples a ∈ A^n) the calculus has the
//! pointwise reading
//! - `[u]_i = {a : a[i↦x] ∈ u for some x}`,
//! - `u(i/j) = [u ∩ D_ij]_j = {a : a[j↦a(i)] ∈ u}`,
//! - `ρu = {a : a∘ρ ∈ u}` where `(a∘ρ)(i) = a(ρ(i))`.
//!
//! These readings are used only as test oracles. The operations here are
//! computed from saturations and diagonals alone.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::bitset::{Partition, PointSet};
use crate::error::{CylError, Result};

/// Point limit used when building ambient spaces for lifted permutations.
pub const LIFT_POINT_LIMIT: usize = 1 << 16;

/// Partial map on variable indices `{0..dim-1}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarMap {
    entries: Vec<Option<usize>>,
}

impl VarMap {
    pub fn new(dim: usize, entries: Vec<Option<usize>>) -> Result<Self> {
        if entries.len() != dim {
            return Err(CylError::Invalid(format!(
                "map has {} entries, dimension is {dim}",
                entries.len()
            )));
        }
        if let Some(&Some(t)) = entries.iter().find(|e| matches!(e, Some(t) if *t >= dim)) {
            return Err(CylError::IndexOutOfRange { index: t, budget: dim });
        }
        Ok(VarMap { entries })
    }

    pub fn total(dim: usize, targets: &[usize]) -> Result<Self> {
        Self::new(dim, targets.iter().map(|&t| Some(t)).collect())
    }

    pub fn identity(dim: usize) -> Self {
        VarMap { entries: (0..dim).map(Some).collect() }
    }

    pub fn from_pairs(dim: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut entries = vec![None; dim];
        for &(i, j) in pairs {
            if i >= dim {
                return Err(CylError::IndexOutOfRange { index: i, budget: dim });
            }
            if entries[i].is_some() {
                return Err(CylError::Invalid(format!("index {i} mapped twice")));
            }
            entries[i] = Some(j);
        }
        Self::new(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize) -> Option<usize> {
        self.entries.get(i).copied().flatten()
    }

    pub fn entries(&self) -> &[Option<usize>] {
        &self.entries
    }

    pub fn dom(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.entries[i].is_some()).collect()
    }

    pub fn ran(&self) -> BTreeSet<usize> {
        self.entries.iter().flatten().copied().collect()
    }

    pub fn is_total(&self) -> bool {
        self.entries.iter().all(Option::is_some)
    }

    pub fn is_injective(&self) -> bool {
        self.ran().len() == self.dom().len()
    }

    pub fn is_surjective(&self) -> bool {
        self.ran().len() == self.dim()
    }

    /// `next ∘ self`: `i ↦ next(self(i))`, defined where both are.
    pub fn then(&self, next: &VarMap) -> VarMap {
        VarMap { entries: self.entries.iter().map(|e| e.and_then(|t| next.get(t))).collect() }
    }

    /// Same entries over a larger index range.
    pub fn widen(&self, dim: usize) -> VarMap {
        let mut entries = self.entries.clone();
        entries.resize(dim.max(self.dim()), None);
        VarMap { entries }
    }

    /// All total maps in lexicographic order of their target tuples.
    pub fn all_total(dim: usize) -> Vec<VarMap> {
        let count = dim.pow(dim as u32);
        (0..count)
            .map(|mut c| {
                let mut t = vec![0; dim];
                for k in (0..dim).rev() {
                    t[k] = c % dim;
                    c /= dim;
                }
                VarMap::total(dim, &t).unwrap()
            })
            .collect()
    }

    /// All partial maps, larger domains first, lexicographic within a domain size.
    pub fn all_partial(dim: usize) -> Vec<VarMap> {
        let count = (dim + 1).pow(dim as u32);
        let mut maps: Vec<VarMap> = (0..count)
            .map(|mut c| {
                let mut e = vec![None; dim];
                for k in (0..dim).rev() {
                    let d = c % (dim + 1);
                    c /= dim + 1;
                    e[k] = if d == 0 { None } else { Some(d - 1) };
                }
                VarMap { entries: e }
            })
            .collect();
        maps.sort_by(|a, b| {
            b.dom().len().cmp(&a.dom().len()).then_with(|| {
                let ka: Vec<(bool, usize)> =
                    a.entries.iter().map(|e| (e.is_none(), e.unwrap_or(0))).collect();
                let kb: Vec<(bool, usize)> =
                    b.entries.iter().map(|e| (e.is_none(), e.unwrap_or(0))).collect();
                ka.cmp(&kb)
            })
        });
        maps
    }
}

impl fmt::Display for VarMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for (i, e) in self.entries.iter().enumerate() {
            if let Some(t) = e {
                if !first {
                    write!(f, ",")?;
                }
                first = false;
                write!(f, "{i}:{t}")?;
            }
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for VarMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// How the cylindric basis is described.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BasisKind {
    /// An explicit list of sets.
    Explicit,
    /// Sets invariant under the automorphism group of a structure.
    OrbitRule { structure: String, group_order: usize },
    /// The Boolean algebra generated by a family of sets.
    Generated,
}

/// A cylindric basis. Every basis set is a union of `blocks`, the atoms of
/// the basis algebra, which are also the minimal nonempty open sets.
#[derive(Debug, Clone)]
pub struct Basis {
    kind: BasisKind,
    blocks: Partition,
    list: Option<Vec<PointSet>>,
}

fn membership_partition(points: usize, sets: &[PointSet]) -> Partition {
    Partition::from_keys((0..points).map(|p| sets.iter().map(|s| s.contains(p)).collect::<Vec<bool>>()))
}

impl Basis {
    pub fn explicit(points: usize, mut list: Vec<PointSet>) -> Self {
        list.sort();
        list.dedup();
        Basis { kind: BasisKind::Explicit, blocks: membership_partition(points, &list), list: Some(list) }
    }

    pub fn orbit_rule(structure: &str, group_order: usize, orbits: Partition) -> Self {
        Basis {
            kind: BasisKind::OrbitRule { structure: structure.to_string(), group_order },
            blocks: orbits,
            list: None,
        }
    }

    pub fn generated(points: usize, generators: &[PointSet]) -> Self {
        Basis { kind: BasisKind::Generated, blocks: membership_partition(points, generators), list: None }
    }

    pub fn discrete(points: usize) -> Self {
        Basis { kind: BasisKind::Generated, blocks: Partition::discrete(points), list: None }
    }

    pub fn kind(&self) -> &BasisKind {
        &self.kind
    }

    pub fn blocks(&self) -> &Partition {
        &self.blocks
    }

    pub fn list(&self) -> Option<&[PointSet]> {
        self.list.as_deref()
    }
}

/// A family of spaces extending one space to higher dimensions, with a
/// projection back. A set u of the base lifts to the cylinder
/// `{p : proj(p) ∈ u}`, which has the same dimension set.
pub trait Ambient: Send + Sync {
    /// The construction at dimension `dim`, plus the projection to the base.
    fn extend(&self, dim: usize) -> Result<(CylSpace, Vec<usize>)>;
    /// Short description for reports.
    fn describe(&self) -> String;
}

/// A higher-dimensional copy of a space with its projection.
#[derive(Clone)]
pub struct Lift {
    pub space: CylSpace,
    pub proj: Vec<usize>,
    base_points: usize,
}

impl Lift {
    pub fn up(&self, u: &PointSet) -> PointSet {
        PointSet::from_points(
            self.space.point_count(),
            (0..self.proj.len()).filter(|&p| u.contains(self.proj[p])),
        )
    }

    pub fn down(&self, w: &PointSet) -> PointSet {
        PointSet::from_points(self.base_points, w.iter().map(|p| self.proj[p]))
    }
}

/// A finite cylindric space.
#[derive(Clone)]
pub struct CylSpace {
    points: usize,
    dim: usize,
    eq: Vec<Partition>,
    diag: Vec<PointSet>,
    basis: Basis,
    labels: Option<Arc<Vec<String>>>,
    ambient: Option<Arc<dyn Ambient>>,
    lift: Arc<OnceLock<Result<Lift>>>,
}

impl fmt::Debug for CylSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CylSpace")
            .field("points", &self.points)
            .field("dim", &self.dim)
            .field("basis", &self.basis.kind)
            .field("blocks", &self.basis.blocks.block_count())
            .field("ambient", &self.ambient.as_ref().map(|a| a.describe()))
            .finish()
    }
}

impl CylSpace {
    /// Assembles a space. `diag(i, j)` must return D_ij; shape is validated,
    /// the cylindric axioms are left to `check_space_axioms`.
    pub fn new(
        points: usize,
        dim: usize,
        eq: Vec<Partition>,
        diag: impl Fn(usize, usize) -> PointSet,
        basis: Basis,
    ) -> Result<Self> {
        if eq.len() != dim {
            return Err(CylError::Invalid(format!("{} partitions for dimension {dim}", eq.len())));
        }
        if eq.iter().any(|p| p.len() != points) || basis.blocks.len() != points {
            return Err(CylError::Invalid("partition size differs from point count".into()));
        }
        let mut d = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let s = diag(i, j);
                if s.universe() != points {
                    return Err(CylError::Invalid(format!("D_{i}{j} has the wrong universe")));
                }
                d.push(s);
            }
        }
        Ok(CylSpace {
            points,
            dim,
            eq,
            diag: d,
            basis,
            labels: None,
            ambient: None,
            lift: Arc::new(OnceLock::new()),
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        self.labels = Some(Arc::new(labels));
        self
    }

    pub fn with_ambient(mut self, ambient: Arc<dyn Ambient>) -> Self {
        self.ambient = Some(ambient);
        self.lift = Arc::new(OnceLock::new());
        self
    }

    /// Copy with another basis (used to materialize an explicit list).
    pub fn with_basis(&self, basis: Basis) -> Self {
        let mut s = self.clone();
        s.basis = basis;
        s
    }

    pub fn point_count(&self) -> usize {
        self.points
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn blocks(&self) -> &Partition {
        &self.basis.blocks
    }

    pub fn eq(&self, i: usize) -> &Partition {
        &self.eq[i]
    }

    pub fn ambient(&self) -> Option<&Arc<dyn Ambient>> {
        self.ambient.as_ref()
    }

    pub fn label(&self, p: usize) -> String {
        match &self.labels {
            Some(l) => l[p].clone(),
            None => format!("p{p}"),
        }
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref().map(|v| v.as_slice())
    }

    /// A set written with point labels, for report witnesses.
    pub fn show_set(&self, u: &PointSet) -> String {
        let items: Vec<String> = u.iter().map(|p| self.label(p)).collect();
        format!("{{{}}}", items.join(","))
    }

    pub fn empty(&self) -> PointSet {
        PointSet::empty(self.points)
    }

    pub fn full(&self) -> PointSet {
        PointSet::full(self.points)
    }

    pub fn singleton(&self, p: usize) -> PointSet {
        PointSet::singleton(self.points, p)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.dim {
            Err(CylError::IndexOutOfRange { index: i, budget: self.dim })
        } else {
            Ok(())
        }
    }

    /// D_ij.
    pub fn diag(&self, i: usize, j: usize) -> &PointSet {
        &self.diag[i * self.dim + j]
    }

    /// ~i-saturation `[u]_i`.
    pub fn saturate(&self, u: &PointSet, i: usize) -> Result<PointSet> {
        self.check_index(i)?;
        Ok(self.sat(u, i))
    }

    pub(crate) fn sat(&self, u: &PointSet, i: usize) -> PointSet {
        self.eq[i].close(u)
    }

    /// Saturation in every index of `idx`.
    pub fn sat_all(&self, u: &PointSet, idx: impl IntoIterator<Item = usize>) -> PointSet {
        let mut v = u.clone();
        for i in idx {
            v = self.sat(&v, i);
        }
        v
    }

    pub fn equivalent(&self, i: usize, a: usize, b: usize) -> bool {
        self.eq[i].block_of(a) == self.eq[i].block_of(b)
    }

    /// Δ(u) = {i : [u]_i ≠ u}.
    pub fn dimension_set(&self, u: &PointSet) -> Vec<usize> {
        (0..self.dim).filter(|&i| self.sat(u, i) != *u).collect()
    }

    /// `u(i/j) = [u ∩ D_ij]_j`, and `u` when i = j.
    pub fn subst(&self, u: &PointSet, i: usize, j: usize) -> Result<PointSet> {
        self.check_index(i)?;
        self.check_index(j)?;
        Ok(self.subst_raw(u, i, j))
    }

    fn subst_raw(&self, u: &PointSet, i: usize, j: usize) -> PointSet {
        if i == j {
            return u.clone();
        }
        self.sat(&u.intersection(self.diag(i, j)), j)
    }

    /// The substitution chain u(k1/j1)…(kn/jn)(ρ(j1)/k1)…(ρ(jn)/kn).
    fn chain(&self, u: &PointSet, js: &[usize], ks: &[usize], rho: &VarMap) -> PointSet {
        let mut v = u.clone();
        for (&j, &k) in js.iter().zip(ks) {
            v = self.subst_raw(&v, k, j);
        }
        for (&j, &k) in js.iter().zip(ks) {
            v = self.subst_raw(&v, rho.get(j).unwrap(), k);
        }
        v
    }

    fn permutation_frame(&self, u: &PointSet, rho: &VarMap) -> Result<(Vec<usize>, BTreeSet<usize>)> {
        if rho.dim() != self.dim {
            return Err(CylError::DimensionMismatch(format!(
                "map over {} indices used in a space of dimension {}",
                rho.dim(),
                self.dim
            )));
        }
        let js = self.dimension_set(u);
        let dom = rho.dom();
        if !js.iter().all(|j| rho.get(*j).is_some()) {
            return Err(CylError::DomainCoverage { delta: js, dom });
        }
        let mut used: BTreeSet<usize> = js.iter().copied().collect();
        used.extend(js.iter().map(|&j| rho.get(j).unwrap()));
        Ok((js, used))
    }

    /// Indices that may serve as fresh indices for `ρu` in this space.
    pub fn spare_indices(&self, u: &PointSet, rho: &VarMap) -> Result<Vec<usize>> {
        let (_, used) = self.permutation_frame(u, rho)?;
        Ok((0..self.dim).filter(|k| !used.contains(k)).collect())
    }

    /// Permutation ρu with the smallest fresh indices outside Δ(u) ∪ ρ[Δ(u)].
    ///
    /// When this space lacks spare indices and carries an ambient, the
    /// computation runs on the lifted cylinder and is projected back.
    pub fn permute_set(&self, u: &PointSet, rho: &VarMap) -> Result<PointSet> {
        let (js, used) = self.permutation_frame(u, rho)?;
        let spare: Vec<usize> = (0..self.dim).filter(|k| !used.contains(k)).collect();
        if spare.len() >= js.len() {
            return Ok(self.chain(u, &js, &spare[..js.len()], rho));
        }
        match self.lifted() {
            Some(lift) => {
                let lift = lift?;
                let w = lift.space.permute_set(&lift.up(u), &rho.widen(lift.space.dim))?;
                Ok(lift.down(&w))
            }
            None => Err(CylError::FreshIndexExhaustion {
                required: used.len() + js.len(),
                available: self.dim,
            }),
        }
    }

    /// Permutation ρu with an explicit fresh-index schedule (one k per
    /// element of Δ(u), in increasing order of Δ(u)), computed in this space.
    pub fn permute_with_schedule(&self, u: &PointSet, rho: &VarMap, ks: &[usize]) -> Result<PointSet> {
        let (js, used) = self.permutation_frame(u, rho)?;
        let distinct: BTreeSet<usize> = ks.iter().copied().collect();
        if ks.len() != js.len()
            || distinct.len() != ks.len()
            || ks.iter().any(|k| *k >= self.dim || used.contains(k))
        {
            return Err(CylError::Invalid(format!(
                "schedule {ks:?} is not fresh for Δ(u)={js:?} and ρ={rho}"
            )));
        }
        Ok(self.chain(u, &js, ks, rho))
    }

    /// The ambient copy used for lifted permutations, built on first use.
    pub fn lifted(&self) -> Option<Result<Lift>> {
        let ambient = self.ambient.as_ref()?;
        let r = self.lift.get_or_init(|| {
            let (space, proj) = ambient.extend(2 * self.dim + 1)?;
            if proj.len() != space.point_count() {
                return Err(CylError::Invalid("ambient projection has the wrong length".into()));
            }
            Ok(Lift { space, proj, base_points: self.points })
        });
        Some(r.clone())
    }

    /// Least basis set containing `u` whose dimension set lies within `s`.
    /// It is the intersection of all such basis sets, since they are closed
    /// under intersection.
    pub fn smallest_basis_superset(&self, u: &PointSet, s: &[usize]) -> PointSet {
        let outside: Vec<usize> = (0..self.dim).filter(|i| !s.contains(i)).collect();
        let mut v = self.closure(u);
        loop {
            let next = self.closure(&self.sat_all(&v, outside.iter().copied()));
            if next == v {
                return v;
            }
            v = next;
        }
    }

    /// Permutation of a closed set: ⋂{ρv : v basis, u ⊆ v, Δ(v) ⊆ dom ρ}.
    pub fn permute_closed(&self, u: &PointSet, rho: &VarMap) -> Result<PointSet> {
        let v = self.smallest_basis_superset(u, &rho.dom());
        self.permute_set(&v, rho)
    }

    /// The same intersection taken literally over an enumerated basis.
    /// Returns `None` when the basis is too large to enumerate.
    pub fn permute_closed_literal(&self, u: &PointSet, rho: &VarMap, max_blocks: usize) -> Result<Option<PointSet>> {
        let Some(sets) = self.basis_sets(max_blocks) else { return Ok(None) };
        let dom = rho.dom();
        let mut acc = self.full();
        for v in sets {
            if u.is_subset(&v) && self.dimension_set(&v).iter().all(|i| dom.contains(i)) {
                acc.intersect_with(&self.permute_set(&v, rho)?);
            }
        }
        Ok(Some(acc))
    }

    /// Membership in the cylindric basis.
    pub fn is_basis_set(&self, u: &PointSet) -> bool {
        match &self.basis.list {
            Some(list) => list.binary_search(u).is_ok(),
            None => self.basis.blocks.is_union_of_blocks(u),
        }
    }

    /// Every basis set, when there are at most 2^max_blocks of them.
    pub fn basis_sets(&self, max_blocks: usize) -> Option<Vec<PointSet>> {
        if let Some(list) = &self.basis.list {
            return Some(list.clone());
        }
        let blocks = &self.basis.blocks;
        let k = blocks.block_count();
        if k > max_blocks || k >= 63 {
            return None;
        }
        let sets: Vec<PointSet> = (0..k).map(|b| blocks.block_set(b)).collect();
        Some(
            (0u64..(1u64 << k))
                .map(|mask| {
                    let mut s = self.empty();
                    for (b, set) in sets.iter().enumerate() {
                        if mask & (1 << b) != 0 {
                            s.union_with(set);
                        }
                    }
                    s
                })
                .collect(),
        )
    }

    /// Smallest closed superset. Basis sets are unions of blocks, so open
    /// and closed sets are exactly the unions of blocks.
    pub fn closure(&self, x: &PointSet) -> PointSet {
        self.basis.blocks.close(x)
    }

    pub fn is_open(&self, x: &PointSet) -> bool {
        self.basis.blocks.is_union_of_blocks(x)
    }

    /// Every basis set meeting Y meets X ∩ Y.
    pub fn is_dense_in(&self, x: &PointSet, y: &PointSet) -> bool {
        let xy = x.intersection(y);
        self.basis.blocks.blocks().iter().all(|b| {
            let meets_y = b.iter().any(|&p| y.contains(p));
            !meets_y || b.iter().any(|&p| xy.contains(p))
        })
    }

    /// Points are separated by basis sets.
    pub fn is_t2(&self) -> bool {
        self.basis.blocks.is_discrete()
    }

    /// Explicit copy of the basis (for file output and expansion contexts).
    pub fn materialize_basis(&self, max_blocks: usize) -> Result<CylSpace> {
        let sets = self.basis_sets(max_blocks).ok_or(CylError::Resource {
            what: "explicit basis blocks".into(),
            size: self.basis.blocks.block_count(),
            limit: max_blocks,
        })?;
        Ok(self.with_basis(Basis::explicit(self.points, sets)))
    }
}

fn write_set(out: &mut String, s: &PointSet) {
    out.push('{');
    let v: Vec<String> = s.iter().map(|p| p.to_string()).collect();
    out.push_str(&v.join(","));
    out.push('}');
}

/// Renders the explicit-space file format.
pub fn render_space(s: &CylSpace, max_blocks: usize) -> Result<String> {
    let mut out = format!("points {}\ndim {}\n", s.points, s.dim);
    for i in 0..s.dim {
        out.push_str(&format!("eq {i}: "));
        for b in s.eq[i].blocks() {
            write_set(&mut out, &PointSet::from_points(s.points, b.iter().copied()));
        }
        out.push('\n');
    }
    for i in 0..s.dim {
        for j in i + 1..s.dim {
            if !s.diag(i, j).is_full() {
                out.push_str(&format!("diag {i} {j}: "));
                write_set(&mut out, s.diag(i, j));
                out.push('\n');
            }
        }
    }
    if let BasisKind::OrbitRule { structure, .. } = &s.basis.kind {
        out.push_str(&format!("# basis: sets invariant under Aut({structure})\n"));
    }
    let sets = s.basis_sets(max_blocks).ok_or(CylError::Resource {
        what: "explicit basis blocks".into(),
        size: s.basis.blocks.block_count(),
        limit: max_blocks,
    })?;
    out.push_str("basis:");
    for set in &sets {
        out.push(' ');
        write_set(&mut out, set);
    }
    out.push_str("\nend\n");
    Ok(out)
}

fn parse_sets(text: &str, points: usize, line: usize) -> Result<Vec<PointSet>> {
    let bad = |msg: &str| CylError::Malformed { line, msg: msg.to_string() };
    let mut sets = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        if !rest.starts_with('{') {
            return Err(bad("expected `{`"));
        }
        let close = rest.find('}').ok_or_else(|| bad("unclosed `{`"))?;
        let inner = &rest[1..close];
        let mut s = PointSet::empty(points);
        for w in inner.split(',').map(str::trim).filter(|w| !w.is_empty()) {
            let p = w.parse::<usize>().map_err(|_| bad("point is not a number"))?;
            if p >= points {
                return Err(bad(&format!("point {p} out of range")));
            }
            s.insert(p);
        }
        sets.push(s);
        rest = rest[close + 1..].trim_start();
    }
    Ok(sets)
}

/// Parses the explicit-space file format into a space with an Explicit basis.
pub fn parse_space(text: &str) -> Result<CylSpace> {
    let mut points: Option<usize> = None;
    let mut dim: Option<usize> = None;
    let mut eq: Vec<Option<Vec<PointSet>>> = Vec::new();
    let mut diags: Vec<(usize, usize, PointSet)> = Vec::new();
    let mut basis: Option<Vec<PointSet>> = None;
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
        let (head, tail) = match content.find(':') {
            Some(c) => (content[..c].trim(), Some(&content[c + 1..])),
            None => (content, None),
        };
        let words: Vec<&str> = head.split_whitespace().collect();
        let num = |w: &str| w.parse::<usize>().map_err(|_| bad("expected a number"));
        match (words.first().copied(), tail) {
            (Some("points"), None) if words.len() == 2 => points = Some(num(words[1])?),
            (Some("dim"), None) if words.len() == 2 => {
                let d = num(words[1])?;
                dim = Some(d);
                eq = vec![None; d];
            }
            (Some("eq"), Some(t)) if words.len() == 2 => {
                let n = points.ok_or_else(|| bad("`points` must come first"))?;
                let i = num(words[1])?;
                if i >= eq.len() {
                    return Err(bad("eq index out of range"));
                }
                eq[i] = Some(parse_sets(t, n, line)?);
            }
            (Some("diag"), Some(t)) if words.len() == 3 => {
                let n = points.ok_or_else(|| bad("`points` must come first"))?;
                let (i, j) = (num(words[1])?, num(words[2])?);
                let d = dim.ok_or_else(|| bad("`dim` must come first"))?;
                if i >= d || j >= d {
                    return Err(bad("diag index out of range"));
                }
                let mut sets = parse_sets(t, n, line)?;
                if sets.len() != 1 {
                    return Err(bad("diag takes exactly one set"));
                }
                diags.push((i, j, sets.pop().unwrap()));
            }
            (Some("basis"), Some(t)) if words.len() == 1 => {
                let n = points.ok_or_else(|| bad("`points` must come first"))?;
                basis = Some(parse_sets(t, n, line)?);
            }
            (Some("end"), None) if words.len() == 1 => ended = true,
            _ => return Err(bad(&format!("unrecognized line `{content}`"))),
        }
    }
    let last = text.lines().count();
    let missing = |what: &str| CylError::Malformed { line: last, msg: format!("missing {what}") };
    if !ended {
        return Err(missing("`end`"));
    }
    let n = points.ok_or_else(|| missing("`points`"))?;
    let d = dim.ok_or_else(|| missing("`dim`"))?;
    let mut parts = Vec::new();
    for (i, e) in eq.into_iter().enumerate() {
        let blocks = e.ok_or_else(|| missing(&format!("`eq {i}`")))?;
        let blocks: Vec<Vec<usize>> = blocks.iter().map(|b| b.to_vec()).collect();
        parts.push(Partition::from_blocks(n, blocks).ok_or_else(|| CylError::Malformed {
            line: last,
            msg: format!("eq {i} is not a partition of the points"),
        })?);
    }
    let list = basis.ok_or_else(|| missing("`basis`"))?;
    let mut dmat = vec![PointSet::full(n); d * d];
    for (i, j, s) in diags {
        dmat[i * d + j] = s.clone();
        dmat[j * d + i] = s;
    }
    CylSpace::new(n, d, parts, |i, j| dmat[i * d + j].clone(), Basis::explicit(n, list))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two-variable assignment space over {0,1} with the discrete basis.
    fn square() -> CylSpace {
        let idx = |a: [usize; 2]| a[0] * 2 + a[1];
        let pts: Vec<[usize; 2]> = (0..4).map(|p| [p / 2, p % 2]).collect();
        let eq = (0..2)
            .map(|i| Partition::from_keys(pts.iter().map(|a| if i == 0 { a[1] } else { a[0] })))
            .collect();
        let diag = |i: usize, j: usize| {
            PointSet::from_points(4, pts.iter().filter(|a| a[i] == a[j]).map(|a| idx(*a)))
        };
        CylSpace::new(4, 2, eq, diag, Basis::discrete(4)).unwrap()
    }

    #[test]
    fn varmap_flags_and_composition() {
        let r = VarMap::total(3, &[1, 2, 0]).unwrap();
        assert!(r.is_total() && r.is_injective() && r.is_surjective());
        let c = VarMap::total(3, &[0, 0, 1]).unwrap();
        assert!(!c.is_injective() && !c.is_surjective());
        assert_eq!(r.then(&c).entries(), &[Some(0), Some(1), Some(0)]);
        assert_eq!(VarMap::all_total(3).len(), 27);
        let partial = VarMap::all_partial(2);
        assert_eq!(partial.len(), 9);
        assert!(partial[0].is_total());
        assert!(partial.last().unwrap().dom().is_empty());
        assert!(VarMap::total(2, &[0, 2]).is_err());
        assert_eq!(r.to_string(), "{0:1,1:2,2:0}");
    }

    #[test]
    fn saturation_and_dimension() {
        let s = square();
        let u = s.singleton(1);
        assert_eq!(s.saturate(&u, 0).unwrap().to_vec(), vec![1, 3]);
        assert_eq!(s.dimension_set(&u), vec![0, 1]);
        assert_eq!(s.dimension_set(s.diag(0, 1)), vec![0, 1]);
        assert!(s.dimension_set(&s.empty()).is_empty());
        assert!(s.saturate(&u, 2).is_err());
    }

    #[test]
    fn permutation_reports_exhaustion_without_ambient() {
        let s = square();
        let swap = VarMap::total(2, &[1, 0]).unwrap();
        assert_eq!(
            s.permute_set(&s.singleton(1), &swap),
            Err(CylError::FreshIndexExhaustion { required: 4, available: 2 })
        );
        let half = s.saturate(&s.singleton(1), 0).unwrap();
        let fixed = VarMap::from_pairs(2, &[(1, 1)]).unwrap();
        assert_eq!(s.permute_set(&half, &fixed).unwrap(), half);
        let k = VarMap::from_pairs(2, &[(1, 0)]).unwrap();
        assert_eq!(
            s.permute_set(&half, &k),
            Err(CylError::FreshIndexExhaustion { required: 3, available: 2 })
        );
        assert!(matches!(s.permute_set(&half, &VarMap::from_pairs(2, &[(0, 0)]).unwrap()),
            Err(CylError::DomainCoverage { .. })));
    }

    #[test]
    fn explicit_format_round_trip() {
        let s = square();
        let text = render_space(&s, 8).unwrap();
        let back = parse_space(&text).unwrap();
        assert_eq!(back.point_count(), 4);
        assert_eq!(back.diag(1, 0), s.diag(0, 1));
        assert_eq!(back.basis_sets(8).unwrap().len(), 16);
        assert_eq!(render_space(&back, 8).unwrap(), text);
        assert!(parse_space("points 2\ndim 1\neq 0: {0}{0,1}\nbasis: {}\nend").is_err());
        assert!(parse_space("points 2\ndim 1\neq 0: {0,1}\nbasis: {} {0,1}\n").is_err());
    }
}
