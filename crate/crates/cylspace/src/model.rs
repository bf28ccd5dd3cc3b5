//! Catalog model spaces, canonical maps, the model-point/structure
//! correspondence, embedding and isomorphism criteria, and type spaces.
//!
//! A theory is given extensionally by a finite catalog of finite models.
//! Points are full-type classes of (structure, assignment) pairs. For finite
//! structures two such pairs have the same type iff an isomorphism maps one
//! assignment onto the other, so classes are computed with the isomorphism
//! oracle. Elementary embeddings between finite structures are isomorphisms,
//! so verdicts on full structures collapse to isomorphism; the partial-map
//! variant is the informative one.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::Serialize;

use crate::bitset::{Partition, PointSet};
use crate::error::{CylError, Result};
use crate::fol::Formula;
use crate::laws::{Report, Tally};
use crate::mapping::classify_mapping;
use crate::points::{complete_closed, FactorWitness, PointRelations};
use crate::space::{Ambient, Basis, CylSpace, VarMap, LIFT_POINT_LIMIT};
use crate::structure::{automorphisms, evaluate, pinned_isomorphism, same_type_oracle, FiniteStructure};
use crate::topo::{build_topologization, Formation, Topologization, TupleCoder};

/// Class tables shared by a model space and its ambient copies.
struct Classes {
    space: CylSpace,
    class_map: Vec<Vec<usize>>,
    members: Vec<(usize, usize)>,
    rep_of: Vec<usize>,
    coders: Vec<TupleCoder>,
}

fn union_find_root(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

fn build_classes(catalog: &[Arc<FiniteStructure>], n: usize, limit: usize) -> Result<Classes> {
    if catalog.is_empty() {
        return Err(CylError::Invalid("empty catalog".into()));
    }
    if n == 0 {
        return Err(CylError::Invalid("budget n must be at least 1".into()));
    }
    let sig = catalog[0].signature();
    for a in catalog {
        if a.signature() != sig {
            return Err(CylError::Signature(format!("{} differs from {}", a.name, catalog[0].name)));
        }
    }
    let mut total = 0usize;
    let mut coders = Vec::new();
    for a in catalog {
        let m = a.domain_size();
        let count = m.checked_pow(n as u32).unwrap_or(usize::MAX);
        total = total.saturating_add(count);
        coders.push(TupleCoder { m, n });
    }
    if total > limit {
        return Err(CylError::Resource { what: "catalog assignments".into(), size: total, limit });
    }

    // Isomorphism to the first isomorphic catalog member.
    let mut rep_of = Vec::new();
    let mut to_rep: Vec<Vec<usize>> = Vec::new();
    for (k, a) in catalog.iter().enumerate() {
        let mut found = None;
        for r in 0..k {
            if rep_of[r] != r || catalog[r].domain_size() != a.domain_size() {
                continue;
            }
            if let Some(iso) = pinned_isomorphism(a, &catalog[r], &BTreeMap::new())? {
                found = Some((r, iso));
                break;
            }
        }
        let (r, iso) = found.unwrap_or_else(|| (k, (0..a.domain_size()).collect()));
        rep_of.push(r);
        to_rep.push(iso);
    }
    let auts: HashMap<usize, Vec<Vec<usize>>> =
        rep_of.iter().map(|&r| (r, automorphisms(&catalog[r]))).collect();

    let mut keys: HashMap<(usize, usize), usize> = HashMap::new();
    let mut members = Vec::new();
    let mut class_map = Vec::new();
    for (k, coder) in coders.iter().enumerate() {
        let r = rep_of[k];
        let mut row = Vec::with_capacity(coder.count());
        for p in 0..coder.count() {
            let a = coder.decode(p);
            let moved: Vec<usize> = a.iter().map(|&x| to_rep[k][x]).collect();
            let canon = auts[&r]
                .iter()
                .map(|t| coders[r].encode(&moved.iter().map(|&x| t[x]).collect::<Vec<_>>()))
                .min()
                .unwrap();
            let next = members.len();
            let id = *keys.entry((r, canon)).or_insert(next);
            if id == next {
                members.push((k, p));
            }
            row.push(id);
        }
        class_map.push(row);
    }
    let count = members.len();

    let mut eq = Vec::with_capacity(n);
    for i in 0..n {
        let mut parent: Vec<usize> = (0..count).collect();
        for (k, coder) in coders.iter().enumerate() {
            for p in 0..coder.count() {
                let mut a = coder.decode(p);
                for x in 0..coder.m {
                    a[i] = x;
                    let q = coder.encode(&a);
                    let (ra, rb) = (
                        union_find_root(&mut parent, class_map[k][p]),
                        union_find_root(&mut parent, class_map[k][q]),
                    );
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
        eq.push(Partition::from_keys((0..count).map(|c| union_find_root(&mut parent, c))));
    }
    let tuples: Vec<Vec<usize>> = members.iter().map(|&(k, p)| coders[k].decode(p)).collect();
    let diag = |i: usize, j: usize| PointSet::from_points(count, (0..count).filter(|&c| tuples[c][i] == tuples[c][j]));
    let space = CylSpace::new(count, n, eq, diag, Basis::discrete(count))?;
    let labels = members
        .iter()
        .zip(&tuples)
        .map(|(&(k, _), t)| {
            let body: Vec<String> = t.iter().map(|x| x.to_string()).collect();
            format!("{}({})", catalog[k].name, body.join(","))
        })
        .collect();
    Ok(Classes { space: space.with_labels(labels), class_map, members, rep_of, coders })
}

struct ModelAmbient {
    catalog: Vec<Arc<FiniteStructure>>,
    n: usize,
    class_map: Vec<Vec<usize>>,
}

impl Ambient for ModelAmbient {
    fn extend(&self, dim: usize) -> Result<(CylSpace, Vec<usize>)> {
        let big = build_classes(&self.catalog, dim, LIFT_POINT_LIMIT)?;
        let proj = big
            .members
            .iter()
            .map(|&(k, p)| {
                let a = big.coders[k].decode(p);
                let low = TupleCoder { m: big.coders[k].m, n: self.n };
                self.class_map[k][low.encode(&a[..self.n])]
            })
            .collect();
        Ok((big.space, proj))
    }

    fn describe(&self) -> String {
        format!("model space of a {}-structure catalog", self.catalog.len())
    }
}

/// The n-dimensional model space of a finite catalog.
pub struct ModelSpace {
    catalog: Vec<Arc<FiniteStructure>>,
    n: usize,
    space: CylSpace,
    class_map: Vec<Vec<usize>>,
    members: Vec<(usize, usize)>,
    rep_of: Vec<usize>,
    coders: Vec<TupleCoder>,
    topos: Vec<Topologization>,
}

/// Both sides of an embedding decision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EmbeddingVerdict {
    pub topological: bool,
    pub witness: Option<FactorWitness>,
    pub oracle: bool,
    pub agree: bool,
}

/// Builds the model space. `limit` bounds the total number of assignments.
pub fn build_model_space(catalog: &[FiniteStructure], n: usize, limit: usize) -> Result<ModelSpace> {
    let catalog: Vec<Arc<FiniteStructure>> = catalog.iter().cloned().map(Arc::new).collect();
    let c = build_classes(&catalog, n, limit)?;
    let topos = catalog
        .iter()
        .map(|a| build_topologization(a, n, limit))
        .collect::<Result<Vec<_>>>()?;
    let ambient = ModelAmbient { catalog: catalog.clone(), n, class_map: c.class_map.clone() };
    Ok(ModelSpace {
        catalog,
        n,
        space: c.space.with_ambient(Arc::new(ambient)),
        class_map: c.class_map,
        members: c.members,
        rep_of: c.rep_of,
        coders: c.coders,
        topos,
    })
}

impl Formation for ModelSpace {
    fn space(&self) -> &CylSpace {
        &self.space
    }

    fn interpret(&self, f: &Formula) -> Result<PointSet> {
        if let Some(v) = f.max_var() {
            if v >= self.n {
                return Err(CylError::IndexOutOfRange { index: v, budget: self.n });
            }
        }
        let mut out = self.space.empty();
        for (c, &(k, p)) in self.members.iter().enumerate() {
            if evaluate(&self.catalog[k], f, &self.coders[k].decode(p))? {
                out.insert(c);
            }
        }
        Ok(out)
    }
}

impl ModelSpace {
    pub fn budget(&self) -> usize {
        self.n
    }

    pub fn catalog(&self) -> &[Arc<FiniteStructure>] {
        &self.catalog
    }

    pub fn topologization(&self, k: usize) -> &Topologization {
        &self.topos[k]
    }

    /// Catalog index of the first isomorphic member.
    pub fn representative(&self, k: usize) -> usize {
        self.rep_of[k]
    }

    /// Class of assignment `a` of catalog member `k`.
    pub fn class_of(&self, k: usize, a: &[usize]) -> Result<usize> {
        let p = self.topos[k].point(a)?;
        Ok(self.class_map[k][p])
    }

    /// A structure and assignment realizing point `c`.
    pub fn member(&self, c: usize) -> (usize, Vec<usize>) {
        let (k, p) = self.members[c];
        (k, self.coders[k].decode(p))
    }

    /// The canonical map C^A_n → MS for catalog member `k`.
    pub fn canonical_map(&self, k: usize) -> &[usize] {
        &self.class_map[k]
    }

    /// Image of the domain points of member `k`.
    pub fn domain_image(&self, k: usize) -> PointSet {
        PointSet::from_points(
            self.space.point_count(),
            self.topos[k].domain_points().iter().map(|p| self.class_map[k][p]),
        )
    }

    /// Counts formation-preserving, basis-preserving C-maps C^A_n → MS by
    /// backtracking over atomic-diagram-compatible images. Returns `None`
    /// above 16 source points.
    pub fn count_canonical_maps(&self, k: usize) -> Result<Option<usize>> {
        let t = &self.topos[k];
        let src = t.space().point_count();
        if src > 16 {
            return Ok(None);
        }
        let atoms = atomic_formulas(&self.catalog[k], self.n);
        let src_sets: Vec<PointSet> = atoms.iter().map(|f| t.interpret(f)).collect::<Result<_>>()?;
        let dst_sets: Vec<PointSet> = atoms.iter().map(|f| self.interpret(f)).collect::<Result<_>>()?;
        let candidates: Vec<Vec<usize>> = (0..src)
            .map(|a| {
                (0..self.space.point_count())
                    .filter(|&c| src_sets.iter().zip(&dst_sets).all(|(s, d)| s.contains(a) == d.contains(c)))
                    .collect()
            })
            .collect();
        let mut count = 0;
        let mut f = vec![0; src];
        self.count_maps(t.space(), &candidates, 0, &mut f, &mut count)?;
        Ok(Some(count))
    }

    fn count_maps(
        &self,
        src: &CylSpace,
        cand: &[Vec<usize>],
        a: usize,
        f: &mut Vec<usize>,
        count: &mut usize,
    ) -> Result<()> {
        if a == cand.len() {
            let m = classify_mapping(src, &self.space, f)?;
            if m.c_mapping && m.basis_preserving {
                *count += 1;
            }
            return Ok(());
        }
        for &c in &cand[a] {
            f[a] = c;
            self.count_maps(src, cand, a + 1, f, count)?;
        }
        Ok(())
    }

    /// Reading of a point as a structure, without the model check.
    /// Domain: indices i with c ∉ D_ji for all j < i; relations read from the
    /// formation at those indices.
    pub fn represent_unchecked(&self, c: usize) -> Result<FiniteStructure> {
        let s = &self.space;
        let idx: Vec<usize> = (0..self.n).filter(|&i| (0..i).all(|j| !s.diag(j, i).contains(c))).collect();
        let m = idx.len();
        let mut rels = Vec::new();
        for r in self.catalog[0].relations() {
            let mut tuples = Vec::new();
            let coder = TupleCoder { m, n: r.arity };
            for t in 0..coder.count() {
                let elems = coder.decode(t);
                let vars: Vec<usize> = elems.iter().map(|&e| idx[e]).collect();
                if self.interpret(&Formula::Atomic(r.name.clone(), vars))?.contains(c) {
                    tuples.push(elems);
                }
            }
            rels.push((r.name.clone(), r.arity, tuples));
        }
        FiniteStructure::new(&format!("rep{c}"), m, rels)
    }

    /// The structure represented by a model point.
    pub fn represent_model_point(&self, c: usize) -> Result<FiniteStructure> {
        if !PointRelations::new(&self.space).is_model_point(c)?.model {
            return Err(CylError::NotModelPoint(c));
        }
        self.represent_unchecked(c)
    }

    /// Element of the represented structure denoted by coordinate `i`.
    fn element_at(&self, c: usize, i: usize) -> usize {
        let s = &self.space;
        let idx: Vec<usize> = (0..self.n).filter(|&k| (0..k).all(|j| !s.diag(j, k).contains(c))).collect();
        let first = (0..=i).find(|&j| s.diag(j, i).contains(c)).unwrap();
        idx.iter().position(|&k| k == first).unwrap()
    }

    fn first_index_of(&self, c: usize, x: usize) -> Option<usize> {
        (0..self.n).find(|&i| self.element_at(c, i) == x)
    }

    /// Topological side: some factor a ≺ b. Oracle side: the represented
    /// structures are isomorphic.
    pub fn decide_embedding(&self, a: usize, b: usize) -> Result<EmbeddingVerdict> {
        let rel = PointRelations::new(&self.space);
        for c in [a, b] {
            if !rel.is_model_point(c)?.model {
                return Err(CylError::NotModelPoint(c));
            }
        }
        let witness = rel.exists_factor(a, b, false)?;
        let (sa, sb) = (self.represent_unchecked(a)?, self.represent_unchecked(b)?);
        let oracle = sa.domain_size() == sb.domain_size() && pinned_isomorphism(&sa, &sb, &BTreeMap::new())?.is_some();
        let topological = witness.is_some();
        Ok(EmbeddingVerdict { topological, witness, oracle, agree: topological == oracle })
    }

    /// Partial variant: pins map elements of the structure represented by
    /// `a` to elements of the one represented by `b`. The topological side
    /// is a ≺_ρ b with ρ(first index of x in a) = first index of pins(x) in b.
    pub fn decide_partial_embedding(&self, a: usize, b: usize, pins: &BTreeMap<usize, usize>) -> Result<EmbeddingVerdict> {
        let rel = PointRelations::new(&self.space);
        for c in [a, b] {
            if !rel.is_model_point(c)?.model {
                return Err(CylError::NotModelPoint(c));
            }
        }
        let (sa, sb) = (self.represent_unchecked(a)?, self.represent_unchecked(b)?);
        let oracle = sa.domain_size() == sb.domain_size() && pinned_isomorphism(&sa, &sb, pins)?.is_some();
        let mut pairs = Vec::new();
        for (&x, &y) in pins {
            let i = self.first_index_of(a, x).ok_or(CylError::ElementOutOfRange { element: x, size: sa.domain_size() })?;
            let j = self.first_index_of(b, y).ok_or(CylError::ElementOutOfRange { element: y, size: sb.domain_size() })?;
            pairs.push((i, j));
        }
        let rho = VarMap::from_pairs(self.n, &pairs)?;
        let topological = rel.factor(&rho, a, b)?;
        let equivalence = rho.is_total() && rel.equivalence_side_condition(&rho, b);
        let witness = topological.then(|| FactorWitness { rho, source: a, target: b, equivalence });
        Ok(EmbeddingVerdict { topological, witness, oracle, agree: topological == oracle })
    }

    /// Number of ≍-classes of big model points.
    pub fn count_iso_classes(&self) -> Result<usize> {
        let max_m = self.catalog.iter().map(|a| a.domain_size()).max().unwrap();
        if self.n < max_m {
            return Err(CylError::Invalid(format!(
                "budget n={} is below the largest domain size {max_m}; no big model points exist",
                self.n
            )));
        }
        let rel = PointRelations::new(&self.space);
        let mut reps: Vec<usize> = Vec::new();
        for c in 0..self.space.point_count() {
            if !rel.is_model_point(c)?.big {
                continue;
            }
            let mut new = true;
            for &r in &reps {
                if rel.equivalent(r, c)? {
                    new = false;
                    break;
                }
            }
            if new {
                reps.push(c);
            }
        }
        Ok(reps.len())
    }

    /// Isomorphism classes of the catalog (oracle side of the count).
    pub fn catalog_iso_classes(&self) -> usize {
        (0..self.catalog.len()).filter(|&k| self.rep_of[k] == k).count()
    }
}

/// Atomic and equality formulas over variables below `n`.
pub fn atomic_formulas(a: &FiniteStructure, n: usize) -> Vec<Formula> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            out.push(Formula::Equal(i, j));
        }
    }
    for r in a.relations() {
        let coder = TupleCoder { m: n, n: r.arity };
        for t in 0..coder.count() {
            out.push(Formula::Atomic(r.name.clone(), coder.decode(t)));
        }
    }
    out
}

/// Types of k-tuples over parameters, as blocks of tuples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TypeSpace {
    pub k: usize,
    pub params: Vec<usize>,
    pub types: Vec<Vec<Vec<usize>>>,
}

/// Classes of k-tuples under the same-type oracle, in order of first tuple.
pub fn type_space(a: &FiniteStructure, k: usize, params: &[usize]) -> Result<TypeSpace> {
    if k == 0 {
        return Err(CylError::Invalid("k must be at least 1".into()));
    }
    if let Some(&x) = params.iter().find(|&&x| x >= a.domain_size()) {
        return Err(CylError::ElementOutOfRange { element: x, size: a.domain_size() });
    }
    let coder = TupleCoder { m: a.domain_size(), n: k };
    let mut types: Vec<Vec<Vec<usize>>> = Vec::new();
    for p in 0..coder.count() {
        let t = coder.decode(p);
        match types.iter_mut().find(|ty| same_type_oracle(a, &ty[0], &t, params)) {
            Some(ty) => ty.push(t),
            None => types.push(vec![t]),
        }
    }
    Ok(TypeSpace { k, params: params.to_vec(), types })
}

/// The complete closed set representing a type space, its blocks, and the
/// type ↔ block correspondence with its verification report.
#[derive(Debug, Clone)]
pub struct TypeEmbedding {
    pub set: PointSet,
    pub blocks: Vec<PointSet>,
    /// Block index of each type.
    pub correspondence: Vec<usize>,
    pub types: TypeSpace,
    pub report: Report,
}

/// Embeds S^A_k(B) into the model space: B is pinned at `pin_coords`, the
/// other coordinates ≥ k carry B[0] (or 0) and are quotiented by saturation.
pub fn type_space_embedding(
    ms: &ModelSpace,
    member: usize,
    k: usize,
    params: &[usize],
    pin_coords: &[usize],
) -> Result<TypeEmbedding> {
    let n = ms.n;
    if k + params.len() > n {
        return Err(CylError::FreshIndexExhaustion { required: k + params.len(), available: n });
    }
    if pin_coords.len() != params.len() {
        return Err(CylError::Invalid("one pin coordinate per parameter".into()));
    }
    let mut sorted = pin_coords.to_vec();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != pin_coords.len() || pin_coords.iter().any(|&c| c < k || c >= n) {
        return Err(CylError::Invalid(format!("pin coordinates {pin_coords:?} must be distinct in {k}..{n}")));
    }
    let a = &ms.catalog[member];
    let types = type_space(a, k, params)?;
    let filler = params.first().copied().unwrap_or(0);
    let others: Vec<usize> = (k..n).filter(|c| !pin_coords.contains(c)).collect();
    let assignment = |t: &[usize]| {
        let mut w = vec![filler; n];
        w[..k].copy_from_slice(t);
        for (&c, &b) in pin_coords.iter().zip(params) {
            w[c] = b;
        }
        w
    };
    let s = &ms.space;
    let witness = ms.class_of(member, &assignment(&vec![0; k]))?;
    let set = complete_closed(s, witness, pin_coords);
    let block_part = {
        let mut key = vec![usize::MAX; s.point_count()];
        for c in set.iter() {
            if key[c] == usize::MAX {
                let b = s.sat_all(&s.singleton(c), others.iter().copied()).intersection(&set);
                for d in b.iter() {
                    key[d] = c;
                }
            }
        }
        Partition::from_keys(key)
    };
    let blocks: Vec<PointSet> = set
        .iter()
        .map(|c| block_part.block_of(c))
        .fold(Vec::new(), |mut acc: Vec<usize>, b| {
            if !acc.contains(&b) {
                acc.push(b);
            }
            acc
        })
        .into_iter()
        .map(|b| block_part.block_set(b))
        .collect();
    let block_index = |c: usize| blocks.iter().position(|b| b.contains(c));

    let mut report = Report::new();
    let mut well = Tally::new("type map well-defined");
    let mut correspondence = Vec::new();
    let mut point_of = Vec::new();
    for ty in &types.types {
        let idx: Vec<Option<usize>> = ty
            .iter()
            .map(|t| ms.class_of(member, &assignment(t)).map(block_index))
            .collect::<Result<_>>()?;
        well.check(idx.iter().all(|x| x.is_some() && *x == idx[0]), || format!("type of {:?}", ty[0]));
        correspondence.push(idx[0].unwrap_or(usize::MAX));
        point_of.push(ms.class_of(member, &assignment(&ty[0]))?);
    }
    report.push(well.finish());
    let mut bij = Tally::new("type map bijective");
    let mut seen = correspondence.clone();
    seen.sort();
    seen.dedup();
    bij.check(seen.len() == types.types.len() && seen.len() == blocks.len(), || {
        format!("{} types, {} distinct images, {} blocks", types.types.len(), seen.len(), blocks.len())
    });
    report.push(bij.finish());

    // Clopen traces: atoms of the basis sets with Δ inside the type and pin
    // coordinates trace unions of blocks, matching unions of types, and
    // each type block is such a trace.
    let visible: Vec<usize> = (0..k).chain(pin_coords.iter().copied()).collect();
    let mut fwd = Tally::new("traces of clopen sets are clopen in the type space");
    let mut back = Tally::new("type blocks are traces of clopen sets");
    for c in set.iter() {
        let atom = s.smallest_basis_superset(&s.singleton(c), &visible).intersection(&set);
        let union_of_blocks = blocks.iter().all(|b| b.is_subset(&atom) || b.is_disjoint(&atom));
        let type_union = types.types.iter().all(|ty| {
            let inside: Vec<bool> = ty
                .iter()
                .map(|t| ms.class_of(member, &assignment(t)).map(|p| atom.contains(p)).unwrap_or(false))
                .collect();
            inside.iter().all(|&x| x == inside[0])
        });
        fwd.check(union_of_blocks && type_union, || format!("trace {}", s.show_set(&atom)));
    }
    for (ti, &p) in point_of.iter().enumerate() {
        let atom = s.smallest_basis_superset(&s.singleton(p), &visible).intersection(&set);
        let target = correspondence.get(ti).and_then(|&b| blocks.get(b));
        back.check(target == Some(&atom), || format!("type {:?}", types.types[ti][0]));
    }
    report.push(fwd.finish());
    report.push(back.finish());
    Ok(TypeEmbedding { set, blocks, correspondence, types, report })
}
