//! Point-level relations: complete closed sets, point permutation, factors,
//! the equivalence ≍, model points and the point law suite.
//!
//! On assignment spaces ρ{a} = {b : b∘ρ = a}, so a ≺_ρ b reads "b∘ρ agrees
//! with a on dom ρ". The code never uses this reading; tests do.

use std::collections::HashMap;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bitset::PointSet;
use crate::error::{CylError, Result};
use crate::laws::{LawResult, Report, Tally};
use crate::space::{CylSpace, VarMap};

/// A witness for a ≺_ρ b.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactorWitness {
    #[serde(serialize_with = "show_map")]
    pub rho: VarMap,
    pub source: usize,
    pub target: usize,
    /// Whether the ≍ side condition holds for this ρ.
    pub equivalence: bool,
}

fn show_map<S: serde::Serializer>(m: &VarMap, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&m.to_string())
}

/// Model-point flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModelFlags {
    pub model: bool,
    pub big: bool,
}

/// The least closed set containing `a` with dimension set inside `s`
/// (the complete closed set a|_s).
pub fn complete_closed(space: &CylSpace, a: usize, s: &[usize]) -> PointSet {
    space.smallest_basis_superset(&space.singleton(a), s)
}

/// Point relations over one space, memoizing the transports ρ(a|_dom ρ).
pub struct PointRelations<'a> {
    space: &'a CylSpace,
    cache: Mutex<HashMap<(usize, VarMap), PointSet>>,
}

impl<'a> PointRelations<'a> {
    pub fn new(space: &'a CylSpace) -> Self {
        PointRelations { space, cache: Mutex::new(HashMap::new()) }
    }

    pub fn space(&self) -> &CylSpace {
        self.space
    }

    /// ρ(a|_dom ρ), the set of b with a ≺_ρ b.
    pub fn transport(&self, rho: &VarMap, a: usize) -> Result<PointSet> {
        let key = (a, rho.clone());
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let v = complete_closed(self.space, a, &rho.dom());
        let t = self.space.permute_closed(&v, rho)?;
        self.cache.lock().unwrap().insert(key, t.clone());
        Ok(t)
    }

    /// a ≺_ρ b.
    pub fn factor(&self, rho: &VarMap, a: usize, b: usize) -> Result<bool> {
        Ok(self.transport(rho, a)?.contains(b))
    }

    /// For each j outside ran ρ, b lies on a diagonal D_ij with i in ran ρ.
    pub fn equivalence_side_condition(&self, rho: &VarMap, b: usize) -> bool {
        let ran = rho.ran();
        (0..self.space.dim())
            .filter(|j| !ran.contains(j))
            .all(|j| ran.iter().any(|&i| self.space.diag(i, j).contains(b)))
    }

    /// The unique point of ρ{a} on a T2 space.
    pub fn permute_point(&self, rho: &VarMap, a: usize) -> Result<usize> {
        if !self.space.is_t2() {
            return Err(CylError::NotT2("point permutation needs separated points".into()));
        }
        if !rho.is_total() {
            return Err(CylError::Invalid(format!("ρ={rho} is not total")));
        }
        let t = self.transport(rho, a)?;
        match t.count() {
            0 => Err(CylError::EmptyPermutation(format!(
                "a={} is off a diagonal required by ρ={rho}",
                self.space.label(a)
            ))),
            1 => Ok(t.first().unwrap()),
            k => Err(CylError::NotSingleton(k)),
        }
    }

    /// First ρ with a ≺_ρ b: the identity, then total maps in lexicographic
    /// order; without `require_equiv`, then partial maps by decreasing
    /// domain size. With `require_equiv` only total maps meeting the ≍ side
    /// condition count.
    pub fn exists_factor(&self, a: usize, b: usize, require_equiv: bool) -> Result<Option<FactorWitness>> {
        let n = self.space.dim();
        let mut candidates = vec![VarMap::identity(n)];
        if require_equiv {
            candidates.extend(VarMap::all_total(n));
        } else {
            candidates.extend(VarMap::all_partial(n));
        }
        for rho in candidates {
            if !self.factor(&rho, a, b)? {
                continue;
            }
            let equivalence = rho.is_total() && self.equivalence_side_condition(&rho, b);
            if require_equiv && !equivalence {
                continue;
            }
            return Ok(Some(FactorWitness { rho, source: a, target: b, equivalence }));
        }
        Ok(None)
    }

    /// a ≍ b.
    pub fn equivalent(&self, a: usize, b: usize) -> Result<bool> {
        Ok(self.exists_factor(a, b, true)?.is_some())
    }

    /// Model flag: b ∈ [u]_i implies b ∈ u(j/i) for some j, over basis
    /// blocks u (enough, since u ↦ u(j/i) is monotone). Big flag: some total
    /// factor c ≺_ρ b lies outside every D_ij.
    pub fn is_model_point(&self, b: usize) -> Result<ModelFlags> {
        let s = self.space;
        let n = s.dim();
        let mut model = true;
        'outer: for blk in 0..s.blocks().block_count() {
            let u = s.blocks().block_set(blk);
            for i in 0..n {
                if s.sat(&u, i).contains(b) && !(0..n).any(|j| s.subst(&u, j, i).unwrap().contains(b)) {
                    model = false;
                    break 'outer;
                }
            }
        }
        let big = model && self.has_off_diagonal_factor(b)?;
        Ok(ModelFlags { model, big })
    }

    fn has_off_diagonal_factor(&self, b: usize) -> Result<bool> {
        let s = self.space;
        let n = s.dim();
        let mut covered = s.empty();
        for i in 0..n {
            for j in i + 1..n {
                covered.union_with(s.diag(i, j));
            }
        }
        let free = covered.complement();
        if free.is_empty() {
            return Ok(false);
        }
        for rho in VarMap::all_total(n) {
            for c in free.iter() {
                if self.factor(&rho, c, b)? {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    /// A model point b ∈ v with a ≺ b: `a` itself when it is one, else the
    /// first in point order. `v` must be the ∅-dimensional complete closed
    /// set containing `a`.
    pub fn find_model_point(&self, v: &PointSet, a: usize) -> Result<Option<usize>> {
        if !v.contains(a) || complete_closed(self.space, a, &[]) != *v {
            return Err(CylError::NotCompleteClosed);
        }
        if self.is_model_point(a)?.model {
            return Ok(Some(a));
        }
        for b in v.iter() {
            if self.is_model_point(b)?.model && self.exists_factor(a, b, false)?.is_some() {
                return Ok(Some(b));
            }
        }
        Ok(None)
    }
}

/// Options for the point law suite.
#[derive(Debug, Clone)]
pub struct PointLawOptions {
    /// Exhaustive over all total maps up to this dimension, sampled above.
    pub exhaustive_dim: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for PointLawOptions {
    fn default() -> Self {
        PointLawOptions { exhaustive_dim: 3, samples: 200, seed: 0 }
    }
}

/// Point permutation laws and the equivalence laws of ≍, on T2 spaces.
pub fn verify_point_laws(space: &CylSpace, opts: &PointLawOptions) -> Report {
    let mut report = Report::new();
    let names = ["up-1 nonempty", "up-2 at most one", "up-3 unique preimage", "up-4 composition"];
    if !space.is_t2() {
        for law in names.iter().chain(["≍ reflexive", "≍ symmetric", "≍ transitive"].iter()) {
            report.push(LawResult::skipped(law, "point laws assume an FOL (T2) space"));
        }
        return report;
    }
    match point_laws(space, opts) {
        Ok(r) => report.extend(r),
        Err(e) => {
            for law in names {
                report.push(LawResult::verdict(law, false, format!("error: {e}")));
            }
        }
    }
    report
}

fn point_laws(space: &CylSpace, opts: &PointLawOptions) -> Result<Report> {
    let rel = PointRelations::new(space);
    let n = space.dim();
    let pts = space.point_count();
    let all_maps = VarMap::all_total(n);
    let exhaustive = n <= opts.exhaustive_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let pairs: Vec<(usize, usize)> = if exhaustive {
        let maps = all_maps.len();
        (0..maps).flat_map(|r| (0..pts).map(move |a| (r, a))).collect()
    } else {
        (0..opts.samples).map(|_| (rng.gen_range(0..all_maps.len()), rng.gen_range(0..pts))).collect()
    };
    let on_diagonals = |rho: &VarMap, a: usize| {
        (0..n).all(|i| (0..n).all(|j| rho.get(i) != rho.get(j) || space.diag(i, j).contains(a)))
    };

    let mut t1 = Tally::new("up-1 nonempty");
    let mut t2 = Tally::new("up-2 at most one");
    for &(r, a) in &pairs {
        let rho = &all_maps[r];
        let t = rel.transport(rho, a)?;
        if on_diagonals(rho, a) {
            t1.check(!t.is_empty(), || format!("a={}, ρ={rho}", space.label(a)));
        } else {
            t1.not_applicable();
        }
        if rho.is_surjective() {
            t2.check(t.count() <= 1, || format!("a={}, ρ={rho}, ‖ρ{{a}}‖={}", space.label(a), t.count()));
        } else {
            t2.not_applicable();
        }
    }

    let mut t3 = Tally::new("up-3 unique preimage");
    let maps_for_3: Vec<usize> = if exhaustive {
        (0..all_maps.len()).collect()
    } else {
        let mut v: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        v.sort();
        v.dedup();
        v
    };
    for &r in &maps_for_3 {
        let rho = &all_maps[r];
        let mut hits = vec![0usize; pts];
        for a2 in 0..pts {
            for b in rel.transport(rho, a2)?.iter() {
                hits[b] += 1;
            }
        }
        for (a, &h) in hits.iter().enumerate() {
            t3.check(h == 1, || format!("a={}, ρ={rho}, preimages={h}", space.label(a)));
        }
    }

    let mut t4 = Tally::new("up-4 composition");
    let triples: Vec<(usize, usize, usize)> = if exhaustive {
        let blocks = space.blocks().block_count();
        let maps = all_maps.len();
        (0..blocks)
            .flat_map(|b| (0..maps).flat_map(move |r| (0..maps).map(move |r2| (b, r, r2))))
            .collect()
    } else {
        (0..opts.samples)
            .map(|_| {
                (
                    rng.gen_range(0..space.blocks().block_count()),
                    rng.gen_range(0..all_maps.len()),
                    rng.gen_range(0..all_maps.len()),
                )
            })
            .collect()
    };
    // Both sides revisit the same (set, map) pairs many times.
    let map_index: HashMap<VarMap, usize> = all_maps.iter().cloned().enumerate().map(|(k, m)| (m, k)).collect();
    let mut memo: HashMap<(PointSet, usize), PointSet> = HashMap::new();
    let mut permute = |u: &PointSet, r: usize| -> Result<PointSet> {
        if let Some(hit) = memo.get(&(u.clone(), r)) {
            return Ok(hit.clone());
        }
        let v = space.permute_set(u, &all_maps[r])?;
        memo.insert((u.clone(), r), v.clone());
        Ok(v)
    };
    for (b, r, r2) in triples {
        let u = space.blocks().block_set(b);
        let (rho, rho2) = (&all_maps[r], &all_maps[r2]);
        let v = permute(&u, r)?;
        let w = permute(&v, r2)?;
        let direct = permute(&u, map_index[&rho.then(rho2)])?;
        t4.check(w == direct, || format!("u={}, ρ={rho}, ρ'={rho2}", space.show_set(&u)));
    }

    let mut report = Report::new();
    for (t, note) in [(t1, true), (t2, true), (t3, true), (t4, false)] {
        let mut r = t.finish();
        if !exhaustive {
            r.reason = Some(format!("seeded sample of {}", opts.samples));
        } else if !note {
            r.reason = Some("u ranges over basis blocks; permutation distributes over unions".into());
        }
        report.push(r);
    }

    let eq_points: Vec<usize> = if exhaustive || pts <= 64 {
        (0..pts).collect()
    } else {
        let mut v: Vec<usize> = (0..opts.samples.min(64)).map(|_| rng.gen_range(0..pts)).collect();
        v.sort();
        v.dedup();
        v
    };
    let k = eq_points.len();
    let mut rel_eq = vec![vec![false; k]; k];
    for (x, &a) in eq_points.iter().enumerate() {
        for (y, &b) in eq_points.iter().enumerate() {
            rel_eq[x][y] = rel.equivalent(a, b)?;
        }
    }
    let mut tr = Tally::new("≍ reflexive");
    let mut ts = Tally::new("≍ symmetric");
    let mut tt = Tally::new("≍ transitive");
    for x in 0..k {
        tr.check(rel_eq[x][x], || format!("a={}", space.label(eq_points[x])));
        for y in 0..k {
            if rel_eq[x][y] {
                ts.check(rel_eq[y][x], || {
                    format!("a={}, b={}", space.label(eq_points[x]), space.label(eq_points[y]))
                });
                for z in 0..k {
                    if rel_eq[y][z] {
                        tt.check(rel_eq[x][z], || {
                            format!(
                                "a={}, b={}, c={}",
                                space.label(eq_points[x]),
                                space.label(eq_points[y]),
                                space.label(eq_points[z])
                            )
                        });
                    }
                }
            }
        }
    }
    report.push(tr.finish());
    report.push(ts.finish());
    report.push(tt.finish());
    Ok(report)
}

// Free-function forms; each call builds a fresh cache.

pub fn permute_point(space: &CylSpace, rho: &VarMap, a: usize) -> Result<usize> {
    PointRelations::new(space).permute_point(rho, a)
}

pub fn factor(space: &CylSpace, rho: &VarMap, a: usize, b: usize) -> Result<bool> {
    PointRelations::new(space).factor(rho, a, b)
}

pub fn exists_factor(space: &CylSpace, a: usize, b: usize, require_equiv: bool) -> Result<Option<FactorWitness>> {
    PointRelations::new(space).exists_factor(a, b, require_equiv)
}

pub fn equivalent_points(space: &CylSpace, a: usize, b: usize) -> Result<bool> {
    PointRelations::new(space).equivalent(a, b)
}

pub fn is_model_point(space: &CylSpace, b: usize) -> Result<ModelFlags> {
    PointRelations::new(space).is_model_point(b)
}

pub fn find_model_point(space: &CylSpace, v: &PointSet, a: usize) -> Result<Option<usize>> {
    PointRelations::new(space).find_model_point(v, a)
}
