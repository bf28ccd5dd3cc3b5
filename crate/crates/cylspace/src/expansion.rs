//! Atoms over M×B, their greedy completion, the α-expansion space and the
//! expansion mapping, at finite β ≤ α.
//!
//! Every fiber {u : (ρ,u) ∈ x} of an atom is an ultrafilter on the finite
//! basis B, hence principal at one basis block. Enumeration therefore
//! branches over one block per map. The inductive condition "for any finite
//! U ⊆ B, no w ⊆ −⋂U is added" is tested as "⋂ fiber ≠ ∅": U ranges over
//! finitely many sets, so the whole fiber is one admissible U, and any
//! smaller U has a larger intersection.
//!
//! When the base carries an ambient, each pair (ρ,u) is also transported
//! into the (α+β)-dimensional ambient as ρ·ι(u) and atoms must satisfy
//! ⋂{ρ·ι(u) : (ρ,u) ∈ x} ≠ ∅ (joint consistency). Without it finite β admits
//! fibers that no single α-tuple realizes.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bitset::{Partition, PointSet};
use crate::error::{CylError, Result};
use crate::laws::{LawResult, Report, Tally};
use crate::mapping::classify_mapping;
use crate::space::{Ambient, Basis, CylSpace, VarMap};

/// Guard on |M|·|B|.
pub const PAIR_LIMIT: usize = 4096;

/// Largest basis materialized for a context (2^10 sets).
const MAX_BASIS_BLOCKS: usize = 10;

/// Immutable data for atoms over a β-dimensional base raised to α.
pub struct ExpansionContext {
    base: CylSpace,
    alpha: usize,
    beta: usize,
    maps: Vec<Vec<usize>>,
    sets: Vec<PointSet>,
    complement: Vec<usize>,
    delta: Vec<Vec<usize>>,
    self_maps: Vec<Vec<usize>>,
    /// perm[r][v]: index of ρ'_r v, when computable.
    perm: Vec<Vec<Option<usize>>>,
    /// Pairs (r, v') with perm[r][v'] = v, per v.
    perm_pre: Vec<Vec<(usize, usize)>>,
    /// compose[μ][r]: index of μ∘ρ'_r.
    compose: Vec<Vec<usize>>,
    blocks: Vec<PointSet>,
    /// inside[c][u]: block c ⊆ u.
    inside: Vec<Vec<bool>>,
    /// transport[μ][u] = μ·ι(u) in the ambient.
    transport: Option<Vec<Vec<PointSet>>>,
    /// Maps ρ' with some uncomputable ρ'v.
    unchecked: Vec<usize>,
}

fn encode(t: &[usize], base: usize) -> usize {
    t.iter().fold(0, |acc, &x| acc * base + x)
}

fn all_tuples(len: usize, base: usize) -> Vec<Vec<usize>> {
    let count = base.pow(len as u32);
    (0..count)
        .map(|mut p| {
            let mut t = vec![0; len];
            for k in (0..len).rev() {
                t[k] = p % base;
                p /= base;
            }
            t
        })
        .collect()
}

impl ExpansionContext {
    /// Builds the context. B is the materialized basis of `base`; M is all
    /// total maps β→α in lexicographic order.
    pub fn new(base: &CylSpace, alpha: usize) -> Result<Self> {
        let beta = base.dim();
        if alpha < beta {
            return Err(CylError::DimensionMismatch(format!("alpha {alpha} is below the base dimension {beta}")));
        }
        let sets = base.basis_sets(MAX_BASIS_BLOCKS).ok_or_else(|| CylError::Resource {
            what: "basis of the base space".into(),
            size: base.blocks().block_count(),
            limit: MAX_BASIS_BLOCKS,
        })?;
        let maps = all_tuples(beta, alpha);
        if maps.len() * sets.len() > PAIR_LIMIT {
            return Err(CylError::Resource { what: "pairs M×B".into(), size: maps.len() * sets.len(), limit: PAIR_LIMIT });
        }
        let index: HashMap<PointSet, usize> = sets.iter().cloned().enumerate().map(|(k, s)| (s, k)).collect();
        let find = |s: &PointSet| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| CylError::Invalid(format!("basis is not closed: {} missing", base.show_set(s))))
        };
        let complement = sets.iter().map(|s| find(&s.complement())).collect::<Result<Vec<_>>>()?;
        let delta: Vec<Vec<usize>> = sets.iter().map(|s| base.dimension_set(s)).collect();
        let self_maps = all_tuples(beta, beta);
        let mut perm = Vec::new();
        let mut unchecked = Vec::new();
        for (r, t) in self_maps.iter().enumerate() {
            let rho = VarMap::total(beta, t)?;
            let mut row = Vec::new();
            for s in &sets {
                match base.permute_set(s, &rho) {
                    Ok(p) => row.push(Some(find(&p)?)),
                    Err(CylError::FreshIndexExhaustion { .. }) => row.push(None),
                    Err(e) => return Err(e),
                }
            }
            if row.iter().any(|x| x.is_none()) {
                unchecked.push(r);
            }
            perm.push(row);
        }
        let mut perm_pre = vec![Vec::new(); sets.len()];
        for (r, row) in perm.iter().enumerate() {
            for (v, w) in row.iter().enumerate() {
                if let Some(w) = w {
                    perm_pre[*w].push((r, v));
                }
            }
        }
        let compose = maps
            .iter()
            .map(|mu| self_maps.iter().map(|rp| encode(&rp.iter().map(|&i| mu[i]).collect::<Vec<_>>(), alpha)).collect())
            .collect();
        let blocks: Vec<PointSet> = (0..base.blocks().block_count()).map(|b| base.blocks().block_set(b)).collect();
        let inside = blocks.iter().map(|b| sets.iter().map(|s| b.is_subset(s)).collect()).collect();
        let transport = match base.ambient() {
            None => None,
            Some(amb) => {
                let (w, proj) = amb.extend(alpha + beta)?;
                let mut table = Vec::new();
                for mu in &maps {
                    let pairs: Vec<(usize, usize)> = mu.iter().copied().enumerate().collect();
                    let rho = VarMap::from_pairs(alpha + beta, &pairs)?;
                    let per_block: Vec<PointSet> = blocks
                        .iter()
                        .map(|b| {
                            let lifted = PointSet::from_points(proj.len(), (0..proj.len()).filter(|&p| b.contains(proj[p])));
                            w.permute_set(&lifted, &rho)
                        })
                        .collect::<Result<_>>()?;
                    let row = sets
                        .iter()
                        .map(|s| {
                            let mut acc = PointSet::empty(proj.len());
                            for (c, b) in blocks.iter().enumerate() {
                                if b.is_subset(s) {
                                    acc.union_with(&per_block[c]);
                                }
                            }
                            acc
                        })
                        .collect();
                    table.push(row);
                }
                Some(table)
            }
        };
        Ok(ExpansionContext {
            base: base.clone(),
            alpha,
            beta,
            maps,
            sets,
            complement,
            delta,
            self_maps,
            perm,
            perm_pre,
            compose,
            blocks,
            inside,
            transport,
            unchecked,
        })
    }

    pub fn base(&self) -> &CylSpace {
        &self.base
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn beta(&self) -> usize {
        self.beta
    }

    /// M, as target tuples.
    pub fn maps(&self) -> &[Vec<usize>] {
        &self.maps
    }

    /// B, the materialized base basis.
    pub fn sets(&self) -> &[PointSet] {
        &self.sets
    }

    pub fn map_index(&self, targets: &[usize]) -> Option<usize> {
        (targets.len() == self.beta && targets.iter().all(|&t| t < self.alpha)).then(|| encode(targets, self.alpha))
    }

    pub fn set_index(&self, u: &PointSet) -> Option<usize> {
        self.sets.iter().position(|s| s == u)
    }

    /// Index of the inclusion β→α.
    pub fn inclusion(&self) -> usize {
        encode(&(0..self.beta).collect::<Vec<_>>(), self.alpha)
    }

    pub fn has_joint_clause(&self) -> bool {
        self.transport.is_some()
    }

    fn agree_on(&self, mu: usize, sigma: usize, u: usize) -> bool {
        self.delta[u].iter().all(|&i| self.maps[mu][i] == self.maps[sigma][i])
    }

    fn show_pair(&self, mu: usize, u: usize) -> String {
        format!("({:?}, {})", self.maps[mu], self.base.show_set(&self.sets[u]))
    }

    /// The atom whose fibers are principal at the given blocks.
    pub fn atom_from_blocks(&self, choice: &[usize]) -> Atom {
        let fibers = choice
            .iter()
            .map(|&c| PointSet::from_points(self.sets.len(), (0..self.sets.len()).filter(|&u| self.inside[c][u])))
            .collect();
        Atom { fibers }
    }

    /// All pairs linked to `(mu, u)` by clause 4.
    fn orbit(&self, mu: usize, u: usize) -> Vec<(usize, usize)> {
        let mut seen = vec![PointSet::empty(self.sets.len()); self.maps.len()];
        let mut queue = VecDeque::from([(mu, u)]);
        seen[mu].insert(u);
        let mut out = Vec::new();
        while let Some((t, v)) = queue.pop_front() {
            out.push((t, v));
            let mut next = Vec::new();
            for (r, row) in self.perm.iter().enumerate() {
                if let Some(w) = row[v] {
                    for m in 0..self.maps.len() {
                        if self.compose[m][r] == t {
                            next.push((m, w));
                        }
                    }
                }
            }
            for &(r, v2) in &self.perm_pre[v] {
                next.push((self.compose[t][r], v2));
            }
            for s in 0..self.maps.len() {
                if self.agree_on(t, s, v) {
                    next.push((s, v));
                }
            }
            for (m, w) in next {
                if !seen[m].contains(w) {
                    seen[m].insert(w);
                    queue.push_back((m, w));
                }
            }
        }
        out
    }
}

/// A subset of M×B, stored as one fiber (a set of basis indices) per map.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub fibers: Vec<PointSet>,
}

impl Atom {
    pub fn empty(ctx: &ExpansionContext) -> Self {
        Atom { fibers: vec![PointSet::empty(ctx.sets.len()); ctx.maps.len()] }
    }

    pub fn contains(&self, mu: usize, u: usize) -> bool {
        self.fibers[mu].contains(u)
    }

    pub fn insert(&mut self, mu: usize, u: usize) {
        self.fibers[mu].insert(u);
    }

    pub fn remove(&mut self, mu: usize, u: usize) {
        self.fibers[mu].remove(u);
    }

    /// Sorted (map index, basis index) pairs.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.fibers.iter().enumerate().flat_map(|(m, f)| f.iter().map(move |u| (m, u))).collect()
    }
}

/// Per-clause verdicts for a candidate pair set.
pub fn is_atom(ctx: &ExpansionContext, x: &Atom) -> Report {
    let mut report = Report::new();
    let nb = ctx.sets.len();
    let mut c1 = Tally::new("atom clause 1 (exactly one of (ρ,u), (ρ,−u))");
    let mut c2 = Tally::new("atom clause 2 (upward closed)");
    let mut c3 = Tally::new("atom clause 3 (intersection closed)");
    for mu in 0..ctx.maps.len() {
        for u in 0..nb {
            c1.check(x.contains(mu, u) != x.contains(mu, ctx.complement[u]), || ctx.show_pair(mu, u));
            if !x.contains(mu, u) {
                continue;
            }
            for v in 0..nb {
                if ctx.sets[u].is_subset(&ctx.sets[v]) {
                    c2.check(x.contains(mu, v), || format!("{} in x, {} missing", ctx.show_pair(mu, u), ctx.show_pair(mu, v)));
                }
                if x.contains(mu, v) && ctx.sets[u].meets(&ctx.sets[v]) {
                    let w = ctx.set_index(&ctx.sets[u].intersection(&ctx.sets[v])).unwrap();
                    c3.check(x.contains(mu, w), || format!("{} and {}", ctx.show_pair(mu, u), ctx.show_pair(mu, v)));
                }
            }
        }
    }
    report.push(c1.finish());
    report.push(c2.finish());
    report.push(c3.finish());

    let mut c4 = Tally::new("atom clause 4 (substitution coherence)");
    for mu in 0..ctx.maps.len() {
        for (r, row) in ctx.perm.iter().enumerate() {
            for (v, w) in row.iter().enumerate() {
                match w {
                    Some(w) => {
                        let t = ctx.compose[mu][r];
                        c4.check(x.contains(t, v) == x.contains(mu, *w), || {
                            format!("{} vs {} (ρ'={:?})", ctx.show_pair(t, v), ctx.show_pair(mu, *w), ctx.self_maps[r])
                        });
                    }
                    None => c4.not_applicable(),
                }
            }
        }
        for sigma in mu + 1..ctx.maps.len() {
            for u in 0..nb {
                if ctx.agree_on(mu, sigma, u) {
                    c4.check(x.contains(mu, u) == x.contains(sigma, u), || {
                        format!("{} vs {}", ctx.show_pair(mu, u), ctx.show_pair(sigma, u))
                    });
                }
            }
        }
    }
    let mut c4 = c4.finish();
    if !ctx.unchecked.is_empty() {
        let names: Vec<String> = ctx.unchecked.iter().map(|&r| format!("{:?}", ctx.self_maps[r])).collect();
        c4.reason = Some(format!("ρ' {} not computable without spare indices", names.join(", ")));
    }
    report.push(c4);

    match &ctx.transport {
        None => report.push(LawResult::skipped(
            "atom joint consistency",
            "base has no ambient; only clauses 1-4 apply",
        )),
        Some(t) => {
            let mut meet = None::<PointSet>;
            for (mu, u) in x.pairs() {
                let s = &t[mu][u];
                meet = Some(match meet {
                    None => s.clone(),
                    Some(m) => m.intersection(s),
                });
            }
            let ok = meet.map_or(true, |m| !m.is_empty());
            report.push(LawResult::verdict("atom joint consistency", ok, "transports have empty intersection"));
        }
    }
    report
}

/// Running state of the greedy completion.
struct Partial<'a> {
    ctx: &'a ExpansionContext,
    x: Atom,
    meet: Vec<PointSet>,
    joint: Option<PointSet>,
}

impl<'a> Partial<'a> {
    fn new(ctx: &'a ExpansionContext) -> Self {
        Partial {
            ctx,
            x: Atom::empty(ctx),
            meet: vec![ctx.base.full(); ctx.maps.len()],
            joint: ctx.transport.as_ref().map(|t| PointSet::full(t[0][0].universe())),
        }
    }

    /// Adds the clause-4 orbit of a pair if the inductive condition survives.
    fn try_add(&mut self, mu: usize, u: usize) -> bool {
        let orbit = self.ctx.orbit(mu, u);
        let mut meet = self.meet.clone();
        let mut joint = self.joint.clone();
        for &(m, v) in &orbit {
            meet[m].intersect_with(&self.ctx.sets[v]);
            if meet[m].is_empty() {
                return false;
            }
            if let (Some(j), Some(t)) = (joint.as_mut(), &self.ctx.transport) {
                j.intersect_with(&t[m][v]);
                if j.is_empty() {
                    return false;
                }
            }
        }
        for (m, v) in orbit {
            self.x.insert(m, v);
        }
        self.meet = meet;
        self.joint = joint;
        true
    }
}

/// Completes a seed to an atom: the seed's clause-4 orbit first, then every
/// pair in lexicographic (map, basis index) order, adding the orbit of the
/// pair or of its complement, whichever keeps the inductive condition.
pub fn extend_to_atom(ctx: &ExpansionContext, seed: (usize, usize)) -> Result<Atom> {
    let (mu, u) = seed;
    if mu >= ctx.maps.len() || u >= ctx.sets.len() {
        return Err(CylError::Invalid(format!("seed ({mu}, {u}) outside M×B")));
    }
    if ctx.sets[u].is_empty() {
        return Err(CylError::SeedEmpty);
    }
    let mut state = Partial::new(ctx);
    if !state.try_add(mu, u) {
        return Err(CylError::ClauseConflict(format!(
            "the clause-4 orbit of seed {} has an empty fiber or transport",
            ctx.show_pair(mu, u)
        )));
    }
    for m in 0..ctx.maps.len() {
        for v in 0..ctx.sets.len() {
            if state.x.contains(m, v) || state.x.contains(m, ctx.complement[v]) {
                continue;
            }
            if !state.try_add(m, v) && !state.try_add(m, ctx.complement[v]) {
                return Err(CylError::ClauseConflict(format!("neither {} nor its complement fits", ctx.show_pair(m, v))));
            }
        }
    }
    let report = is_atom(ctx, &state.x);
    if !report.passed() {
        return Err(CylError::ClauseConflict(report.to_text()));
    }
    Ok(state.x)
}

/// All atoms, as block choices per map, by branch-and-prune in map order.
pub fn enumerate_atom_blocks(ctx: &ExpansionContext) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut choice = Vec::new();
    let joint = ctx.transport.as_ref().map(|t| PointSet::full(t[0][0].universe()));
    branch(ctx, &mut choice, joint, &mut out);
    out
}

fn consistent(ctx: &ExpansionContext, choice: &[usize], mu: usize, c: usize) -> bool {
    let block_at = |m: usize| if m == mu { Some(c) } else { choice.get(m).copied() };
    let nb = ctx.sets.len();
    for (r, row) in ctx.perm.iter().enumerate() {
        // (μ∘ρ', v) ⇔ (μ, ρ'v) with μ the new map.
        if let Some(ct) = block_at(ctx.compose[mu][r]) {
            for v in 0..nb {
                if let Some(w) = row[v] {
                    if ctx.inside[ct][v] != ctx.inside[c][w] {
                        return false;
                    }
                }
            }
        }
        // (τ∘ρ', v) ⇔ (τ, ρ'v) with τ∘ρ' the new map.
        for (t, &ct) in choice.iter().enumerate() {
            if ctx.compose[t][r] != mu {
                continue;
            }
            for v in 0..nb {
                if let Some(w) = row[v] {
                    if ctx.inside[c][v] != ctx.inside[ct][w] {
                        return false;
                    }
                }
            }
        }
    }
    for (s, &cs) in choice.iter().enumerate() {
        for u in 0..nb {
            if ctx.agree_on(mu, s, u) && ctx.inside[c][u] != ctx.inside[cs][u] {
                return false;
            }
        }
    }
    true
}

fn branch(ctx: &ExpansionContext, choice: &mut Vec<usize>, joint: Option<PointSet>, out: &mut Vec<Vec<usize>>) {
    let mu = choice.len();
    if mu == ctx.maps.len() {
        out.push(choice.clone());
        return;
    }
    for c in 0..ctx.blocks.len() {
        if !consistent(ctx, choice, mu, c) {
            continue;
        }
        let next = match (&joint, &ctx.transport) {
            (Some(j), Some(t)) => {
                let k = ctx.sets.iter().position(|s| *s == ctx.blocks[c]).unwrap();
                let n = j.intersection(&t[mu][k]);
                if n.is_empty() {
                    continue;
                }
                Some(n)
            }
            _ => None,
        };
        choice.push(c);
        branch(ctx, choice, next, out);
        choice.pop();
    }
}

/// All atoms in enumeration order.
pub fn enumerate_atoms(ctx: &ExpansionContext) -> Vec<Atom> {
    enumerate_atom_blocks(ctx).iter().map(|c| ctx.atom_from_blocks(c)).collect()
}

/// Well-ordering of the atom set used as the point order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExpansionOrder {
    Lexicographic,
    Reversed,
    Seeded(u64),
}

/// An expansion space with its atoms in point order.
#[derive(Clone)]
pub struct Expansion {
    pub space: CylSpace,
    pub atoms: Vec<Atom>,
    pub order: ExpansionOrder,
}

struct ExpansionAmbient {
    base: CylSpace,
    alpha: usize,
    index: HashMap<Atom, usize>,
}

impl Ambient for ExpansionAmbient {
    fn extend(&self, dim: usize) -> Result<(CylSpace, Vec<usize>)> {
        let ctx = ExpansionContext::new(&self.base, dim)?;
        let atoms = enumerate_atoms(&ctx);
        let space = assemble(&ctx, &atoms)?;
        let small = all_tuples(ctx.beta, self.alpha);
        let proj = atoms
            .iter()
            .map(|a| {
                let fibers = small.iter().map(|t| a.fibers[encode(t, dim)].clone()).collect();
                self.index.get(&Atom { fibers }).copied().ok_or_else(|| {
                    CylError::Invalid("restricted atom is not an atom of the smaller expansion".into())
                })
            })
            .collect::<Result<_>>()?;
        Ok((space, proj))
    }

    fn describe(&self) -> String {
        format!("{}-expansion", self.alpha)
    }
}

fn assemble(ctx: &ExpansionContext, atoms: &[Atom]) -> Result<CylSpace> {
    let n = atoms.len();
    if n == 0 {
        return Err(CylError::Invalid("no atoms".into()));
    }
    if ctx.alpha >= 2 && ctx.beta < 2 {
        return Err(CylError::DimensionMismatch("diagonals of the expansion need a base of dimension ≥ 2".into()));
    }
    let nb = ctx.sets.len();
    let x_sets: Vec<Vec<PointSet>> = (0..ctx.maps.len())
        .map(|mu| (0..nb).map(|u| PointSet::from_points(n, (0..n).filter(|&k| atoms[k].contains(mu, u)))).collect())
        .collect();
    let eq = (0..ctx.alpha)
        .map(|i| {
            let masks: Vec<PointSet> = ctx
                .maps
                .iter()
                .map(|mu| PointSet::from_points(nb, (0..nb).filter(|&u| ctx.delta[u].iter().all(|&d| mu[d] != i))))
                .collect();
            Partition::from_keys(atoms.iter().map(|a| {
                a.fibers.iter().zip(&masks).map(|(f, m)| f.intersection(m)).collect::<Vec<_>>()
            }))
        })
        .collect();
    let d01 = if ctx.beta >= 2 {
        Some(ctx.set_index(ctx.base.diag(0, 1)).ok_or_else(|| CylError::Invalid("D_01 is not a basis set".into()))?)
    } else {
        None
    };
    let diag = |i: usize, j: usize| {
        if i == j {
            return PointSet::full(n);
        }
        let mut t: Vec<usize> = vec![0; ctx.beta];
        t[0] = i;
        t[1] = j;
        x_sets[encode(&t, ctx.alpha)][d01.unwrap()].clone()
    };
    let generators: Vec<PointSet> = x_sets.iter().flatten().cloned().collect();
    let space = CylSpace::new(n, ctx.alpha, eq, diag, Basis::generated(n, &generators))?;
    Ok(space.with_labels((0..n).map(|k| format!("x{k}")).collect()))
}

/// Builds C^α over all atoms, in the requested order.
pub fn build_expansion(ctx: &ExpansionContext, order: ExpansionOrder) -> Result<Expansion> {
    let mut atoms = enumerate_atoms(ctx);
    match order {
        ExpansionOrder::Lexicographic => {}
        ExpansionOrder::Reversed => atoms.reverse(),
        ExpansionOrder::Seeded(seed) => atoms.shuffle(&mut ChaCha8Rng::seed_from_u64(seed)),
    }
    let mut space = assemble(ctx, &atoms)?;
    if ctx.base.ambient().is_some() {
        let index = atoms.iter().cloned().enumerate().map(|(k, a)| (a, k)).collect();
        space = space.with_ambient(Arc::new(ExpansionAmbient { base: ctx.base.clone(), alpha: ctx.alpha, index }));
    }
    Ok(Expansion { space, atoms, order })
}

/// Atom clauses for every point, witness extension, the saturation law and T2.
pub fn verify_expansion(ctx: &ExpansionContext, e: &Expansion) -> Report {
    let mut report = Report::new();
    let mut merged: Vec<(String, Tally)> = Vec::new();
    let mut skipped = Vec::new();
    for (k, a) in e.atoms.iter().enumerate() {
        for r in is_atom(ctx, a).results {
            if r.status == crate::laws::Status::Skipped {
                if k == 0 {
                    skipped.push(r);
                }
                continue;
            }
            let pos = match merged.iter().position(|(n, _)| *n == r.law) {
                Some(p) => p,
                None => {
                    merged.push((r.law.clone(), Tally::new(&r.law)));
                    merged.len() - 1
                }
            };
            let w = r.witness.clone().unwrap_or_default();
            merged[pos].1.check(r.status == crate::laws::Status::Pass, || format!("x{k}: {w}"));
        }
    }
    for (_, t) in merged {
        report.push(t.finish());
    }
    for r in skipped {
        report.push(r);
    }

    let n = e.atoms.len();
    let nb = ctx.sets.len();
    let xs = |mu: usize, u: usize| PointSet::from_points(n, (0..n).filter(|&k| e.atoms[k].contains(mu, u)));
    let s = &e.space;
    let mut sat = Tally::new("expansion saturation law");
    for mu in 0..ctx.maps.len() {
        for u in 0..nb {
            let x = xs(mu, u);
            for i in 0..ctx.alpha {
                let pre: Vec<usize> = (0..ctx.beta).filter(|&k| ctx.maps[mu][k] == i).collect();
                let expect = match pre.as_slice() {
                    [] => x.clone(),
                    [ip] => {
                        let su = ctx.base.saturate(&ctx.sets[u], *ip).expect("index in range");
                        xs(mu, ctx.set_index(&su).expect("basis closed under saturation"))
                    }
                    _ => {
                        sat.not_applicable();
                        continue;
                    }
                };
                let got = s.saturate(&x, i).expect("index in range");
                sat.check(got == expect, || format!("[X{}]_{i}", ctx.show_pair(mu, u)));
            }
        }
    }
    report.push(sat.finish());

    let mut el = Tally::new("expansion witness extension (X_(ρ,u) meets X_(μ,[v]_i) ⇒ meets X_(μ,v))");
    for rho in 0..ctx.maps.len() {
        for u in 0..nb {
            let xu = xs(rho, u);
            let used: Vec<usize> = ctx.delta[u].iter().map(|&d| ctx.maps[rho][d]).collect();
            for mu in 0..ctx.maps.len() {
                for v in 0..nb {
                    for i in 0..ctx.beta {
                        if used.contains(&ctx.maps[mu][i]) {
                            continue;
                        }
                        let target = ctx.maps[mu][i];
                        if ctx.delta[v].iter().any(|&k| k != i && ctx.maps[mu][k] == target) {
                            el.not_applicable();
                            continue;
                        }
                        let sv = ctx.set_index(&ctx.base.saturate(&ctx.sets[v], i).expect("index in range")).unwrap();
                        if xu.meets(&xs(mu, sv)) {
                            el.check(xu.meets(&xs(mu, v)), || {
                                format!("{}, {}, i={i}", ctx.show_pair(rho, u), ctx.show_pair(mu, v))
                            });
                        }
                    }
                }
            }
        }
    }
    report.push(el.finish());
    report.push(LawResult::verdict("expansion T2", s.is_t2(), "two atoms share a basis block"));
    report
}

/// The map x ↦ ⋂{u : (1,u) ∈ x} onto the base. Needs a T2 base.
pub fn expansion_map(ctx: &ExpansionContext, e: &Expansion) -> Result<Vec<usize>> {
    if !ctx.base.is_t2() {
        return Err(CylError::NotT2("base basis blocks are not singletons".into()));
    }
    let incl = ctx.inclusion();
    e.atoms
        .iter()
        .map(|a| {
            let mut meet = ctx.base.full();
            for u in a.fibers[incl].iter() {
                meet.intersect_with(&ctx.sets[u]);
            }
            match meet.count() {
                1 => Ok(meet.first().unwrap()),
                k => Err(CylError::NotT2(format!("⋂ of the inclusion fiber has {k} points"))),
            }
        })
        .collect()
}

/// For α = β, the map a ↦ the atom whose identity fiber is the ultrafilter of a.
pub fn base_injection(ctx: &ExpansionContext, e: &Expansion) -> Result<Vec<usize>> {
    if ctx.alpha != ctx.beta {
        return Err(CylError::DimensionMismatch(format!("alpha {} differs from beta {}", ctx.alpha, ctx.beta)));
    }
    let incl = ctx.inclusion();
    (0..ctx.base.point_count())
        .map(|p| {
            let c = ctx.base.blocks().block_of(p);
            let hits: Vec<usize> = (0..e.atoms.len())
                .filter(|&k| e.atoms[k].fibers[incl].iter().all(|u| ctx.inside[c][u]))
                .collect();
            match hits.as_slice() {
                [k] => Ok(*k),
                _ => Err(CylError::Invalid(format!("{} atoms contain the neighborhoods of point {p}", hits.len()))),
            }
        })
        .collect()
}

/// Block of the inclusion fiber of each atom.
fn inclusion_blocks(ctx: &ExpansionContext, e: &Expansion) -> Vec<usize> {
    let incl = ctx.inclusion();
    e.atoms
        .iter()
        .map(|a| {
            (0..ctx.blocks.len())
                .find(|&c| a.fibers[incl].iter().all(|u| ctx.inside[c][u]))
                .unwrap_or(usize::MAX)
        })
        .collect()
}

/// Searches bijections g : E1 → E2 that are S-homeomorphisms and commute
/// with the maps onto the base (compared through the inclusion fiber).
pub fn verify_expansion_uniqueness(ctx: &ExpansionContext, e1: &Expansion, e2: &Expansion) -> Report {
    const LAW: &str = "expansion uniqueness (S-homeomorphism g with f∘g = f')";
    let mut report = Report::new();
    let n = e1.atoms.len();
    if n != e2.atoms.len() {
        report.push(LawResult::verdict(LAW, false, format!("{n} vs {} atoms", e2.atoms.len())));
        return report;
    }
    if n > 8 {
        report.push(LawResult::skipped(LAW, format!("{n} atoms exceed the bijection search limit 8")));
        return report;
    }
    let (b1, b2) = (inclusion_blocks(ctx, e1), inclusion_blocks(ctx, e2));
    let mut found = Vec::new();
    let mut g = Vec::new();
    let mut used = vec![false; n];
    search(e1, e2, &b1, &b2, &mut g, &mut used, &mut found);
    let mut r = LawResult::verdict(LAW, !found.is_empty(), "no bijection qualifies");
    if let Some(first) = found.first() {
        r.witness = Some(format!("g={first:?}; {} such bijections", found.len()));
    }
    report.push(r);
    report
}

fn search(
    e1: &Expansion,
    e2: &Expansion,
    b1: &[usize],
    b2: &[usize],
    g: &mut Vec<usize>,
    used: &mut [bool],
    found: &mut Vec<Vec<usize>>,
) {
    let k = g.len();
    if k == b1.len() {
        if let Ok(m) = classify_mapping(&e1.space, &e2.space, g) {
            if m.homeomorphism && m.s_mapping {
                found.push(g.clone());
            }
        }
        return;
    }
    for t in 0..b2.len() {
        if used[t] || b1[k] != b2[t] {
            continue;
        }
        used[t] = true;
        g.push(t);
        search(e1, e2, b1, b2, g, used, found);
        g.pop();
        used[t] = false;
    }
}
