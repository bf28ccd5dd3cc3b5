//! Structured law reports, the cylindric-space axiom checker and the
//! substitution law suite.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bitset::PointSet;
use crate::space::{BasisKind, CylSpace, VarMap};

/// Outcome of one law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// One report line: a law, its status and the first counterexample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LawResult {
    pub law: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// Instances checked.
    pub checked: u64,
    /// Instances excluded by the law's side condition.
    pub not_applicable: u64,
}

impl LawResult {
    pub fn skipped(law: &str, reason: impl Into<String>) -> Self {
        LawResult {
            law: law.to_string(),
            status: Status::Skipped,
            witness: None,
            reason: Some(reason.into()),
            checked: 0,
            not_applicable: 0,
        }
    }

    pub fn verdict(law: &str, ok: bool, witness: impl Into<String>) -> Self {
        let mut t = Tally::new(law);
        t.check(ok, || witness.into());
        t.finish()
    }
}

/// A list of law results.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    pub results: Vec<LawResult>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, r: LawResult) {
        self.results.push(r);
    }

    pub fn extend(&mut self, other: Report) {
        self.results.extend(other.results);
    }

    /// No law failed (skipped laws do not count as failures).
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.status != Status::Fail)
    }

    pub fn failures(&self) -> Vec<&LawResult> {
        self.results.iter().filter(|r| r.status == Status::Fail).collect()
    }

    pub fn get(&self, law: &str) -> Option<&LawResult> {
        self.results.iter().find(|r| r.law == law)
    }

    /// Plain-text rendering, one line per law.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            let tag = match r.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
            };
            out.push_str(&format!("{tag} {} (checked {}", r.law, r.checked));
            if r.not_applicable > 0 {
                out.push_str(&format!(", not applicable {}", r.not_applicable));
            }
            out.push(')');
            if let Some(w) = &r.witness {
                out.push_str(&format!(" witness: {w}"));
            }
            if let Some(why) = &r.reason {
                out.push_str(&format!(" reason: {why}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Accumulates checks for one law, keeping the first failure.
pub struct Tally {
    law: String,
    checked: u64,
    na: u64,
    witness: Option<String>,
}

impl Tally {
    pub fn new(law: &str) -> Self {
        Tally { law: law.to_string(), checked: 0, na: 0, witness: None }
    }

    pub fn check(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok && self.witness.is_none() {
            self.witness = Some(witness());
        }
    }

    pub fn not_applicable(&mut self) {
        self.na += 1;
    }

    pub fn failed(&self) -> bool {
        self.witness.is_some()
    }

    pub fn finish(self) -> LawResult {
        LawResult {
            law: self.law,
            status: if self.witness.is_some() { Status::Fail } else { Status::Pass },
            witness: self.witness,
            reason: None,
            checked: self.checked,
            not_applicable: self.na,
        }
    }
}

/// Checks the cylindric-space axioms: commutativity of the ~i, closure of
/// the basis, every diagonal-family clause, and closedness of [a]_i.
pub fn check_space_axioms(s: &CylSpace) -> Report {
    let n = s.dim();
    let pts = s.point_count();
    let mut report = Report::new();

    let mut t = Tally::new("commutativity");
    for a in 0..pts {
        let single = s.singleton(a);
        for i in 0..n {
            let si = s.sat(&single, i);
            for j in i + 1..n {
                let ij = s.sat(&si, j);
                let ji = s.sat(&s.sat(&single, j), i);
                t.check(ij == ji, || format!("a={}, i={i}, j={j}", s.label(a)));
            }
        }
    }
    report.push(t.finish());

    let mut t = Tally::new("basis-closure");
    match s.basis().list() {
        Some(list) if *s.basis().kind() == BasisKind::Explicit => {
            let member = |u: &PointSet| s.is_basis_set(u);
            t.check(member(&s.empty()), || "∅ missing".into());
            t.check(member(&s.full()), || "full set missing".into());
            for u in list {
                t.check(member(&u.complement()), || format!("complement of {}", s.show_set(u)));
                for i in 0..n {
                    t.check(member(&s.sat(u, i)), || format!("[{}]_{i}", s.show_set(u)));
                }
            }
            for (x, u) in list.iter().enumerate() {
                for v in &list[x + 1..] {
                    t.check(member(&u.union(v)), || format!("{} ∪ {}", s.show_set(u), s.show_set(v)));
                    t.check(member(&u.intersection(v)), || {
                        format!("{} ∩ {}", s.show_set(u), s.show_set(v))
                    });
                }
            }
        }
        _ => {
            for b in 0..s.blocks().block_count() {
                let block = s.blocks().block_set(b);
                for i in 0..n {
                    t.check(s.is_open(&s.sat(&block, i)), || format!("[{}]_{i}", s.show_set(&block)));
                }
            }
        }
    }
    report.push(t.finish());

    let mut t = Tally::new("diagonal-reflexive");
    for i in 0..n {
        t.check(s.diag(i, i).is_full(), || format!("D_{i}{i} ≠ S"));
    }
    report.push(t.finish());

    let mut t = Tally::new("diagonal-symmetric");
    for i in 0..n {
        for j in i + 1..n {
            t.check(s.diag(i, j) == s.diag(j, i), || format!("D_{i}{j} ≠ D_{j}{i}"));
        }
    }
    report.push(t.finish());

    let mut t = Tally::new("diagonal-cylinder");
    for i in 0..n {
        for j in i + 1..n {
            for k in (0..n).filter(|k| *k != i && *k != j) {
                let d = s.diag(i, j);
                t.check(s.sat(d, k) == *d, || format!("D_{i}{j} not ~{k}-saturated"));
            }
        }
    }
    report.push(t.finish());

    let mut t = Tally::new("diagonal-uniqueness");
    for a in 0..pts {
        let single = s.singleton(a);
        let sats: Vec<PointSet> = (0..n).map(|i| s.sat(&single, i)).collect();
        for i in 0..n {
            for j in (0..n).filter(|j| *j != i) {
                let c = sats[i].intersection(s.diag(i, j)).count();
                t.check(c == 1, || format!("a={}, ‖[a]_{i} ∩ D_{i}{j}‖ = {c}", s.label(a)));
            }
        }
    }
    report.push(t.finish());

    let mut t = Tally::new("diagonal-transitive");
    let mut tc = Tally::new("diagonal-composition");
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let meet = s.diag(i, j).intersection(s.diag(j, k));
                t.check(meet.is_subset(s.diag(i, k)), || format!("D_{i}{j} ∩ D_{j}{k} ⊄ D_{i}{k}"));
                if j != i && j != k {
                    tc.check(s.sat(&meet, j) == *s.diag(i, k), || {
                        format!("D_{i}{k} ≠ [D_{i}{j} ∩ D_{j}{k}]_{j}")
                    });
                } else {
                    tc.not_applicable();
                }
            }
        }
    }
    report.push(t.finish());
    report.push(tc.finish());

    let mut t = Tally::new("diagonal-clopen");
    for i in 0..n {
        for j in i + 1..n {
            t.check(s.is_basis_set(s.diag(i, j)), || format!("D_{i}{j} is not a basis set"));
        }
    }
    report.push(t.finish());

    if s.is_t2() {
        let mut t = Tally::new("saturation-closed");
        for a in 0..pts {
            for i in 0..n {
                let sat = s.sat(&s.singleton(a), i);
                t.check(s.closure(&sat) == sat, || format!("[{}]_{i} is not closed", s.label(a)));
            }
        }
        report.push(t.finish());
    } else {
        report.push(LawResult::skipped("saturation-closed", "the law assumes a T2 space"));
    }
    report
}

/// Options for the substitution law suite.
#[derive(Debug, Clone)]
pub struct SubstOptions {
    /// Enumerate every basis set when there are at most 2^max_blocks of them.
    pub max_blocks: usize,
    /// Number of sampled sets otherwise.
    pub sampled_sets: usize,
    /// Enumerate all pairs for the intersection clause up to this many sets.
    pub max_pair_sets: usize,
    /// Samples for the fresh-index independence law.
    pub schedule_samples: usize,
    pub seed: u64,
}

impl Default for SubstOptions {
    fn default() -> Self {
        SubstOptions { max_blocks: 10, sampled_sets: 256, max_pair_sets: 256, schedule_samples: 50, seed: 0 }
    }
}

/// Basis sets to quantify over: all of them when few, else a seeded sample
/// of block unions (always including ∅, the full set and the diagonals).
pub(crate) fn law_sets(s: &CylSpace, max_blocks: usize, samples: usize, rng: &mut ChaCha8Rng) -> (Vec<PointSet>, bool) {
    if let Some(all) = s.basis_sets(max_blocks) {
        return (all, true);
    }
    let blocks: Vec<PointSet> = (0..s.blocks().block_count()).map(|b| s.blocks().block_set(b)).collect();
    let mut sets = vec![s.empty(), s.full()];
    for i in 0..s.dim() {
        for j in i + 1..s.dim() {
            sets.push(s.diag(i, j).clone());
        }
    }
    for _ in 0..samples {
        let mut u = s.empty();
        for b in &blocks {
            if rng.gen_bool(0.5) {
                u.union_with(b);
            }
        }
        sets.push(u);
    }
    sets.sort();
    sets.dedup();
    (sets, false)
}

/// The substitution laws, quantified over basis sets and all index tuples
/// satisfying each law's side condition.
pub fn verify_substitution_laws(s: &CylSpace, opts: &SubstOptions) -> Report {
    let n = s.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (sets, exhaustive) = law_sets(s, opts.max_blocks, opts.sampled_sets, &mut rng);
    let deltas: Vec<Vec<usize>> = sets.iter().map(|u| s.dimension_set(u)).collect();
    let sub = |u: &PointSet, i: usize, j: usize| s.subst(u, i, j).expect("indices below dim");
    let show = |u: &PointSet| s.show_set(u);
    let mut report = Report::new();

    let mut t1 = Tally::new("subst-1 (j∉Δ(u) ⇒ u(i/j)=u)");
    let mut t2c = Tally::new("subst-2 complement");
    let mut t2i = Tally::new("subst-2 intersection");
    let mut t3 = Tally::new("subst-3 commutation");
    let mut t4 = Tally::new("subst-4 chaining");
    let mut t5d = Tally::new("subst-5 diagonal");
    let mut t5r = Tally::new("subst-5 round trip");
    let mut tm = Tally::new("subst monotone");
    let pair_sets: Vec<usize> = if sets.len() <= opts.max_pair_sets {
        (0..sets.len()).collect()
    } else {
        let mut idx: Vec<usize> = (0..sets.len()).collect();
        idx.shuffle(&mut rng);
        idx.truncate(opts.max_pair_sets);
        idx.sort();
        idx
    };
    let subs: Vec<Vec<PointSet>> =
        sets.iter().map(|u| (0..n * n).map(|ij| sub(u, ij / n, ij % n)).collect()).collect();
    for (x, u) in sets.iter().enumerate() {
        let delta = &deltas[x];
        for i in 0..n {
            for j in 0..n {
                let uij = subs[x][i * n + j].clone();
                if !delta.contains(&j) {
                    t1.check(uij == *u, || format!("u={}, i={i}, j={j}", show(u)));
                } else {
                    t1.not_applicable();
                }
                if i != j {
                    t2c.check(sub(&u.complement(), i, j) == uij.complement(), || {
                        format!("u={}, i={i}, j={j}", show(u))
                    });
                    if pair_sets.binary_search(&x).is_ok() {
                        for &y in &pair_sets {
                            let v = &sets[y];
                            let vij = &subs[y][i * n + j];
                            let lhs = sub(&u.intersection(v), i, j);
                            t2i.check(lhs == uij.intersection(vij), || {
                                format!("u={}, u'={}, i={i}, j={j}", show(u), show(v))
                            });
                            if u.is_subset(v) {
                                tm.check(uij.is_subset(vij), || {
                                    format!("u={}, v={}, i={i}, j={j}", show(u), show(v))
                                });
                            }
                        }
                    }
                } else {
                    t2c.not_applicable();
                    t2i.not_applicable();
                }
                if !delta.contains(&j) && i != j {
                    t5d.check(sub(&u.intersection(s.diag(i, j)), i, j) == *u, || {
                        format!("u={}, i={i}, j={j}", show(u))
                    });
                    t5r.check(sub(&sub(u, j, i), i, j) == *u, || format!("u={}, i={i}, j={j}", show(u)));
                } else {
                    t5d.not_applicable();
                    t5r.not_applicable();
                }
                for k in 0..n {
                    if !delta.contains(&k) && i != j && i != k {
                        t4.check(sub(&sub(u, k, j), i, k) == uij, || {
                            format!("u={}, i={i}, j={j}, k={k}", show(u))
                        });
                    } else {
                        t4.not_applicable();
                    }
                }
            }
        }
        for i1 in 0..n {
            for j1 in 0..n {
                for i2 in 0..n {
                    for j2 in 0..n {
                        if j1 != j2 && ![i1, i2].iter().any(|i| *i == j1 || *i == j2) {
                            let a = sub(&sub(u, i1, j1), i2, j2);
                            let b = sub(&sub(u, i2, j2), i1, j1);
                            t3.check(a == b, || format!("u={}, ({i1}/{j1}), ({i2}/{j2})", show(u)));
                        } else {
                            t3.not_applicable();
                        }
                    }
                }
            }
        }
    }
    for t in [t1, t2c, t2i, t3, t4, t5d, t5r, tm] {
        let mut r = t.finish();
        if !exhaustive {
            r.reason = Some(format!("sampled {} basis sets", sets.len()));
        }
        report.push(r);
    }
    report.push(fresh_index_law(s, &sets, opts.schedule_samples, &mut rng));
    report
}

/// Two fresh-index schedules for ρu give the same set. Runs in the space
/// itself when it has spare indices for two different schedules, otherwise
/// in the lifted ambient copy.
fn fresh_index_law(s: &CylSpace, sets: &[PointSet], samples: usize, rng: &mut ChaCha8Rng) -> LawResult {
    const LAW: &str = "subst-6 fresh-index independence";
    let n = s.dim();
    let candidates: Vec<&PointSet> = sets.iter().filter(|u| !s.dimension_set(u).is_empty()).collect();
    if candidates.is_empty() {
        return LawResult::skipped(LAW, "no basis set with nonempty dimension set");
    }
    let lift = match s.lifted() {
        Some(Ok(l)) => Some(l),
        Some(Err(e)) => return LawResult::skipped(LAW, format!("ambient unavailable: {e}")),
        None => None,
    };
    let mut t = Tally::new(LAW);
    let mut attempts = 0;
    let mut done = 0;
    while done < samples && attempts < samples * 20 {
        attempts += 1;
        let u = candidates[rng.gen_range(0..candidates.len())];
        let targets: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        let rho = VarMap::total(n, &targets).expect("targets below dim");
        let js = s.dimension_set(u);
        let spare = s.spare_indices(u, &rho).expect("total map covers Δ(u)");
        let (space, uu, rr, spare) = if spare.len() > js.len() {
            (s, u.clone(), rho.clone(), spare)
        } else if let Some(l) = &lift {
            let uu = l.up(u);
            let rr = rho.widen(l.space.dim());
            let spare = l.space.spare_indices(&uu, &rr).expect("widened map covers Δ(u)");
            (&l.space, uu, rr, spare)
        } else {
            continue;
        };
        if spare.len() <= js.len() {
            continue;
        }
        let first = &spare[..js.len()];
        let last = &spare[spare.len() - js.len()..];
        let a = space.permute_with_schedule(&uu, &rr, first);
        let b = space.permute_with_schedule(&uu, &rr, last);
        done += 1;
        t.check(matches!((&a, &b), (Ok(x), Ok(y)) if x == y), || {
            format!("u={}, ρ={rho}, schedules {first:?} and {last:?}", s.show_set(u))
        });
    }
    if done == 0 {
        return LawResult::skipped(LAW, format!("no spare indices for two schedules at dimension {n}"));
    }
    t.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_text_and_verdicts() {
        let mut r = Report::new();
        r.push(LawResult::verdict("a", true, "unused"));
        r.push(LawResult::skipped("b", "why"));
        assert!(r.passed());
        r.push(LawResult::verdict("c", false, "w"));
        assert!(!r.passed());
        assert_eq!(r.failures().len(), 1);
        let text = r.to_text();
        assert!(text.contains("PASS a") && text.contains("SKIP b") && text.contains("witness: w"));
    }
}
