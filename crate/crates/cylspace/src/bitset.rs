//! Dense point sets and partitions of a finite point range.

use std::fmt;

use fixedbitset::FixedBitSet;

/// A subset of `{0..len-1}`, one bit per point.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointSet(FixedBitSet);

impl PointSet {
    pub fn empty(len: usize) -> Self {
        PointSet(FixedBitSet::with_capacity(len))
    }

    pub fn full(len: usize) -> Self {
        let mut b = FixedBitSet::with_capacity(len);
        b.insert_range(..);
        PointSet(b)
    }

    pub fn singleton(len: usize, p: usize) -> Self {
        let mut s = Self::empty(len);
        s.insert(p);
        s
    }

    pub fn from_points(len: usize, points: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(len);
        for p in points {
            s.insert(p);
        }
        s
    }

    /// Size of the ambient point range.
    pub fn universe(&self) -> usize {
        self.0.len()
    }

    pub fn insert(&mut self, p: usize) {
        self.0.insert(p);
    }

    pub fn remove(&mut self, p: usize) {
        self.0.set(p, false);
    }

    pub fn contains(&self, p: usize) -> bool {
        self.0.contains(p)
    }

    pub fn count(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn is_full(&self) -> bool {
        self.count() == self.universe()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    pub fn first(&self) -> Option<usize> {
        self.0.ones().next()
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut b = self.0.clone();
        b.union_with(&other.0);
        PointSet(b)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut b = self.0.clone();
        b.intersect_with(&other.0);
        PointSet(b)
    }

    pub fn difference(&self, other: &Self) -> Self {
        let mut b = self.0.clone();
        b.difference_with(&other.0);
        PointSet(b)
    }

    pub fn complement(&self) -> Self {
        let mut b = self.0.clone();
        b.toggle_range(..);
        PointSet(b)
    }

    pub fn union_with(&mut self, other: &Self) {
        self.0.union_with(&other.0);
    }

    pub fn intersect_with(&mut self, other: &Self) {
        self.0.intersect_with(&other.0);
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn meets(&self, other: &Self) -> bool {
        !self.is_disjoint(other)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, p) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

/// A partition of `{0..len-1}` into blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    block_of: Vec<usize>,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Blocks given by arbitrary per-point keys; blocks are numbered by first point.
    pub fn from_keys<K: std::hash::Hash + Eq>(keys: impl IntoIterator<Item = K>) -> Self {
        let mut ids = std::collections::HashMap::new();
        let mut block_of = Vec::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (p, k) in keys.into_iter().enumerate() {
            let next = blocks.len();
            let id = *ids.entry(k).or_insert(next);
            if id == blocks.len() {
                blocks.push(Vec::new());
            }
            blocks[id].push(p);
            block_of.push(id);
        }
        Partition { block_of, blocks }
    }

    /// Partition from explicit blocks; fails unless they cover `len` points exactly once.
    pub fn from_blocks(len: usize, blocks: Vec<Vec<usize>>) -> Option<Self> {
        let mut block_of = vec![usize::MAX; len];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return None;
            }
            for &p in block {
                if p >= len || block_of[p] != usize::MAX {
                    return None;
                }
                block_of[p] = b;
            }
        }
        if block_of.contains(&usize::MAX) {
            return None;
        }
        let keys: Vec<usize> = block_of;
        Some(Self::from_keys(keys))
    }

    pub fn discrete(len: usize) -> Self {
        Self::from_keys(0..len)
    }

    pub fn len(&self) -> usize {
        self.block_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.block_of.is_empty()
    }

    pub fn block_of(&self, p: usize) -> usize {
        self.block_of[p]
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_set(&self, b: usize) -> PointSet {
        PointSet::from_points(self.len(), self.blocks[b].iter().copied())
    }

    /// Union of the blocks meeting `u`.
    pub fn close(&self, u: &PointSet) -> PointSet {
        let mut out = PointSet::empty(self.len());
        for p in u.iter() {
            if !out.contains(p) {
                for &q in &self.blocks[self.block_of[p]] {
                    out.insert(q);
                }
            }
        }
        out
    }

    /// Whether `u` is a union of blocks.
    pub fn is_union_of_blocks(&self, u: &PointSet) -> bool {
        self.close(u) == *u
    }

    /// Common refinement with another partition.
    pub fn meet(&self, other: &Partition) -> Partition {
        Partition::from_keys((0..self.len()).map(|p| (self.block_of[p], other.block_of[p])))
    }

    pub fn is_discrete(&self) -> bool {
        self.blocks.len() == self.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_algebra() {
        let a = PointSet::from_points(6, [0, 2, 4]);
        let b = PointSet::from_points(6, [2, 3]);
        assert_eq!(a.union(&b).to_vec(), vec![0, 2, 3, 4]);
        assert_eq!(a.intersection(&b).to_vec(), vec![2]);
        assert_eq!(a.complement().to_vec(), vec![1, 3, 5]);
        assert!(PointSet::from_points(6, [2]).is_subset(&b));
        assert!(PointSet::full(6).is_full());
        assert_eq!(a.to_string(), "{0,2,4}");
    }

    #[test]
    fn partition_closure() {
        let p = Partition::from_keys([0, 1, 0, 2]);
        assert_eq!(p.block_count(), 3);
        assert_eq!(p.close(&PointSet::from_points(4, [2])).to_vec(), vec![0, 2]);
        assert!(Partition::from_blocks(3, vec![vec![0, 1], vec![1, 2]]).is_none());
        assert_eq!(Partition::from_blocks(3, vec![vec![2, 0], vec![1]]).unwrap().block_of(2), 0);
    }
}
