//! Union-find and canonical partitions over dense ids.

use std::fmt;
use std::marker::PhantomData;

use serde::{Serialize, Serializer};

use crate::error::PartitionError;
use crate::model::{ObsId, StateId};

/// Disjoint-set forest with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the classes of `a` and `b`; returns `Some((root, absorbed))`
    /// when they were distinct.
    pub fn union(&mut self, a: usize, b: usize) -> Option<(usize, usize)> {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return None;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        Some((ra, rb))
    }

    pub fn same(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }
}

/// An equivalence relation on `0..n`, stored canonically: blocks are sorted
/// internally and ordered by their least element, so equal relations compare
/// equal regardless of how they were built.
pub struct Partition<I> {
    block_of: Vec<usize>,
    blocks: Vec<Vec<usize>>,
    _id: PhantomData<I>,
}

/// Partition of a network's states (R* and candidate unwindings).
pub type StatePartition = Partition<StateId>;
/// Partition of a network's observation labels (a unification).
pub type ObservationPartition = Partition<ObsId>;

impl<I> Clone for Partition<I> {
    fn clone(&self) -> Self {
        Self {
            block_of: self.block_of.clone(),
            blocks: self.blocks.clone(),
            _id: PhantomData,
        }
    }
}

impl<I> PartialEq for Partition<I> {
    fn eq(&self, other: &Self) -> bool {
        self.block_of == other.block_of
    }
}

impl<I> Eq for Partition<I> {}

impl<I> fmt::Debug for Partition<I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.blocks).finish()
    }
}

impl<I> Serialize for Partition<I> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.blocks.serialize(s)
    }
}

impl<I> Partition<I>
where
    I: From<usize> + Into<usize> + Copy,
{
    fn from_labels(labels: impl IntoIterator<Item = usize>) -> Self {
        let mut renumber = std::collections::HashMap::new();
        let mut block_of = Vec::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (x, l) in labels.into_iter().enumerate() {
            let b = *renumber.entry(l).or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            block_of.push(b);
            blocks[b].push(x);
        }
        Self {
            block_of,
            blocks,
            _id: PhantomData,
        }
    }

    /// Every element in its own block.
    pub fn identity(n: usize) -> Self {
        Self::from_labels(0..n)
    }

    /// A single block holding everything (empty when `n == 0`).
    pub fn total(n: usize) -> Self {
        Self::from_labels(std::iter::repeat_n(0, n))
    }

    pub fn from_union_find(uf: &mut UnionFind) -> Self {
        let roots: Vec<usize> = (0..uf.len()).map(|x| uf.find(x)).collect();
        Self::from_labels(roots)
    }

    /// Builds a partition from explicit blocks, which must be nonempty,
    /// disjoint, and cover `0..n`.
    pub fn from_blocks<B>(n: usize, blocks: B) -> Result<Self, PartitionError>
    where
        B: IntoIterator,
        B::Item: IntoIterator<Item = I>,
    {
        let mut label = vec![usize::MAX; n];
        for (b, block) in blocks.into_iter().enumerate() {
            let mut empty = true;
            for x in block {
                empty = false;
                let x: usize = x.into();
                if x >= n {
                    return Err(PartitionError::WrongSize {
                        expected: n,
                        found: x + 1,
                    });
                }
                if label[x] != usize::MAX {
                    return Err(PartitionError::Overlap(x));
                }
                label[x] = b;
            }
            if empty {
                return Err(PartitionError::EmptyBlock);
            }
        }
        if let Some(x) = label.iter().position(|&l| l == usize::MAX) {
            return Err(PartitionError::Uncovered(x));
        }
        Ok(Self::from_labels(label))
    }

    /// Builds a partition from a block index per element.
    pub fn from_block_indices(indices: &[usize]) -> Self {
        Self::from_labels(indices.iter().copied())
    }

    /// Number of elements.
    pub fn len(&self) -> usize {
        self.block_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.block_of.is_empty()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_index(&self, x: I) -> usize {
        self.block_of[x.into()]
    }

    pub fn block(&self, b: usize) -> impl ExactSizeIterator<Item = I> + '_ {
        self.blocks[b].iter().map(|&x| I::from(x))
    }

    pub fn block_of(&self, x: I) -> impl ExactSizeIterator<Item = I> + '_ {
        self.block(self.block_index(x))
    }

    pub fn blocks(&self) -> impl ExactSizeIterator<Item = Vec<I>> + '_ {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|&x| I::from(x)).collect())
    }

    pub fn same(&self, a: I, b: I) -> bool {
        self.block_of[a.into()] == self.block_of[b.into()]
    }

    pub fn is_identity(&self) -> bool {
        self.blocks.len() == self.block_of.len()
    }

    /// True when every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Self) -> bool {
        self.len() == coarser.len()
            && self.blocks.iter().all(|b| {
                b.iter()
                    .all(|&x| coarser.block_of[x] == coarser.block_of[b[0]])
            })
    }

    /// Block indices per element, in canonical numbering.
    pub fn indices(&self) -> &[usize] {
        &self.block_of
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_equality() {
        let a = StatePartition::from_blocks(4, [vec![StateId(3), StateId(0)], vec![StateId(2), StateId(1)]])
            .unwrap();
        let b = StatePartition::from_block_indices(&[7, 1, 1, 7]);
        assert_eq!(a, b);
        assert_eq!(a.num_blocks(), 2);
        assert!(a.same(StateId(0), StateId(3)));
    }

    #[test]
    fn from_blocks_rejects_bad_input() {
        assert_eq!(
            ObservationPartition::from_blocks(2, [vec![ObsId(0)]]),
            Err(PartitionError::Uncovered(1))
        );
        assert_eq!(
            ObservationPartition::from_blocks(2, [vec![ObsId(0), ObsId(1)], vec![ObsId(1)]]),
            Err(PartitionError::Overlap(1))
        );
    }

    #[test]
    fn refinement() {
        let fine = StatePartition::identity(3);
        let coarse = StatePartition::total(3);
        assert!(fine.refines(&coarse));
        assert!(!coarse.refines(&fine));
        assert!(coarse.refines(&coarse));
    }

    #[test]
    fn union_find_reports_merges() {
        let mut uf = UnionFind::new(3);
        assert!(uf.union(0, 1).is_some());
        assert!(uf.union(1, 0).is_none());
        assert!(uf.same(0, 1));
        assert!(!uf.same(0, 2));
    }
}
