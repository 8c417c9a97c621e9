//! Subsets of a finite cloud, stored as membership masks over point indices.

use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PointSet {
    mask: Vec<bool>,
    len: usize,
}

impl PointSet {
    pub fn empty(capacity: usize) -> Self {
        PointSet { mask: vec![false; capacity], len: 0 }
    }

    pub fn full(capacity: usize) -> Self {
        PointSet { mask: vec![true; capacity], len: capacity }
    }

    pub fn from_indices(capacity: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut set = PointSet::empty(capacity);
        for i in indices {
            set.insert(i);
        }
        set
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        let len = mask.iter().filter(|&&b| b).count();
        PointSet { mask, len }
    }

    /// Size of the ambient cloud.
    pub fn capacity(&self) -> usize {
        self.mask.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.mask[i]
    }

    pub fn insert(&mut self, i: usize) -> bool {
        let fresh = !self.mask[i];
        if fresh {
            self.mask[i] = true;
            self.len += 1;
        }
        fresh
    }

    pub fn remove(&mut self, i: usize) -> bool {
        let present = self.mask[i];
        if present {
            self.mask[i] = false;
            self.len -= 1;
        }
        present
    }

    /// Members in ascending index order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn complement(&self) -> PointSet {
        PointSet::from_mask(self.mask.iter().map(|b| !b).collect())
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        self.zip(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &PointSet) -> PointSet {
        self.zip(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &PointSet) -> PointSet {
        self.zip(other, |a, b| a && !b)
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }

    /// First member of `self` missing from `other`.
    pub fn first_outside(&self, other: &PointSet) -> Option<usize> {
        self.iter().find(|&i| !other.contains(i))
    }

    pub fn union_all<'a>(capacity: usize, sets: impl IntoIterator<Item = &'a PointSet>) -> PointSet {
        sets.into_iter().fold(PointSet::empty(capacity), |acc, s| acc.union(s))
    }

    fn zip(&self, other: &PointSet, op: impl Fn(bool, bool) -> bool) -> PointSet {
        assert_eq!(self.capacity(), other.capacity(), "point sets over different clouds");
        PointSet::from_mask(self.mask.iter().zip(&other.mask).map(|(&a, &b)| op(a, b)).collect())
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_algebra() {
        let a = PointSet::from_indices(6, [0, 1, 2]);
        let b = PointSet::from_indices(6, [2, 3]);
        assert_eq!(a.union(&b).to_vec(), vec![0, 1, 2, 3]);
        assert_eq!(a.intersection(&b).to_vec(), vec![2]);
        assert_eq!(a.difference(&b).to_vec(), vec![0, 1]);
        assert_eq!(a.complement().to_vec(), vec![3, 4, 5]);
        assert!(PointSet::from_indices(6, [1]).is_subset(&a));
        assert_eq!(b.first_outside(&a), Some(3));
        let mut c = a.clone();
        assert!(!c.insert(1));
        assert!(c.remove(1));
        assert_eq!(c.len(), 2);
    }
}
