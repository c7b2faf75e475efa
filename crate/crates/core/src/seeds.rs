use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::VertexId;

/// An ordered tuple of distinct vertices. Slot order matters to the
/// crossover operator; set semantics are provided by a membership index.
#[derive(Clone, Default, Serialize)]
#[serde(transparent)]
pub struct SeedSet {
    slots: Vec<VertexId>,
    #[serde(skip)]
    members: HashSet<VertexId>,
}

impl SeedSet {
    /// Validates distinctness and that every id is below `n`.
    pub fn new(slots: Vec<VertexId>, n: usize) -> Result<Self> {
        let mut s = SeedSet::with_capacity(slots.len());
        for v in slots {
            if v >= n {
                return Err(Error::param(format!("seed {v} out of range for n = {n}")));
            }
            if !s.push(v) {
                return Err(Error::param(format!("seed {v} listed twice")));
            }
        }
        Ok(s)
    }

    pub fn with_capacity(k: usize) -> Self {
        SeedSet { slots: Vec::with_capacity(k), members: HashSet::with_capacity(k) }
    }

    /// Appends `v` unless already present; returns whether it was added.
    pub fn push(&mut self, v: VertexId) -> bool {
        if self.members.insert(v) {
            self.slots.push(v);
            true
        } else {
            false
        }
    }

    /// Puts `v` into `slot`, evicting the previous occupant.
    ///
    /// # Panics
    /// If `v` is already a member.
    pub fn replace(&mut self, slot: usize, v: VertexId) -> VertexId {
        assert!(!self.members.contains(&v), "vertex {v} already in seed set");
        let old = std::mem::replace(&mut self.slots[slot], v);
        self.members.remove(&old);
        self.members.insert(v);
        old
    }

    #[inline]
    pub fn contains(&self, v: VertexId) -> bool {
        self.members.contains(&v)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slots(&self) -> &[VertexId] {
        &self.slots
    }

    pub fn iter(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.slots.iter().copied()
    }

    /// Members in ascending id order.
    pub fn sorted(&self) -> Vec<VertexId> {
        let mut v = self.slots.clone();
        v.sort_unstable();
        v
    }

    /// Same members regardless of slot order.
    pub fn same_members(&self, other: &SeedSet) -> bool {
        self.len() == other.len() && self.slots.iter().all(|v| other.contains(*v))
    }

    pub fn is_consistent(&self) -> bool {
        self.members.len() == self.slots.len() && self.slots.iter().all(|v| self.members.contains(v))
    }
}

impl PartialEq for SeedSet {
    fn eq(&self, other: &Self) -> bool {
        self.slots == other.slots
    }
}

impl Eq for SeedSet {}

impl fmt::Debug for SeedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.slots).finish()
    }
}

impl FromIterator<VertexId> for SeedSet {
    /// Collects distinct vertices; repeats are skipped.
    fn from_iter<I: IntoIterator<Item = VertexId>>(iter: I) -> Self {
        let mut s = SeedSet::default();
        for v in iter {
            s.push(v);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_out_of_range() {
        assert!(SeedSet::new(vec![0, 1, 0], 3).is_err());
        assert!(SeedSet::new(vec![3], 3).is_err());
        assert_eq!(SeedSet::new(vec![2, 0], 3).unwrap().sorted(), vec![0, 2]);
    }

    #[test]
    fn replace_keeps_index_in_sync() {
        let mut s = SeedSet::new(vec![4, 5, 6], 10).unwrap();
        assert_eq!(s.replace(1, 9), 5);
        assert!(!s.contains(5) && s.contains(9));
        assert_eq!(s.slots(), &[4, 9, 6]);
        assert!(s.is_consistent());
    }

    #[test]
    #[should_panic]
    fn replace_with_member_panics() {
        let mut s = SeedSet::new(vec![1, 2], 3).unwrap();
        s.replace(0, 2);
    }
}
