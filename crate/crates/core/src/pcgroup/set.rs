//! Dense element sets, indexed by element rank.

/// A subset of a group's elements, stored as a bit vector indexed by element
/// rank (see [`GroupTable::rank`](super::GroupTable::rank)).  This is the
/// workhorse for subgroup closures, conjugacy classes and Σ-sets; the hot
/// operations are word-parallel.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ElementSet {
    universe: u64,
    words: Vec<u64>,
}

impl ElementSet {
    /// The empty subset of a group with `universe` elements.
    pub fn empty(universe: u64) -> Self {
        let n_words = (universe as usize).div_ceil(64);
        ElementSet {
            universe,
            words: vec![0; n_words],
        }
    }

    /// Size of the ambient group.
    pub fn universe(&self) -> u64 {
        self.universe
    }

    /// Inserts a rank; returns true if it was newly added.
    pub fn insert(&mut self, rank: u64) -> bool {
        debug_assert!(rank < self.universe);
        let w = &mut self.words[(rank / 64) as usize];
        let bit = 1u64 << (rank % 64);
        let added = *w & bit == 0;
        *w |= bit;
        added
    }

    /// Membership test.
    pub fn contains(&self, rank: u64) -> bool {
        if rank >= self.universe {
            return false;
        }
        self.words[(rank / 64) as usize] & (1u64 << (rank % 64)) != 0
    }

    /// Number of members.
    pub fn len(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// True if no members.
    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// In-place union.  Panics if the universes differ.
    pub fn union_with(&mut self, other: &ElementSet) {
        assert_eq!(self.universe, other.universe);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    /// True if the two sets share at least one member.
    pub fn intersects(&self, other: &ElementSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    /// True if the intersection is exactly `{identity}` (rank 0).  Both sides
    /// are expected to contain the identity, as Σ-sets always do.
    pub fn intersection_is_identity_only(&self, other: &ElementSet) -> bool {
        debug_assert!(self.contains(0) && other.contains(0));
        let mut it = self.words.iter().zip(&other.words);
        match it.next() {
            Some((a, b)) => {
                if a & b != 1 {
                    return false;
                }
            }
            None => return true,
        }
        it.all(|(a, b)| a & b == 0)
    }

    /// True if `self` is a subset of `other`.
    pub fn is_subset_of(&self, other: &ElementSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// Iterates the member ranks in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let base = (wi as u64) * 64;
            std::iter::successors(Some(w), |&m| Some(m & m.wrapping_sub(1)))
                .take_while(|&m| m != 0)
                .map(move |m| base + m.trailing_zeros() as u64)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_contains_iter() {
        let mut s = ElementSet::empty(130);
        assert!(s.insert(0));
        assert!(s.insert(129));
        assert!(s.insert(64));
        assert!(!s.insert(64));
        assert_eq!(s.len(), 3);
        assert!(s.contains(129) && !s.contains(128));
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 64, 129]);
    }

    #[test]
    fn identity_only_intersection() {
        let mut a = ElementSet::empty(100);
        let mut b = ElementSet::empty(100);
        a.insert(0);
        b.insert(0);
        a.insert(7);
        b.insert(8);
        assert!(a.intersection_is_identity_only(&b));
        b.insert(7);
        assert!(!a.intersection_is_identity_only(&b));
        assert!(a.intersects(&b));
    }

    #[test]
    fn subset_and_union() {
        let mut a = ElementSet::empty(70);
        let mut b = ElementSet::empty(70);
        a.insert(3);
        b.insert(3);
        b.insert(69);
        assert!(a.is_subset_of(&b));
        assert!(!b.is_subset_of(&a));
        a.union_with(&b);
        assert_eq!(a.len(), 2);
    }
}
