//! Fixed-universe bitset shared by matrix and vertex sets.

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitSet {
    words: Vec<u64>,
    universe: u64,
    len: u64,
}

impl std::fmt::Debug for BitSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BitSet").field("universe", &self.universe).field("len", &self.len).finish()
    }
}

impl BitSet {
    pub fn new(universe: u64) -> Self {
        let words = universe.div_ceil(64) as usize;
        BitSet { words: vec![0; words], universe, len: 0 }
    }

    pub fn full(universe: u64) -> Self {
        let mut s = BitSet::new(universe);
        s.words.iter_mut().for_each(|w| *w = u64::MAX);
        let tail = universe % 64;
        if tail != 0 {
            *s.words.last_mut().unwrap() = (1u64 << tail) - 1;
        }
        s.len = universe;
        s
    }

    #[inline]
    pub fn universe(&self) -> u64 {
        self.universe
    }

    #[inline]
    pub fn len(&self) -> u64 {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn contains(&self, i: u64) -> bool {
        i < self.universe && self.words[(i >> 6) as usize] >> (i & 63) & 1 == 1
    }

    /// Returns whether `i` was newly inserted.
    ///
    /// Panics when `i` is outside the universe.
    #[inline]
    pub fn insert(&mut self, i: u64) -> bool {
        assert!(i < self.universe, "bit {i} outside universe {}", self.universe);
        let w = &mut self.words[(i >> 6) as usize];
        let mask = 1u64 << (i & 63);
        let fresh = *w & mask == 0;
        *w |= mask;
        self.len += fresh as u64;
        fresh
    }

    pub fn remove(&mut self, i: u64) -> bool {
        if i >= self.universe {
            return false;
        }
        let w = &mut self.words[(i >> 6) as usize];
        let mask = 1u64 << (i & 63);
        let present = *w & mask != 0;
        *w &= !mask;
        self.len -= present as u64;
        present
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as u64;
                bits &= bits - 1;
                Some(((wi as u64) << 6) | tz)
            })
        })
    }

    fn recount(&mut self) {
        self.len = self.words.iter().map(|w| w.count_ones() as u64).sum();
    }

    pub fn union_with(&mut self, other: &BitSet) {
        assert_eq!(self.universe, other.universe);
        self.words.iter_mut().zip(&other.words).for_each(|(a, b)| *a |= b);
        self.recount();
    }

    pub fn intersect_with(&mut self, other: &BitSet) {
        assert_eq!(self.universe, other.universe);
        self.words.iter_mut().zip(&other.words).for_each(|(a, b)| *a &= b);
        self.recount();
    }

    pub fn is_subset(&self, other: &BitSet) -> bool {
        self.universe == other.universe && self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &BitSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn intersection_len(&self, other: &BitSet) -> u64 {
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones() as u64).sum()
    }
}
