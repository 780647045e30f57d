use std::fmt::Write as _;

use super::{MatIndex, MatRing};
use crate::bitset::BitSet;
use crate::error::{Error, Result};

/// A subset of `M_n(F_q)` as a bitset over the index space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatSet {
    n: usize,
    q: u32,
    bits: BitSet,
}

impl MatSet {
    pub fn empty(ring: &MatRing) -> Self {
        MatSet { n: ring.n(), q: ring.q(), bits: BitSet::new(ring.size()) }
    }

    pub fn full(ring: &MatRing) -> Self {
        MatSet { n: ring.n(), q: ring.q(), bits: BitSet::full(ring.size()) }
    }

    pub fn from_indices<I: IntoIterator<Item = MatIndex>>(ring: &MatRing, it: I) -> Self {
        let mut s = MatSet::empty(ring);
        s.extend(it);
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn universe(&self) -> u64 {
        self.bits.universe()
    }

    pub fn len(&self) -> u64 {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn contains(&self, i: MatIndex) -> bool {
        self.bits.contains(i.get())
    }

    #[inline]
    pub fn insert(&mut self, i: MatIndex) -> bool {
        self.bits.insert(i.get())
    }

    pub fn remove(&mut self, i: MatIndex) -> bool {
        self.bits.remove(i.get())
    }

    /// Members in increasing index order.
    pub fn iter(&self) -> impl Iterator<Item = MatIndex> + '_ {
        self.bits.iter().map(|i| MatIndex(i as u32))
    }

    pub fn to_vec(&self) -> Vec<MatIndex> {
        self.iter().collect()
    }

    pub fn belongs_to(&self, ring: &MatRing) -> bool {
        self.n == ring.n() && self.q == ring.q()
    }

    pub(crate) fn require(&self, ring: &MatRing) -> Result<()> {
        if self.belongs_to(ring) {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    fn same_ring(&self, other: &MatSet) -> Result<()> {
        if self.n == other.n && self.q == other.q {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn union(&self, other: &MatSet) -> Result<MatSet> {
        self.same_ring(other)?;
        let mut out = self.clone();
        out.bits.union_with(&other.bits);
        Ok(out)
    }

    pub fn intersection(&self, other: &MatSet) -> Result<MatSet> {
        self.same_ring(other)?;
        let mut out = self.clone();
        out.bits.intersect_with(&other.bits);
        Ok(out)
    }

    pub fn is_subset(&self, other: &MatSet) -> bool {
        self.same_ring(other).is_ok() && self.bits.is_subset(&other.bits)
    }

    pub fn is_disjoint(&self, other: &MatSet) -> bool {
        self.bits.is_disjoint(&other.bits)
    }

    /// Plain-text form: a header line `n q count`, then one decimal index per
    /// line in increasing order.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.n, self.q, self.len());
        for i in self.iter() {
            writeln!(s, "{i}").unwrap();
        }
        s
    }

    /// Parses [`MatSet::to_text`] output. The ring must match the header.
    pub fn from_text(ring: &MatRing, text: &str) -> Result<MatSet> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("missing header".into()))?;
        let fields: Vec<u64> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad header token {t:?}"))))
            .collect::<Result<_>>()?;
        let [n, q, count] = fields[..] else {
            return Err(Error::Parse(format!("header must be `n q count`, got {header:?}")));
        };
        if n != ring.n() as u64 || q != ring.q() as u64 {
            return Err(Error::FieldMismatch);
        }
        let mut set = MatSet::empty(ring);
        let mut prev: Option<u64> = None;
        for line in lines {
            let raw: u64 = line.parse().map_err(|_| Error::Parse(format!("bad index {line:?}")))?;
            if prev.is_some_and(|p| p >= raw) {
                return Err(Error::Parse(format!("indices not strictly increasing at {raw}")));
            }
            prev = Some(raw);
            set.insert(ring.index(raw)?);
        }
        if set.len() != count {
            return Err(Error::Parse(format!("header declares {count} entries, found {}", set.len())));
        }
        Ok(set)
    }
}

impl Extend<MatIndex> for MatSet {
    fn extend<T: IntoIterator<Item = MatIndex>>(&mut self, iter: T) {
        for i in iter {
            self.insert(i);
        }
    }
}
