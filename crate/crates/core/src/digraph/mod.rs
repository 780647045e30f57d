//! The sum-product digraph on `M_n(F_q) x M_n(F_q)`: an edge runs from
//! `(A, C)` to `(B, D)` exactly when `A B = C + D`.
//!
//! Adjacency is never stored. Out-neighbours of `(A, C)` are
//! `(B, A B - C)` for every `B`; in-neighbours of `(B, D)` are
//! `(A, A B - D)` for every `A`. Both streams are ordered by their free
//! coordinate, which is what makes the common-neighbour counts linear.
//!
//! Notation: `N = q^{2n^2}` vertices, each of in- and out-degree `d = q^{n^2}`.

mod audit;
mod mixing;
mod spectral;

use std::collections::VecDeque;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::matrix::{MatIndex, MatRing};

pub use audit::{check_normal, mmt_decomposition_audit, AuditReport, PairClass, PairMismatch, PairScope, Relation};
pub use mixing::{mixing_check, MixingReport};
pub use spectral::{SpectralMethod, SpectralOptions, SpectralReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Vertex {
    pub a: MatIndex,
    pub c: MatIndex,
}

impl Vertex {
    pub fn new(a: MatIndex, c: MatIndex) -> Self {
        Vertex { a, c }
    }
}

/// A set of vertices, packed as `a * d + c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSet {
    d: u64,
    bits: BitSet,
}

impl VertexSet {
    pub fn empty(g: &SumProductDigraph) -> Self {
        VertexSet { d: g.degree(), bits: BitSet::new(g.vertex_count()) }
    }

    pub fn full(g: &SumProductDigraph) -> Self {
        VertexSet { d: g.degree(), bits: BitSet::full(g.vertex_count()) }
    }

    pub fn from_vertices<I: IntoIterator<Item = Vertex>>(g: &SumProductDigraph, it: I) -> Self {
        let mut s = VertexSet::empty(g);
        for v in it {
            s.insert(v);
        }
        s
    }

    #[inline]
    pub fn pack(&self, v: Vertex) -> u64 {
        v.a.get() * self.d + v.c.get()
    }

    #[inline]
    pub fn unpack(&self, packed: u64) -> Vertex {
        Vertex::new(MatIndex((packed / self.d) as u32), MatIndex((packed % self.d) as u32))
    }

    pub fn insert(&mut self, v: Vertex) -> bool {
        let p = self.pack(v);
        self.bits.insert(p)
    }

    #[inline]
    pub fn contains(&self, v: Vertex) -> bool {
        self.bits.contains(self.pack(v))
    }

    #[inline]
    pub fn contains_packed(&self, p: u64) -> bool {
        self.bits.contains(p)
    }

    pub fn len(&self) -> u64 {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.bits.iter().map(|p| self.unpack(p))
    }

    pub fn iter_packed(&self) -> impl Iterator<Item = u64> + '_ {
        self.bits.iter()
    }
}

/// Pre-resolved table slices for the hot loops.
#[derive(Clone, Copy)]
pub(crate) struct Tables<'a> {
    pub d: usize,
    pub mul: &'a [u32],
    pub add: &'a [u32],
    pub neg: &'a [u32],
}

impl Tables<'_> {
    /// `x y - z` as an index.
    #[inline(always)]
    pub fn mul_sub(&self, x: u32, y: u32, z: u32) -> u32 {
        let m = self.mul[x as usize * self.d + y as usize];
        self.add[m as usize * self.d + self.neg[z as usize] as usize]
    }
}

#[derive(Debug, Clone)]
pub struct SumProductDigraph {
    ring: Arc<MatRing>,
}

impl SumProductDigraph {
    pub fn new(ring: Arc<MatRing>) -> Self {
        SumProductDigraph { ring }
    }

    pub fn ring(&self) -> &MatRing {
        &self.ring
    }

    pub fn ring_arc(&self) -> &Arc<MatRing> {
        &self.ring
    }

    /// `d = q^{n^2}`.
    pub fn degree(&self) -> u64 {
        self.ring.size()
    }

    /// `N = q^{2n^2}`.
    pub fn vertex_count(&self) -> u64 {
        self.degree() * self.degree()
    }

    pub fn vertex(&self, a: u64, c: u64) -> Result<Vertex> {
        Ok(Vertex::new(self.ring.index(a)?, self.ring.index(c)?))
    }

    #[inline]
    pub fn pack(&self, v: Vertex) -> u64 {
        v.a.get() * self.degree() + v.c.get()
    }

    #[inline]
    pub fn unpack(&self, p: u64) -> Vertex {
        let d = self.degree();
        Vertex::new(MatIndex((p / d) as u32), MatIndex((p % d) as u32))
    }

    pub(crate) fn tables(&self) -> Option<Tables<'_>> {
        self.ring.raw_tables().map(|(mul, add, neg)| Tables { d: self.degree() as usize, mul, add, neg })
    }

    /// `x y - z`.
    #[inline]
    fn mul_sub(&self, x: MatIndex, y: MatIndex, z: MatIndex) -> MatIndex {
        match self.tables() {
            Some(t) => MatIndex(t.mul_sub(x.0, y.0, z.0)),
            None => self.ring.sub_idx(self.ring.mul_idx(x, y), z),
        }
    }

    pub fn has_edge(&self, from: Vertex, to: Vertex) -> bool {
        self.ring.mul_idx(from.a, to.a) == self.ring.add_idx(from.c, to.c)
    }

    /// `(B, A B - C)` for every `B`, in increasing `B`.
    pub fn out_neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.ring.all_indices().map(move |b| Vertex::new(b, self.mul_sub(v.a, b, v.c)))
    }

    /// `(A, A B - D)` for every `A`, in increasing `A`.
    pub fn in_neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.ring.all_indices().map(move |a| Vertex::new(a, self.mul_sub(a, v.a, v.c)))
    }

    /// `|N+(u) ∩ N+(v)|`. Both streams hold exactly one vertex per first
    /// coordinate, so the intersection is a lockstep comparison.
    pub fn common_out(&self, u: Vertex, v: Vertex) -> u64 {
        self.out_neighbors(u).zip(self.out_neighbors(v)).filter(|(x, y)| x == y).count() as u64
    }

    /// `|N-(u) ∩ N-(v)|`.
    pub fn common_in(&self, u: Vertex, v: Vertex) -> u64 {
        self.in_neighbors(u).zip(self.in_neighbors(v)).filter(|(x, y)| x == y).count() as u64
    }

    /// The common-out count obtained by solving `(A1 - A2) X = C1 - C2`:
    /// `q^{n(n-m)}` solutions with `m = rank(A1 - A2)` when consistent,
    /// none otherwise. Each solution `X` fixes the common neighbour
    /// `(X, A1 X - C1)`.
    pub fn predicted_common(&self, u: Vertex, v: Vertex) -> u64 {
        if u == v {
            return self.degree();
        }
        let r = &self.ring;
        let p = r.decode(r.sub_idx(u.a, v.a));
        let q = r.decode(r.sub_idx(u.c, v.c));
        let s = r.solve_matrix_equation(&p, &q).expect("decoded matrices belong to the ring");
        big_to_u64(&s.solution_count)
    }

    /// Number of edges `u -> v` with `u` in `from` and `v` in `to`.
    pub fn edge_count(&self, from: &VertexSet, to: &VertexSet) -> BigUint {
        let sources: Vec<u64> = from.iter_packed().collect();
        let total: u64 = sources
            .par_iter()
            .map(|&p| {
                let u = self.unpack(p);
                self.out_neighbors(u).filter(|&w| to.contains(w)).count() as u64
            })
            .sum();
        BigUint::from(total)
    }

    /// Strong connectivity by forward and backward breadth-first search
    /// from vertex 0.
    pub fn is_strongly_connected(&self, max_vertices: u64) -> Result<bool> {
        let n = self.vertex_count();
        if n > max_vertices {
            return Err(Error::Budget(format!("connectivity search over {n} vertices exceeds {max_vertices}")));
        }
        let reach = |forward: bool| {
            let mut seen = BitSet::new(n);
            let mut queue = VecDeque::from([0u64]);
            seen.insert(0);
            while let Some(p) = queue.pop_front() {
                let v = self.unpack(p);
                let next: Vec<Vertex> =
                    if forward { self.out_neighbors(v).collect() } else { self.in_neighbors(v).collect() };
                for w in next {
                    let wp = self.pack(w);
                    if seen.insert(wp) {
                        queue.push_back(wp);
                    }
                }
            }
            seen.len() == n
        };
        Ok(reach(true) && reach(false))
    }
}

pub(crate) fn big_to_u64(v: &BigUint) -> u64 {
    v.to_u64().expect("count fits in u64")
}
