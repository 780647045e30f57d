//! The matrix ring `M_n(F_q)`.
//!
//! Every matrix has a canonical integer identity, its [`MatIndex`]: the
//! row-major entry indices read as base-`q` digits, entry `(0, 0)` least
//! significant. Sets of matrices are bitsets over that index space and
//! digraph vertices are pairs of indices.

mod enumerate;
mod set;

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Felt, FieldSpec};

pub use enumerate::Stratum;
pub use set::MatSet;

/// Rings with at most this many elements get full `+` and `*` index tables.
pub const TABLE_MAX: u64 = 2401;
/// Rings with at most this many elements cache determinant and rank per index.
pub const INVARIANT_CACHE_MAX: u64 = 1 << 22;
/// Default cap on `q^{n^2}`.
pub const DEFAULT_INDEX_CAP: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MatIndex(pub u32);

impl MatIndex {
    #[inline]
    pub fn get(self) -> u64 {
        self.0 as u64
    }
}

impl fmt::Display for MatIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An `n x n` matrix, entries row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    n: usize,
    entries: Vec<Felt>,
}

impl Mat {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Felt] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Felt {
        self.entries[row * self.n + col]
    }

    #[inline]
    fn set(&mut self, row: usize, col: usize, v: Felt) {
        self.entries[row * self.n + col] = v;
    }
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.n {
            if r > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for c in 0..self.n {
                if c > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self.get(r, c))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Outcome of solving `A X = C` for an unknown square `X`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solvability {
    pub solvable: bool,
    pub solution_count: BigUint,
    pub rank: usize,
}

struct Tables {
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
}

/// `M_n(F_q)` with lazily built lookup tables.
pub struct MatRing {
    field: Arc<FieldSpec>,
    n: usize,
    size: u64,
    tables: OnceLock<Option<Tables>>,
    dets: OnceLock<Option<Vec<u32>>>,
    ranks: OnceLock<Option<Vec<u8>>>,
}

impl fmt::Debug for MatRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatRing").field("n", &self.n).field("q", &self.field.q()).field("size", &self.size).finish()
    }
}

impl MatRing {
    pub fn new(field: Arc<FieldSpec>, n: usize) -> Result<Self> {
        Self::with_cap(field, n, DEFAULT_INDEX_CAP)
    }

    pub fn with_cap(field: Arc<FieldSpec>, n: usize, cap: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        let size = (field.q() as u128).checked_pow((n * n) as u32).unwrap_or(u128::MAX);
        if size > cap.min(DEFAULT_INDEX_CAP) as u128 {
            return Err(Error::IndexCapExceeded { size, cap });
        }
        Ok(MatRing {
            field,
            n,
            size: size as u64,
            tables: OnceLock::new(),
            dets: OnceLock::new(),
            ranks: OnceLock::new(),
        })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn field_arc(&self) -> &Arc<FieldSpec> {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u32 {
        self.field.q()
    }

    /// `q^{n^2}`, the number of matrices.
    pub fn size(&self) -> u64 {
        self.size
    }

    fn check(&self, a: &Mat) -> Result<()> {
        if a.n != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: a.n });
        }
        if a.entries.iter().any(|e| e.0 >= self.q()) {
            return Err(Error::FieldMismatch);
        }
        Ok(())
    }

    pub fn zero(&self) -> Mat {
        Mat { n: self.n, entries: vec![Felt::ZERO; self.n * self.n] }
    }

    pub fn identity(&self) -> Mat {
        self.diag(&vec![Felt::ONE; self.n]).expect("identity diagonal has length n")
    }

    pub fn diag(&self, d: &[Felt]) -> Result<Mat> {
        if d.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: d.len() });
        }
        let mut m = self.zero();
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        self.check(&m)?;
        Ok(m)
    }

    /// Builds a matrix from rows of raw element indices.
    pub fn from_rows<R: AsRef<[u32]>>(&self, rows: &[R]) -> Result<Mat> {
        if rows.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: rows.len() });
        }
        let mut entries = Vec::with_capacity(self.n * self.n);
        for r in rows {
            let r = r.as_ref();
            if r.len() != self.n {
                return Err(Error::DimensionMismatch { expected: self.n, found: r.len() });
            }
            for &v in r {
                entries.push(self.field.elem(v as u64)?);
            }
        }
        Ok(Mat { n: self.n, entries })
    }

    pub fn scalar(&self, s: Felt) -> Result<Mat> {
        self.diag(&vec![s; self.n])
    }

    pub fn add(&self, a: &Mat, b: &Mat) -> Result<Mat> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add_unchecked(a, b))
    }

    fn add_unchecked(&self, a: &Mat, b: &Mat) -> Mat {
        let f = &*self.field;
        Mat { n: self.n, entries: a.entries.iter().zip(&b.entries).map(|(&x, &y)| f.add(x, y)).collect() }
    }

    pub fn sub(&self, a: &Mat, b: &Mat) -> Result<Mat> {
        self.check(a)?;
        self.check(b)?;
        let f = &*self.field;
        Ok(Mat { n: self.n, entries: a.entries.iter().zip(&b.entries).map(|(&x, &y)| f.sub(x, y)).collect() })
    }

    pub fn neg(&self, a: &Mat) -> Result<Mat> {
        self.check(a)?;
        Ok(Mat { n: self.n, entries: a.entries.iter().map(|&x| self.field.neg(x)).collect() })
    }

    pub fn mul(&self, a: &Mat, b: &Mat) -> Result<Mat> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul_unchecked(a, b))
    }

    fn mul_unchecked(&self, a: &Mat, b: &Mat) -> Mat {
        let (n, f) = (self.n, &*self.field);
        let mut out = self.zero();
        for i in 0..n {
            for j in 0..n {
                let mut acc = Felt::ZERO;
                for k in 0..n {
                    acc = f.add(acc, f.mul(a.get(i, k), b.get(k, j)));
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    /// Row-reduces `rows` (`n` rows of width `width`) using only the first
    /// `pivot_cols` columns for pivots. The pivot in each column is the first
    /// nonzero entry at or below the current row. Returns the pivot count, the
    /// product of pivots and the sign of the row permutation.
    fn eliminate(&self, rows: &mut [Felt], width: usize, pivot_cols: usize, reduce_above: bool) -> (usize, Felt, bool) {
        let (n, f) = (self.n, &*self.field);
        let mut rank = 0;
        let mut pivot_product = Felt::ONE;
        let mut odd = false;
        for col in 0..pivot_cols {
            if rank == n {
                break;
            }
            let Some(pr) = (rank..n).find(|&r| !rows[r * width + col].is_zero()) else {
                continue;
            };
            if pr != rank {
                for c in 0..width {
                    rows.swap(pr * width + c, rank * width + c);
                }
                odd = !odd;
            }
            let pivot = rows[rank * width + col];
            pivot_product = f.mul(pivot_product, pivot);
            let pinv = f.inv(pivot).expect("pivot is nonzero");
            for c in 0..width {
                rows[rank * width + c] = f.mul(rows[rank * width + c], pinv);
            }
            for r in 0..n {
                if r == rank || (!reduce_above && r < rank) {
                    continue;
                }
                let factor = rows[r * width + col];
                if factor.is_zero() {
                    continue;
                }
                for c in 0..width {
                    let t = f.mul(factor, rows[rank * width + c]);
                    rows[r * width + c] = f.sub(rows[r * width + c], t);
                }
            }
            rank += 1;
        }
        (rank, pivot_product, odd)
    }

    /// Determinant by Gaussian elimination.
    pub fn det(&self, a: &Mat) -> Felt {
        let mut rows = a.entries.clone();
        let (rank, prod, odd) = self.eliminate(&mut rows, self.n, self.n, false);
        if rank < self.n {
            Felt::ZERO
        } else if odd {
            self.field.neg(prod)
        } else {
            prod
        }
    }

    pub fn rank(&self, a: &Mat) -> usize {
        let mut rows = a.entries.clone();
        self.eliminate(&mut rows, self.n, self.n, false).0
    }

    pub fn inverse(&self, a: &Mat) -> Result<Mat> {
        self.check(a)?;
        let n = self.n;
        let w = 2 * n;
        let mut rows = vec![Felt::ZERO; n * w];
        for r in 0..n {
            for c in 0..n {
                rows[r * w + c] = a.get(r, c);
            }
            rows[r * w + n + r] = Felt::ONE;
        }
        let (rank, _, _) = self.eliminate(&mut rows, w, n, true);
        if rank < n {
            return Err(Error::Singular);
        }
        let mut out = self.zero();
        for r in 0..n {
            for c in 0..n {
                out.set(r, c, rows[r * w + n + c]);
            }
        }
        Ok(out)
    }

    /// Decides `A X = C` and counts solutions `X in M_n(F_q)`.
    ///
    /// A consistent system has `q^{n(n - rank A)}` solutions: each of the `n`
    /// columns of `X` ranges over a coset of the `(n - rank A)`-dimensional
    /// kernel of `A`.
    pub fn solve_matrix_equation(&self, a: &Mat, c: &Mat) -> Result<Solvability> {
        self.check(a)?;
        self.check(c)?;
        let n = self.n;
        let w = 2 * n;
        let mut rows = vec![Felt::ZERO; n * w];
        for r in 0..n {
            for col in 0..n {
                rows[r * w + col] = a.get(r, col);
                rows[r * w + n + col] = c.get(r, col);
            }
        }
        let (rank, _, _) = self.eliminate(&mut rows, w, n, false);
        let solvable = (rank..n).all(|r| rows[r * w + n..(r + 1) * w].iter().all(|e| e.is_zero()));
        let solution_count =
            if solvable { BigUint::from(self.q()).pow((n * (n - rank)) as u32) } else { BigUint::ZERO };
        Ok(Solvability { solvable, solution_count, rank })
    }

    /// `diag(alpha^{-1}, 1, ..., 1)`: left-multiplying a determinant-`alpha`
    /// matrix by it lands in `SL_n`.
    pub fn l_scale(&self, alpha: Felt) -> Result<Mat> {
        if alpha.0 >= self.q() {
            return Err(Error::FieldMismatch);
        }
        let inv = self.field.inv(alpha).map_err(|_| Error::ZeroScale)?;
        let mut d = vec![Felt::ONE; self.n];
        d[0] = inv;
        self.diag(&d)
    }

    pub fn encode(&self, a: &Mat) -> Result<MatIndex> {
        self.check(a)?;
        Ok(self.encode_unchecked(a))
    }

    fn encode_unchecked(&self, a: &Mat) -> MatIndex {
        let q = self.q() as u64;
        MatIndex(a.entries.iter().rev().fold(0u64, |acc, e| acc * q + e.0 as u64) as u32)
    }

    pub fn decode(&self, i: MatIndex) -> Mat {
        let q = self.q() as u64;
        let mut v = i.get();
        let entries = (0..self.n * self.n)
            .map(|_| {
                let d = v % q;
                v /= q;
                Felt(d as u32)
            })
            .collect();
        Mat { n: self.n, entries }
    }

    /// Validates a raw index against `[0, q^{n^2})`.
    pub fn index(&self, raw: u64) -> Result<MatIndex> {
        if raw < self.size {
            Ok(MatIndex(raw as u32))
        } else {
            Err(Error::IndexOutOfRange { index: raw, size: self.size })
        }
    }

    pub fn decode_checked(&self, raw: u64) -> Result<Mat> {
        Ok(self.decode(self.index(raw)?))
    }

    pub fn all_indices(&self) -> impl Iterator<Item = MatIndex> + Clone {
        (0..self.size).map(|i| MatIndex(i as u32))
    }

    fn tables(&self) -> Option<&Tables> {
        self.tables
            .get_or_init(|| {
                (self.size <= TABLE_MAX).then(|| {
                    let s = self.size as usize;
                    let mats: Vec<Mat> = self.all_indices().map(|i| self.decode(i)).collect();
                    let mut add = vec![0u32; s * s];
                    let mut mul = vec![0u32; s * s];
                    add.par_chunks_mut(s).zip(mul.par_chunks_mut(s)).enumerate().for_each(|(a, (ra, rm))| {
                        for b in 0..s {
                            ra[b] = self.encode_unchecked(&self.add_unchecked(&mats[a], &mats[b])).0;
                            rm[b] = self.encode_unchecked(&self.mul_unchecked(&mats[a], &mats[b])).0;
                        }
                    });
                    let neg = mats
                        .iter()
                        .map(|m| {
                            let e = m.entries.iter().map(|&x| self.field.neg(x)).collect();
                            self.encode_unchecked(&Mat { n: self.n, entries: e }).0
                        })
                        .collect();
                    Tables { add, mul, neg }
                })
            })
            .as_ref()
    }

    /// Whether index arithmetic is table-backed.
    pub fn has_tables(&self) -> bool {
        self.tables().is_some()
    }

    #[inline]
    pub fn add_idx(&self, a: MatIndex, b: MatIndex) -> MatIndex {
        match self.tables() {
            Some(t) => MatIndex(t.add[a.0 as usize * self.size as usize + b.0 as usize]),
            None => self.encode_unchecked(&self.add_unchecked(&self.decode(a), &self.decode(b))),
        }
    }

    #[inline]
    pub fn mul_idx(&self, a: MatIndex, b: MatIndex) -> MatIndex {
        match self.tables() {
            Some(t) => MatIndex(t.mul[a.0 as usize * self.size as usize + b.0 as usize]),
            None => self.encode_unchecked(&self.mul_unchecked(&self.decode(a), &self.decode(b))),
        }
    }

    #[inline]
    pub fn neg_idx(&self, a: MatIndex) -> MatIndex {
        match self.tables() {
            Some(t) => MatIndex(t.neg[a.0 as usize]),
            None => {
                let m = self.decode(a);
                let e = m.entries.iter().map(|&x| self.field.neg(x)).collect();
                self.encode_unchecked(&Mat { n: self.n, entries: e })
            }
        }
    }

    #[inline]
    pub fn sub_idx(&self, a: MatIndex, b: MatIndex) -> MatIndex {
        self.add_idx(a, self.neg_idx(b))
    }

    /// Raw `(mul, add, neg)` tables for hot loops, when the ring is small
    /// enough to have them.
    pub fn raw_tables(&self) -> Option<(&[u32], &[u32], &[u32])> {
        self.tables().map(|t| (&t.mul[..], &t.add[..], &t.neg[..]))
    }

    pub fn det_idx(&self, a: MatIndex) -> Felt {
        let cached = self.dets.get_or_init(|| {
            (self.size <= INVARIANT_CACHE_MAX)
                .then(|| (0..self.size).into_par_iter().map(|i| self.det(&self.decode(MatIndex(i as u32))).0).collect())
        });
        match cached {
            Some(d) => Felt(d[a.0 as usize]),
            None => self.det(&self.decode(a)),
        }
    }

    pub fn rank_idx(&self, a: MatIndex) -> usize {
        let cached = self.ranks.get_or_init(|| {
            (self.size <= INVARIANT_CACHE_MAX).then(|| {
                (0..self.size).into_par_iter().map(|i| self.rank(&self.decode(MatIndex(i as u32))) as u8).collect()
            })
        });
        match cached {
            Some(r) => r[a.0 as usize] as usize,
            None => self.rank(&self.decode(a)),
        }
    }
}
