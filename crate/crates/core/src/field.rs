//! Finite fields `F_q`, `q = p^k`, with table-backed arithmetic.
//!
//! Elements are dense indices in `[0, q)`. The index of
//! `c_0 + c_1 t + ... + c_{k-1} t^{k-1}` is `sum c_i p^i`, so for `k = 1` the
//! index is the residue itself.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest field order accepted unless [`FieldOptions::max_order`] says otherwise.
pub const DEFAULT_MAX_ORDER: u64 = 1 << 16;

/// Orders up to this size get a full addition table.
const ADD_TABLE_MAX: u32 = 256;

/// An element of some `F_q`, stored as its dense index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Felt(pub u32);

impl Felt {
    pub const ZERO: Felt = Felt(0);
    pub const ONE: Felt = Felt(1);

    #[inline]
    pub fn index(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Felt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldOptions {
    /// Permit `p = 2`. The constructions do not depend on odd `q`, but the
    /// theory does, so this is off by default.
    pub allow_even: bool,
    pub max_order: u64,
}

impl Default for FieldOptions {
    fn default() -> Self {
        FieldOptions { allow_even: false, max_order: DEFAULT_MAX_ORDER }
    }
}

/// An immutable description of `F_{p^k}` together with its lookup tables.
#[derive(Clone)]
pub struct FieldSpec {
    p: u32,
    k: u32,
    q: u32,
    /// Coefficients `c_0..=c_k` of the monic modulus; `[0, 1]` when `k = 1`.
    modulus: Vec<u32>,
    /// Base-`p` digits of every element, `k` per element.
    digits: Vec<u32>,
    add: Option<Vec<u32>>,
    neg: Vec<u32>,
    /// `exp[i] = g^i` for `i < 2(q-1)` so that log sums need no reduction.
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("p", &self.p)
            .field("k", &self.k)
            .field("q", &self.q)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k && self.modulus == other.modulus
    }
}

impl Eq for FieldSpec {}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` into `(p, k)` with `q = p^k`, if `q` is a prime power.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut k = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        k += 1;
    }
    (rest == 1).then_some((p as u32, k))
}

impl FieldSpec {
    pub fn new(p: u32, k: u32) -> Result<Self> {
        Self::with_options(p, k, FieldOptions::default())
    }

    /// Builds `F_q` from its order, which must be a prime power.
    pub fn from_order(q: u64, options: FieldOptions) -> Result<Self> {
        let (p, k) = prime_power(q).ok_or(Error::NotPrime(q))?;
        Self::with_options(p, k, options)
    }

    pub fn with_options(p: u32, k: u32, options: FieldOptions) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if p == 2 && !options.allow_even {
            return Err(Error::EvenCharacteristic);
        }
        if k < 1 {
            return Err(Error::ZeroDegree);
        }
        let order = (p as u64).checked_pow(k).unwrap_or(u64::MAX);
        if order > options.max_order || order > u32::MAX as u64 {
            return Err(Error::OrderTooLarge { order, cap: options.max_order });
        }
        let q = order as u32;
        let modulus = least_irreducible(p, k).ok_or(Error::NoIrreducible { p, k })?;

        let ku = k as usize;
        let mut digits = vec![0u32; q as usize * ku];
        for x in 0..q {
            let mut v = x;
            for i in 0..ku {
                digits[x as usize * ku + i] = v % p;
                v /= p;
            }
        }
        let encode = |ds: &[u32]| ds.iter().rev().fold(0u32, |acc, &d| acc * p + d);

        let neg = (0..q as usize)
            .map(|x| {
                let ds: Vec<u32> = digits[x * ku..(x + 1) * ku].iter().map(|&d| (p - d) % p).collect();
                encode(&ds)
            })
            .collect::<Vec<_>>();

        let add = (q <= ADD_TABLE_MAX).then(|| {
            let mut table = vec![0u32; (q * q) as usize];
            for a in 0..q as usize {
                for b in 0..q as usize {
                    let ds: Vec<u32> = (0..ku).map(|i| (digits[a * ku + i] + digits[b * ku + i]) % p).collect();
                    table[a * q as usize + b] = encode(&ds);
                }
            }
            table
        });

        // Multiplicative structure: find a generator by brute force.
        let poly_mul = |a: u32, b: u32| -> u32 {
            let da = &digits[a as usize * ku..(a as usize + 1) * ku];
            let db = &digits[b as usize * ku..(b as usize + 1) * ku];
            let prod = poly_mul_mod(da, db, &modulus, p);
            encode(&prod)
        };
        let mut exp = Vec::new();
        let mut log = vec![0u32; q as usize];
        for g in 1..q {
            let mut seen = vec![false; q as usize];
            let mut cur = 1u32;
            let mut powers = Vec::with_capacity(q as usize - 1);
            for _ in 0..q - 1 {
                if seen[cur as usize] {
                    break;
                }
                seen[cur as usize] = true;
                powers.push(cur);
                cur = poly_mul(cur, g);
            }
            if powers.len() == q as usize - 1 {
                exp = powers;
                break;
            }
        }
        debug_assert_eq!(exp.len(), q as usize - 1);
        for (i, &x) in exp.iter().enumerate() {
            log[x as usize] = i as u32;
        }
        let doubled: Vec<u32> = exp.iter().chain(exp.iter()).copied().collect();

        Ok(FieldSpec { p, k, q, modulus, digits, add, neg, exp: doubled, log })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Coefficients `c_0..=c_k` of the defining modulus.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// Validates a raw index as an element of this field.
    pub fn elem(&self, index: u64) -> Result<Felt> {
        if index < self.q as u64 {
            Ok(Felt(index as u32))
        } else {
            Err(Error::ElementOutOfRange { index, q: self.q })
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Felt> {
        (0..self.q).map(Felt)
    }

    /// Polynomial coefficients `c_0..c_{k-1}` of an element.
    pub fn coeffs(&self, a: Felt) -> &[u32] {
        let k = self.k as usize;
        &self.digits[a.0 as usize * k..(a.0 as usize + 1) * k]
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<Felt> {
        if coeffs.len() > self.k as usize || coeffs.iter().any(|&c| c >= self.p) {
            return Err(Error::Precondition(format!("{coeffs:?} is not a coefficient vector of F_{}", self.q)));
        }
        Ok(Felt(coeffs.iter().rev().fold(0u32, |acc, &d| acc * self.p + d)))
    }

    #[inline]
    pub fn add(&self, a: Felt, b: Felt) -> Felt {
        if self.k == 1 {
            let s = a.0 + b.0;
            return Felt(if s >= self.p { s - self.p } else { s });
        }
        match &self.add {
            Some(t) => Felt(t[(a.0 * self.q + b.0) as usize]),
            None => {
                let (p, k) = (self.p, self.k as usize);
                let (da, db) = (self.coeffs(a), self.coeffs(b));
                Felt((0..k).rev().fold(0u32, |acc, i| acc * p + (da[i] + db[i]) % p))
            }
        }
    }

    #[inline]
    pub fn neg(&self, a: Felt) -> Felt {
        Felt(self.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: Felt, b: Felt) -> Felt {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Felt, b: Felt) -> Felt {
        if a.0 == 0 || b.0 == 0 {
            return Felt::ZERO;
        }
        Felt(self.exp[(self.log[a.0 as usize] + self.log[b.0 as usize]) as usize])
    }

    pub fn inv(&self, a: Felt) -> Result<Felt> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        let order = self.q - 1;
        Ok(Felt(self.exp[((order - self.log[a.0 as usize]) % order) as usize]))
    }

    pub fn div(&self, a: Felt, b: Felt) -> Result<Felt> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^e` for any integer `e`; negative exponents need `a != 0`.
    pub fn pow(&self, a: Felt, e: i64) -> Result<Felt> {
        if e == 0 {
            return Ok(Felt::ONE);
        }
        if a.0 == 0 {
            return if e > 0 { Ok(Felt::ZERO) } else { Err(Error::DivisionByZero) };
        }
        let order = (self.q - 1) as i64;
        let l = self.log[a.0 as usize] as i64;
        let idx = (l * e.rem_euclid(order)).rem_euclid(order);
        Ok(Felt(self.exp[idx as usize]))
    }
}

/// `a * b mod modulus` over `F_p`, with `a`, `b` given as `k` coefficients.
fn poly_mul_mod(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let k = modulus.len() - 1;
    let mut prod = vec![0u64; 2 * k];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    for deg in (k..2 * k).rev() {
        let c = prod[deg];
        if c == 0 {
            continue;
        }
        // t^k = -(c_0 + ... + c_{k-1} t^{k-1})
        for (i, &m) in modulus[..k].iter().enumerate() {
            let sub = c * m as u64 % p as u64;
            let slot = &mut prod[deg - k + i];
            *slot = (*slot + p as u64 - sub) % p as u64;
        }
        prod[deg] = 0;
    }
    prod.truncate(k);
    prod.into_iter().map(|c| c as u32).collect()
}

/// Remainder of `a` modulo the monic `b`, coefficients low-to-high.
fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u64> = a.iter().map(|&c| c as u64).collect();
    let db = b.len() - 1;
    let p64 = p as u64;
    while r.len() > db {
        let lead = r[r.len() - 1] % p64;
        let shift = r.len() - 1 - db;
        if lead != 0 {
            for (i, &c) in b.iter().enumerate() {
                let slot = &mut r[shift + i];
                *slot = (*slot + p64 - lead * c as u64 % p64) % p64;
            }
        }
        r.pop();
    }
    r.into_iter().map(|c| c as u32).collect()
}

/// Decides irreducibility of a monic polynomial over `F_p` by trial division
/// with every monic polynomial of degree at most half its own.
pub fn is_irreducible(poly: &[u32], p: u32) -> Result<bool> {
    if !is_prime(p as u64) {
        return Err(Error::NotPrime(p as u64));
    }
    let poly: Vec<u32> = poly.iter().map(|&c| c % p).collect();
    if poly.len() < 2 || *poly.last().unwrap() != 1 {
        return Err(Error::NotMonic);
    }
    let deg = poly.len() - 1;
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for lower in 0..count {
            let mut divisor = Vec::with_capacity(d + 1);
            let mut v = lower;
            for _ in 0..d {
                divisor.push((v % p as u64) as u32);
                v /= p as u64;
            }
            divisor.push(1);
            if poly_rem(&poly, &divisor, p).iter().all(|&c| c == 0) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The least monic irreducible of degree `k`, ordering candidates by the
/// integer `sum c_i p^i` of their lower coefficients.
fn least_irreducible(p: u32, k: u32) -> Option<Vec<u32>> {
    if k == 1 {
        return Some(vec![0, 1]);
    }
    let count = (p as u64).checked_pow(k)?;
    (0..count).find_map(|lower| {
        let mut poly = Vec::with_capacity(k as usize + 1);
        let mut v = lower;
        for _ in 0..k {
            poly.push((v % p as u64) as u32);
            v /= p as u64;
        }
        poly.push(1);
        is_irreducible(&poly, p).ok()?.then_some(poly)
    })
}
