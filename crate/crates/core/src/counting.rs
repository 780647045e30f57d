//! Closed-form cardinalities of matrix strata, and the measured constants in
//! the rank-stratum and solvable-target bounds.
//!
//! Every count is an arbitrary-precision integer: `q^{n^2}` leaves `u64`
//! behind quickly. The constants hidden behind `<<` are never fixed here;
//! [`CountReport::ratio`] reports them exactly as `exact / bound`.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Felt;
use crate::matrix::{Mat, MatRing, Stratum};

pub type BigRatio = Ratio<BigUint>;

fn pow(q: u32, e: usize) -> BigUint {
    BigUint::from(q).pow(e as u32)
}

/// `prod_{i<k} (q^n - q^i)`: ordered `k`-tuples of independent vectors in `F_q^n`.
fn independent_tuples(n: usize, k: usize, q: u32) -> BigUint {
    let qn = pow(q, n);
    (0..k).map(|i| &qn - pow(q, i)).product()
}

/// Gaussian binomial `[n choose k]_q`, the number of `k`-dimensional
/// subspaces of `F_q^n`.
pub fn gaussian_binomial(n: usize, k: usize, q: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let num: BigUint = (0..k).map(|i| pow(q, n - i) - 1u32).product();
    let den: BigUint = (1..=k).map(|i| pow(q, i) - 1u32).product();
    num / den
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// `|M_n(F_q)| = q^{n^2}`.
pub fn count_all(n: usize, q: u32) -> BigUint {
    pow(q, n * n)
}

/// `|GL_n(F_q)| = prod_{i<n} (q^n - q^i)`.
pub fn count_gl(n: usize, q: u32) -> BigUint {
    independent_tuples(n, n, q)
}

pub fn count_singular(n: usize, q: u32) -> BigUint {
    count_all(n, q) - count_gl(n, q)
}

/// Matrices of determinant `alpha`: `|GL_n| / (q - 1)` for `alpha != 0`,
/// otherwise the singular count.
pub fn count_det_stratum(n: usize, q: u32, alpha: Felt) -> Result<BigUint> {
    if alpha.0 >= q {
        return Err(Error::StratumOutOfRange(format!("determinant {alpha} is not in F_{q}")));
    }
    Ok(if alpha.is_zero() { count_singular(n, q) } else { count_gl(n, q) / (q - 1) })
}

/// Exact number of rank-`m` matrices in `M_n(F_q)`: choose the column space
/// (`[n choose m]_q` ways) and then a surjection `F_q^n -> F_q^m` onto it.
pub fn count_rank(n: usize, m: usize, q: u32) -> Result<BigUint> {
    if m > n {
        return Err(Error::StratumOutOfRange(format!("rank {m} exceeds n = {n}")));
    }
    Ok(gaussian_binomial(n, m, q) * independent_tuples(n, m, q))
}

pub fn count_stratum(n: usize, q: u32, stratum: Stratum) -> Result<BigUint> {
    match stratum {
        Stratum::All => Ok(count_all(n, q)),
        Stratum::Gl => Ok(count_gl(n, q)),
        Stratum::Sl => count_det_stratum(n, q, Felt::ONE),
        Stratum::Rank(m) => count_rank(n, m, q),
        Stratum::Det(a) => count_det_stratum(n, q, a),
    }
}

/// Brute-force count by scanning the whole ring.
pub fn enumerated_count(ring: &MatRing, stratum: Stratum) -> Result<BigUint> {
    Ok(BigUint::from(ring.enumerate(stratum)?.count()))
}

/// An exact count set against a leading-order bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountReport {
    pub n: usize,
    pub q: u32,
    pub stratum: String,
    #[serde(serialize_with = "as_decimal")]
    pub exact: BigUint,
    #[serde(serialize_with = "as_decimal")]
    pub bound: BigUint,
    #[serde(serialize_with = "ratio_text")]
    pub ratio: BigRatio,
}

fn as_decimal<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn ratio_text<S: serde::Serializer>(v: &BigRatio, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&ratio_string(v))
}

/// `a/b` in lowest terms, or `a` when the denominator is one.
pub fn ratio_string(r: &BigRatio) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn ratio_to_f64(r: &BigRatio) -> f64 {
    use num_traits::ToPrimitive;
    let (a, b) = (r.numer().to_f64().unwrap_or(f64::INFINITY), r.denom().to_f64().unwrap_or(f64::INFINITY));
    a / b
}

impl CountReport {
    fn new(n: usize, q: u32, stratum: String, exact: BigUint, bound: BigUint) -> Self {
        let ratio = BigRatio::new(exact.clone(), bound.clone());
        CountReport { n, q, stratum, exact, bound, ratio }
    }

    pub fn csv_header() -> &'static str {
        "n,q,stratum,exact,bound,ratio"
    }

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{},{},{}", self.n, self.q, self.stratum, self.exact, self.bound, ratio_string(&self.ratio))
    }
}

/// `|R_m|` against `q^{2mn - m^2}`.
pub fn lemma43_ratio(n: usize, m: usize, q: u32) -> Result<CountReport> {
    let exact = count_rank(n, m, q)?;
    let bound = pow(q, 2 * m * n - m * m);
    Ok(CountReport::new(n, q, Stratum::Rank(m).to_string(), exact, bound))
}

/// One report row per stratum, each set against its leading-order term:
/// `q^{n^2}` for `ALL` and `GL`, `q^{n^2-1}` for `SINGULAR` and `DET(alpha)`,
/// and `q^{2mn-m^2}` for `RANK(m)`.
pub fn stratum_reports(n: usize, q: u32) -> Result<Vec<CountReport>> {
    let nn = n * n;
    let mut rows = vec![
        CountReport::new(n, q, "ALL".into(), count_all(n, q), pow(q, nn)),
        CountReport::new(n, q, "GL".into(), count_gl(n, q), pow(q, nn)),
        CountReport::new(n, q, "SINGULAR".into(), count_singular(n, q), pow(q, nn - 1)),
    ];
    for a in 0..q {
        let alpha = Felt(a);
        rows.push(CountReport::new(
            n,
            q,
            Stratum::Det(alpha).to_string(),
            count_det_stratum(n, q, alpha)?,
            pow(q, nn - 1),
        ));
    }
    for m in 0..=n {
        rows.push(lemma43_ratio(n, m, q)?);
    }
    Ok(rows)
}

/// Counted targets `C` of rank `k` for which `A X = C` is solvable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolvableTargets {
    /// `rank(A)`.
    pub m: usize,
    pub k: usize,
    pub count: BigUint,
    /// `q^{nk + mk - k^2}`.
    pub bound: BigUint,
    pub ratio: BigRatio,
    /// `binom(m, k) prod_{i<k}(q^n - q^i) q^{k(m-k)}`.
    pub column_bound: BigUint,
}

/// `N_C` by enumeration: every rank-`k` target is tested for solvability.
/// Targets of rank above `rank(A)` are never solvable, so that case is 0.
pub fn count_solvable_targets(ring: &MatRing, a: &Mat, k: usize) -> Result<SolvableTargets> {
    let (n, q) = (ring.n(), ring.q());
    if k > n {
        return Err(Error::StratumOutOfRange(format!("rank {k} exceeds n = {n}")));
    }
    let m = ring.rank(a);
    let mut count = 0u64;
    for c in ring.enumerate(Stratum::Rank(k))? {
        if ring.solve_matrix_equation(a, &ring.decode(c))?.solvable {
            count += 1;
        }
    }
    let count = BigUint::from(count);
    let exponent = (n * k + m * k) as i64 - (k * k) as i64;
    let bound = pow(q, exponent.max(0) as usize);
    let column_bound =
        if k <= m { binomial(m, k) * independent_tuples(n, k, q) * pow(q, k * (m - k)) } else { BigUint::zero() };
    let ratio = BigRatio::new(count.clone(), bound.clone());
    Ok(SolvableTargets { m, k, count, bound, ratio, column_bound })
}

/// Closed form for `N_C`: targets whose column space is a `k`-dimensional
/// subspace of the `m`-dimensional column space of `A`.
pub fn solvable_targets_closed_form(n: usize, m: usize, k: usize, q: u32) -> BigUint {
    if k > m {
        return BigUint::zero();
    }
    gaussian_binomial(m, k, q) * independent_tuples(n, k, q)
}
